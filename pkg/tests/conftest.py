import numpy as np
import pytest

from rldp import Alphabet, JointDistribution, UncertaintySet


@pytest.fixture
def alphabet22():
    return Alphabet(2, 2)


@pytest.fixture
def alphabet35():
    return Alphabet(3, 5)


@pytest.fixture
def two_cell_ball(alphabet22):
    """A 2x2 set whose mass lives on two cells; the chi-square ball then
    coincides with the bare two-cell ball because any mass moved onto the
    padding cells only adds to the statistic."""
    phat = JointDistribution(alphabet22, np.array([0.5, 0.5, 0.0, 0.0]))
    return UncertaintySet(phat, 0.02)


def random_joint(alphabet, rng, floor=0.0):
    raw = rng.dirichlet(np.ones(alphabet.n_cells)) + floor
    return JointDistribution(alphabet, raw / raw.sum())
