import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from rldp import (
    Alphabet,
    DegenerateMarginalError,
    JointDistribution,
    SampleSet,
    chi2_statistic,
    draw_samples,
    empirical,
    sample_jeffreys,
)

from conftest import random_joint
from oracles import two_cell_boundary, two_cell_chi2


def test_alphabet_validation():
    with pytest.raises(ValueError):
        Alphabet(1, 5)
    with pytest.raises(ValueError):
        Alphabet(3, 1)
    with pytest.raises(ValueError):
        Alphabet(2, 2, u_values=(0.0, 0.0))
    with pytest.raises(ValueError):
        Alphabet(2, 3, u_values=(0.0, 1.0))
    a = Alphabet(3, 5)
    assert a.u_values == (0.0, 1.0, 2.0, 3.0, 4.0)
    assert a.y_size == 5 and a.n_cells == 15


def test_joint_distribution_validation(alphabet22):
    with pytest.raises(ValueError):
        JointDistribution(alphabet22, np.array([0.5, 0.5, 0.1, -0.1]))
    with pytest.raises(ValueError):
        JointDistribution(alphabet22, np.array([0.5, 0.5, 0.1, 0.0]))
    d = JointDistribution(alphabet22, np.array([[0.25, 0.25], [0.25, 0.25]]))
    assert d.p.shape == (2, 2)


def test_jeffreys_simplex_membership_and_determinism(alphabet35):
    a = sample_jeffreys(alphabet35, 123)
    b = sample_jeffreys(alphabet35, 123)
    c = sample_jeffreys(alphabet35, 124)
    assert np.array_equal(a.p, b.p)
    assert not np.array_equal(a.p, c.p)
    assert np.all(a.p > 0)
    assert abs(a.p.sum() - 1.0) < 1e-12


def test_jeffreys_moments(alphabet22):
    # Dirichlet(1/2) marginals are Beta(1/2, (k-1)/2); compare sample mean
    # and variance against the Beta moments at 3 standard errors.
    k = alphabet22.n_cells
    m = 100_000
    draws = np.empty((m, k))
    for i in range(m):
        draws[i] = sample_jeffreys(alphabet22, 1000 + i).p.reshape(-1)
    marginal = stats.beta(0.5, (k - 1) / 2.0)
    mean, var = marginal.mean(), marginal.var()
    kurt = marginal.stats(moments="k")
    se_mean = np.sqrt(var / m)
    assert np.all(np.abs(draws.mean(axis=0) - 1.0 / k) < 3 * se_mean)
    se_var = var * np.sqrt((float(kurt) + 2.0) / m)
    assert np.all(np.abs(draws.var(axis=0) - var) < 3 * se_var)


def test_draw_samples_deterministic_and_concentrated(alphabet22):
    point = np.zeros(4)
    point[2] = 1.0
    P = JointDistribution(alphabet22, point)
    s = draw_samples(P, 50, 7)
    assert s.n == 50
    assert s.counts.reshape(-1)[2] == 50
    t = draw_samples(P, 50, 7)
    assert np.array_equal(s.counts, t.counts)


def test_draw_samples_binomial_oracle(alphabet22):
    n = 1_000_000
    P = JointDistribution(alphabet22, np.full(4, 0.25))
    s = draw_samples(P, n, 99)
    freq = s.counts.reshape(-1) / n
    sigma = np.sqrt(0.25 * 0.75 / n)
    assert np.all(np.abs(freq - 0.25) < 5 * sigma)


def test_empirical_basic(alphabet22):
    s = SampleSet(alphabet22, np.array([[3, 1], [0, 0]]))
    e = empirical(s)
    assert np.allclose(e.p.reshape(-1), [0.75, 0.25, 0.0, 0.0], atol=0)
    spare = SampleSet(alphabet22, np.array([[0, 0], [5, 0]]))
    assert empirical(spare).p[1, 0] == 1.0


def test_empirical_convergence_total_variation(alphabet22):
    n = 1_000_000
    P = JointDistribution(alphabet22, np.full(4, 0.25))
    e = empirical(draw_samples(P, n, 4321))
    tv = 0.5 * float(np.abs(e.p - P.p).sum())
    assert tv <= 0.01, f"observed TV {tv}"


def test_marginals_and_conditionals(alphabet22):
    ps = np.array([0.3, 0.7])
    pu = np.array([0.6, 0.4])
    product = JointDistribution(alphabet22, np.outer(ps, pu))
    assert np.allclose(product.marginal_s(), ps, atol=1e-15)
    for s in range(2):
        assert np.allclose(product.conditional_given_s(s), pu, atol=1e-15)
    uniform = JointDistribution(alphabet22, np.full(4, 0.25))
    assert np.allclose(uniform.marginal_s(), [0.5, 0.5], atol=0)

    degenerate = JointDistribution(alphabet22, np.array([0.5, 0.5, 0.0, 0.0]))
    with pytest.raises(DegenerateMarginalError):
        degenerate.conditional_given_s(1)


@settings(max_examples=50, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_bayes_round_trip(seed):
    rng = np.random.default_rng(seed)
    P = random_joint(Alphabet(3, 4), rng, floor=1e-6)
    marg = P.marginal_s()
    for s in range(3):
        assert np.allclose(marg[s] * P.conditional_given_s(s), P.p[s], atol=1e-12)


def test_chi2_statistic_zero_iff_equal(alphabet22):
    rng = np.random.default_rng(5)
    P = random_joint(alphabet22, rng, floor=1e-3)
    assert chi2_statistic(P, P) == 0.0
    Q = random_joint(alphabet22, rng, floor=1e-3)
    assert chi2_statistic(P, Q) > 0.0


def test_chi2_statistic_two_cell_boundary(alphabet22):
    # Independent oracle: bisect (0.5 - p)^2 = 0.02 p (1 - p) for the
    # boundary cell value, then check the statistic value and the frozen
    # constant from the closed-form root.
    phat = JointDistribution(alphabet22, np.array([0.5, 0.5, 0.0, 0.0]))
    p0 = two_cell_boundary(0.5, 0.02, upper=True)
    assert abs(p0 - 0.570014) < 1e-6
    P = JointDistribution(alphabet22, np.array([p0, 1.0 - p0, 0.0, 0.0]))
    assert abs(chi2_statistic(phat, P) - 0.02) < 1e-4
    assert abs(two_cell_chi2(0.5, p0) - 0.02) < 1e-9


def test_chi2_statistic_nonnegative_and_infinite(alphabet22):
    rng = np.random.default_rng(11)
    for _ in range(1000):
        P = random_joint(alphabet22, rng)
        Q = random_joint(alphabet22, rng, floor=1e-9)
        assert chi2_statistic(P, Q) >= 0.0
    ref = JointDistribution(alphabet22, np.array([0.5, 0.5, 0.0, 0.0]))
    zeroed = JointDistribution(alphabet22, np.array([1.0, 0.0, 0.0, 0.0]))
    assert chi2_statistic(ref, zeroed) == np.inf
    # both-zero cells contribute nothing
    assert np.isfinite(chi2_statistic(ref, ref))


def test_json_round_trip(alphabet22):
    d = JointDistribution(alphabet22, np.array([0.1, 0.2, 0.3, 0.4]))
    doc = json.loads(d.to_json())
    assert set(doc) == {"s_size", "u_size", "p"}
    assert JointDistribution.from_json(d.to_json()).p.tolist() == d.p.tolist()
    s = SampleSet(alphabet22, np.array([[3, 1], [2, 4]]))
    doc = json.loads(s.to_json())
    assert set(doc) == {"s_size", "u_size", "p"}
    back = SampleSet.from_json(s.to_json())
    assert np.array_equal(back.counts, s.counts) and back.n == 10
