"""Chi-square confidence sets around an empirical joint distribution.

The uncertainty set is the (1 - alpha) acceptance region of the chi-square
goodness-of-fit test: all joint tables P with
sum((phat - P)^2 / P) <= B, where B is the scaled chi-square quantile.
Also provided: the exact image of that ball under conditioning on two
sensitive values, and the constructive embedding of a conditional pair back
into the full ball.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaincinv

from .simplex import SIMPLEX_TOL, Alphabet, JointDistribution, chi2_statistic

MEMBERSHIP_TOL = 1e-9


class LiftingInfeasibleError(ValueError):
    """The conditional pair lies outside the projected set."""


def chi2_inv_cdf(dof: int, p: float) -> float:
    """Quantile of the chi-square distribution with ``dof`` degrees of freedom.

    Computed through the inverse regularized lower incomplete gamma function;
    accurate to well below 1e-9 in absolute CDF terms.
    """
    if dof < 1 or int(dof) != dof:
        raise ValueError("dof must be a positive integer")
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie strictly between 0 and 1")
    return float(2.0 * gammaincinv(dof / 2.0, p))


def confidence_radius(n: int, alpha: float, alphabet: Alphabet) -> float:
    """Ball radius for a (1 - alpha) chi-square confidence set on n samples."""
    if n < 1:
        raise ValueError("n must be >= 1")
    dof = alphabet.n_cells - 1
    return chi2_inv_cdf(dof, 1.0 - alpha) / n


@dataclass(frozen=True)
class UncertaintySet:
    """Chi-square ball of radius ``radius`` around the empirical table."""

    center: JointDistribution
    radius: float
    alpha: float = float("nan")
    n: int = 0

    def __post_init__(self):
        if self.radius < 0.0:
            raise ValueError("radius must be nonnegative")

    @classmethod
    def from_samples(cls, center: JointDistribution, n: int, alpha: float) -> "UncertaintySet":
        return cls(center, confidence_radius(n, alpha, center.alphabet), alpha, n)

    def contains(self, P: JointDistribution) -> bool:
        """Membership: on the simplex and within the chi-square budget."""
        return chi2_statistic(self.center, P) <= self.radius + MEMBERSHIP_TOL

    def project(self, s1: int, s2: int) -> "ProjectedUncertaintySet":
        return ProjectedUncertaintySet(self, s1, s2)


@dataclass(frozen=True)
class ProjectedUncertaintySet:
    """Image of the ball under P -> (P_{U|s1}, P_{U|s2}).

    A pair of conditionals (R1, R2) belongs to the image exactly when

        sum_i sqrt(sum_u phat[s_i, u]^2 / R_i[u]) <= C,
        C = sqrt(B + 1) - 1 + phat_s1 + phat_s2.
    """

    parent: UncertaintySet
    s1: int
    s2: int

    def __post_init__(self):
        if self.s1 == self.s2:
            raise ValueError("s1 and s2 must differ")
        for s in (self.s1, self.s2):
            if not 0 <= s < self.parent.center.alphabet.s_size:
                raise ValueError(f"s index {s} out of range")

    @property
    def rhs_constant(self) -> float:
        phat = self.parent.center
        marg = phat.marginal_s()
        return float(np.sqrt(self.parent.radius + 1.0) - 1.0 + marg[self.s1] + marg[self.s2])

    def lhs(self, R1: np.ndarray, R2: np.ndarray) -> float:
        """The membership functional sum_i sqrt(sum_u phat[s_i,u]^2 / R_i[u])."""
        phat = self.parent.center.p
        total = 0.0
        for s, R in ((self.s1, R1), (self.s2, R2)):
            total += _sqrt_weighted_inverse_sum(phat[s], np.asarray(R, dtype=float))
        return total

    def contains(self, R1: np.ndarray, R2: np.ndarray) -> bool:
        for R in (R1, R2):
            R = np.asarray(R, dtype=float)
            if np.any(R < -SIMPLEX_TOL) or abs(R.sum() - 1.0) > 1e-9:
                return False
        return self.lhs(R1, R2) <= self.rhs_constant + MEMBERSHIP_TOL

    def lift(self, R1: np.ndarray, R2: np.ndarray) -> JointDistribution:
        """Embed a member pair back into the full ball.

        Builds the joint table whose s1/s2 rows are R1/R2 scaled by
        kappa_i / kappa_sum and whose remaining rows copy the center scaled by
        1 / kappa_sum, with kappa_i = sqrt(sum_u phat[s_i,u]^2 / R_i[u]) and
        kappa_3 = 1 - phat_s1 - phat_s2. The result lies in the ball and its
        conditionals at s1, s2 reproduce (R1, R2).
        """
        if not self.contains(R1, R2):
            raise LiftingInfeasibleError("pair is outside the projected set")
        phat = self.parent.center.p
        R1 = np.asarray(R1, dtype=float)
        R2 = np.asarray(R2, dtype=float)
        marg = self.parent.center.marginal_s()
        k1 = _sqrt_weighted_inverse_sum(phat[self.s1], R1)
        k2 = _sqrt_weighted_inverse_sum(phat[self.s2], R2)
        k3 = 1.0 - marg[self.s1] - marg[self.s2]
        ktot = k1 + k2 + k3
        out = phat.copy() / ktot
        out[self.s1] = k1 * R1 / ktot
        out[self.s2] = k2 * R2 / ktot
        # Round-off can leave the total a few ulps from one.
        out /= out.sum()
        return JointDistribution(self.parent.center.alphabet, out)


def _sqrt_weighted_inverse_sum(weights: np.ndarray, R: np.ndarray) -> float:
    """sqrt(sum_u weights[u]^2 / R[u]) with 0/0 terms resolved to 0."""
    w2 = weights**2
    active = w2 > 0.0
    if np.any(active & (R <= 0.0)):
        return float("inf")
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(active, w2 / np.where(R > 0.0, R, 1.0), 0.0)
    return float(np.sqrt(terms.sum()))
