"""Deployed-mechanism performance under a given joint distribution.

A mechanism is the release channel p(y | s, u). Its realized distortion is
the expected release distance under the evaluating distribution, and its
realized leakage is the largest log likelihood ratio between induced
channels of two sensitive values.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .simplex import Alphabet, DegenerateMarginalError, JointDistribution

ROW_TOL = 1e-9
ZERO_RATIO_TOL = 1e-12


@dataclass(frozen=True)
class Mechanism:
    """Release channel over (s, u) -> y, row-stochastic in y."""

    alphabet: Alphabet
    p: np.ndarray

    def __post_init__(self):
        shape = (self.alphabet.s_size, self.alphabet.u_size, self.alphabet.y_size)
        p = np.asarray(self.p, dtype=float).reshape(shape)
        if np.any(p < 0):
            raise ValueError("channel entries must be nonnegative")
        rows = p.sum(axis=2)
        if np.any(np.abs(rows - 1.0) > ROW_TOL):
            raise ValueError(f"rows must sum to 1 within {ROW_TOL}")
        p = p.copy()
        p.flags.writeable = False
        object.__setattr__(self, "p", p)

    def to_json(self) -> str:
        return json.dumps(
            {
                "s_size": self.alphabet.s_size,
                "u_size": self.alphabet.u_size,
                "y_size": self.alphabet.y_size,
                "p": [float(x) for x in self.p.reshape(-1)],
            }
        )

    @classmethod
    def from_json(cls, doc: str) -> "Mechanism":
        data = json.loads(doc)
        if int(data["y_size"]) != int(data["u_size"]):
            raise ValueError("release alphabet must equal the input alphabet")
        alphabet = Alphabet(int(data["s_size"]), int(data["u_size"]))
        return cls(alphabet, np.array(data["p"], dtype=float))


@dataclass(frozen=True)
class PerformanceReport:
    """Realized metrics of one solved instance."""

    variant: str
    d_star: float
    eps_star: float  # may be +inf
    pstar_in_F: bool
    objective: float

    def __post_init__(self):
        if self.d_star < 0:
            raise ValueError("distortion cannot be negative")
        if not (self.eps_star >= 0 or np.isinf(self.eps_star)):
            raise ValueError("leakage must be nonnegative or infinite")


def realized_distortion(P: JointDistribution, mech: Mechanism, d_table: np.ndarray) -> float:
    """Expected distortion sum_{s,u,y} P(s,u) p(y|s,u) d(u,y)."""
    return float(np.einsum("su,suy,uy->", P.p, mech.p, np.asarray(d_table, dtype=float)))


def induced_channel(P: JointDistribution, mech: Mechanism) -> np.ndarray:
    """The channel p(y | s) = sum_u P(u|s) p(y|s,u); rows over y sum to 1."""
    ns = P.alphabet.s_size
    marg = P.marginal_s()
    if np.any(marg <= 0.0):
        raise DegenerateMarginalError("all sensitive marginals must be positive")
    cond = P.p / marg[:, None]
    return np.einsum("su,suy->sy", cond, mech.p)


def realized_epsilon(P: JointDistribution, mech: Mechanism) -> float:
    """Realized leakage: log of the largest channel likelihood ratio.

    Ratios 0/0 count as 1; a zero denominator against a positive numerator
    makes the leakage infinite. Values below 1e-12 are treated as zero.
    """
    chan = induced_channel(P, mech)
    ns, ny = chan.shape
    worst = 1.0
    for s1 in range(ns):
        for s2 in range(ns):
            if s1 == s2:
                continue
            num = chan[s1]
            den = chan[s2]
            for y in range(ny):
                a = num[y] if num[y] > ZERO_RATIO_TOL else 0.0
                b = den[y] if den[y] > ZERO_RATIO_TOL else 0.0
                if b == 0.0:
                    if a > 0.0:
                        return float("inf")
                    continue  # 0/0 counts as ratio 1
                worst = max(worst, a / b)
    return float(np.log(worst))


def constant_mechanism(alphabet: Alphabet, y0: int) -> Mechanism:
    """Release the fixed symbol y0 regardless of the data."""
    if not 0 <= y0 < alphabet.y_size:
        raise ValueError("y0 outside the release alphabet")
    p = np.zeros((alphabet.s_size, alphabet.u_size, alphabet.y_size))
    p[:, :, y0] = 1.0
    return Mechanism(alphabet, p)


def identity_mechanism(alphabet: Alphabet) -> Mechanism:
    """Release the useful data unchanged."""
    p = np.zeros((alphabet.s_size, alphabet.u_size, alphabet.y_size))
    for u in range(alphabet.u_size):
        p[:, u, u] = 1.0
    return Mechanism(alphabet, p)
