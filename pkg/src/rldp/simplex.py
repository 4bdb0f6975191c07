"""Finite-alphabet probability objects.

Joint distributions over a sensitive alphabet S and a useful alphabet U,
their marginals and conditionals, the chi-square goodness-of-fit statistic,
and seeded sampling (Jeffreys prior draws, categorical datasets, empirical
estimates).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

SIMPLEX_TOL = 1e-12


class DegenerateMarginalError(ValueError):
    """Conditioning on a sensitive value with zero marginal probability."""


@dataclass(frozen=True)
class Alphabet:
    """Sizes and numeric values of the alphabets.

    The release alphabet equals the useful-data alphabet, so ``u_values``
    doubles as the value grid for released symbols.
    """

    s_size: int
    u_size: int
    u_values: tuple[float, ...] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.s_size < 2 or self.u_size < 2:
            raise ValueError("alphabets need at least two symbols each")
        if self.u_values is None:
            object.__setattr__(self, "u_values", tuple(float(u) for u in range(self.u_size)))
        else:
            vals = tuple(float(v) for v in self.u_values)
            if len(vals) != self.u_size:
                raise ValueError("u_values length must equal u_size")
            if len(set(vals)) != len(vals):
                raise ValueError("u_values must be distinct")
            object.__setattr__(self, "u_values", vals)

    @property
    def y_size(self) -> int:
        return self.u_size

    @property
    def n_cells(self) -> int:
        return self.s_size * self.u_size


@dataclass(frozen=True)
class JointDistribution:
    """A probability table over S x U, stored row-major (s, u)."""

    alphabet: Alphabet
    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float).reshape(self.alphabet.s_size, self.alphabet.u_size)
        if np.any(p < 0):
            raise ValueError("probabilities must be nonnegative")
        if abs(p.sum() - 1.0) > SIMPLEX_TOL:
            raise ValueError(f"cells must sum to 1 within {SIMPLEX_TOL}, got {p.sum()!r}")
        p = p.copy()
        p.flags.writeable = False
        object.__setattr__(self, "p", p)

    def marginal_s(self) -> np.ndarray:
        """Marginal over the sensitive alphabet."""
        return self.p.sum(axis=1)

    def conditional_given_s(self, s: int) -> np.ndarray:
        """Distribution of U given S = s; requires a positive marginal."""
        row = self.p[s]
        mass = row.sum()
        if mass <= 0.0:
            raise DegenerateMarginalError(f"marginal of s={s} is zero; conditional undefined")
        return row / mass

    def to_json(self) -> str:
        return json.dumps(
            {
                "s_size": self.alphabet.s_size,
                "u_size": self.alphabet.u_size,
                "p": [float(x) for x in self.p.reshape(-1)],
            }
        )

    @classmethod
    def from_json(cls, doc: str) -> "JointDistribution":
        data = json.loads(doc)
        alphabet = Alphabet(int(data["s_size"]), int(data["u_size"]))
        return cls(alphabet, np.array(data["p"], dtype=float))


@dataclass(frozen=True)
class SampleSet:
    """Integer counts of an i.i.d. categorical dataset over S x U."""

    alphabet: Alphabet
    counts: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.counts, dtype=np.int64).reshape(
            self.alphabet.s_size, self.alphabet.u_size
        )
        if np.any(c < 0):
            raise ValueError("counts must be nonnegative")
        if c.sum() < 1:
            raise ValueError("need at least one sample")
        c = c.copy()
        c.flags.writeable = False
        object.__setattr__(self, "counts", c)

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    def to_json(self) -> str:
        return json.dumps(
            {
                "s_size": self.alphabet.s_size,
                "u_size": self.alphabet.u_size,
                "p": [int(x) for x in self.counts.reshape(-1)],
            }
        )

    @classmethod
    def from_json(cls, doc: str) -> "SampleSet":
        data = json.loads(doc)
        alphabet = Alphabet(int(data["s_size"]), int(data["u_size"]))
        return cls(alphabet, np.array(data["p"], dtype=np.int64))


def sample_jeffreys(alphabet: Alphabet, rng_seed) -> JointDistribution:
    """Draw a joint distribution from the Jeffreys prior on the simplex.

    The Jeffreys prior over a finite simplex is the symmetric Dirichlet(1/2)
    distribution; it is realized here as independent Gamma(1/2, 1) draws
    normalized to total mass one, which is reproducible for a fixed seed.
    """
    rng = np.random.default_rng(rng_seed)
    g = rng.standard_gamma(0.5, size=alphabet.n_cells)
    total = g.sum()
    if total <= 0.0:  # astronomically unlikely underflow
        g[:] = 1.0
        total = float(alphabet.n_cells)
    return JointDistribution(alphabet, g / total)


def draw_samples(P: JointDistribution, n: int, rng_seed) -> SampleSet:
    """Draw the cell counts of n i.i.d. samples from P."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(rng_seed)
    flat = P.p.reshape(-1)
    # Guard against float round-off in the simplex sum.
    counts = rng.multinomial(n, flat / flat.sum())
    return SampleSet(P.alphabet, counts.reshape(P.p.shape))


def empirical(sample: SampleSet) -> JointDistribution:
    """Empirical distribution counts/n."""
    c = sample.counts.astype(float)
    return JointDistribution(sample.alphabet, c / c.sum())


def chi2_statistic(phat: JointDistribution, P: JointDistribution) -> float:
    """Pearson-style divergence sum((phat - p)^2 / p) with the candidate in
    the denominator.

    Cells where both tables vanish contribute zero; a zero candidate cell
    under a nonzero reference makes the statistic +inf.
    """
    if phat.alphabet.s_size != P.alphabet.s_size or phat.alphabet.u_size != P.alphabet.u_size:
        raise ValueError("distributions must share an alphabet")
    a = phat.p.reshape(-1)
    b = P.p.reshape(-1)
    zero = b <= 0.0
    if np.any(zero & (np.abs(a - b) > 0.0)):
        return float("inf")
    diff2 = (a - b) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(zero, 0.0, diff2 / np.where(zero, 1.0, b))
    return float(terms.sum())
