"""Independent oracles used to validate closed forms and solver output.

Everything here deliberately avoids the code paths under test: quantiles
come from quadrature plus bisection, support values from boundary searches
and member sampling, and small-instance optima from exhaustive grids.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import integrate


def chi2_pdf(x: float, dof: int) -> float:
    if x <= 0:
        return 0.0
    k = dof / 2.0
    return x ** (k - 1.0) * math.exp(-x / 2.0) / (2.0**k * math.gamma(k))


def chi2_quantile_quadrature(dof: int, p: float, tol: float = 1e-11) -> float:
    """Bisection on the numerically integrated chi-square density."""
    lo, hi = 0.0, 1.0
    while integrate.quad(chi2_pdf, 0.0, hi, args=(dof,), limit=200)[0] < p:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        cdf = integrate.quad(chi2_pdf, 0.0, mid, args=(dof,), limit=200)[0]
        if cdf < p:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)


def two_cell_chi2(phat0: float, p0: float) -> float:
    p1 = 1.0 - p0
    phat1 = 1.0 - phat0
    if p0 <= 0.0 or p1 <= 0.0:
        return float("inf")
    return (phat0 - p0) ** 2 / p0 + (phat1 - p1) ** 2 / p1


def two_cell_boundary(phat0: float, radius: float, upper: bool = True) -> float:
    """Extreme first coordinate of the two-cell chi-square ball, by bisection."""
    lo = phat0
    hi = 1.0 if upper else 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if two_cell_chi2(phat0, mid) <= radius:
            lo = mid
        else:
            hi = mid
    return lo


def two_cell_support(phat0: float, radius: float, v0: float, v1: float) -> float:
    """Support of the two-cell ball at direction (v0, v1): linear objective
    over an interval, so the optimum sits at an interval endpoint."""
    hi = two_cell_boundary(phat0, radius, upper=True)
    lo = two_cell_boundary(phat0, radius, upper=False)
    cand = [v0 * p + v1 * (1.0 - p) for p in (lo, hi)]
    return max(cand)


def grid_sup_1d(fun, lo: float, hi: float, step: float) -> float:
    xs = np.arange(lo + step, hi + step / 2, step)
    return float(np.max(fun(xs)))


# ---------------------------------------------------------------------------
# Exhaustive 2x2x2 mechanism-grid oracle.
# ---------------------------------------------------------------------------

def _pair_h(k: np.ndarray, r: np.ndarray) -> np.ndarray:
    """sqrt(k0^2/r + k1^2/(1-r)) elementwise, with 0/0 terms dropped."""
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    for weight, denom in ((k[0], r), (k[1], 1.0 - r)):
        if weight > 0:
            with np.errstate(divide="ignore"):
                out = out + np.where(denom > 0, weight**2 / np.maximum(denom, 1e-300), np.inf)
        # zero weight contributes nothing even at denom == 0
    return np.sqrt(out)


def projected_pair_polygon(phat: np.ndarray, radius: float, s1: int, s2: int,
                           n_grid: int = 400) -> np.ndarray:
    """Boundary points (r1, r2) of the projected set for a 2-symbol u alphabet.

    r_i parametrizes R_i = (r_i, 1 - r_i). The membership functional is
    h1(r1) + h2(r2) <= C with h convex, so for each feasible r1 the feasible
    r2 values form an interval found by bisection.
    """
    k1 = phat[s1]
    k2 = phat[s2]
    marg = phat.sum(axis=1)
    C = math.sqrt(radius + 1.0) - 1.0 + marg[s1] + marg[s2]
    # Minimum of h over r sits at k0/(k0+k1) with value k0+k1.
    min2 = k2.sum()
    r1_star = k1[0] / max(k1.sum(), 1e-300)
    r2_star = k2[0] / max(k2.sum(), 1e-300)

    def r1_feasible(r):
        return _pair_h(k1, r) + min2 <= C + 1e-12

    def edge(fun_feasible, start, end):
        lo, hi = start, end
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if fun_feasible(np.array([mid]))[0]:
                lo = mid
            else:
                hi = mid
        return lo

    r1_lo = edge(r1_feasible, r1_star, 0.0)
    r1_hi = edge(r1_feasible, r1_star, 1.0)
    pts = []
    for r1 in np.linspace(r1_lo, r1_hi, n_grid):
        budget = C - float(_pair_h(k1, np.array([r1]))[0])
        if budget < min2:
            continue

        def r2_feasible(r):
            return _pair_h(k2, r) <= budget + 1e-12

        lo2 = edge(r2_feasible, r2_star, 0.0)
        hi2 = edge(r2_feasible, r2_star, 1.0)
        pts.append((r1, lo2))
        pts.append((r1, hi2))
    return np.array(pts)


def ball_boundary_points(phat_flat: np.ndarray, radius: float, count: int,
                         rng) -> np.ndarray:
    """Members of the chi-square ball on (or near) its boundary."""
    dim = phat_flat.size

    def stat(pts):
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = (phat_flat[None, :] - pts) ** 2 / pts
        terms = np.where((pts <= 0) & (phat_flat[None, :] == 0), 0.0, terms)
        terms = np.where((pts <= 0) & (phat_flat[None, :] > 0), np.inf, terms)
        return terms.sum(axis=1)

    targets = np.vstack([np.eye(dim), rng.dirichlet(np.ones(dim), size=count)])
    ok_at_one = stat(targets) <= radius
    lo = np.zeros(len(targets))
    hi = np.ones(len(targets))
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        pts = phat_flat[None, :] + mid[:, None] * (targets - phat_flat[None, :])
        ok = stat(pts) <= radius
        lo = np.where(ok, mid, lo)
        hi = np.where(ok, hi, mid)
    step = np.where(ok_at_one, 1.0, lo)
    pts = phat_flat[None, :] + step[:, None] * (targets - phat_flat[None, :])
    return np.vstack([phat_flat[None, :], pts])


def grid_mechanism_optimum(phat: np.ndarray, radius: float, epsilon: float,
                           robust: bool, step: float = 0.02, rng=None) -> float:
    """Exhaustive grid over 2x2x2 mechanisms, feasibility filtered.

    ``robust=False``: nominal privacy rows at the empirical conditionals,
    nominal expected distortion objective. ``robust=True``: privacy must
    hold on a dense polygon of each projected conditional-pair set, and the
    objective is the worst distortion over sampled ball members. All checks
    are primal evaluations; no dual reformulation is involved.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    grid = np.round(np.arange(0.0, 1.0 + step / 2, step), 10)
    g = len(grid)
    marg = phat.sum(axis=1)
    cond = phat / marg[:, None]
    scale = math.exp(epsilon)
    d_table = np.array([[0.0, 1.0], [1.0, 0.0]])  # squared distance on {0,1}
    triples = [(y, s1, s2) for y in (0, 1) for s1 in (0, 1) for s2 in (0, 1) if s1 != s2]

    if robust:
        polys = {}
        for y, s1, s2 in triples:
            if (s1, s2) not in polys:
                poly = projected_pair_polygon(phat, radius, s1, s2)
                # Thin to keep the inner maximization cheap; points remain
                # genuine members, so feasibility stays a sound filter.
                if len(poly) > 160:
                    poly = poly[:: len(poly) // 160 + 1]
                polys[(s1, s2)] = poly
        ball = ball_boundary_points(phat.reshape(-1), radius, 400, rng)
        ball = ball[:: max(len(ball) // 300, 1)]

    best = math.inf
    # Mechanism free parameters: a[s,u] = p(y=0 | s, u).
    a11, a01 = np.meshgrid(grid, grid, indexing="ij")  # over (s=1,u=1), (s=0,u=1)
    a11 = a11.reshape(-1)
    a01 = a01.reshape(-1)
    for a00 in grid:
        for a10 in grid:
            p0 = {(0, 0): np.full_like(a01, a00), (0, 1): a01,
                  (1, 0): np.full_like(a01, a10), (1, 1): a11}
            feasible = np.ones(a01.shape, dtype=bool)
            for y, s1, s2 in triples:
                chan1 = {(s, u): (p0[(s, u)] if y == 0 else 1.0 - p0[(s, u)])
                         for s in (0, 1) for u in (0, 1)}
                if robust:
                    poly = polys[(s1, s2)]
                    A = chan1[(s1, 0)] - chan1[(s1, 1)]
                    Bc = -scale * (chan1[(s2, 0)] - chan1[(s2, 1)])
                    const = chan1[(s1, 1)] - scale * chan1[(s2, 1)]
                    worst = (A[:, None] * poly[None, :, 0]
                             + Bc[:, None] * poly[None, :, 1]).max(axis=1) + const
                    feasible &= worst <= 1e-9
                else:
                    gap = (cond[s1, 0] * chan1[(s1, 0)] + cond[s1, 1] * chan1[(s1, 1)]
                           - scale * (cond[s2, 0] * chan1[(s2, 0)]
                                      + cond[s2, 1] * chan1[(s2, 1)]))
                    feasible &= gap <= 1e-9
                if not feasible.any():
                    break
            if not feasible.any():
                continue
            # Per-cell expected distortion given (s, u): v[s,u].
            v = {su: p0[su] * d_table[su[1], 0] + (1.0 - p0[su]) * d_table[su[1], 1]
                 for su in p0}
            if robust:
                vmat = np.stack([v[(0, 0)], v[(0, 1)], v[(1, 0)], v[(1, 1)]], axis=1)
                obj = (vmat[feasible] @ ball.T).max(axis=1)
            else:
                obj = sum(phat[su] * v[su][feasible] for su in p0)
            if len(obj):
                best = min(best, float(obj.min()))
    return best
