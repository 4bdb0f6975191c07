"""Support functions of the confidence sets and their closed-form duals.

The robust constraints in this package all reduce to statements
"support function of an uncertainty set, evaluated at an affine direction,
is at most some level". The support functions admit exact minimization
duals built from two scalar Fenchel conjugates:

* ``conjugate_scaled_inv``: the conjugate of x -> k^2 / x on x > 0,
  which is -2 sqrt(-z) k for z <= 0 and +inf otherwise.
* ``conjugate_sqrt_sum_inv``: the conjugate of x -> sqrt(sum_i k_i^2/x_i),
  which is -(2^(-2/3) + 2^(1/3)) * (sum_i k_i sqrt(-v_i))^(2/3) when
  max(v) <= 0 and +inf otherwise.

Both dual expressions are representable with rotated quadratic cones, so
the inner minimizations reuse the same program builder that the full
mechanism-synthesis problems use. Brute-force samplers provide independent
lower-bound oracles for testing the closed forms.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .conic import LinExpr, ProgramBuilder, SolverConfig, solve
from .simplex import JointDistribution
from .uncertainty import ProjectedUncertaintySet, UncertaintySet

# Computed at import time to full double precision.
DUAL_CONSTANT = 2.0 ** (-2.0 / 3.0) + 2.0 ** (1.0 / 3.0)

_SQRT2 = float(np.sqrt(2.0))


def conjugate_scaled_inv(weight: float, z: float) -> float:
    """Fenchel conjugate of x -> weight^2 / x on x > 0, at z."""
    if z > 0.0:
        return float("inf")
    return -2.0 * np.sqrt(-z) * weight


def conjugate_sqrt_sum_inv(kappa, v) -> float:
    """Fenchel conjugate of x -> sqrt(sum_i kappa_i^2 / x_i) on x > 0, at v.

    Requires strictly positive weights. Unbounded (+inf) as soon as any
    direction component is positive.
    """
    kappa = np.asarray(kappa, dtype=float)
    v = np.asarray(v, dtype=float)
    if kappa.shape != v.shape:
        raise ValueError("kappa and v must have matching length")
    if np.any(kappa <= 0.0):
        raise ValueError("weights must be strictly positive")
    if np.max(v) > 0.0:
        return float("inf")
    lam = float(np.sum(kappa * np.sqrt(-v)))
    return -DUAL_CONSTANT * lam ** (2.0 / 3.0)


def support_simplex(w) -> float:
    """Support function of the probability simplex: the largest component."""
    return float(np.max(np.asarray(w, dtype=float)))


@dataclass
class InnerMinimizer:
    """Certifying dual point for a support-function evaluation."""

    w: tuple[np.ndarray, ...]
    c: float
    achieved_value: float


@dataclass(frozen=True)
class SupportQuery:
    """A direction paired with the set it is evaluated against."""

    direction: tuple[np.ndarray, ...]
    set_descriptor: object


# ---------------------------------------------------------------------------
# Dual epigraph builders. Both append, to an existing program, variables and
# cones whose feasible points dominate the support value, and return the
# affine expression of that upper bound. Minimizing the expression (or
# constraining it) recovers the exact support value because the dual
# minimum equals the primal supremum for these sets.
# ---------------------------------------------------------------------------

def add_ball_support_epigraph(builder: ProgramBuilder, phat: np.ndarray, radius: float,
                              v_exprs, prefix: str) -> LinExpr:
    """Dual upper bound for the chi-square ball around ``phat``.

    Encodes  -2 sqrt(c) sum(phat * sqrt(w - v)) + max(w) + c (B + 1)
    through variables (c, w, t, m) with rotated cones t^2 <= c (w - v):

        delta = w - v  >= 0,   t^2 <= 2 * (c/2) * delta,   m >= w.

    ``v_exprs`` is a flat list of affine expressions, one per (s, u) cell.
    """
    phat_flat = np.asarray(phat, dtype=float).reshape(-1)
    if len(v_exprs) != phat_flat.size:
        raise ValueError("one direction expression per cell required")
    if radius == 0.0:
        # Singleton set: the dual minimum is an unattained infimum, but the
        # support degenerates to the exact linear value at the center.
        bound = LinExpr()
        for cell, v in enumerate(v_exprs):
            weight = phat_flat[cell]
            if weight != 0.0:
                for var, coef in v.terms.items():
                    bound.add(var, coef * weight)
                bound.add_const(v.const * weight)
        return bound
    c = builder.new_var(prefix + "c", nonneg=True)
    m = builder.new_var(prefix + "m")
    bound = LinExpr().add(m, 1.0).add(c, radius + 1.0)
    hc = builder.new_var(prefix + "hc")
    builder.add_eq(LinExpr().add(hc, 1.0).add(c, -0.5), prefix + "hc")
    for cell, v in enumerate(v_exprs):
        if phat_flat[cell] == 0.0:
            # Zero-weight cells never enter the weighted sum, so the optimal
            # w sits at v itself; only the max term remains binding. Keeping
            # the full variable set here would leave a degenerate flat face.
            gap = LinExpr().add(m, 1.0)
            for var, coef in v.terms.items():
                gap.add(var, -coef)
            gap.add_const(-v.const)
            builder.add_ge0(gap, f"{prefix}m>=v[{cell}]")
            continue
        w = builder.new_var(f"{prefix}w[{cell}]")
        delta = builder.new_var(f"{prefix}delta[{cell}]")
        t = builder.new_var(f"{prefix}t[{cell}]")
        row = LinExpr().add(delta, 1.0).add(w, -1.0)
        for var, coef in v.terms.items():
            row.add(var, coef)
        row.add_const(v.const)
        builder.add_eq(row, f"{prefix}delta[{cell}]")
        builder.add_ge0(LinExpr().add(m, 1.0).add(w, -1.0), f"{prefix}m>=w[{cell}]")
        builder.add_rotated_cone(hc, delta, t)
        bound.add(t, -2.0 * phat_flat[cell])
    return bound


def add_pair_support_epigraph(builder: ProgramBuilder, pset: ProjectedUncertaintySet,
                              v1_exprs, v2_exprs, prefix: str) -> LinExpr:
    """Dual upper bound for the projected set of conditional pairs.

    Encodes, over (c, w_i, m_i) and per-group auxiliaries,

        -(2^(-2/3) + 2^(1/3)) c^(2/3) sum_i rho_i^(2/3)
            + sum_i max(w_i) + c C,
        rho_i = sum_u phat[s_i, u] sqrt(w_i(u) - v_i(u)),

    using only rotated quadratic cones: the square rho_i^2 expands into
    delta terms plus pairwise geometric means gamma, which bound a variable
    G_i; the chain z_i^2 <= G_i q_i, q_i^2 <= c z_i then yields
    q_i^3 <= c^2 G_i, i.e. q_i <= c^(2/3) G_i^(1/3).
    """
    phat = pset.parent.center.p
    C = pset.rhs_constant
    nu = phat.shape[1]
    groups = ((pset.s1, v1_exprs), (pset.s2, v2_exprs))
    if any(len(v) != nu for _, v in groups):
        raise ValueError("one direction expression per u symbol required")
    if pset.parent.radius == 0.0:
        # Singleton pair: support is the linear value at the conditionals.
        bound = LinExpr()
        for s, v_exprs in groups:
            cond = pset.parent.center.conditional_given_s(s)
            for u, v in enumerate(v_exprs):
                for var, coef in v.terms.items():
                    bound.add(var, coef * cond[u])
                bound.add_const(v.const * cond[u])
        return bound
    c = builder.new_var(prefix + "c", nonneg=True)
    bound = LinExpr().add(c, C)
    hc = builder.new_var(prefix + "hc")
    builder.add_eq(LinExpr().add(hc, 1.0).add(c, -0.5), prefix + "hc")
    for i, (s, v_exprs) in enumerate(groups, start=1):
        kap = phat[s]
        active = [u for u in range(nu) if kap[u] > 0.0]
        m = builder.new_var(f"{prefix}m{i}")
        bound.add(m, 1.0)
        deltas = {}
        for u, v in enumerate(v_exprs):
            if u not in active:
                # Zero-weight symbols only constrain the max term; dropping
                # their w avoids a degenerate flat face (w = v is optimal).
                gap = LinExpr().add(m, 1.0)
                for var, coef in v.terms.items():
                    gap.add(var, -coef)
                gap.add_const(-v.const)
                builder.add_ge0(gap, f"{prefix}m{i}>=v[{u}]")
                continue
            w = builder.new_var(f"{prefix}w{i}[{u}]")
            delta = builder.new_var(f"{prefix}delta{i}[{u}]",
                                    nonneg=len(active) == 1)
            row = LinExpr().add(delta, 1.0).add(w, -1.0)
            for var, coef in v.terms.items():
                row.add(var, coef)
            row.add_const(v.const)
            builder.add_eq(row, f"{prefix}delta{i}[{u}]")
            builder.add_ge0(LinExpr().add(m, 1.0).add(w, -1.0), f"{prefix}m{i}>=w[{u}]")
            deltas[u] = delta
        if not active:
            continue  # no weighted sum for this group, only the max term
        G = builder.new_var(f"{prefix}G{i}")
        hG = builder.new_var(f"{prefix}hG{i}")
        builder.add_eq(LinExpr().add(hG, 1.0).add(G, -0.5), f"{prefix}hG{i}")
        # G_i <= rho_i^2 via the expansion of the squared weighted sum:
        # rho^2 = sum kap_u^2 delta_u + 2 sum_{u<u'} kap_u kap_u' sqrt(delta_u delta_u').
        gexpr = LinExpr().add(G, -1.0)
        for u in active:
            gexpr.add(deltas[u], float(kap[u] ** 2))
        for ai, u in enumerate(active):
            for u2 in active[ai + 1:]:
                gamma = builder.new_var(f"{prefix}gamma{i}[{u},{u2}]", nonneg=True)
                builder.add_rotated_cone(deltas[u], deltas[u2], gamma)
                # gamma^2 <= 2 delta_u delta_u2, so the exact coefficient on
                # gamma is sqrt(2) kap_u kap_u2.
                gexpr.add(gamma, _SQRT2 * float(kap[u] * kap[u2]))
        builder.add_ge0(gexpr, f"{prefix}G{i}")
        z = builder.new_var(f"{prefix}z{i}")
        q = builder.new_var(f"{prefix}q{i}")
        builder.add_rotated_cone(hG, q, z)  # z^2 <= G q
        builder.add_rotated_cone(hc, z, q)  # q^2 <= c z
        bound.add(q, -DUAL_CONSTANT)
    return bound


def _const_exprs(values) -> list[LinExpr]:
    return [LinExpr(const=float(x)) for x in np.asarray(values, dtype=float).reshape(-1)]


def _certificate_w(program, x, stem: str, v: np.ndarray) -> np.ndarray:
    """Dual w from the solution; entries the builder eliminated sit at v."""
    out = v.astype(float).copy()
    for i in range(out.size):
        try:
            out[i] = x[program.index_of(f"{stem}[{i}]")]
        except KeyError:
            pass
    return out


def support_joint(F: UncertaintySet, v, tol: float = 1e-8,
                  config: SolverConfig | None = None) -> tuple[float, InnerMinimizer]:
    """Exact support function sup {v . P : P in the ball} with certificate."""
    v = np.asarray(v, dtype=float).reshape(-1)
    ncells = F.center.alphabet.n_cells
    if v.size != ncells:
        raise ValueError("direction length must match the number of cells")
    if F.radius == 0.0:
        value = float(v @ F.center.p.reshape(-1))
        return value, InnerMinimizer((v.copy(),), 0.0, value)
    builder = ProgramBuilder()
    bound = add_ball_support_epigraph(builder, F.center.p, F.radius, _const_exprs(v), "sup.")
    builder.set_objective(bound)
    program = builder.build()
    sol = solve(program, config, tol=None)
    value = sol.objective_value + bound.const
    w = _certificate_w(program, sol.x, "sup.w", v)
    c = float(sol.x[program.index_of("sup.c")])
    return float(value), InnerMinimizer((w,), c, float(value))


def support_projected(Fp: ProjectedUncertaintySet, v1, v2, tol: float = 1e-8,
                      config: SolverConfig | None = None) -> tuple[float, InnerMinimizer]:
    """Exact support function of the projected set at the pair (v1, v2)."""
    nu = Fp.parent.center.alphabet.u_size
    v1 = np.asarray(v1, dtype=float).reshape(-1)
    v2 = np.asarray(v2, dtype=float).reshape(-1)
    if v1.size != nu or v2.size != nu:
        raise ValueError("direction length must match the u alphabet")
    if Fp.parent.radius == 0.0:
        value = float(v1 @ Fp.parent.center.conditional_given_s(Fp.s1)
                      + v2 @ Fp.parent.center.conditional_given_s(Fp.s2))
        return value, InnerMinimizer((v1.copy(), v2.copy()), 0.0, value)
    builder = ProgramBuilder()
    bound = add_pair_support_epigraph(builder, Fp, _const_exprs(v1), _const_exprs(v2), "sup.")
    builder.set_objective(bound)
    program = builder.build()
    sol = solve(program, config, tol=None)
    value = sol.objective_value + bound.const
    w1 = _certificate_w(program, sol.x, "sup.w1", v1)
    w2 = _certificate_w(program, sol.x, "sup.w2", v2)
    c = float(sol.x[program.index_of("sup.c")])
    return float(value), InnerMinimizer((w1, w2), c, float(value))


# ---------------------------------------------------------------------------
# Sampling oracles: certified lower bounds on support values.
# ---------------------------------------------------------------------------

class SimplexSampler:
    """Uniform-ish members of the probability simplex, vertices included."""

    def __init__(self, dim: int):
        self.dim = dim

    def sample(self, m: int, rng) -> np.ndarray:
        pts = rng.dirichlet(np.ones(self.dim), size=max(m - self.dim, 1))
        return np.vstack([np.eye(self.dim), pts])

    def sample_near(self, x: np.ndarray, scale: float, m: int, rng) -> np.ndarray:
        conc = np.maximum(x, 1e-6) / max(scale, 1e-6)
        return rng.dirichlet(conc, size=m)


def _chi2_stat_rows(center: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Vectorized chi-square statistic of each row of pts against center."""
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = (center[None, :] - pts) ** 2 / pts
    terms = np.where((pts <= 0.0) & (center[None, :] == 0.0), 0.0, terms)
    terms = np.where((pts <= 0.0) & (center[None, :] > 0.0), np.inf, terms)
    return terms.sum(axis=1)


def _bisect_to_boundary(center: np.ndarray, targets: np.ndarray, feasible, iters: int = 50):
    """Largest step from center toward each target that stays feasible.

    ``feasible`` maps an array of points to a boolean mask. Feasibility is
    monotone along each segment because membership functions here are convex
    with minimum at the center.
    """
    ok_at_one = feasible(targets)
    lo = np.zeros(len(targets))
    hi = np.ones(len(targets))
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        pts = center[None, :] + mid[:, None] * (targets - center[None, :])
        ok = feasible(pts)
        lo = np.where(ok, mid, lo)
        hi = np.where(ok, hi, mid)
    step = np.where(ok_at_one, 1.0, lo)
    return center[None, :] + step[:, None] * (targets - center[None, :])


class BallSampler:
    """Members of a chi-square ball: rejection draws plus boundary points."""

    def __init__(self, F: UncertaintySet):
        self.F = F
        self.center = F.center.p.reshape(-1)
        self.radius = F.radius
        self.dim = self.center.size

    def _member_mask(self, pts: np.ndarray) -> np.ndarray:
        slack = 1e-12 if self.radius > 0.0 else 0.0
        return _chi2_stat_rows(self.center, pts) <= self.radius + slack

    def sample(self, m: int, rng) -> np.ndarray:
        n_boundary = m // 2
        targets = rng.dirichlet(np.ones(self.dim), size=max(n_boundary, 1))
        boundary = _bisect_to_boundary(self.center, targets, self._member_mask)
        accepted = [self.center[None, :], boundary]
        # Rejection from Dirichlet proposals concentrated near the center;
        # widen adaptively until enough mass lands inside the ball.
        beta = 4.0 * self.dim / max(self.radius, 1e-6)
        need = m - len(boundary)
        for _ in range(12):
            if need <= 0:
                break
            props = rng.dirichlet(np.maximum(beta * self.center, 1e-3), size=max(2 * need, 16))
            inside = props[self._member_mask(props)]
            if len(inside):
                accepted.append(inside[:need])
                need -= min(need, len(inside))
            if len(inside) < max(len(props) // 20, 1):
                beta *= 2.0
        return np.vstack(accepted)

    def sample_near(self, x: np.ndarray, scale: float, m: int, rng) -> np.ndarray:
        noise = rng.dirichlet(np.ones(self.dim), size=m)
        targets = (1.0 - scale) * x[None, :] + scale * noise
        # Re-aim from the center through the perturbed targets, slightly
        # overshooting so the boundary search sees infeasible endpoints.
        rays = self.center[None, :] + 1.5 * (targets - self.center[None, :])
        rays = np.clip(rays, 0.0, None)
        rays /= rays.sum(axis=1, keepdims=True)
        return _bisect_to_boundary(self.center, rays, self._member_mask)

    def polish(self, x0: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Local primal ascent from x0, certified by re-checking membership."""
        import warnings

        from scipy.optimize import minimize

        center = self.center

        def leeway(x):
            with np.errstate(divide="ignore"):
                stat = np.sum(center**2 / np.maximum(x, 1e-300)) - 2.0 + x.sum()
            return self.radius - stat

        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)  # SLSQP bound clipping
            res = minimize(
                lambda x: -float(v @ x), np.clip(x0, 1e-9, 1.0), jac=lambda x: -v,
                method="SLSQP",
                bounds=[(1e-12, 1.0)] * self.dim,
                constraints=[
                    {"type": "ineq", "fun": leeway,
                     "jac": lambda x: center**2 / np.maximum(x, 1e-300) ** 2 - 1.0},
                    {"type": "eq", "fun": lambda x: x.sum() - 1.0,
                     "jac": lambda x: np.ones_like(x)},
                ],
                options={"maxiter": 200, "ftol": 1e-14},
            )
        cand = np.clip(res.x, 0.0, None)
        total = cand.sum()
        if total <= 0:
            return x0
        cand /= total
        return _bisect_to_boundary(center, cand[None, :], self._member_mask)[0]


class PairSampler:
    """Members (R1, R2) of a projected set, stacked as length-2|U| rows."""

    def __init__(self, Fp: ProjectedUncertaintySet):
        self.Fp = Fp
        phat = Fp.parent.center
        self.nu = phat.alphabet.u_size
        self.k1 = phat.p[Fp.s1]
        self.k2 = phat.p[Fp.s2]
        self.center = np.concatenate(
            [phat.conditional_given_s(Fp.s1), phat.conditional_given_s(Fp.s2)]
        )
        self.C = Fp.rhs_constant

    def _member_mask(self, pts: np.ndarray) -> np.ndarray:
        r1 = pts[:, : self.nu]
        r2 = pts[:, self.nu :]
        lhs = np.zeros(len(pts))
        for k, r in ((self.k1, r1), (self.k2, r2)):
            with np.errstate(divide="ignore", invalid="ignore"):
                terms = k[None, :] ** 2 / r
            terms = np.where((r <= 0.0) & (k[None, :] ** 2 > 0.0), np.inf, terms)
            terms = np.where((r <= 0.0) & (k[None, :] ** 2 <= 0.0), 0.0, terms)
            lhs += np.sqrt(terms.sum(axis=1))
        return lhs <= self.C + 1e-12

    def sample(self, m: int, rng) -> np.ndarray:
        targets = np.hstack(
            [rng.dirichlet(np.ones(self.nu), size=m), rng.dirichlet(np.ones(self.nu), size=m)]
        )
        boundary = _bisect_to_boundary(self.center, targets, self._member_mask)
        inside = targets[self._member_mask(targets)]
        return np.vstack([self.center[None, :], boundary, inside])

    def sample_near(self, x: np.ndarray, scale: float, m: int, rng) -> np.ndarray:
        noise = np.hstack(
            [rng.dirichlet(np.ones(self.nu), size=m), rng.dirichlet(np.ones(self.nu), size=m)]
        )
        targets = (1.0 - scale) * x[None, :] + scale * noise
        rays = self.center[None, :] + 1.5 * (targets - self.center[None, :])
        rays = np.clip(rays, 0.0, None)
        rays[:, : self.nu] /= rays[:, : self.nu].sum(axis=1, keepdims=True)
        rays[:, self.nu :] /= rays[:, self.nu :].sum(axis=1, keepdims=True)
        return _bisect_to_boundary(self.center, rays, self._member_mask)

    def polish(self, x0: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Local primal ascent from x0, certified by re-checking membership."""
        import warnings

        from scipy.optimize import minimize

        nu = self.nu
        k1sq = self.k1**2
        k2sq = self.k2**2

        def leeway(x):
            g1 = float(np.sum(k1sq / np.maximum(x[:nu], 1e-300)))
            g2 = float(np.sum(k2sq / np.maximum(x[nu:], 1e-300)))
            return self.C - np.sqrt(g1) - np.sqrt(g2)

        def leeway_jac(x):
            r1 = np.maximum(x[:nu], 1e-300)
            r2 = np.maximum(x[nu:], 1e-300)
            g1 = float(np.sum(k1sq / r1))
            g2 = float(np.sum(k2sq / r2))
            j1 = k1sq / (2.0 * r1**2 * max(np.sqrt(g1), 1e-300))
            j2 = k2sq / (2.0 * r2**2 * max(np.sqrt(g2), 1e-300))
            return np.concatenate([j1, j2])

        ones1 = np.concatenate([np.ones(nu), np.zeros(nu)])
        ones2 = np.concatenate([np.zeros(nu), np.ones(nu)])
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)  # SLSQP bound clipping
            res = minimize(
                lambda x: -float(v @ x), np.clip(x0, 1e-9, 1.0), jac=lambda x: -v,
                method="SLSQP",
                bounds=[(1e-12, 1.0)] * (2 * nu),
                constraints=[
                    {"type": "ineq", "fun": leeway, "jac": leeway_jac},
                    {"type": "eq", "fun": lambda x: x[:nu].sum() - 1.0,
                     "jac": lambda x: ones1},
                    {"type": "eq", "fun": lambda x: x[nu:].sum() - 1.0,
                     "jac": lambda x: ones2},
                ],
                options={"maxiter": 200, "ftol": 1e-14},
            )
        cand = np.clip(res.x, 0.0, None)
        s1 = cand[:nu].sum()
        s2 = cand[nu:].sum()
        if s1 <= 0 or s2 <= 0:
            return x0
        cand[:nu] /= s1
        cand[nu:] /= s2
        return _bisect_to_boundary(self.center, cand[None, :], self._member_mask)[0]


def support_oracle_suite(queries: int = 40, trials: int = 1500, max_cells: int = 4,
                         seed: int = 0) -> list[dict]:
    """Closed-form support values against sampling lower bounds.

    Alternates between the joint ball and projected pair sets on random
    small alphabets and directions. Each row reports the closed-form value,
    the oracle bound, and their gap; the closed form must dominate the
    bound (within 1e-6) and stay within 1e-3 of it.
    """
    from .simplex import Alphabet, JointDistribution

    rng = np.random.default_rng(seed)
    shapes = [(s, u) for s in range(2, 4) for u in range(2, 4) if s * u <= max_cells]
    if not shapes:
        raise ValueError("max_cells too small for a 2x2 alphabet")
    rows = []
    for qid in range(queries):
        s_size, u_size = shapes[qid % len(shapes)]
        alphabet = Alphabet(s_size, u_size)
        cells = s_size * u_size
        raw = rng.dirichlet(np.ones(cells)) + 0.05
        phat = JointDistribution(alphabet, raw / raw.sum())
        radius = float(rng.uniform(0.02, 0.5))
        F = UncertaintySet(phat, radius)
        if qid % 2 == 0:
            v = rng.normal(size=cells)
            closed, _ = support_joint(F, v)
            oracle = brute_force_support(BallSampler(F), v, trials, rng)
            kind = "ball"
        else:
            choices = rng.permutation(s_size)[:2]
            pset = F.project(int(choices[0]), int(choices[1]))
            v = rng.normal(size=2 * u_size)
            closed, _ = support_projected(pset, v[:u_size], v[u_size:])
            oracle = brute_force_support(PairSampler(pset), v, trials, rng)
            kind = "pair"
        rows.append({
            "query_id": f"{kind}{qid}",
            "closed_form": closed,
            "oracle_bound": oracle,
            "gap": closed - oracle,
        })
    return rows


def brute_force_support(sampler, v, trials: int, rng=None, refine_rounds: int = 8) -> float:
    """Certified lower bound on a support value from sampled members.

    Takes the best linear value over ``trials`` sampled members, then runs
    refinement rounds that concentrate new boundary samples around the
    incumbent at shrinking scales. Every candidate is an actual member, so
    the maximum never overshoots the true support value.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    v = np.asarray(v, dtype=float).reshape(-1)
    pts = sampler.sample(trials, rng)
    vals = pts @ v
    best = int(np.argmax(vals))
    best_val, best_pt = float(vals[best]), pts[best]
    if hasattr(sampler, "sample_near"):
        scale = 0.5
        for _ in range(refine_rounds):
            extra = sampler.sample_near(best_pt, scale, max(trials // 4, 64), rng)
            vals = extra @ v
            i = int(np.argmax(vals))
            if vals[i] > best_val:
                best_val, best_pt = float(vals[i]), extra[i]
            else:
                scale *= 0.35  # shrink only when the scale stopped helping
    if hasattr(sampler, "polish"):
        polished = sampler.polish(best_pt, v)
        val = float(polished @ v)
        if val > best_val:
            best_val, best_pt = val, polished
    return best_val
