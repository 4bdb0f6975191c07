"""The four mechanism-synthesis problems as cone programs.

Variants cross nonrobust/robust utility with nonrobust/robust privacy:

* ``nunp``: minimize empirical distortion under the likelihood-ratio
  privacy rows evaluated at the empirical conditionals (a pure LP).
* ``nurp``: empirical distortion objective, privacy enforced for every
  distribution in the confidence ball (one dual cone block per
  (y, s1, s2) with s1 != s2).
* ``runp``: minimize an epigraph variable dominating worst-case distortion
  over the ball, nominal privacy rows.
* ``rurp``: worst-case distortion epigraph and robust privacy blocks.

The universally quantified constraints enter through the exact support
function duals of :mod:`rldp.duality`, with the dual variables lifted into
the program as decision variables.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .conic import ConicProgram, LinExpr, ProgramBuilder, Solution, SolverConfig, solve
from .duality import add_ball_support_epigraph, add_pair_support_epigraph
from .evaluation import Mechanism
from .simplex import DegenerateMarginalError, JointDistribution
from .uncertainty import UncertaintySet

VARIANTS = ("nunp", "nurp", "runp", "rurp")

REPAIR_TOL = 1e-6


class ExcessiveRepairError(RuntimeError):
    """Solver output needed more than cosmetic cleanup to be a channel."""


@dataclass(frozen=True)
class DistortionSpec:
    """Release distance d(u, y) >= 0; default is squared value distance."""

    kind: str = "squared"
    matrix: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("squared", "matrix"):
            raise ValueError("kind must be 'squared' or 'matrix'")
        if self.kind == "matrix":
            m = np.asarray(self.matrix, dtype=float)
            if m.ndim != 2 or not np.all(np.isfinite(m)) or np.any(m < 0):
                raise ValueError("distortion matrix must be finite and nonnegative")
            object.__setattr__(self, "matrix", m)

    def table(self, alphabet) -> np.ndarray:
        if self.kind == "squared":
            vals = np.asarray(alphabet.u_values)
            return (vals[:, None] - vals[None, :]) ** 2
        if self.matrix.shape != (alphabet.u_size, alphabet.y_size):
            raise ValueError("distortion matrix shape must be (u_size, y_size)")
        return self.matrix


@dataclass(frozen=True)
class ProblemSpec:
    variant: str
    phat: JointDistribution
    F: UncertaintySet
    epsilon: float
    distortion: DistortionSpec = field(default_factory=DistortionSpec)

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}")
        if self.epsilon < 0:
            raise ValueError("privacy budget must be nonnegative")
        if self.F.center is not self.phat and not np.array_equal(self.F.center.p, self.phat.p):
            raise ValueError("uncertainty set must be centered at phat")


@dataclass
class BuiltProblem:
    """A cone program plus the bookkeeping to interpret its solution."""

    spec: ProblemSpec
    program: ConicProgram
    mech_idx: np.ndarray  # (s, u, y) -> variable index
    d_idx: int | None
    privacy_triples: tuple[tuple[int, int, int], ...]  # (y, s1, s2)


def _mechanism_vars(builder: ProgramBuilder, alphabet) -> np.ndarray:
    ns, nu, ny = alphabet.s_size, alphabet.u_size, alphabet.y_size
    idx = np.empty((ns, nu, ny), dtype=int)
    for s in range(ns):
        for u in range(nu):
            row = LinExpr(const=-1.0)
            for y in range(ny):
                idx[s, u, y] = builder.new_var(f"mech[{s},{u},{y}]", nonneg=True)
                row.add(int(idx[s, u, y]), 1.0)
            builder.add_eq(row, f"rowsum[{s},{u}]")
    return idx


def mechanism_block(spec: ProblemSpec, builder: ProgramBuilder) -> np.ndarray:
    """Row-stochastic channel variables p(y|s,u); returns their index table."""
    return _mechanism_vars(builder, spec.phat.alphabet)


def _privacy_triples(alphabet):
    ns, ny = alphabet.s_size, alphabet.y_size
    return tuple(
        (y, s1, s2) for y in range(ny) for s1 in range(ns) for s2 in range(ns) if s1 != s2
    )


def nominal_privacy_block(spec: ProblemSpec, builder: ProgramBuilder,
                          mech_idx: np.ndarray) -> int:
    """Likelihood-ratio rows at the empirical conditionals; returns row count."""
    phat = spec.phat
    marg = phat.marginal_s()
    if np.any(marg <= 0.0):
        raise DegenerateMarginalError("nominal privacy needs positive sensitive marginals")
    cond = phat.p / marg[:, None]
    # Rows are scaled by e^-eps (an equivalent positive rescaling) so the
    # matrix stays well conditioned even for very loose privacy budgets.
    damp = float(np.exp(-spec.epsilon))
    count = 0
    nu = phat.alphabet.u_size
    for y, s1, s2 in _privacy_triples(phat.alphabet):
        gap = LinExpr()
        for u in range(nu):
            gap.add(int(mech_idx[s1, u, y]), -damp * float(cond[s1, u]))
            gap.add(int(mech_idx[s2, u, y]), float(cond[s2, u]))
        builder.add_ge0(gap, f"npriv[{y},{s1},{s2}]")
        count += 1
    return count


def robust_utility_block(spec: ProblemSpec, builder: ProgramBuilder,
                         mech_idx: np.ndarray) -> int:
    """Epigraph variable D dominating worst-case expected distortion."""
    alphabet = spec.phat.alphabet
    d_table = spec.distortion.table(alphabet)
    d_idx = builder.new_var("D")
    v_exprs = []
    for s in range(alphabet.s_size):
        for u in range(alphabet.u_size):
            v = LinExpr()
            for y in range(alphabet.y_size):
                v.add(int(mech_idx[s, u, y]), float(d_table[u, y]))
            v_exprs.append(v)
    bound = add_ball_support_epigraph(builder, spec.phat.p, spec.F.radius, v_exprs, "rutil.")
    room = LinExpr().add(d_idx, 1.0)
    for var, coef in bound.terms.items():
        room.add(var, -coef)
    room.add_const(-bound.const)
    builder.add_ge0(room, "rutil.D")
    return d_idx


def robust_privacy_block(spec: ProblemSpec, builder: ProgramBuilder, mech_idx: np.ndarray,
                         y: int, s1: int, s2: int) -> None:
    """Support-function dual block forcing the (y, s1, s2) ratio bound on
    every distribution in the ball.

    The directions are normalized by e^-eps; the support function is
    positively homogeneous, so the constraint is unchanged while the
    coefficients stay within [0, 1].
    """
    nu = spec.phat.alphabet.u_size
    damp = float(np.exp(-spec.epsilon))
    v1 = [LinExpr().add(int(mech_idx[s1, u, y]), damp) for u in range(nu)]
    v2 = [LinExpr().add(int(mech_idx[s2, u, y]), -1.0) for u in range(nu)]
    pset = spec.F.project(s1, s2)
    bound = add_pair_support_epigraph(builder, pset, v1, v2, f"rpriv[{y},{s1},{s2}].")
    neg = LinExpr(const=-bound.const)
    for var, coef in bound.terms.items():
        neg.add(var, -coef)
    builder.add_ge0(neg, f"rpriv[{y},{s1},{s2}]")


def _nominal_objective(spec: ProblemSpec, mech_idx: np.ndarray) -> LinExpr:
    alphabet = spec.phat.alphabet
    d_table = spec.distortion.table(alphabet)
    obj = LinExpr()
    for s in range(alphabet.s_size):
        for u in range(alphabet.u_size):
            w = float(spec.phat.p[s, u])
            for y in range(alphabet.y_size):
                coef = w * float(d_table[u, y])
                if coef:
                    obj.add(int(mech_idx[s, u, y]), coef)
    return obj


def build_problem(spec: ProblemSpec) -> BuiltProblem:
    """Assemble the cone program for the requested variant."""
    builder = ProgramBuilder()
    mech_idx = mechanism_block(spec, builder)
    d_idx = None
    triples = _privacy_triples(spec.phat.alphabet)
    robust_privacy = spec.variant in ("nurp", "rurp")
    robust_utility = spec.variant in ("runp", "rurp")
    if robust_utility:
        d_idx = robust_utility_block(spec, builder, mech_idx)
        builder.set_objective(LinExpr().add(d_idx, 1.0))
    else:
        builder.set_objective(_nominal_objective(spec, mech_idx))
    if robust_privacy:
        for y, s1, s2 in triples:
            robust_privacy_block(spec, builder, mech_idx, y, s1, s2)
    else:
        nominal_privacy_block(spec, builder, mech_idx)
    return BuiltProblem(spec, builder.build(), mech_idx, d_idx,
                        triples if robust_privacy else ())


def solve_problem(built: BuiltProblem, config: SolverConfig | str | None = None,
                  tol: float | None = None) -> Solution:
    """Solve the assembled program with the configured adapter."""
    return solve(built.program, config, tol)


def worst_privacy_support(mech_p: np.ndarray, spec: ProblemSpec) -> float:
    """Largest support value over all privacy triples for a channel table.

    Positive values measure by how much the robust likelihood-ratio bound
    fails somewhere in the ball; nonpositive certifies it everywhere.
    """
    from .duality import support_projected

    scale = float(np.exp(spec.epsilon))
    worst = -np.inf
    for y, s1, s2 in _privacy_triples(spec.phat.alphabet):
        value, _ = support_projected(spec.F.project(s1, s2), mech_p[s1, :, y],
                                     -scale * mech_p[s2, :, y])
        worst = max(worst, value)
    return worst


def enforce_robust_privacy(mech: Mechanism, spec: ProblemSpec,
                           slack: float = 1e-7,
                           max_violation: float = 5e-3,
                           initial_worst: float | None = None) -> tuple[Mechanism, float]:
    """Certified feasibility restoration for robust privacy.

    Interior-point output can violate the robust constraints by a few
    multiples of the solver tolerance (amplified near cone vertices). The
    uniform channel satisfies every privacy triple strictly, with margin
    (e^eps - 1) / |Y|, and the support function is sublinear, so blending a
    violating channel toward uniform by

        theta = (violation + slack) / (violation + slack + margin)

    makes every triple's support at most -slack. Returns the restored
    mechanism and the blend weight actually used (0.0 if none was needed).
    Violations beyond ``max_violation`` indicate a failed solve and raise.
    ``initial_worst``, when supplied, skips the first support sweep.
    """
    worst = (worst_privacy_support(mech.p, spec) if initial_worst is None
             else initial_worst)
    if worst <= 0.0:
        return mech, 0.0
    if worst > max_violation:
        raise ExcessiveRepairError(
            f"robust privacy violated by {worst:.3g}; solution unusable")
    ny = mech.alphabet.y_size
    margin = (float(np.exp(spec.epsilon)) - 1.0) / ny
    if margin <= 0.0:
        raise ExcessiveRepairError(
            "no strictly feasible direction at zero privacy budget")
    uniform = np.full_like(mech.p, 1.0 / ny)
    theta_total = 0.0
    p = mech.p
    for _ in range(4):
        theta = (worst + slack) / (worst + slack + margin)
        p = (1.0 - theta) * p + theta * uniform
        theta_total = 1.0 - (1.0 - theta_total) * (1.0 - theta)
        worst = worst_privacy_support(p, spec)
        if worst <= 0.0:
            return Mechanism(mech.alphabet, p), theta_total
        slack *= 4.0
    raise ExcessiveRepairError(
        f"restoration failed to certify feasibility (residual {worst:.3g})")


@dataclass
class VerificationReport:
    eq_residual: float
    orthant_residual: float
    cone_residual: float
    semantic_residual: float
    violations: list[str]

    @property
    def max_residual(self) -> float:
        return max(self.eq_residual, self.orthant_residual, self.cone_residual,
                   self.semantic_residual)

    @property
    def ok(self) -> bool:
        return not self.violations


def verify_solution(built: BuiltProblem, solution: Solution, tol: float = 1e-6,
                    mechanism: Mechanism | None = None) -> VerificationReport:
    """Re-check a solution against the program and the original constraints.

    Beyond equality/cone residuals, the robust constraints are re-evaluated
    semantically: each privacy triple's support value at the pinned
    directions must be nonpositive, and for robust utility the ball support
    of the realized distortion vector must not exceed the epigraph value.
    When a deployed ``mechanism`` is supplied, the privacy recheck runs on
    its channel table instead of the raw solver variables.
    """
    x = solution.x
    res = built.program.residuals(x)
    violations = []
    if res["eq"] > tol:
        violations.append(f"equality residual {res['eq']:.3g} > {tol:.3g}")
    if res["orthant"] > tol:
        violations.append(f"orthant residual {res['orthant']:.3g} > {tol:.3g}")
    if res["cone"] > tol:
        violations.append(f"cone residual {res['cone']:.3g} > {tol:.3g}")
    spec = built.spec
    mech = mechanism.p if mechanism is not None else x[built.mech_idx]
    semantic = 0.0
    scale = float(np.exp(spec.epsilon))
    if built.privacy_triples:
        from .duality import support_projected

        for y, s1, s2 in built.privacy_triples:
            value, _ = support_projected(spec.F.project(s1, s2), mech[s1, :, y],
                                         -scale * mech[s2, :, y])
            semantic = max(semantic, value)
            if value > tol:
                violations.append(f"robust privacy ({y},{s1},{s2}) support {value:.3g} > {tol:.3g}")
    else:
        marg = spec.phat.marginal_s()
        cond = spec.phat.p / marg[:, None]
        for y, s1, s2 in _privacy_triples(spec.phat.alphabet):
            gap = float(cond[s1] @ mech[s1, :, y] - scale * (cond[s2] @ mech[s2, :, y]))
            semantic = max(semantic, gap)
            if gap > tol:
                violations.append(f"nominal privacy ({y},{s1},{s2}) gap {gap:.3g} > {tol:.3g}")
    if built.d_idx is not None:
        from .duality import support_joint

        d_table = spec.distortion.table(spec.phat.alphabet)
        # The epigraph claim belongs to the raw solver point, not a repaired
        # channel, so this check always reads the solution variables.
        v = np.einsum("suy,uy->su", x[built.mech_idx], d_table).reshape(-1)
        value, _ = support_joint(spec.F, v)
        excess = value - float(x[built.d_idx])
        semantic = max(semantic, excess)
        if excess > tol:
            violations.append(f"worst-case distortion exceeds epigraph by {excess:.3g}")
    return VerificationReport(res["eq"], res["orthant"], res["cone"], semantic, violations)


DUST_TOL = 3e-7


def extract_mechanism(solution: Solution, built: BuiltProblem) -> Mechanism:
    """Read the channel out of a solution, repairing only solver noise.

    Entries below the dust threshold are snapped to exact zero before the
    rows are renormalized: interior-point iterates end a hair inside the
    orthant (observed dust stays under 2.5e-7 at the default tolerances,
    while genuine channel mass sits orders of magnitude higher), and
    leaving the dust in place would turn structural zeros of the optimal
    channel into spurious likelihood ratios downstream. The realized
    adjustment must still stay within the repair budget.
    """
    if not solution.ok:
        raise ExcessiveRepairError(f"no usable solution (status {solution.status})")
    raw = solution.x[built.mech_idx]
    clipped = np.clip(raw, 0.0, 1.0)
    clipped[clipped < DUST_TOL] = 0.0
    sums = clipped.sum(axis=2, keepdims=True)
    repaired = clipped / sums
    adjustment = float(np.max(np.abs(repaired - raw)))
    if adjustment > REPAIR_TOL:
        raise ExcessiveRepairError(
            f"repair moved a channel entry by {adjustment:.3g} > {REPAIR_TOL}")
    return Mechanism(built.spec.phat.alphabet, repaired)
