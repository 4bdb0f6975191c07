"""Solver-agnostic cone programs.

A program is held in the standard primal form

    minimize    objective . x
    subject to  A x = b
                x[i] >= 0                    for declared orthant variables
                2 x[i] x[j] >= x[k]^2,       x[i], x[j] >= 0
                                             for declared rotated-cone triples

Affine inequalities are written with explicit slack variables so that every
nonlinearity lives in a variable cone. Adapters translate this form to a
concrete solver; any conic solver handling linear and rotated quadratic
cones qualifies.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy import sparse

_SQRT2 = float(np.sqrt(2.0))


class SolverFailureError(RuntimeError):
    """The backend did not return a usable solution."""

    def __init__(self, message, solution=None):
        super().__init__(message)
        self.solution = solution


class LinExpr:
    """Sparse affine expression sum(coef * x[var]) + const."""

    __slots__ = ("terms", "const")

    def __init__(self, terms: dict[int, float] | None = None, const: float = 0.0):
        self.terms = dict(terms) if terms else {}
        self.const = float(const)

    def add(self, var: int, coef: float) -> "LinExpr":
        if coef != 0.0:
            self.terms[var] = self.terms.get(var, 0.0) + coef
        return self

    def add_const(self, c: float) -> "LinExpr":
        self.const += c
        return self

    def value(self, x: np.ndarray) -> float:
        return self.const + sum(c * x[i] for i, c in self.terms.items())

    def copy(self) -> "LinExpr":
        return LinExpr(self.terms, self.const)


@dataclass
class ConicProgram:
    num_vars: int
    objective: np.ndarray
    eq_matrix: sparse.csr_matrix
    eq_rhs: np.ndarray
    nonneg: tuple[int, ...]
    rotated_cones: tuple[tuple[int, int, int], ...]
    names: tuple[str, ...]
    eq_labels: tuple[str, ...] = ()

    def __post_init__(self):
        for tup in self.rotated_cones:
            for i in tup:
                if not 0 <= i < self.num_vars:
                    raise ValueError(f"cone index {i} out of range")
        for i in self.nonneg:
            if not 0 <= i < self.num_vars:
                raise ValueError(f"orthant index {i} out of range")
        if len(self.names) != self.num_vars:
            raise ValueError("name map must cover every variable")

    def index_of(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(name) from None

    def residuals(self, x: np.ndarray) -> dict[str, float]:
        """Worst violations of the equality system and each cone family."""
        eq = 0.0
        if self.eq_matrix.shape[0]:
            eq = float(np.abs(self.eq_matrix @ x - self.eq_rhs).max())
        orth = 0.0
        if self.nonneg:
            orth = float(max(0.0, -min(x[i] for i in self.nonneg)))
        cone = 0.0
        for i, j, k in self.rotated_cones:
            cone = max(cone, x[k] ** 2 - 2.0 * x[i] * x[j], -x[i], -x[j])
        return {"eq": eq, "orthant": orth, "cone": max(cone, 0.0)}

    def max_residual(self, x: np.ndarray) -> float:
        return max(self.residuals(x).values())

    def dump(self) -> str:
        """Plain-text rendering, one line per constraint, stable ordering."""
        def term_str(row):
            parts = []
            for col, val in row:
                parts.append(f"{val:+.12g}*{self.names[col]}")
            return " ".join(parts) if parts else "0"

        lines = [f"vars {self.num_vars}"]
        obj = [(i, v) for i, v in enumerate(self.objective) if v != 0.0]
        lines.append("min " + term_str(obj))
        m = self.eq_matrix.tocsr()
        for r in range(m.shape[0]):
            lo, hi = m.indptr[r], m.indptr[r + 1]
            row = list(zip(m.indices[lo:hi], m.data[lo:hi]))
            label = self.eq_labels[r] if r < len(self.eq_labels) else f"eq{r}"
            lines.append(f"eq {label}: {term_str(row)} = {self.eq_rhs[r]:.12g}")
        for i in self.nonneg:
            lines.append(f"nonneg: {self.names[i]}")
        for i, j, k in self.rotated_cones:
            lines.append(f"rqc: 2*{self.names[i]}*{self.names[j]} >= {self.names[k]}^2")
        return "\n".join(lines) + "\n"


class ProgramBuilder:
    """Incremental construction of a :class:`ConicProgram`."""

    def __init__(self):
        self._names: list[str] = []
        self._rows: list[dict[int, float]] = []
        self._rhs: list[float] = []
        self._labels: list[str] = []
        self._nonneg: list[int] = []
        self._cones: list[tuple[int, int, int]] = []
        self._objective: dict[int, float] = {}
        self._obj_const = 0.0
        self._slack_count = 0

    @property
    def num_vars(self) -> int:
        return len(self._names)

    def new_var(self, name: str, nonneg: bool = False) -> int:
        self._names.append(name)
        idx = len(self._names) - 1
        if nonneg:
            self._nonneg.append(idx)
        return idx

    def add_eq(self, expr: LinExpr, label: str = "") -> None:
        """Constrain expr == 0."""
        self._rows.append(dict(expr.terms))
        self._rhs.append(-expr.const)
        self._labels.append(label)

    def add_ge0(self, expr: LinExpr, label: str = "") -> int:
        """Constrain expr >= 0 via a fresh orthant slack; returns its index."""
        self._slack_count += 1
        slack = self.new_var(f"slack{self._slack_count}[{label}]" if label else
                             f"slack{self._slack_count}", nonneg=True)
        row = expr.copy().add(slack, -1.0)
        self.add_eq(row, label or f"slack{self._slack_count}")
        return slack

    def add_rotated_cone(self, x: int, y: int, z: int) -> None:
        """Declare 2 x y >= z^2 with x, y >= 0."""
        self._cones.append((x, y, z))

    def set_objective(self, expr: LinExpr) -> None:
        self._objective = dict(expr.terms)
        self._obj_const = expr.const

    @property
    def objective_const(self) -> float:
        return self._obj_const

    def build(self) -> ConicProgram:
        n = self.num_vars
        obj = np.zeros(n)
        for i, v in self._objective.items():
            obj[i] = v
        rows, cols, vals = [], [], []
        for r, row in enumerate(self._rows):
            for c, v in row.items():
                if v != 0.0:
                    rows.append(r)
                    cols.append(c)
                    vals.append(v)
        mat = sparse.csr_matrix(
            (vals, (rows, cols)), shape=(len(self._rows), n)
        )
        return ConicProgram(
            num_vars=n,
            objective=obj,
            eq_matrix=mat,
            eq_rhs=np.array(self._rhs, dtype=float),
            nonneg=tuple(self._nonneg),
            rotated_cones=tuple(self._cones),
            names=tuple(self._names),
            eq_labels=tuple(self._labels),
        )


@dataclass
class Solution:
    x: np.ndarray
    objective_value: float
    status: str  # optimal | near-optimal | infeasible-reported | failed
    primal_residual: float
    solver: str
    raw_status: str = ""
    iterations: int = 0

    @property
    def ok(self) -> bool:
        return self.status in ("optimal", "near-optimal")


@dataclass(frozen=True)
class SolverConfig:
    adapter: str = "clarabel"
    primal_tol: float = 1e-8
    gap_tol: float = 1e-6
    max_iter: int = 200
    # (name, value) pairs applied to the backend's settings object; used by
    # the deterministic retry ladder on ill-conditioned instances.
    backend_settings: tuple = ()


def _conic_data(program: ConicProgram):
    """Stack (A, b, cone sizes) in the shared Ax + s = b, s in K layout.

    Row order: equalities (zero cone), one row per orthant variable, then a
    3-row second-order cone block per rotated cone using the isometry
    (x, y, z) -> (x + y, x - y, sqrt(2) z).
    """
    n = program.num_vars
    blocks = [program.eq_matrix]
    b = [program.eq_rhs]
    if program.nonneg:
        rows = np.arange(len(program.nonneg))
        cols = np.array(program.nonneg)
        data = -np.ones(len(program.nonneg))
        blocks.append(sparse.csr_matrix((data, (rows, cols)), shape=(len(program.nonneg), n)))
        b.append(np.zeros(len(program.nonneg)))
    for i, j, k in program.rotated_cones:
        rows = np.array([0, 0, 1, 1, 2])
        cols = np.array([i, j, i, j, k])
        data = np.array([-1.0, -1.0, -1.0, 1.0, -_SQRT2])
        blocks.append(sparse.csr_matrix((data, (rows, cols)), shape=(3, n)))
        b.append(np.zeros(3))
    A = sparse.vstack(blocks, format="csc")
    return A, np.concatenate(b)


def _solve_clarabel(program: ConicProgram, config: SolverConfig):
    import clarabel

    A, b = _conic_data(program)
    cones = []
    if program.eq_matrix.shape[0]:
        cones.append(clarabel.ZeroConeT(program.eq_matrix.shape[0]))
    if program.nonneg:
        cones.append(clarabel.NonnegativeConeT(len(program.nonneg)))
    cones.extend(clarabel.SecondOrderConeT(3) for _ in program.rotated_cones)
    settings = clarabel.DefaultSettings()
    settings.verbose = False
    settings.max_iter = config.max_iter
    # Solve tighter than the advertised contract to leave verification room.
    settings.tol_feas = min(1e-10, config.primal_tol)
    settings.tol_gap_abs = min(1e-10, config.gap_tol)
    settings.tol_gap_rel = min(1e-10, config.gap_tol)
    for name, value in config.backend_settings:
        setattr(settings, name, value)
    P = sparse.csc_matrix((program.num_vars, program.num_vars))
    solver = clarabel.DefaultSolver(P, program.objective, A, b, cones, settings)
    res = solver.solve()
    raw = str(res.status)
    if raw == "Solved":
        status = "optimal"
    elif raw in ("AlmostSolved", "MaxIterations", "InsufficientProgress") and res.x is not None:
        status = "near-optimal"
    elif raw in ("PrimalInfeasible", "AlmostPrimalInfeasible"):
        status = "infeasible-reported"
    else:
        status = "failed"
    x = np.asarray(res.x, dtype=float) if res.x is not None else np.full(program.num_vars, np.nan)
    return x, status, raw, int(res.iterations)


def _solve_scs(program: ConicProgram, config: SolverConfig):
    import scs

    A, b = _conic_data(program)
    cone = {}
    if program.eq_matrix.shape[0]:
        cone["z"] = program.eq_matrix.shape[0]
    if program.nonneg:
        cone["l"] = len(program.nonneg)
    if program.rotated_cones:
        cone["q"] = [3] * len(program.rotated_cones)
    data = {"A": A, "b": b, "c": program.objective}
    solver = scs.SCS(data, cone, verbose=False, eps_abs=config.primal_tol,
                     eps_rel=config.gap_tol, max_iters=200000)
    res = solver.solve()
    raw = res["info"]["status"]
    if raw == "solved":
        status = "optimal"
    elif "inaccurate" in raw:
        status = "near-optimal"
    elif "infeasible" in raw:
        status = "infeasible-reported"
    else:
        status = "failed"
    x = np.asarray(res["x"], dtype=float)
    return x, status, raw, int(res["info"]["iter"])


_ADAPTERS = {"clarabel": _solve_clarabel, "scs": _solve_scs}


def solve(program: ConicProgram, config: SolverConfig | str | None = None,
          tol: float | None = None) -> Solution:
    """Run a backend on the program and re-verify its answer.

    The returned status is "optimal" only if the adapter reports success and
    the recomputed primal residual is within tolerance; adapter claims are
    never passed through unchecked.
    """
    if config is None:
        config = SolverConfig()
    elif isinstance(config, str):
        config = SolverConfig(adapter=config)
    if tol is not None:
        config = replace(config, primal_tol=tol)
    try:
        adapter = _ADAPTERS[config.adapter]
    except KeyError:
        raise SolverFailureError(f"unknown adapter {config.adapter!r}") from None
    x, status, raw, iters = adapter(program, config)
    residual = float("nan")
    objective = float("nan")
    if np.all(np.isfinite(x)):
        residual = program.max_residual(x)
        objective = float(program.objective @ x)
        if status == "optimal" and residual > config.primal_tol:
            status = "near-optimal" if residual <= 1e4 * config.primal_tol else "failed"
    sol = Solution(x, objective, status, residual, config.adapter, raw, iters)
    if status == "failed":
        raise SolverFailureError(f"{config.adapter} returned {raw}", sol)
    return sol
