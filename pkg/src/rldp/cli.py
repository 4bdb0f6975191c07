"""Command line interface.

Subcommands: ``solve`` one instance from a distribution file, ``eval`` a
mechanism against a distribution, ``scatter`` and ``sweep`` campaigns from
a JSON config, and ``check support`` for the duality oracle suite.
Exit codes: 0 success, 1 usage error, 2 solver failure.
"""
from __future__ import annotations

import argparse
import json
import sys

from .conic import SolverConfig, SolverFailureError
from .duality import support_oracle_suite
from .evaluation import Mechanism, realized_distortion, realized_epsilon
from .experiments import ExperimentConfig, run_scatter, run_sweep
from .problems import (
    VARIANTS,
    DistortionSpec,
    ProblemSpec,
    build_problem,
    enforce_robust_privacy,
    extract_mechanism,
    solve_problem,
    verify_solution,
)
from .simplex import JointDistribution
from .uncertainty import UncertaintySet

GAP_LIMIT = 1e-3
DOMINANCE_SLACK = 1e-6


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _write_text(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _cmd_solve(args) -> int:
    with open(args.phat, encoding="utf-8") as fh:
        phat = JointDistribution.from_json(fh.read())
    if args.B is not None:
        F = UncertaintySet(phat, args.B, args.alpha, args.n)
    else:
        F = UncertaintySet.from_samples(phat, args.n, args.alpha)
    distortion = DistortionSpec()
    spec = ProblemSpec(args.variant, phat, F, args.epsilon, distortion)
    built = build_problem(spec)
    sol = solve_problem(built, SolverConfig(adapter=args.adapter, primal_tol=args.tol))
    mech = extract_mechanism(sol, built)
    theta = 0.0
    if built.privacy_triples:
        mech, theta = enforce_robust_privacy(mech, spec)
    report = verify_solution(built, sol, mechanism=mech)
    _write_text(args.out, mech.to_json() + "\n")
    d_table = distortion.table(phat.alphabet)
    summary = {
        "variant": args.variant,
        "objective": sol.objective_value,
        "status": sol.status,
        "d_star_at_phat": realized_distortion(phat, mech, d_table),
        "eps_star_at_phat": realized_epsilon(phat, mech),
        "radius": F.radius,
        "restoration_blend": theta,
        "verification_max_residual": report.max_residual,
        "verification_ok": report.ok,
    }
    print(json.dumps(summary))
    return 0


def _cmd_eval(args) -> int:
    with open(args.mech, encoding="utf-8") as fh:
        mech = Mechanism.from_json(fh.read())
    with open(args.dist, encoding="utf-8") as fh:
        P = JointDistribution.from_json(fh.read())
    d_table = DistortionSpec().table(P.alphabet)
    report = {
        "d_star": realized_distortion(P, mech, d_table),
        "eps_star": realized_epsilon(P, mech),
    }
    out = json.dumps(report)
    if report["eps_star"] == float("inf"):
        out = out.replace("Infinity", '"inf"')
    print(out)
    return 0


def _load_config(path: str) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return ExperimentConfig.from_json(fh.read())


def _cmd_scatter(args) -> int:
    csv = run_scatter(_load_config(args.config), workers=args.workers)
    _write_text(args.out, csv)
    return 0


def _cmd_sweep(args) -> int:
    csv = run_sweep(_load_config(args.config), workers=args.workers)
    _write_text(args.out, csv)
    return 0


def _cmd_check_support(args) -> int:
    rows = support_oracle_suite(queries=args.queries, trials=args.trials,
                                max_cells=args.dims, seed=args.seed)
    lines = ["query_id,closed_form,oracle_bound,gap"]
    bad = 0
    for row in rows:
        lines.append(f"{row['query_id']},{row['closed_form']!r},"
                     f"{row['oracle_bound']!r},{row['gap']!r}")
        if row["gap"] > GAP_LIMIT or row["gap"] < -DOMINANCE_SLACK:
            bad += 1
    _write_text(args.out, "\n".join(lines) + "\n")
    if bad:
        print(f"{bad} queries out of tolerance", file=sys.stderr)
        return 1
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="rldp", description=__doc__)
    sub = parser.add_subparsers(dest="command")

    p_solve = sub.add_parser("solve", help="solve one instance from a distribution file")
    p_solve.add_argument("--variant", required=True, choices=VARIANTS)
    p_solve.add_argument("--phat", required=True, help="empirical distribution JSON file")
    p_solve.add_argument("--epsilon", type=float, default=0.5)
    p_solve.add_argument("--alpha", type=float, default=0.05)
    p_solve.add_argument("--n", type=int, required=True, help="sample size behind phat")
    p_solve.add_argument("--B", type=float, default=None, help="explicit radius override")
    p_solve.add_argument("--out", required=True, help="mechanism JSON output path")
    p_solve.add_argument("--adapter", default="clarabel")
    p_solve.add_argument("--tol", type=float, default=1e-8)
    p_solve.set_defaults(func=_cmd_solve)

    p_eval = sub.add_parser("eval", help="evaluate a mechanism under a distribution")
    p_eval.add_argument("--mech", required=True)
    p_eval.add_argument("--dist", required=True)
    p_eval.set_defaults(func=_cmd_eval)

    for name, func in (("scatter", _cmd_scatter), ("sweep", _cmd_sweep)):
        p = sub.add_parser(name, help=f"run a {name} campaign from a config file")
        p.add_argument("--config", required=True)
        p.add_argument("--out", required=True)
        p.add_argument("--workers", type=int, default=None,
                       help="overrides RLDP_WORKERS and the config value")
        p.set_defaults(func=func)

    p_check = sub.add_parser("check", help="internal consistency suites")
    check_sub = p_check.add_subparsers(dest="check_command")
    p_support = check_sub.add_parser("support", help="duality oracle agreement suite")
    p_support.add_argument("--trials", type=int, default=1500)
    p_support.add_argument("--dims", type=int, default=4,
                           help="largest joint alphabet size |S x U|")
    p_support.add_argument("--seed", type=int, default=0)
    p_support.add_argument("--queries", type=int, default=40)
    p_support.add_argument("--out", default="-")
    p_support.set_defaults(func=_cmd_check_support)

    return parser


def cli_main(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    func = getattr(args, "func", None)
    if func is None:
        parser.print_usage(sys.stderr)
        return 1
    try:
        return func(args)
    except SolverFailureError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_main(sys.argv[1:]))


if __name__ == "__main__":
    main()
