"""Command line entry point: ``vidg solve|study|dual|predict``."""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

from .mesh import MeshError, build_graded
from .polyspace import SolutionError
from .problems import BUILTINS, ProblemSchemaError, builtin, load_problem
from .solver import MAX_DEGREE, NumericalError, SolveOptions, dg_solve, l2_error, nodal_error
from .special import SeriesError
from .study import StudyPlan, emit, predicted_order, run_dual_study, run_study

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4


class UsageError(Exception):
    pass


def _number(text: str) -> float:
    """Accepts decimals and fractions such as 4/3."""
    try:
        return float(Fraction(text)) if "/" in text else float(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _levels(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(x) for x in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"levels must look like LO:HI, got {text!r}") from None
    return lo, hi


def _metrics(text: str) -> tuple[str, ...]:
    items = tuple(x.strip() for x in text.split(",") if x.strip())
    bad = [x for x in items if x not in ("nodal", "l2")]
    if not items or bad:
        raise argparse.ArgumentTypeError(f"metrics are nodal and/or l2, got {text!r}")
    return items


def _problem(args):
    name = args.problem
    if name in BUILTINS:
        if args.alpha is None:
            raise UsageError(f"builtin problem {name!r} needs --alpha")
        return builtin(name, args.alpha)
    path = Path(name)
    if not path.exists():
        raise FileNotFoundError(f"problem file not found: {name} (builtins: {', '.join(BUILTINS)})")
    doc = json.loads(path.read_text())
    if args.alpha is not None:
        doc["alpha"] = args.alpha
    return load_problem(doc)


def _format_for(path: str, fmt):
    if fmt:
        return fmt
    suffix = Path(path).suffix.lstrip(".").lower()
    return suffix if suffix in ("csv", "json", "md") else "csv"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vidg", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, gamma=True):
        p.add_argument("--problem", required=True, help=f"problem file or builtin ({', '.join(BUILTINS)})")
        p.add_argument("--alpha", type=_number)
        p.add_argument("--degree", type=int, default=1)
        if gamma:
            p.add_argument("--gamma", type=_number, default=1.0)
        p.add_argument("--quad-order", type=int, default=None)

    p = sub.add_parser("solve", help="solve once and report errors")
    common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--emit", help="write the DG solution as JSON")

    p = sub.add_parser("study", help="refinement study")
    common(p)
    p.add_argument("--levels", type=_levels, required=True)
    p.add_argument("--format", choices=("csv", "json", "md"))
    p.add_argument("--out", required=True)
    p.add_argument("--metric", type=_metrics, default=("nodal", "l2"))
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("dual", help="self-convergence study of the discrete dual solution")
    common(p)
    p.add_argument("--zt", type=_number, required=True)
    p.add_argument("--levels", type=_levels, required=True)
    p.add_argument("--format", choices=("csv", "json", "md"))
    p.add_argument("--out", required=True)

    p = sub.add_parser("predict", help="predicted nodal convergence rates")
    p.add_argument("--degree", type=int, required=True)
    p.add_argument("--alpha", type=_number, required=True)
    p.add_argument("--sigma", type=_number, default=math.inf)
    p.add_argument("--gamma", type=_number, default=1.0)
    return parser


def _check_degree(p):
    if not 0 <= p <= MAX_DEGREE:
        raise UsageError(f"degree must be in [0, {MAX_DEGREE}], got {p}")


def cmd_solve(args) -> int:
    _check_degree(args.degree)
    prob = _problem(args)
    mesh = build_graded(prob.T, args.n, args.gamma)
    sol = dg_solve(prob, mesh, SolveOptions(args.degree, args.quad_order))
    print(f"{prob.name}: alpha={prob.alpha} p={args.degree} gamma={args.gamma} N={args.n}")
    print(f"U(T-) = {sol.left_traces()[-1]:.16e}")
    if prob.exact is not None:
        print(f"nodal error = {nodal_error(sol, prob.exact)[1]:.6e}")
        print(f"L2 error    = {l2_error(sol, prob.exact):.6e}")
    if args.emit:
        Path(args.emit).write_text(sol.to_json())
    return EXIT_OK


def _plan(args, prob, **extra) -> StudyPlan:
    _check_degree(args.degree)
    return StudyPlan(problem=prob, degree=args.degree, gamma=args.gamma, levels=args.levels,
                     quad_order=args.quad_order, **extra)


def cmd_study(args) -> int:
    prob = _problem(args)
    report = run_study(_plan(args, prob, metrics=args.metric, workers=args.workers))
    emit(report, _format_for(args.out, args.format), args.out)
    last = report.rows[-1]
    print(f"terminal nodal EOC {last.nodal_eoc}, predicted {report.predicted}; wrote {args.out}")
    return EXIT_OK


def cmd_dual(args) -> int:
    prob = _problem(args)
    report = run_dual_study(_plan(args, prob, dual=True, zT=args.zt))
    emit(report, _format_for(args.out, args.format), args.out)
    print(f"terminal L2 EOC {report.rows[-1].l2_eoc}, floor {report.predicted[0]}; wrote {args.out}")
    return EXIT_OK


def cmd_predict(args) -> int:
    proved, conjectured = predicted_order(args.degree, args.alpha, args.sigma, args.gamma)
    print(f"proved {proved:.6g}")
    print(f"conjectured {conjectured:.6g}")
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "study": cmd_study, "dual": cmd_dual, "predict": cmd_predict}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return COMMANDS[args.command](args)
    except (NumericalError, SeriesError) as exc:
        print(f"vidg: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"vidg: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (UsageError, MeshError, ProblemSchemaError, SolutionError, ValueError) as exc:
        print(f"vidg: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
