"""Refinement studies: errors, empirical orders and predicted rates."""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

from .mesh import build_graded
from .polyspace import DgSolution
from .solver import NumericalError, ProblemSpec, SolveOptions, dg_solve, dual_solve, l2_error, nodal_error

MAX_LEVEL = 14
CSV_COLUMNS = ["i", "N", "nodal_error", "nodal_eoc", "l2_error", "l2_eoc", "seconds"]


def predicted_order(p: int, alpha: float, sigma: float, gamma: float) -> tuple[float, float]:
    """(proved rate, observed/conjectured rate) of the max nodal error.

    Weakly singular kernels: proved min(gamma sigma, p+1) + min(p, alpha+1),
    observed min(gamma (sigma+alpha+1), p+1+min(p, alpha+1)).
    Smooth kernels (integer alpha): 2p+1 for both.  p = 0 gives 1.
    """
    if p == 0:
        return 1.0, 1.0
    if float(alpha).is_integer():
        return float(2 * p + 1), float(2 * p + 1)
    cap = min(p, alpha + 1)
    proved = min(gamma * sigma, p + 1) + cap
    conjectured = min(gamma * (sigma + alpha + 1), p + 1 + cap)
    return float(proved), float(conjectured)


def eoc(errors: Sequence[Optional[float]]) -> list[Optional[float]]:
    """log2(e_{i-1}/e_i); None where undefined (first row, zero or missing errors)."""
    out: list[Optional[float]] = [None]
    for prev, cur in zip(errors[:-1], errors[1:]):
        if prev and cur and prev > 0 and cur > 0:
            out.append(math.log(prev / cur) / math.log(2))
        else:
            out.append(None)
    return out


@dataclass(frozen=True)
class StudyPlan:
    problem: ProblemSpec
    degree: int = 1
    gamma: float = 1.0
    levels: tuple = (2, 5)
    metrics: tuple = ("nodal", "l2")
    dual: bool = False
    zT: float = 1.0
    dual_exact: Optional[Callable] = None
    quad_order: Optional[int] = None
    workers: int = 1

    def __post_init__(self):
        if self.workers < 1:
            raise ValueError("workers must be positive")
        lo, hi = self.levels
        if not 1 <= lo <= hi <= MAX_LEVEL:
            raise ValueError(f"levels must satisfy 1 <= lo <= hi <= {MAX_LEVEL}, got {self.levels}")
        bad = set(self.metrics) - {"nodal", "l2"}
        if bad:
            raise ValueError(f"unknown metrics {sorted(bad)}")

    def options(self, degree: Optional[int] = None) -> SolveOptions:
        return SolveOptions(degree=self.degree if degree is None else degree,
                            quad_order=self.quad_order)

    def describe(self) -> dict:
        prob = self.problem
        return {
            "problem": prob.name,
            "alpha": prob.alpha,
            "T": prob.T,
            "degree": self.degree,
            "gamma": self.gamma,
            "levels": list(self.levels),
            "metrics": list(self.metrics),
            "dual": self.dual,
            "zT": self.zT if self.dual else None,
            "quad_order": self.options().points(),
        }


@dataclass
class LevelRow:
    i: int
    N: int
    nodal_error: Optional[float]
    nodal_eoc: Optional[float]
    l2_error: Optional[float]
    l2_eoc: Optional[float]
    seconds: float


@dataclass
class ConvergenceReport:
    rows: list = field(default_factory=list)
    predicted: Optional[tuple] = None
    config: dict = field(default_factory=dict)

    def terminal_eoc(self, metric: str = "nodal") -> Optional[float]:
        return getattr(self.rows[-1], f"{metric}_eoc") if self.rows else None

    def column(self, name: str) -> list:
        return [getattr(r, name) for r in self.rows]

    def to_dict(self) -> dict:
        return {"config": self.config,
                "predicted": list(self.predicted) if self.predicted is not None else None,
                "rows": [asdict(r) for r in self.rows]}

    @classmethod
    def from_dict(cls, d: dict) -> "ConvergenceReport":
        pred = d.get("predicted")
        return cls(rows=[LevelRow(**r) for r in d.get("rows", [])],
                   predicted=tuple(pred) if pred is not None else None,
                   config=d.get("config", {}))

    def same_numbers(self, other: "ConvergenceReport") -> bool:
        """Equality ignoring wall-clock timings."""
        strip = lambda rep: [(r.i, r.N, r.nodal_error, r.nodal_eoc, r.l2_error, r.l2_eoc)
                             for r in rep.rows]
        return (strip(self) == strip(other) and self.predicted == other.predicted
                and self.config == other.config)


def _fill_eocs(rows: list):
    for name in ("nodal", "l2"):
        rates = eoc([getattr(r, f"{name}_error") for r in rows])
        for r, v in zip(rows, rates):
            setattr(r, f"{name}_eoc", v)


def _errors(sol: DgSolution, ref, metrics) -> tuple:
    """Nodal and L2 errors against a callable or a finer DgSolution."""
    nodal = l2 = None
    if "nodal" in metrics:
        if isinstance(ref, DgSolution):
            target = [ref.eval(t, "left") for t in sol.mesh.points[1:]]
            nodal = float(max(abs(u - v) for u, v in zip(sol.left_traces(), target)))
        else:
            nodal = nodal_error(sol, ref)[1]
    if "l2" in metrics:
        l2 = l2_error(sol, ref)
    return nodal, l2


def _ladder(plan: StudyPlan, solve: Callable, reference) -> ConvergenceReport:
    def level(i):
        mesh = build_graded(plan.problem.T, 2**i, plan.gamma)
        start = time.perf_counter()
        try:
            sol = solve(mesh, plan.options())
        except NumericalError as exc:
            raise NumericalError(f"level i={i}: {exc}", exc.interval) from exc
        seconds = time.perf_counter() - start
        nodal, l2 = _errors(sol, reference, plan.metrics)
        return LevelRow(i, 2**i, nodal, None, l2, None, seconds)

    lo, hi = plan.levels
    levels = range(lo, hi + 1)
    if plan.workers > 1:
        # levels are independent; map keeps the row order
        with ThreadPoolExecutor(plan.workers) as pool:
            rows = list(pool.map(level, levels))
    else:
        rows = [level(i) for i in levels]
    _fill_eocs(rows)
    return ConvergenceReport(rows=rows, config=plan.describe())


def _reference_solution(plan: StudyPlan, solve: Callable) -> DgSolution:
    """Same grading, level hi+2, degree p+1."""
    mesh = build_graded(plan.problem.T, 2 ** (plan.levels[1] + 2), plan.gamma)
    return solve(mesh, plan.options(plan.degree + 1))


def run_study(plan: StudyPlan) -> ConvergenceReport:
    prob = plan.problem

    def solve(mesh, opts):
        return dg_solve(prob, mesh, opts)

    reference = prob.exact if prob.exact is not None else _reference_solution(plan, solve)
    report = _ladder(plan, solve, reference)
    sigma = prob.sigma if prob.sigma is not None else min(prob.alpha + 1, 2.0)
    report.predicted = predicted_order(plan.degree, prob.alpha, sigma, plan.gamma)
    report.config["reference"] = "exact" if prob.exact is not None else "refined"
    return report


def run_dual_study(plan: StudyPlan) -> ConvergenceReport:
    """L2 convergence of the discrete dual solution."""
    prob = plan.problem

    def solve(mesh, opts):
        return dual_solve(prob, mesh, plan.zT, opts)

    if plan.dual_exact is not None:
        reference = plan.dual_exact
    else:
        reference = _reference_solution(plan, solve)
    report = _ladder(plan, solve, reference)
    alpha = prob.alpha
    floor = alpha + 1 if alpha < 1 else plan.degree + 1
    report.predicted = (float(floor), float(floor))
    report.config["reference"] = "exact" if plan.dual_exact is not None else "refined"
    report.config["dual"] = True
    return report


def dual_rate_ok(report: ConvergenceReport, tol: float = 0.25) -> bool:
    rate = report.terminal_eoc("l2")
    return rate is not None and rate >= report.predicted[0] - tol


def _fmt(v, spec):
    return "" if v is None else format(v, spec)


def to_csv(report: ConvergenceReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in report.rows:
        w.writerow([r.i, r.N, _fmt(r.nodal_error, ".6e"), _fmt(r.nodal_eoc, ".4f"),
                    _fmt(r.l2_error, ".6e"), _fmt(r.l2_eoc, ".4f"), f"{r.seconds:.4f}"])
    return buf.getvalue()


def to_markdown(report: ConvergenceReport) -> str:
    cfg = report.config
    head = []
    if cfg:
        head.append(f"**{cfg.get('problem', '?')}**: alpha={cfg.get('alpha')}, "
                    f"p={cfg.get('degree')}, gamma={cfg.get('gamma')}")
    if report.predicted is not None:
        head.append(f"predicted order: proved {report.predicted[0]:.4g}, "
                    f"observed {report.predicted[1]:.4g}")
    lines = ["| i | N | nodal error | rate | L2 error | rate |", "|---|---|---|---|---|---|"]
    for r in report.rows:
        lines.append(f"| {r.i} | {r.N} | {_fmt(r.nodal_error, '.3e')} | {_fmt(r.nodal_eoc, '.3f')} "
                     f"| {_fmt(r.l2_error, '.3e')} | {_fmt(r.l2_eoc, '.3f')} |")
    return "\n\n".join(head + ["\n".join(lines)]) + "\n"


def emit(report: ConvergenceReport, fmt: str, path) -> Path:
    if fmt == "csv":
        text = to_csv(report)
    elif fmt == "json":
        text = json.dumps(report.to_dict(), indent=2)
    elif fmt == "md":
        text = to_markdown(report)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    path = Path(path)
    path.write_text(text)
    return path


def load_report(path) -> ConvergenceReport:
    return ConvergenceReport.from_dict(json.loads(Path(path).read_text()))
