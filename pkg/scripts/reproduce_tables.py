"""Run the benchmark refinement studies and write markdown/CSV tables.

    python3 scripts/reproduce_tables.py --out results/ [--only ex1c1-a2] [--workers 2]
"""

from __future__ import annotations

import argparse
import time
from pathlib import Path

from vidg import StudyPlan, builtin, emit, run_dual_study, run_study
from vidg.study import to_markdown

# (label, problem, alpha, degree, gamma, levels)
STUDIES = [
    ("ex1c1-a2-p1", "ex1c1", 2.0, 1, 1.0, (2, 5)),
    ("ex1c1-a2-p2", "ex1c1", 2.0, 2, 1.0, (2, 5)),
    ("ex1c1-a2-p3", "ex1c1", 2.0, 3, 1.0, (2, 5)),
    ("ex1c1-a0.2-p1-g1", "ex1c1", 0.2, 1, 1.0, (6, 9)),
    ("ex1c1-a0.2-p1-g1.25", "ex1c1", 0.2, 1, 1.25, (6, 9)),
    ("ex1c1-a0.2-p1-g1.4", "ex1c1", 0.2, 1, 1.4, (6, 9)),
    ("ex1c1-a0.5-p2-g1", "ex1c1", 0.5, 2, 1.0, (6, 8)),
    ("ex1c1-a0.5-p2-g4/3", "ex1c1", 0.5, 2, 4 / 3, (6, 8)),
    ("ex1c1-a0.5-p2-g1.5", "ex1c1", 0.5, 2, 1.5, (6, 8)),
    ("ex1c1-a0.5-p2-g5/3", "ex1c1", 0.5, 2, 5 / 3, (6, 8)),
    ("ex1c1-a0.5-p3-g1", "ex1c1", 0.5, 3, 1.0, (4, 6)),
    ("ex1c1-a0.5-p3-g4/3", "ex1c1", 0.5, 3, 4 / 3, (4, 6)),
    ("ex1c1-a0.5-p3-g11/6", "ex1c1", 0.5, 3, 11 / 6, (4, 6)),
    ("ex1c1-a0.5-p3-g2", "ex1c1", 0.5, 3, 2.0, (3, 5)),
    ("ex1c2-a0.2-p1-g1", "ex1c2", 0.2, 1, 1.0, (6, 9)),
    ("ex1c2-a0.2-p1-g1.25", "ex1c2", 0.2, 1, 1.25, (6, 9)),
    ("ex1c2-a0.5-p2-g1", "ex1c2", 0.5, 2, 1.0, (6, 8)),
    ("ex1c2-a0.5-p2-g1.5", "ex1c2", 0.5, 2, 1.5, (6, 8)),
    ("ex1c2-a0.5-p3-g11/6", "ex1c2", 0.5, 3, 11 / 6, (4, 6)),
    ("ex2-a0.2-p1-g1", "ex2", 0.2, 1, 1.0, (6, 9)),
    ("ex2-a0.2-p1-g1.25", "ex2", 0.2, 1, 1.25, (6, 9)),
    ("ex2-a0.5-p2-g1.5", "ex2", 0.5, 2, 1.5, (5, 7)),
    ("ex2-a0.5-p3-g11/6", "ex2", 0.5, 3, 11 / 6, (4, 6)),
    ("ex1c1-a0.5-p0-g1", "ex1c1", 0.5, 0, 1.0, (4, 8)),
]

DUAL = [("dual-a0.5", 0.5), ("dual-a0.9", 0.9)]


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--out", default="results")
    parser.add_argument("--only", help="substring filter on study labels")
    parser.add_argument("--workers", type=int, default=1)
    args = parser.parse_args(argv)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    summary = []
    for label, name, alpha, p, gamma, levels in STUDIES:
        if args.only and args.only not in label:
            continue
        start = time.perf_counter()
        plan = StudyPlan(builtin(name, alpha), degree=p, gamma=gamma, levels=levels, workers=args.workers)
        report = run_study(plan)
        stem = label.replace("/", "_")
        emit(report, "csv", out / f"{stem}.csv")
        summary.append(f"### {label}\n\n{to_markdown(report)}")
        print(f"{label:24s} EOC {report.terminal_eoc():.3f} (predicted {report.predicted[1]:.3f}) "
              f"[{time.perf_counter() - start:.1f}s]")
    for label, alpha in DUAL:
        if args.only and args.only not in label:
            continue
        plan = StudyPlan(builtin("ex1c1", alpha), degree=1, levels=(4, 7), dual=True, zT=1.0)
        report = run_dual_study(plan)
        emit(report, "csv", out / f"{label}.csv")
        summary.append(f"### {label}\n\n{to_markdown(report)}")
        print(f"{label:24s} L2 EOC {report.terminal_eoc('l2'):.3f} (floor {report.predicted[0]:.3f})")
    (out / "tables.md").write_text("\n".join(summary))


if __name__ == "__main__":
    main()
