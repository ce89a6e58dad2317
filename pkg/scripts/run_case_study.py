"""Coordinated vs network-blind scheduling on the bundled case study.

    python3 scripts/run_case_study.py [--budget-seconds 300] [--out out/case_study]
"""
import argparse
from importlib import resources
from pathlib import Path

from h2sched.micp import Budget
from h2sched.optimizer import OptimizerOptions
from h2sched.runner import run_methods
from h2sched.scenario import load_scenario


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--budget-seconds", type=float, default=300.0)
    ap.add_argument("--out", type=Path, default=Path("out/case_study"))
    args = ap.parse_args()

    scn = load_scenario(resources.files("h2sched") / "data" / "case_study.json")
    run = run_methods(scn, OptimizerOptions(budget=Budget(time_limit=args.budget_seconds)))
    run.write(args.out)
    print(run.comparison.format())
    for name, mr in (("baseline", run.baseline), ("coordinated", run.coordinated)):
        s = mr.result.summary()
        kinds = mr.report.summary()["violations"]
        print(f"{name:<12} solver {s['status']}, gap {s['gap']:.2%}; model vs simulation profit "
              f"{mr.profit_gap:.2%}; violations {kinds or 'none'}")
    print(f"total {run.seconds:.0f} s; files in {args.out}")


if __name__ == "__main__":
    main()
