"""Command-line front end.

    h2sched validate SCENARIO.json
    h2sched optimize SCENARIO.json [--baseline] [--out DIR] ...
    h2sched batch DIR [--out DIR] ...

Exit codes: 0 ok, 1 validation error, 2 solver failure, 3 simulation violation.
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np

from .errors import ScenarioError, SolverError
from .micp import BACKENDS, Budget
from .optimizer import OptimizerOptions
from .runner import RunResult, run_methods
from .scenario import load_scenario, validate_file

EXIT_OK, EXIT_INVALID, EXIT_SOLVER, EXIT_VIOLATION = 0, 1, 2, 3
log = logging.getLogger("h2sched")


def _grid(text: str) -> tuple[int, int]:
    try:
        a, b = text.lower().split("x")
        n_i, n_t = int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected IxT such as 7x5, got {text!r}") from None
    if n_i < 3 or n_t < 3:
        raise argparse.ArgumentTypeError("each grid dimension needs at least 3 points")
    return n_i, n_t


def _positive(text: str) -> float:
    v = float(text)
    if v <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="h2sched", description="Active/reactive scheduling of an off-grid "
                                 "electrolysis plant and its network.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="check a scenario file")
    v.add_argument("scenario", type=Path)

    solver = argparse.ArgumentParser(add_help=False)
    solver.add_argument("--budget-seconds", type=_positive, default=300.0, help="solver time limit per method")
    solver.add_argument("--gap", type=float, default=0.01, help="relative MIP gap")
    solver.add_argument("--seed", type=int, default=0)
    solver.add_argument("--pwl-grid", type=_grid, default=(7, 5), metavar="IxT",
                        help="breakpoints in current x temperature (default 7x5)")
    solver.add_argument("--backend", choices=sorted(BACKENDS), default=None)
    solver.add_argument("--horizon", type=int, default=None, help="use only the first N steps")
    solver.add_argument("--out", type=Path, default=Path("out"))

    o = sub.add_parser("optimize", parents=[solver], help="schedule one scenario and simulate it")
    o.add_argument("scenario", type=Path)
    o.add_argument("--baseline", action="store_true", help="also run the network-blind plant schedule")

    b = sub.add_parser("batch", parents=[solver], help="coordinated vs baseline over a directory")
    b.add_argument("directory", type=Path)
    return ap


def _options(args) -> OptimizerOptions:
    return OptimizerOptions(pwl_grid=args.pwl_grid, backend=args.backend,
                            budget=Budget(time_limit=args.budget_seconds, mip_rel_gap=args.gap, seed=args.seed))


def _load(path: Path, horizon: int | None):
    scn = load_scenario(path)
    if horizon is not None:
        scn = scn.truncated(horizon)
    return scn


def cmd_validate(args) -> int:
    problems = validate_file(args.scenario)
    for loc, msg in problems:
        print(f"{args.scenario}: {loc}: {msg}")
    if not problems:
        print(f"{args.scenario}: ok")
    return EXIT_INVALID if problems else EXIT_OK


def cmd_optimize(args) -> int:
    try:
        scn = _load(args.scenario, args.horizon)
    except (ScenarioError, ValueError, OSError) as exc:
        for loc, msg in getattr(exc, "problems", [("$", str(exc))]):
            print(f"{args.scenario}: {loc}: {msg}", file=sys.stderr)
        return EXIT_INVALID
    try:
        run = run_methods(scn, _options(args), with_baseline=args.baseline)
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    for p in run.write(args.out):
        log.info("wrote %s", p)
    rep = run.coordinated.report
    s = run.coordinated.result.summary()
    print(f"{scn.name}: {s['status']} (gap {s['gap']:.3%}, {s['runtime_s']:.1f} s); "
          f"hydrogen {rep.hydrogen_kg:.1f} kg, loss ratio {rep.loss_ratio:.2f}%, profit {rep.profit:.0f} CNY")
    if run.comparison is not None:
        print(run.comparison.format())
    bad = rep.violations()
    for f in bad:
        print(f"violation: {f.kind} step {f.step} {f.where}: {f.detail}", file=sys.stderr)
    return EXIT_VIOLATION if bad else EXIT_OK


BATCH_FIELDS = ["scenario", "status", "hydrogen_baseline_kg", "hydrogen_coordinated_kg", "hydrogen_gain_pct",
                "loss_ratio_baseline_pct", "loss_ratio_coordinated_pct", "loss_ratio_change_pp",
                "profit_baseline_cny", "profit_coordinated_cny", "profit_gain_pct", "violations"]


def batch_row(name: str, run: RunResult) -> dict:
    b, c, d = run.baseline.report, run.coordinated.report, run.comparison.delta
    return {"scenario": name, "status": "ok",
            "hydrogen_baseline_kg": b.hydrogen_kg, "hydrogen_coordinated_kg": c.hydrogen_kg,
            "hydrogen_gain_pct": d["hydrogen_pct"],
            "loss_ratio_baseline_pct": b.loss_ratio, "loss_ratio_coordinated_pct": c.loss_ratio,
            "loss_ratio_change_pp": d["loss_ratio_pp"],
            "profit_baseline_cny": b.profit, "profit_coordinated_cny": c.profit, "profit_gain_pct": d["profit_pct"],
            "violations": len(c.violations())}


def mean_row(rows: list[dict]) -> dict | None:
    ok = [r for r in rows if r["status"] == "ok"]
    if not ok:
        return None
    out = {"scenario": "mean", "status": f"{len(ok)}/{len(rows)} ok"}
    for k in BATCH_FIELDS[2:]:
        out[k] = float(np.mean([r[k] for r in ok]))
    return out


def run_batch(directory: Path, opts: OptimizerOptions, horizon: int | None = None,
              out: Path | None = None) -> tuple[list[dict], int]:
    """One row per scenario file (sorted by name) plus a mean row; failures are isolated."""
    rows, code = [], EXIT_OK
    for path in sorted(directory.glob("*.json")):
        blank = {k: "" for k in BATCH_FIELDS} | {"scenario": path.stem}
        try:
            scn = _load(path, horizon)
        except (ScenarioError, ValueError, OSError) as exc:
            rows.append(blank | {"status": f"invalid: {exc}"})
            code = code or EXIT_INVALID
            continue
        try:
            run = run_methods(scn, opts, with_baseline=True)
        except SolverError as exc:
            rows.append(blank | {"status": f"solver failure: {exc}"})
            code = code or EXIT_SOLVER
            continue
        if out is not None:
            run.write(out / path.stem)
        row = batch_row(path.stem, run)
        if row["violations"]:
            code = code or EXIT_VIOLATION
        rows.append(row)
        log.info("%s: hydrogen %+.2f%%, loss ratio %+.2f pp", path.stem, row["hydrogen_gain_pct"],
                 row["loss_ratio_change_pp"])
    m = mean_row(rows)
    if m is not None:
        rows.append(m)
    return rows, code


def write_rows(rows: list[dict], path: Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=BATCH_FIELDS)
        w.writeheader()
        w.writerows(rows)


def cmd_batch(args) -> int:
    if not args.directory.is_dir():
        print(f"{args.directory}: not a directory", file=sys.stderr)
        return EXIT_INVALID
    args.out.mkdir(parents=True, exist_ok=True)
    rows, code = run_batch(args.directory, _options(args), args.horizon, args.out)
    write_rows(rows, args.out / "batch.csv")
    for r in rows:
        if r["status"] == "ok" or r["scenario"] == "mean":
            print(f"{r['scenario']:<24} hydrogen {r['hydrogen_gain_pct']:+7.2f}%   "
                  f"loss ratio {r['loss_ratio_change_pp']:+6.2f} pp   profit {r['profit_gain_pct']:+7.2f}%")
        else:
            print(f"{r['scenario']:<24} {r['status']}")
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if getattr(args, "horizon", None) is not None and args.horizon < 1:
        print("--horizon must be at least 1", file=sys.stderr)
        return EXIT_INVALID
    return {"validate": cmd_validate, "optimize": cmd_optimize, "batch": cmd_batch}[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
