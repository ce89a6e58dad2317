"""Optimize-then-simulate pipeline shared by the command line and the scripts."""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, replace
from pathlib import Path

from .optimizer import OptimizerOptions, ScheduleResult, optimize
from .scenario import Scenario
from .simulator import (ComparisonTable, SimulationOptions, SimulationReport, baseline_traditional,
                        compare, simulate)


@dataclass
class MethodRun:
    result: ScheduleResult
    report: SimulationReport

    @property
    def profit_gap(self) -> float:
        """Relative gap between the optimizer's profit and the simulated profit."""
        sim = self.report.profit
        return abs(self.result.model_profit - sim) / abs(sim) if sim else 0.0

    def summary(self) -> dict:
        return {"solver": self.result.summary(), "simulation": self.report.summary(),
                "model_vs_simulation_profit_gap": self.profit_gap}


@dataclass
class RunResult:
    scenario: str
    coordinated: MethodRun
    baseline: MethodRun | None
    seconds: float

    @property
    def comparison(self) -> ComparisonTable | None:
        if self.baseline is None:
            return None
        return compare(self.baseline.report, self.coordinated.report)

    def summary(self) -> dict:
        out = {"scenario": self.scenario, "runtime_s": self.seconds,
               "coordinated": self.coordinated.summary()}
        if self.baseline is not None:
            out["baseline"] = self.baseline.summary()
            out["comparison"] = self.comparison.to_dict()
        return out

    def write(self, out_dir) -> list[Path]:
        """Schedule JSON, per-step simulation CSV and summary JSON (plus baseline files)."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        written = []
        runs = [("", self.coordinated)] + ([("baseline_", self.baseline)] if self.baseline else [])
        for prefix, run in runs:
            sched = {"scenario": self.scenario, "method": run.result.method,
                     "status": run.result.solution.status,
                     "schedule": run.result.schedule.to_dict(), "setpoints": run.result.setpoints.to_dict()}
            p = out / f"{prefix}schedule.json"
            p.write_text(json.dumps(sched, indent=1) + "\n")
            c = out / f"{prefix}simulation.csv"
            run.report.to_csv(c)
            written += [p, c]
        s = out / "summary.json"
        s.write_text(json.dumps(self.summary(), indent=1, default=float) + "\n")
        return written + [s]


def run_methods(scn: Scenario, opts: OptimizerOptions | None = None, with_baseline: bool = True,
                sim_opts: SimulationOptions | None = None) -> RunResult:
    opts = opts or OptimizerOptions()
    t0 = time.perf_counter()
    co = optimize(scn, replace(opts, method="coordinated"))
    co_run = MethodRun(co, simulate(scn, co.schedule, co.setpoints, "coordinated", sim_opts))
    base_run = None
    if with_baseline:
        bl = baseline_traditional(scn, replace(opts, method="baseline"))
        base_run = MethodRun(bl, simulate(scn, bl.schedule, bl.setpoints, "baseline", sim_opts))
    return RunResult(scn.name, co_run, base_run, time.perf_counter() - t0)
