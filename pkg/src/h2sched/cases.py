"""Builders for the bundled off-grid case study and its synthetic variants.

Topology (buses 1-9, reference at the storage bus 8)::

    WT 1-4 --+
    PV 5 ----+-- 6 ---- 8 (ES, grid-forming)
             |
             +== long line == 7 (CB + SVC) -- 9 (4 x 5 MW electrolyzers)

All renewable profiles produced here are synthetic.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fleet import ElectrolyzerParams, STATE_CODES
from .elz_phys import State
from .grid import (SVC, Branch, Bus, CapacitorBank, NetworkModel, PVPlant, ResourceParams,
                   Storage, WindTurbine)
from .scenario import Economics, InitialConditions, Scenario, ScenarioTimeSeries


@dataclass(frozen=True)
class LineData:
    """35 kV overhead-line data; converted to per unit on the network base."""
    r_ohm_km: float = 0.17
    x_ohm_km: float = 0.39
    hub_km: float = 1.0  # ES bus to collector
    feeder_km: float = 2.0  # each WT/PV feeder
    trunk_km: float = 8.0  # collector to compensation bus
    plant_km: float = 2.0  # compensation bus to electrolyzer plant


def case_network(lines: LineData = LineData(), base_mva: float = 100.0, base_kv: float = 35.0) -> NetworkModel:
    z_base = base_kv**2 / base_mva

    def br(a, b, km):
        return Branch(a, b, lines.r_ohm_km * km / z_base, lines.x_ohm_km * km / z_base)

    branches = [br(8, 6, lines.hub_km)]
    branches += [br(6, k, lines.feeder_km) for k in (1, 2, 3, 4, 5)]
    branches += [br(6, 7, lines.trunk_km), br(7, 9, lines.plant_km)]
    buses = [Bus(k) for k in range(1, 10)]
    return NetworkModel(buses, branches, ref_bus=8, plant_bus=9, base_mva=base_mva, base_kv=base_kv)


def case_resources() -> ResourceParams:
    return ResourceParams(
        wind=[WindTurbine(k, 6.25) for k in (1, 2, 3, 4)],
        pv=[PVPlant(5, 5.0, 25.8)],
        storage=[Storage(8, s_mva=2.5, p_in_max=2.5, p_out_max=2.5, eta_in=0.95, eta_out=0.95,
                         soc_min=0.5, soc_max=4.75, soc_init=2.5)],
        cbs=[CapacitorBank(7, 0.5, 6, 2, 0)],
        svcs=[SVC(7, 1.0)],
    )


def _smooth_noise(rng, n, scale, corr=0.75):
    out = np.zeros(n)
    e = 0.0
    for t in range(n):
        e = corr * e + rng.normal(0.0, scale)
        out[t] = e
    return out


def base_profiles(horizon: int = 24):
    """Deterministic wind/PV availability shaped like a windy night and a sunny noon."""
    h = np.arange(horizon)
    # capacity factor: strong at night, a lull in the late morning, recovering in the evening
    cf = 0.58 + 0.22 * np.cos(2 * np.pi * (h - 2) / 24) + 0.08 * np.sin(2 * np.pi * h / 8)
    offsets = np.array([0.0, 0.03, -0.02, 0.05])
    wind = np.clip(cf[None, :] + offsets[:, None] * np.cos(h / 3.0)[None, :], 0.05, 1.0) * 6.25
    sun = np.clip(np.sin(np.pi * (h - 6) / 13), 0.0, None) ** 1.3
    pv = (5.0 * 0.9 * sun)[None, :]
    ambient = 25.0 + 0.0 * h
    return wind, pv, ambient


def random_profiles(seed: int, horizon: int = 24):
    """Synthetic day with seeded weather; wind level and variability vary by seed."""
    rng = np.random.default_rng(seed)
    h = np.arange(horizon)
    level = rng.uniform(0.45, 0.72)
    phase = rng.uniform(0, 24)
    cf = level + rng.uniform(0.1, 0.25) * np.cos(2 * np.pi * (h - phase) / 24)
    cf = cf + _smooth_noise(rng, horizon, 0.05)
    wind = np.stack([np.clip(cf + _smooth_noise(rng, horizon, 0.02), 0.03, 1.0) for _ in range(4)]) * 6.25
    clouds = np.clip(1.0 - np.abs(_smooth_noise(rng, horizon, 0.15)), 0.2, 1.0)
    sun = np.clip(np.sin(np.pi * (h - 6) / 13), 0.0, None) ** 1.3
    pv = (5.0 * 0.9 * sun * clouds)[None, :]
    ambient = np.full(horizon, 25.0)
    return wind, pv, ambient


def case_study(profiles=None, name: str = "case_study", horizon: int = 24, lines: LineData = LineData(),
               meta: dict | None = None) -> Scenario:
    wind, pv, amb = profiles if profiles is not None else base_profiles(horizon)
    units = [ElectrolyzerParams() for _ in range(4)]
    init = InitialConditions(
        states=np.array([STATE_CODES[State.IDLE]] * 4),
        temperatures=np.full(4, 25.0),
        soc=np.array([2.5]),
        cb_counts=np.array([0]),
    )
    return Scenario(name=name, units=units, network=case_network(lines), resources=case_resources(),
                    series=ScenarioTimeSeries(np.round(wind, 4), np.round(pv, 4), np.asarray(amb, float)),
                    economics=Economics(), horizon=horizon, dt=1.0, initial=init,
                    meta={"synthetic": True, **(meta or {})})
