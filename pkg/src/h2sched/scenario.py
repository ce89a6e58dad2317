"""Scenario documents: one JSON file with named sections.

``plant``       per-unit parameter overrides and the plant bus
``network``     buses, branches, reference bus, per-unit bases
``devices``     wind, pv, storage, cbs, svcs placements and ratings
``series``      per-step available wind/PV power [MW] and stack-hall temperature
``economics``   prices and switching costs [CNY]
``horizon``     number of steps and step length [h]
``initial``     unit states/temperatures, storage SOC, capacitor bank counts
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import elz_phys as ep
from . import rectifier as rc
from .errors import ScenarioError
from .fleet import STATE_CODES, ElectrolyzerParams
from .grid import (SVC, Branch, Bus, CapacitorBank, NetworkModel, PVPlant, ResourceParams,
                   Storage, WindTurbine)

SECTIONS = ("plant", "network", "devices", "series", "economics", "horizon", "initial")


@dataclass(frozen=True)
class Economics:
    c_h2: float = 29.0  # CNY/kg
    c_su: float = 1000.0  # CNY per startup
    c_sd: float = 0.0
    c_cb: float = 2.0  # CNY per bank switched


@dataclass
class ScenarioTimeSeries:
    wind_mw: np.ndarray  # (n_wt, T)
    pv_mw: np.ndarray  # (n_pv, T)
    ambient_c: np.ndarray  # (T,)


@dataclass
class InitialConditions:
    states: np.ndarray  # state codes
    temperatures: np.ndarray
    soc: np.ndarray
    cb_counts: np.ndarray


@dataclass
class Scenario:
    name: str
    units: list[ElectrolyzerParams]
    network: NetworkModel
    resources: ResourceParams
    series: ScenarioTimeSeries
    economics: Economics
    horizon: int
    dt: float
    initial: InitialConditions
    meta: dict = field(default_factory=dict)

    @property
    def n_units(self) -> int:
        return len(self.units)

    def truncated(self, steps: int) -> "Scenario":
        """The first ``steps`` steps of this scenario."""
        if not 1 <= steps <= self.horizon:
            raise ValueError(f"horizon must be in [1, {self.horizon}], got {steps}")
        ser = self.series
        cut = ScenarioTimeSeries(ser.wind_mw[:, :steps].copy(), ser.pv_mw[:, :steps].copy(),
                                 ser.ambient_c[:steps].copy())
        return replace(self, series=cut, horizon=steps)


def _pack(cls, d: dict, loc: str, problems: list):
    names = {f.name for f in fields(cls)}
    extra = sorted(set(d) - names)
    for k in extra:
        problems.append((f"{loc}.{k}", "unknown parameter"))
    try:
        return cls(**{k: v for k, v in d.items() if k in names})
    except (ValueError, TypeError) as exc:
        problems.append((loc, str(exc)))
        return None


def _series(d, key, loc, rows, horizon, problems, allow_negative=False):
    arr = d.get(key)
    if arr is None:
        problems.append((f"{loc}.{key}", "missing"))
        return None
    try:
        a = np.asarray(arr, dtype=float)
    except (ValueError, TypeError):
        problems.append((f"{loc}.{key}", "not a numeric array"))
        return None
    if rows is not None:
        if a.size == 0 and rows == 0:
            return np.zeros((0, horizon))
        if a.ndim != 2 or a.shape[0] != rows:
            problems.append((f"{loc}.{key}", f"expected {rows} rows, one per device"))
            return None
        for r in range(rows):
            if a.shape[1] != horizon:
                problems.append((f"{loc}.{key}[{r}]", f"length {a.shape[1]} != horizon {horizon}"))
                return None
    elif a.ndim != 1 or len(a) != horizon:
        problems.append((f"{loc}.{key}", f"length {a.size} != horizon {horizon}"))
        return None
    if not np.all(np.isfinite(a)):
        problems.append((f"{loc}.{key}", "non-finite value"))
    elif not allow_negative and np.any(a < 0):
        idx = np.argwhere(a < 0)[0]
        problems.append((f"{loc}.{key}" + "".join(f"[{i}]" for i in idx), "negative value"))
    return a


def scenario_from_dict(d: dict, name: str = "scenario") -> Scenario:
    """Parse and validate; raises :class:`ScenarioError` listing every problem."""
    problems: list[tuple[str, str]] = []
    for s in SECTIONS:
        if s not in d:
            problems.append((s, "missing section"))
    if problems:
        raise ScenarioError(problems)

    h = d["horizon"]
    horizon = int(h.get("steps", 0))
    dt = float(h.get("dt_hours", 1.0))
    if horizon < 1:
        problems.append(("horizon.steps", "must be at least 1"))
    if dt <= 0:
        problems.append(("horizon.dt_hours", "must be positive"))

    econ = _pack(Economics, d["economics"], "economics", problems)
    if econ is not None:
        for f in fields(Economics):
            if getattr(econ, f.name) < 0:
                problems.append((f"economics.{f.name}", "price must be non-negative"))

    units = []
    plant = d["plant"]
    for k, u in enumerate(plant.get("units", [])):
        loc = f"plant.units[{k}]"
        st = _pack(ep.StackParams, u.get("stack", {}), f"{loc}.stack", problems)
        ax = _pack(ep.AuxParams, u.get("aux", {}), f"{loc}.aux", problems)
        rp = _pack(rc.RectifierParams, u.get("rectifier", {}), f"{loc}.rectifier", problems)
        if st and ax and rp:
            units.append(ElectrolyzerParams(st, ax, rp))
    if not plant.get("units"):
        problems.append(("plant.units", "at least one electrolyzer required"))

    net = d["network"]
    bus_ids = set()
    buses = []
    for k, b in enumerate(net.get("buses", [])):
        try:
            bus = Bus(int(b["id"]), float(b.get("v_min", 0.95)), float(b.get("v_max", 1.05)))
        except (KeyError, TypeError, ValueError) as exc:
            problems.append((f"network.buses[{k}]", f"bad bus entry: {exc}"))
            continue
        if not 0 < bus.v_min < bus.v_max:
            problems.append((f"network.buses[{k}]", "voltage limits must satisfy 0 < v_min < v_max"))
        if bus.id in bus_ids:
            problems.append((f"network.buses[{k}].id", f"duplicate bus {bus.id}"))
        bus_ids.add(bus.id)
        buses.append(bus)
    branches = []
    for k, b in enumerate(net.get("branches", [])):
        loc = f"network.branches[{k}]"
        try:
            br = Branch(int(b["from"]), int(b["to"]), float(b["r"]), float(b["x"]))
        except (KeyError, TypeError, ValueError) as exc:
            problems.append((loc, f"bad branch entry: {exc}"))
            continue
        for end in ("from", "to"):
            if int(b[end]) not in bus_ids:
                problems.append((f"{loc}.{end}", f"unknown bus {b[end]}"))
        branches.append(br)
    ref_bus = net.get("ref_bus")
    plant_bus = plant.get("bus")
    if ref_bus not in bus_ids:
        problems.append(("network.ref_bus", f"unknown bus {ref_bus}"))
    if plant_bus not in bus_ids:
        problems.append(("plant.bus", f"unknown bus {plant_bus}"))

    dev = d["devices"]
    kinds = {"wind": WindTurbine, "pv": PVPlant, "storage": Storage, "cbs": CapacitorBank, "svcs": SVC}
    res = ResourceParams()
    for kind, cls in kinds.items():
        for k, item in enumerate(dev.get(kind, [])):
            loc = f"devices.{kind}[{k}]"
            obj = _pack(cls, item, loc, problems)
            if obj is None:
                continue
            if obj.bus not in bus_ids:
                problems.append((f"{loc}.bus", f"unknown bus {obj.bus}"))
            for f in fields(cls):
                v = getattr(obj, f.name)
                if f.name != "bus" and isinstance(v, (int, float)) and v < 0:
                    problems.append((f"{loc}.{f.name}", "must be non-negative"))
            if isinstance(obj, Storage):
                if not obj.soc_min <= obj.soc_init <= obj.soc_max:
                    problems.append((f"{loc}.soc_init", "outside [soc_min, soc_max]"))
                if not 0 < obj.eta_in <= 1 or not 0 < obj.eta_out <= 1:
                    problems.append((loc, "efficiencies must lie in (0, 1]"))
            if isinstance(obj, CapacitorBank) and not 0 <= obj.n_init <= obj.n_max:
                problems.append((f"{loc}.n_init", "outside [0, n_max]"))
            getattr(res, kind).append(obj)

    ser = d["series"]
    wind = _series(ser, "wind_mw", "series", len(res.wind), horizon, problems)
    pv = _series(ser, "pv_mw", "series", len(res.pv), horizon, problems)
    amb = _series(ser, "ambient_c", "series", None, horizon, problems, allow_negative=True)
    for arr, devs, key in ((wind, res.wind, "wind_mw"), (pv, res.pv, "pv_mw")):
        if arr is not None and len(devs) == len(arr):
            for k, dv in enumerate(devs):
                if arr.shape[1] and np.max(arr[k]) > dv.s_mva + 1e-9:
                    problems.append((f"series.{key}[{k}]", f"exceeds rating {dv.s_mva} MVA"))

    ini = d["initial"]
    n_u = len(plant.get("units", []))
    enc = {s.value: c for s, c in STATE_CODES.items()}
    states = ini.get("states", ["Idle"] * n_u)
    if len(states) != n_u:
        problems.append(("initial.states", f"expected {n_u} entries"))
    codes = []
    for k, s in enumerate(states):
        if s not in enc:
            problems.append((f"initial.states[{k}]", f"unknown state {s!r}"))
        else:
            codes.append(enc[s])
    temps = np.asarray(ini.get("temperatures_c", [25.0] * n_u), dtype=float)
    if len(temps) != n_u:
        problems.append(("initial.temperatures_c", f"expected {n_u} entries"))
    soc = np.asarray(ini.get("soc_mwh", [s.soc_init for s in res.storage]), dtype=float)
    if len(soc) != len(res.storage):
        problems.append(("initial.soc_mwh", f"expected {len(res.storage)} entries"))
    else:
        for k, (v, s) in enumerate(zip(soc, res.storage)):
            if not s.soc_min - 1e-9 <= v <= s.soc_max + 1e-9:
                problems.append((f"initial.soc_mwh[{k}]", "outside SOC bounds"))
    cbn = np.asarray(ini.get("cb_counts", [c.n_init for c in res.cbs]), dtype=int)
    if len(cbn) != len(res.cbs):
        problems.append(("initial.cb_counts", f"expected {len(res.cbs)} entries"))
    for k, (u, t0, c) in enumerate(zip(units, temps, codes)):
        if c == STATE_CODES[ep.State.PRODUCTION] and not u.stack.t_min <= t0 <= u.stack.t_max:
            problems.append((f"initial.temperatures_c[{k}]", "producing unit outside temperature limits"))

    if problems:
        raise ScenarioError(problems)
    network = NetworkModel(buses, branches, int(ref_bus), int(plant_bus),
                           float(net.get("base_mva", 100.0)), float(net.get("base_kv", 35.0)))
    return Scenario(
        name=d.get("name", name), units=units, network=network, resources=res,
        series=ScenarioTimeSeries(wind.reshape(len(res.wind), horizon), pv.reshape(len(res.pv), horizon), amb),
        economics=econ, horizon=horizon, dt=dt,
        initial=InitialConditions(np.array(codes, dtype=int), temps, soc, cbn),
        meta=d.get("meta", {}),
    )


def _diff(obj, default) -> dict:
    a, b = asdict(obj), asdict(default)
    return {k: v for k, v in a.items() if v != b[k]}


def scenario_to_dict(s: Scenario) -> dict:
    enc = {c: st.value for st, c in STATE_CODES.items()}
    net = s.network
    return {
        "name": s.name,
        "meta": s.meta,
        "horizon": {"steps": s.horizon, "dt_hours": s.dt},
        "economics": asdict(s.economics),
        "plant": {
            "bus": net.plant_bus,
            "units": [{"stack": _diff(u.stack, ep.StackParams()), "aux": _diff(u.aux, ep.AuxParams()),
                       "rectifier": _diff(u.rectifier, rc.RectifierParams())} for u in s.units],
        },
        "network": {
            "base_mva": net.base_mva, "base_kv": net.base_kv, "ref_bus": net.ref_bus,
            "buses": [{"id": b.id, "v_min": b.v_min, "v_max": b.v_max} for b in net.buses],
            "branches": [{"from": b.from_bus, "to": b.to_bus, "r": b.r, "x": b.x} for b in net.branches],
        },
        "devices": {k: [asdict(x) for x in getattr(s.resources, k)]
                    for k in ("wind", "pv", "storage", "cbs", "svcs")},
        "series": {"wind_mw": np.round(s.series.wind_mw, 6).tolist(),
                   "pv_mw": np.round(s.series.pv_mw, 6).tolist(),
                   "ambient_c": np.round(s.series.ambient_c, 6).tolist()},
        "initial": {"states": [enc[int(c)] for c in s.initial.states],
                    "temperatures_c": s.initial.temperatures.tolist(),
                    "soc_mwh": s.initial.soc.tolist(),
                    "cb_counts": s.initial.cb_counts.tolist()},
    }


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        d = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError([(f"{path.name}:{exc.lineno}:{exc.colno}", f"invalid JSON: {exc.msg}")]) from exc
    if not isinstance(d, dict):
        raise ScenarioError([("$", "top level must be an object")])
    return scenario_from_dict(d, name=path.stem)


def save_scenario(s: Scenario, path) -> None:
    Path(path).write_text(json.dumps(scenario_to_dict(s), indent=1) + "\n")


def validate_file(path) -> list[tuple[str, str]]:
    """Every problem in a scenario file (empty when clean)."""
    try:
        load_scenario(path)
    except ScenarioError as exc:
        return list(exc.problems)
    except OSError as exc:
        return [("$", str(exc))]
    return []
