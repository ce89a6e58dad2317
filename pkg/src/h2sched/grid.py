"""Radial network data, device capability envelopes and nodal injections.

Network quantities are per unit on ``base_mva``; device powers are in MW/MVar.
Branch flows are sending-end quantities from a parent bus toward its child,
with the tree rooted at the grid-forming (reference) bus.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import CapabilityError, ConstraintError, ScenarioError

CAP_TOL = 1e-7


@dataclass(frozen=True)
class Bus:
    id: int
    v_min: float = 0.95
    v_max: float = 1.05

    @property
    def v2_min(self) -> float:
        return self.v_min**2

    @property
    def v2_max(self) -> float:
        return self.v_max**2


@dataclass(frozen=True)
class Branch:
    from_bus: int
    to_bus: int
    r: float
    x: float

    def __post_init__(self):
        if self.r < 0 or self.x < 0:
            raise ValueError(f"branch {self.from_bus}-{self.to_bus}: negative impedance")


@dataclass(frozen=True)
class WindTurbine:
    bus: int
    s_mva: float


@dataclass(frozen=True)
class PVPlant:
    bus: int
    s_mva: float
    theta_deg: float = 25.8


@dataclass(frozen=True)
class Storage:
    bus: int
    s_mva: float
    p_in_max: float
    p_out_max: float
    eta_in: float = 0.95
    eta_out: float = 0.95
    soc_min: float = 0.5  # MWh
    soc_max: float = 4.75
    soc_init: float = 2.5


@dataclass(frozen=True)
class CapacitorBank:
    bus: int
    dq_mvar: float = 0.5
    n_max: int = 6
    n_switch_max: int = 2
    n_init: int = 0


@dataclass(frozen=True)
class SVC:
    bus: int
    q_max: float = 1.0


@dataclass
class ResourceParams:
    wind: list[WindTurbine] = field(default_factory=list)
    pv: list[PVPlant] = field(default_factory=list)
    storage: list[Storage] = field(default_factory=list)
    cbs: list[CapacitorBank] = field(default_factory=list)
    svcs: list[SVC] = field(default_factory=list)

    def buses(self):
        for kind in ("wind", "pv", "storage", "cbs", "svcs"):
            for k, d in enumerate(getattr(self, kind)):
                yield kind, k, d.bus


@dataclass
class NetworkModel:
    buses: list[Bus]
    branches: list[Branch]
    ref_bus: int
    plant_bus: int
    base_mva: float = 100.0
    base_kv: float = 35.0

    def __post_init__(self):
        self.index = {b.id: k for k, b in enumerate(self.buses)}
        problems = []
        if len(self.index) != len(self.buses):
            problems.append(("network.buses", "duplicate bus id"))
        for k, br in enumerate(self.branches):
            for end in (br.from_bus, br.to_bus):
                if end not in self.index:
                    problems.append((f"network.branches[{k}]", f"unknown bus {end}"))
        for tag, b in (("ref_bus", self.ref_bus), ("plant_bus", self.plant_bus)):
            if b not in self.index:
                problems.append((f"network.{tag}", f"unknown bus {b}"))
        if problems:
            raise ScenarioError(problems)
        self._build_tree()

    def _build_tree(self):
        n = len(self.buses)
        if len(self.branches) != n - 1:
            raise ScenarioError([("network.branches", f"radial network needs {n - 1} branches, got {len(self.branches)}")])
        adj: dict[int, list[tuple[int, int]]] = {b.id: [] for b in self.buses}
        for k, br in enumerate(self.branches):
            adj[br.from_bus].append((br.to_bus, k))
            adj[br.to_bus].append((br.from_bus, k))
        parent = {self.ref_bus: None}
        parent_branch = {}
        order = []
        dq = deque([self.ref_bus])
        while dq:
            u = dq.popleft()
            order.append(u)
            for v, k in sorted(adj[u]):
                if v not in parent:
                    parent[v] = u
                    parent_branch[v] = k
                    dq.append(v)
        if len(order) != n:
            raise ScenarioError([("network.branches", "network is not connected")])
        self.order = order  # BFS from the reference bus
        self.parent = parent
        # branch k oriented parent -> child
        self.branch_child = {k: c for c, k in parent_branch.items()}
        self.branch_parent = {k: parent[c] for c, k in parent_branch.items()}
        self.children = {b.id: [] for b in self.buses}
        for c, k in parent_branch.items():
            self.children[parent[c]].append(k)

    @property
    def n_bus(self) -> int:
        return len(self.buses)

    def bus(self, bus_id: int) -> Bus:
        return self.buses[self.index[bus_id]]

    def branch_into(self, bus_id: int) -> int | None:
        for k, c in self.branch_child.items():
            if c == bus_id:
                return k
        return None


# -- capability envelopes ----------------------------------------------------

def wt_envelope(s: float, p: float) -> tuple[float, float]:
    """Reactive range (q_min, q_max) of a wind turbine at active output ``p``."""
    if p < -CAP_TOL or p > s + CAP_TOL:
        raise CapabilityError(f"wind output {p:.6g} MW outside [0, {s:.6g}]")
    return 1.24 * p - 0.91 * s, -0.58 * p + 0.91 * s


def pv_q_limit(s: float, theta_deg: float, p: float) -> float:
    """Largest |q| of a PV plant at active output ``p``."""
    if p < 0:
        raise CapabilityError("PV output must be non-negative")
    circ = math.sqrt(max(s * s - p * p, 0.0))
    return min(circ, p * math.tan(math.radians(theta_deg)))


def pv_envelope(s: float, theta_deg: float, p: float, q: float, tol: float = CAP_TOL) -> bool:
    if p < -tol:
        raise CapabilityError("PV output must be non-negative")
    p = max(p, 0.0)
    return p * p + q * q <= s * s + tol and abs(q) <= p * math.tan(math.radians(theta_deg)) + tol


def es_step(es: Storage, p_in: float, p_out: float, q: float, soc_prev: float, dt: float,
            tol: float = CAP_TOL) -> float:
    """Next state of charge [MWh]; raises on any operating-limit breach."""
    if p_in < -tol or p_out < -tol:
        raise ConstraintError("charge/discharge powers must be non-negative")
    if p_in > tol and p_out > tol:
        raise ConstraintError("simultaneous charge and discharge")
    if math.hypot(p_in, q) > es.s_mva + tol or math.hypot(p_out, q) > es.s_mva + tol:
        raise CapabilityError(f"converter rating {es.s_mva} MVA exceeded")
    if p_in > es.p_in_max + tol or p_out > es.p_out_max + tol:
        raise CapabilityError("charge/discharge power limit exceeded")
    soc = soc_prev + (es.eta_in * p_in - p_out / es.eta_out) * dt
    if soc < es.soc_min - tol or soc > es.soc_max + tol:
        raise ConstraintError(f"SOC breach: {soc:.6g} MWh outside [{es.soc_min}, {es.soc_max}]")
    return soc


def cb_q(n: int, v2: float, dq: float) -> float:
    """Capacitor-bank injection [MVar]; proportional to squared voltage."""
    return n * v2 * dq


def cb_switch_check(cb: CapacitorBank, n_prev: int, n: int):
    if not 0 <= n <= cb.n_max:
        raise ConstraintError(f"bank count {n} outside [0, {cb.n_max}]")
    if abs(n - n_prev) > cb.n_switch_max:
        raise ConstraintError(f"switching {abs(n - n_prev)} banks exceeds {cb.n_switch_max} per step")


def cb_switch_feasible(cb: CapacitorBank, n_prev: int, n: int) -> bool:
    try:
        cb_switch_check(cb, n_prev, n)
    except ConstraintError:
        return False
    return True


def svc_q(q: float, q_max: float, tol: float = CAP_TOL) -> bool:
    return abs(q) <= q_max + tol


# -- set-points and injections -----------------------------------------------

@dataclass
class DeviceSetpoints:
    """Per-device, per-step set-points (MW / MVar / bank counts)."""
    p_wt: np.ndarray
    q_wt: np.ndarray
    p_pv: np.ndarray
    q_pv: np.ndarray
    p_es_in: np.ndarray
    p_es_out: np.ndarray
    q_es: np.ndarray
    n_cb: np.ndarray
    q_svc: np.ndarray

    @classmethod
    def zeros(cls, res: ResourceParams, horizon: int) -> "DeviceSetpoints":
        def z(n):
            return np.zeros((n, horizon))
        return cls(z(len(res.wind)), z(len(res.wind)), z(len(res.pv)), z(len(res.pv)),
                   z(len(res.storage)), z(len(res.storage)), z(len(res.storage)),
                   np.zeros((len(res.cbs), horizon), dtype=int), z(len(res.svcs)))

    def copy(self) -> "DeviceSetpoints":
        return DeviceSetpoints(**{k: np.array(v, copy=True) for k, v in self.__dict__.items()})

    def to_dict(self) -> dict:
        return {k: np.asarray(v).tolist() for k, v in self.__dict__.items()}

    @classmethod
    def from_dict(cls, d: dict) -> "DeviceSetpoints":
        out = {k: np.atleast_2d(np.asarray(v, dtype=float)) if len(v) else np.zeros((0, 0))
               for k, v in d.items()}
        out["n_cb"] = out["n_cb"].astype(int)
        return cls(**out)


def assemble_injections(net: NetworkModel, res: ResourceParams, sp: DeviceSetpoints,
                        plant_load, step: int, v2=None):
    """Net injections ``(p_j, q_j)`` [MW, MVar] per bus (ordered as ``net.buses``).

    ``plant_load`` is ``(p_L, q_L)`` for this step, drawn at ``net.plant_bus``;
    ``v2`` (squared voltages per bus) scales the capacitor banks, default 1.
    """
    n = net.n_bus
    p = np.zeros(n)
    q = np.zeros(n)
    v2 = np.ones(n) if v2 is None else np.asarray(v2, dtype=float)

    def at(bus):
        if bus not in net.index:
            raise ScenarioError([("devices", f"device at unknown bus {bus}")])
        return net.index[bus]

    for k, wt in enumerate(res.wind):
        j = at(wt.bus)
        p[j] += sp.p_wt[k, step]
        q[j] += sp.q_wt[k, step]
    for k, pv in enumerate(res.pv):
        j = at(pv.bus)
        p[j] += sp.p_pv[k, step]
        q[j] += sp.q_pv[k, step]
    for k, es in enumerate(res.storage):
        j = at(es.bus)
        p[j] += sp.p_es_out[k, step] - sp.p_es_in[k, step]
        q[j] += sp.q_es[k, step]
    for k, cb in enumerate(res.cbs):
        j = at(cb.bus)
        q[j] += cb_q(int(sp.n_cb[k, step]), v2[j], cb.dq_mvar)
    for k, svc in enumerate(res.svcs):
        j = at(svc.bus)
        q[j] += sp.q_svc[k, step]
    j = at(net.plant_bus)
    p[j] -= plant_load[0]
    q[j] -= plant_load[1]
    return p, q


# -- grid state and DistFlow bookkeeping --------------------------------------

@dataclass
class GridState:
    """One solved step, per unit: ``v2`` per bus, sending-end flows per branch."""
    v2: np.ndarray
    p_flow: np.ndarray
    q_flow: np.ndarray
    l2: np.ndarray
    p_inj: np.ndarray
    q_inj: np.ndarray
    iterations: int = 0

    def losses_pu(self, net: NetworkModel) -> float:
        return float(sum(br.r * self.l2[k] for k, br in enumerate(net.branches)))


def distflow_residuals(net: NetworkModel, st: GridState) -> dict[str, float]:
    """Largest absolute residual of each DistFlow identity (per unit)."""
    out = {"p_balance": 0.0, "q_balance": 0.0, "voltage": 0.0, "current": 0.0, "root": 0.0}
    for k, br in enumerate(net.branches):
        i = net.index[net.branch_parent[k]]
        c = net.branch_child[k]
        j = net.index[c]
        kids = net.children[c]
        rp = st.p_flow[k] - br.r * st.l2[k] - sum(st.p_flow[m] for m in kids) + st.p_inj[j]
        rq = st.q_flow[k] - br.x * st.l2[k] - sum(st.q_flow[m] for m in kids) + st.q_inj[j]
        rv = st.v2[j] - st.v2[i] + 2 * (br.r * st.p_flow[k] + br.x * st.q_flow[k]) \
            - (br.r**2 + br.x**2) * st.l2[k]
        rl = st.l2[k] * st.v2[i] - (st.p_flow[k] ** 2 + st.q_flow[k] ** 2)
        out["p_balance"] = max(out["p_balance"], abs(rp))
        out["q_balance"] = max(out["q_balance"], abs(rq))
        out["voltage"] = max(out["voltage"], abs(rv))
        out["current"] = max(out["current"], abs(rl))
    root = net.index[net.ref_bus]
    kids = net.children[net.ref_bus]
    out["root"] = max(abs(st.p_inj[root] - sum(st.p_flow[m] for m in kids)),
                      abs(st.q_inj[root] - sum(st.q_flow[m] for m in kids)))
    return out
