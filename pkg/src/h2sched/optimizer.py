"""Coordinated active/reactive scheduling as a mixed-integer conic program.

Each electrolyzer's stack power, rectifier loss, hydrogen flow and reactive
draw are tabulated over an (I, T) grid and linked to the commitment binaries
through convex-combination weights that sum to the on/off flag.  The radial
network uses the branch-flow model with rotated-cone loss relaxations.

``method="baseline"`` builds the conventional plant schedule instead: the same
commitment problem with one aggregate, lossless active-power balance and no
network or reactive terms.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ScenarioError, SolverError
from .fleet import IDLE, PRODUCTION, STANDBY, FleetSchedule, validate_transitions
from .grid import DeviceSetpoints
from .micp import Budget, MicpModel, Solution, relax_and_fix, solve
from .pwl import PwlSurface, build_surfaces, main_diagonal
from .scenario import Scenario

T_BIG = 100.0  # degC, big-M for the temperature coupling


@dataclass
class OptimizerOptions:
    method: str = "coordinated"
    pwl_grid: tuple[int, int] = (7, 5)
    pwl_tolerance: float | None = None  # relative; None skips the certification check
    sos2_encoding: str = "log"  # "log" (Gray-code binaries) or "interval"
    voltage_margin: float = 0.0005  # p.u. kept clear of each voltage limit
    loss_penalty: float = 10.0  # CNY/MWh on network losses, keeps the cones tight
    tie_break: float = 1e-3  # CNY per step an on unit costs, scaled by its index
    terminal_soc: bool = True
    n_angles: int = 16
    n_levels: int = 24
    cone_rounds: int = 0
    backend: str | None = None  # None picks highspy when installed, else scipy's HiGHS
    budget: Budget = field(default_factory=lambda: Budget(time_limit=300.0))
    warm_start: bool = True  # relax-and-fix incumbent before branch and bound
    rf_lookahead: int = 2
    rf_stage_time: float = 20.0
    rf_share: float = 0.5  # most of the budget the warm start may use
    rf_freeze: bool = True  # fix finished steps entirely while building the warm start

    def __post_init__(self):
        if self.method not in ("coordinated", "baseline"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.sos2_encoding not in ("log", "interval"):
            raise ValueError(f"unknown SOS2 encoding {self.sos2_encoding!r}")


@dataclass
class BuiltModel:
    model: MicpModel
    scenario: Scenario
    options: OptimizerOptions
    surfaces: list[PwlSurface]
    v: dict[str, np.ndarray]  # variable index arrays by role
    profit_terms: dict[int, float]  # objective coefficients of the reported profit only


@dataclass
class ScheduleResult:
    schedule: FleetSchedule
    setpoints: DeviceSetpoints
    solution: Solution
    model_profit: float  # profit expression evaluated at the incumbent
    model_hydrogen: float  # kg
    model_losses: float  # MWh, from the relaxed branch currents
    method: str

    def summary(self) -> dict:
        s = self.solution
        return {"method": self.method, "status": s.status, "objective": s.objective, "bound": s.bound,
                "gap": s.gap, "backend": s.backend, "runtime_s": s.runtime, "cone_rounds": s.rounds,
                "model_profit_cny": self.model_profit, "model_hydrogen_kg": self.model_hydrogen,
                "model_losses_mwh": self.model_losses}


class ExtractionError(SolverError):
    def __init__(self, violations):
        self.violations = violations
        super().__init__("extracted schedule violates state logic: "
                         + "; ".join(f"unit {v.unit} step {v.step} {v.rule}" for v in violations[:5]))


def _gray_bits(n_seg: int) -> list[list[int]]:
    n_bits = max(1, math.ceil(math.log2(n_seg))) if n_seg > 1 else 0
    codes = [s ^ (s >> 1) for s in range(n_seg)]
    return [[(c >> b) & 1 for b in range(n_bits)] for c in codes]


def _sos2_marginal(m: MicpModel, marg: list[dict], b_on: int, name: str, encoding: str):
    """Force at most two adjacent nonzeros among marginal weight sums."""
    n_pts = len(marg)
    n_seg = n_pts - 1
    if encoding == "interval":
        z = m.add_vars(f"{name}.seg", n_seg, vtype="B")
        m.add_eq({**{int(k): 1.0 for k in z}, b_on: -1.0}, 0.0, f"{name}.one")
        for a in range(n_pts):
            terms = dict(marg[a])
            for s in (a - 1, a):
                if 0 <= s < n_seg:
                    terms[int(z[s])] = terms.get(int(z[s]), 0.0) - 1.0
            m.add_row(terms, ub=0.0, name=f"{name}.adj{a}")
        return
    bits = _gray_bits(n_seg)
    n_bits = len(bits[0]) if bits else 0
    for b in range(n_bits):
        y = m.add_var(f"{name}.y{b}", 0.0, 1.0, "B")
        m.add_row({y: 1.0, b_on: -1.0}, ub=0.0)
        one, zero = {}, {}
        for a in range(n_pts):
            adj = [bits[s][b] for s in (a - 1, a) if 0 <= s < n_seg]
            tgt = one if all(v == 1 for v in adj) else zero if all(v == 0 for v in adj) else None
            if tgt is not None:
                for k, c in marg[a].items():
                    tgt[k] = tgt.get(k, 0.0) + c
        if one:
            m.add_row({**one, y: -1.0}, ub=0.0, name=f"{name}.b{b}+")
        if zero:
            m.add_row({**zero, y: 1.0, b_on: -1.0}, ub=0.0, name=f"{name}.b{b}0")


def build_model(scn: Scenario, opts: OptimizerOptions | None = None) -> BuiltModel:
    opts = opts or OptimizerOptions()
    coordinated = opts.method == "coordinated"
    M, T, dt = scn.n_units, scn.horizon, scn.dt
    net, res, econ = scn.network, scn.resources, scn.economics
    base = net.base_mva
    m = MicpModel(f"{scn.name}:{opts.method}")
    v: dict[str, np.ndarray] = {}
    profit: dict[int, float] = {}

    def obj(idx, c, reported=True):
        m.add_objective_terms({int(idx): c})
        if reported:
            profit[int(idx)] = profit.get(int(idx), 0.0) + c

    problems = []
    for k, u in enumerate(scn.units):
        if u.stack.i_min > u.stack.i_max:
            problems.append((f"plant.units[{k}].stack", "i_min exceeds i_max"))
    if problems:
        raise ScenarioError(problems)

    cache: dict = {}
    surfaces = []
    for u in scn.units:
        if u not in cache:
            cache[u] = build_surfaces(u, opts.pwl_grid, opts.pwl_tolerance,
                                      strict=opts.pwl_tolerance is not None)
        surfaces.append(cache[u])

    # -- commitment --------------------------------------------------------
    b_on = m.add_vars("on", (M, T), vtype="B")
    b_by = m.add_vars("by", (M, T), vtype="B")
    b_id = m.add_vars("idle", (M, T), vtype="B")
    b_su = m.add_vars("su", (M, T), 0.0, 1.0)
    b_sd = m.add_vars("sd", (M, T), 0.0, 1.0)
    v.update(on=b_on, by=b_by, idle=b_id, su=b_su, sd=b_sd)
    init = scn.initial.states
    for i in range(M):
        idle0 = float(init[i] == IDLE)
        for t in range(T):
            m.add_eq({b_on[i, t]: 1, b_by[i, t]: 1, b_id[i, t]: 1}, 1.0, f"onehot[{i},{t}]")
            # startup: on + by + idle_prev - 1 <= su
            if t == 0:
                m.add_row({b_on[i, t]: 1, b_by[i, t]: 1, b_su[i, t]: -1}, ub=1.0 - idle0)
                m.add_row({b_id[i, t]: 1, b_sd[i, t]: -1}, ub=idle0)
            else:
                m.add_row({b_on[i, t]: 1, b_by[i, t]: 1, b_id[i, t - 1]: 1, b_su[i, t]: -1}, ub=1.0)
                # shutdown: on_prev + by_prev + idle - 1 <= sd, i.e. idle - idle_prev <= sd
                m.add_row({b_id[i, t]: 1, b_id[i, t - 1]: -1, b_sd[i, t]: -1}, ub=0.0)
            # no single-step idle: idle[t-1] <= idle[t-2] + idle[t]
            if t >= 1:
                prev2 = {b_id[i, t - 2]: -1} if t >= 2 else {}
                rhs = idle0 if t == 1 else 0.0
                m.add_row({b_id[i, t - 1]: 1, b_id[i, t]: -1, **prev2}, ub=rhs, name=f"minidle[{i},{t}]")
            obj(b_su[i, t], -econ.c_su)
            obj(b_sd[i, t], -econ.c_sd)
            if opts.tie_break:
                obj(b_on[i, t], -opts.tie_break * i, reported=False)

    # -- piecewise-linear electrolyzer surfaces ------------------------------
    temp = np.empty((M, T + 1), dtype=int)
    p_cool = m.add_vars("pcool", (M, T), 0.0, math.inf)
    cur = np.empty((M, T), dtype=int)
    lam_all = []
    plant_p: list[dict] = [dict() for _ in range(T)]  # MW
    plant_q: list[dict] = [dict() for _ in range(T)]  # MVar
    h2_terms: dict[int, float] = {}
    for i, (u, sf) in enumerate(zip(scn.units, surfaces)):
        st, ax = u.stack, u.aux
        ni, nt = len(sf.i_grid), len(sf.t_grid)
        temp[i, 0] = m.add_var(f"temp[{i},0]", scn.initial.temperatures[i], scn.initial.temperatures[i])
        for t in range(T):
            temp[i, t + 1] = m.add_var(f"temp[{i},{t + 1}]", 0.0, T_BIG)
        gen = sf.values["p_stack"] - st.n_cell * ax.u_th * sf.i_grid[:, None]  # kW of heat
        lam_u = []
        for t in range(T):
            m.stage = t
            lam = m.add_vars(f"lam[{i},{t}]", (ni, nt))
            lam_u.append(lam)
            on = int(b_on[i, t])
            m.add_eq({**{int(k): 1.0 for k in lam.ravel()}, on: -1.0}, 0.0, f"convex[{i},{t}]")
            cur[i, t] = m.add_var(f"I[{i},{t}]", 0.0, st.i_max)
            m.add_eq({**{int(lam[a, b]): sf.i_grid[a] for a in range(ni) for b in range(nt)},
                      int(cur[i, t]): -1.0}, 0.0)
            tl = {int(lam[a, b]): sf.t_grid[b] for a in range(ni) for b in range(nt)}
            # |sum(lam T_b) - temp| <= T_BIG (1 - on)
            m.add_row({**tl, int(temp[i, t]): -1.0, on: T_BIG}, ub=T_BIG)
            m.add_row({**{k: -c for k, c in tl.items()}, int(temp[i, t]): 1.0, on: T_BIG}, ub=T_BIG)
            _sos2_marginal(m, [{int(lam[a, b]): 1.0 for b in range(nt)} for a in range(ni)],
                           on, f"sosI[{i},{t}]", opts.sos2_encoding)
            _sos2_marginal(m, [{int(lam[a, b]): 1.0 for a in range(ni)} for b in range(nt)],
                           on, f"sosT[{i},{t}]", opts.sos2_encoding)
            w = m.add_var(f"tri[{i},{t}]", 0.0, 1.0, "B")
            m.add_row({w: 1.0, on: -1.0}, ub=0.0)
            eo = {int(lam[a, b]): 1.0 for a in range(ni) for b in range(nt) if a % 2 == 0 and b % 2 == 1}
            oe = {int(lam[a, b]): 1.0 for a in range(ni) for b in range(nt) if a % 2 == 1 and b % 2 == 0}
            m.add_row({**eo, w: -1.0}, ub=0.0, name=f"tri_eo[{i},{t}]")
            m.add_row({**oe, w: 1.0, on: -1.0}, ub=0.0, name=f"tri_oe[{i},{t}]")
            m.add_sos2(f"lam[{i},{t}]", lam.ravel())

            # thermal recurrence and cooling band
            k_h = dt / ax.c_heat
            row = {int(temp[i, t + 1]): 1.0, int(temp[i, t]): -(1.0 - k_h / ax.r_diss),
                   int(p_cool[i, t]): k_h}
            for a in range(ni):
                for b in range(nt):
                    row[int(lam[a, b])] = row.get(int(lam[a, b]), 0.0) - k_h * gen[a, b]
            m.add_eq(row, k_h * scn.series.ambient_c[t] / ax.r_diss, f"thermal[{i},{t}]")
            m.add_row({int(p_cool[i, t]): 1.0, int(temp[i, t]): -ax.c_cool}, ub=-ax.c_cool * ax.t_cool)
            m.add_row({int(p_cool[i, t]): 1.0, int(b_id[i, t]): ax.c_cool * T_BIG}, ub=ax.c_cool * T_BIG)

            vals = sf.values
            for a in range(ni):
                for b in range(nt):
                    k = int(lam[a, b])
                    plant_p[t][k] = (vals["p_stack"][a, b] + vals["p_loss"][a, b]) / 1000.0
                    plant_q[t][k] = vals["q"][a, b]
                    h2_terms[k] = h2_terms.get(k, 0.0) + vals["h2"][a, b] * dt
                    obj(k, econ.c_h2 * vals["h2"][a, b] * dt)
            plant_p[t][int(p_cool[i, t])] = 1.0 / (ax.eta_cool * 1000.0)
            plant_p[t][int(b_by[i, t])] = ax.p_standby / 1000.0
        lam_all.append(lam_u)
        m.stage = -1
    v.update(temp=temp, pcool=p_cool, I=cur)
    v["lam"] = np.array([[lam.ravel() for lam in lu] for lu in lam_all])

    # -- resources ----------------------------------------------------------
    nw, npv, nes, ncb, nsv = (len(res.wind), len(res.pv), len(res.storage), len(res.cbs), len(res.svcs))
    p_wt = m.add_vars("pwt", (nw, T), 0.0, scn.series.wind_mw)
    p_pv = m.add_vars("ppv", (npv, T), 0.0, scn.series.pv_mw)
    p_in = m.add_vars("pes_in", (nes, T), 0.0, math.inf)
    p_out = m.add_vars("pes_out", (nes, T), 0.0, math.inf)
    soc = np.empty((nes, T + 1), dtype=int)
    u_ch = m.add_vars("es_ch", (nes, T), vtype="B")
    v.update(pwt=p_wt, ppv=p_pv, pin=p_in, pout=p_out, uch=u_ch)
    for e, es in enumerate(res.storage):
        s0 = float(scn.initial.soc[e])
        soc[e, 0] = m.add_var(f"soc[{e},0]", s0, s0)
        for t in range(T):
            lo = s0 if (opts.terminal_soc and t == T - 1) else es.soc_min
            soc[e, t + 1] = m.add_var(f"soc[{e},{t + 1}]", lo, es.soc_max)
            m.add_row({int(p_in[e, t]): 1.0, int(u_ch[e, t]): -min(es.p_in_max, es.s_mva)}, ub=0.0)
            m.add_row({int(p_out[e, t]): 1.0, int(u_ch[e, t]): min(es.p_out_max, es.s_mva)},
                      ub=min(es.p_out_max, es.s_mva))
            m.add_eq({int(soc[e, t + 1]): 1.0, int(soc[e, t]): -1.0, int(p_in[e, t]): -es.eta_in * dt,
                      int(p_out[e, t]): dt / es.eta_out}, 0.0, f"soc[{e},{t}]")
    v["soc"] = soc

    if not coordinated:
        for t in range(T):
            row = {int(k): 1.0 for k in p_wt[:, t]}
            row.update({int(k): 1.0 for k in p_pv[:, t]})
            row.update({int(k): 1.0 for k in p_out[:, t]})
            row.update({int(k): -1.0 for k in p_in[:, t]})
            for k, c in plant_p[t].items():
                row[k] = row.get(k, 0.0) - c
            m.add_eq(row, 0.0, f"balance[{t}]")
        m.set_objective(m.obj, "max")
        _tag_stages(m, v)
        return BuiltModel(m, scn, opts, surfaces, v, profit)

    q_wt = m.add_vars("qwt", (nw, T), -math.inf, math.inf)
    q_pv = m.add_vars("qpv", (npv, T), -math.inf, math.inf)
    q_es = m.add_vars("qes", (nes, T), -math.inf, math.inf)
    q_cap = np.array([[s.q_max] for s in res.svcs]).reshape(nsv, 1)
    q_sv = m.add_vars("qsvc", (nsv, T), -q_cap, q_cap)
    v.update(qwt=q_wt, qpv=q_pv, qes=q_es, qsvc=q_sv)
    for w, wt in enumerate(res.wind):
        for t in range(T):
            m.add_row({int(q_wt[w, t]): 1.0, int(p_wt[w, t]): 0.58}, ub=0.91 * wt.s_mva)
            m.add_row({int(q_wt[w, t]): 1.0, int(p_wt[w, t]): -1.24}, lb=-0.91 * wt.s_mva)
    for k, pv in enumerate(res.pv):
        tan = math.tan(math.radians(pv.theta_deg))
        for t in range(T):
            m.add_row({int(q_pv[k, t]): 1.0, int(p_pv[k, t]): -tan}, ub=0.0)
            m.add_row({int(q_pv[k, t]): 1.0, int(p_pv[k, t]): tan}, lb=0.0)
            m.add_disk([p_pv[k, t], q_pv[k, t]], pv.s_mva, f"pv_disk[{k},{t}]")
    for e, es in enumerate(res.storage):
        for t in range(T):
            m.add_disk([p_in[e, t], q_es[e, t]], es.s_mva, f"es_in[{e},{t}]")
            m.add_disk([p_out[e, t], q_es[e, t]], es.s_mva, f"es_out[{e},{t}]")

    # -- network -------------------------------------------------------------
    nb = len(net.branches)
    vmin = np.array([(b.v_min + opts.voltage_margin) ** 2 for b in net.buses])
    vmax = np.array([(b.v_max - opts.voltage_margin) ** 2 for b in net.buses])
    root = net.index[net.ref_bus]
    vmin[root] = vmax[root] = 1.0
    v2 = m.add_vars("v2", (net.n_bus, T), vmin[:, None].repeat(T, 1), vmax[:, None].repeat(T, 1))
    pf = m.add_vars("P", (nb, T), -10.0, 10.0)
    qf = m.add_vars("Q", (nb, T), -10.0, 10.0)
    l2 = m.add_vars("l", (nb, T), 0.0, 100.0)
    v.update(v2=v2, P=pf, Q=qf, l=l2)

    # capacitor banks: binary expansion of the bank count, exact products with v2
    nbits = [max(1, int(cb.n_max).bit_length()) for cb in res.cbs]
    n_cb = m.add_vars("ncb", (ncb, T), 0.0, [[cb.n_max] for cb in res.cbs] if ncb else 0.0)
    d_up = m.add_vars("ncb_up", (ncb, T), 0.0, [[cb.n_switch_max] for cb in res.cbs] if ncb else 0.0)
    d_dn = m.add_vars("ncb_dn", (ncb, T), 0.0, [[cb.n_switch_max] for cb in res.cbs] if ncb else 0.0)
    v.update(ncb=n_cb)
    cb_q_terms: list[list[dict]] = [[{} for _ in range(T)] for _ in range(ncb)]
    for c, cb in enumerate(res.cbs):
        j = net.index[cb.bus]
        lo, hi = vmin[j], vmax[j]
        for t in range(T):
            m.stage = t
            bits = m.add_vars(f"ncb_bit[{c},{t}]", nbits[c], vtype="B")
            row = {int(n_cb[c, t]): -1.0}
            for k, bvar in enumerate(bits):
                row[int(bvar)] = float(2**k)
                wv = m.add_var(f"ncb_w[{c},{t},{k}]", 0.0, hi)
                vb, vv = int(bvar), int(v2[j, t])
                m.add_row({wv: 1.0, vb: -hi}, ub=0.0)
                m.add_row({wv: 1.0, vb: -lo}, lb=0.0)
                m.add_row({wv: 1.0, vv: -1.0, vb: -lo}, ub=-lo)
                m.add_row({wv: 1.0, vv: -1.0, vb: -hi}, lb=-hi)
                cb_q_terms[c][t][wv] = cb.dq_mvar * 2**k
            m.add_eq(row, 0.0, f"ncb_bits[{c},{t}]")
            if t == 0:
                m.add_eq({int(n_cb[c, t]): 1.0, int(d_up[c, t]): -1.0, int(d_dn[c, t]): 1.0},
                         float(scn.initial.cb_counts[c]))
            else:
                m.add_eq({int(n_cb[c, t]): 1.0, int(n_cb[c, t - 1]): -1.0, int(d_up[c, t]): -1.0,
                          int(d_dn[c, t]): 1.0}, 0.0)
            m.add_row({int(d_up[c, t]): 1.0, int(d_dn[c, t]): 1.0}, ub=cb.n_switch_max)
            obj(d_up[c, t], -econ.c_cb)
            obj(d_dn[c, t], -econ.c_cb)
        m.stage = -1

    def injection(bus_id, t):
        """(p terms, q terms) of the per-unit injection at a bus."""
        p, q = {}, {}
        for w, wt in enumerate(res.wind):
            if wt.bus == bus_id:
                p[int(p_wt[w, t])] = 1.0 / base
                q[int(q_wt[w, t])] = 1.0 / base
        for k, pv in enumerate(res.pv):
            if pv.bus == bus_id:
                p[int(p_pv[k, t])] = 1.0 / base
                q[int(q_pv[k, t])] = 1.0 / base
        for e, es in enumerate(res.storage):
            if es.bus == bus_id:
                p[int(p_out[e, t])] = 1.0 / base
                p[int(p_in[e, t])] = -1.0 / base
                q[int(q_es[e, t])] = 1.0 / base
        for c, cb in enumerate(res.cbs):
            if cb.bus == bus_id:
                for k, coef in cb_q_terms[c][t].items():
                    q[k] = q.get(k, 0.0) + coef / base
        for k, sv in enumerate(res.svcs):
            if sv.bus == bus_id:
                q[int(q_sv[k, t])] = 1.0 / base
        if bus_id == net.plant_bus:
            for k, c in plant_p[t].items():
                p[k] = p.get(k, 0.0) - c / base
            for k, c in plant_q[t].items():
                q[k] = q.get(k, 0.0) - c / base
        return p, q

    scale = (sum(w.s_mva for w in res.wind) + sum(p.s_mva for p in res.pv)
             + sum(e.s_mva for e in res.storage) + 1.5 * sum(u.rated_power_kw for u in scn.units) / 1000.0) / base
    for t in range(T):
        for k, br in enumerate(net.branches):
            child = net.branch_child[k]
            i, j = net.index[net.branch_parent[k]], net.index[child]
            kids = net.children[child]
            pin, qin = injection(child, t)
            rp = {int(pf[k, t]): 1.0, int(l2[k, t]): -br.r, **{int(pf[n, t]): -1.0 for n in kids}}
            rq = {int(qf[k, t]): 1.0, int(l2[k, t]): -br.x, **{int(qf[n, t]): -1.0 for n in kids}}
            for key, c in pin.items():
                rp[key] = rp.get(key, 0.0) + c
            for key, c in qin.items():
                rq[key] = rq.get(key, 0.0) + c
            m.add_eq(rp, 0.0, f"pbal[{child},{t}]")
            m.add_eq(rq, 0.0, f"qbal[{child},{t}]")
            m.add_eq({int(v2[j, t]): 1.0, int(v2[i, t]): -1.0, int(pf[k, t]): 2 * br.r,
                      int(qf[k, t]): 2 * br.x, int(l2[k, t]): -(br.r**2 + br.x**2)}, 0.0, f"vdrop[{child},{t}]")
            m.add_rotated_cone(l2[k, t], v2[i, t], [pf[k, t], qf[k, t]], f"loss[{k},{t}]", scale)
            obj(l2[k, t], -opts.loss_penalty * br.r * base * dt, reported=False)
        pin, qin = injection(net.ref_bus, t)
        kids = net.children[net.ref_bus]
        rp = {**{int(pf[n, t]): 1.0 for n in kids}}
        rq = {**{int(qf[n, t]): 1.0 for n in kids}}
        for key, c in pin.items():
            rp[key] = rp.get(key, 0.0) - c
        for key, c in qin.items():
            rq[key] = rq.get(key, 0.0) - c
        m.add_eq(rp, 0.0, f"pbal[{net.ref_bus},{t}]")
        m.add_eq(rq, 0.0, f"qbal[{net.ref_bus},{t}]")
    m.set_objective(m.obj, "max")
    _tag_stages(m, v)
    return BuiltModel(m, scn, opts, surfaces, v, profit)


def _tag_stages(m: MicpModel, v: dict):
    for key, arr in v.items():
        arr = np.asarray(arr)
        if key == "lam" or arr.ndim != 2:
            continue
        if key in ("temp", "soc"):
            # column t+1 is the state at the end of step t
            for t in range(arr.shape[1] - 1):
                m.set_stage(arr[:, t + 1], t)
            continue
        for t in range(arr.shape[1]):
            m.set_stage(arr[:, t], t)


def _val(x, idx):
    return np.asarray(x)[np.asarray(idx, dtype=int)] if np.size(idx) else np.zeros(np.shape(idx))


def extract_schedule(built: BuiltModel, sol: Solution) -> ScheduleResult:
    """Physical schedule and set-points from a feasible incumbent."""
    if not sol.has_incumbent:
        raise SolverError(f"no incumbent to extract (status {sol.status})")
    scn, v, x = built.scenario, built.v, sol.x
    M, T = scn.n_units, scn.horizon
    on = np.round(_val(x, v["on"])).astype(int)
    by = np.round(_val(x, v["by"])).astype(int)
    states = np.where(on == 1, PRODUCTION, np.where(by == 1, STANDBY, IDLE))
    current = np.where(states == PRODUCTION, _val(x, v["I"]), 0.0)
    for i, u in enumerate(scn.units):
        row = current[i]
        on_i = states[i] == PRODUCTION
        row[on_i] = np.clip(row[on_i], u.stack.i_min, u.stack.i_max)
    p_cool = np.where(states == IDLE, 0.0, np.maximum(_val(x, v["pcool"]), 0.0))
    temp = _val(x, v["temp"])
    sched = FleetSchedule(states, current, p_cool, temp, scn.initial.states.copy())
    viol = validate_transitions(sched.sequence(), scn.initial.states)
    if viol:
        raise ExtractionError(viol)

    res = scn.resources
    sp = DeviceSetpoints.zeros(res, T)
    sp.p_wt = np.maximum(_val(x, v["pwt"]), 0.0)
    sp.p_pv = np.maximum(_val(x, v["ppv"]), 0.0)
    sp.p_es_in = np.maximum(_val(x, v["pin"]), 0.0)
    sp.p_es_out = np.maximum(_val(x, v["pout"]), 0.0)
    if built.options.method == "coordinated":
        sp.q_wt = _val(x, v["qwt"])
        sp.q_pv = _val(x, v["qpv"])
        sp.q_es = _val(x, v["qes"])
        sp.n_cb = np.round(_val(x, v["ncb"])).astype(int)
        sp.q_svc = _val(x, v["qsvc"])
        losses = float(sum(br.r * _val(x, v["l"])[k].sum() for k, br in enumerate(scn.network.branches))
                       * scn.network.base_mva * scn.dt)
    else:
        sp.n_cb = np.repeat(scn.initial.cb_counts[:, None], T, axis=1).astype(int)
        losses = 0.0
    profit = sum(c * x[i] for i, c in built.profit_terms.items())
    h2 = 0.0
    lam = v["lam"]
    for i, sf in enumerate(built.surfaces):
        vals = sf.values["h2"].ravel()
        for t in range(T):
            h2 += float(vals @ x[lam[i, t]]) * scn.dt
    return ScheduleResult(sched, sp, sol, float(profit), h2, losses, built.options.method)


def warm_start(built: BuiltModel) -> np.ndarray | None:
    """Relax-and-fix point over the time steps; storage must end each look-ahead window
    at or above its initial level so that the terminal condition stays reachable."""
    o, scn = built.options, built.scenario
    soc = built.v["soc"]
    s0 = scn.initial.soc

    def bounds(k, top):
        if not o.terminal_soc:
            return {}
        return {int(soc[e, top + 1]): (float(s0[e]), math.inf) for e in range(soc.shape[0])}

    return relax_and_fix(built.model, o.n_angles, o.n_levels, window=1, lookahead=o.rf_lookahead,
                         stage_time=o.rf_stage_time, stage_bounds=bounds,
                         time_budget=o.rf_share * o.budget.time_limit, freeze=o.rf_freeze)


def optimize(scn: Scenario, opts: OptimizerOptions | None = None) -> ScheduleResult:
    opts = opts or OptimizerOptions()
    built = build_model(scn, opts)
    t0 = time.perf_counter()
    start = warm_start(built) if opts.warm_start else None
    t_start = time.perf_counter() - t0
    budget = opts.budget
    if start is not None:
        budget = replace(budget, time_limit=max(budget.time_limit - t_start, 1.0))
    sol = solve(built.model, opts.backend, budget, opts.n_angles, opts.n_levels,
                opts.cone_rounds if opts.method == "coordinated" else 0, start=start)
    sol.runtime += t_start
    return extract_schedule(built, sol)
