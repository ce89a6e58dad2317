"""Nonlinear validation of a schedule on the exact plant and network models.

The storage bus forms the grid: its converter absorbs the active and reactive
mismatch that the power flow leaves.  Storage is meant to follow its own
schedule, so each step is re-balanced before the mismatch is accepted:

* an active deficit first releases curtailed renewable power, then lowers the
  electrolyzer currents (never below their minimum);
* an active surplus is curtailed from the renewables;
* reactive demand beyond the storage converter's rating is met from SVC and
  renewable headroom, and failing that by lowering electrolyzer currents.

Anything that cannot be repaired stays with the storage unit and is flagged.
Temperatures are integrated from the initial conditions with the currents that
were actually applied; cooling is clipped to its feasible band, with a
thermostat that raises it to hold the upper temperature limit.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import elz_phys as ep
from . import rectifier as rc
from .fleet import CODE_STATES, IDLE, PRODUCTION, FleetSchedule, derive_transitions, validate_transitions
from .grid import (DeviceSetpoints, assemble_injections, cb_q, distflow_residuals, wt_envelope,
                   pv_q_limit)
from .powerflow import run_powerflow
from .scenario import Scenario

__all__ = ["SimulationOptions", "SimulationReport", "simulate", "compare", "ComparisonTable",
           "greedy_reactive", "baseline_traditional", "run_powerflow"]

V_TOL = 1e-6
VIOLATION_KINDS = ("voltage", "capability", "transition", "temperature", "balance")
SOC_TOL = 1e-4  # MWh; solver feasibility tolerance on energy bookkeeping
V_MARGIN = 2e-4  # target just above the lower limit when shedding for voltage


@dataclass
class SimulationOptions:
    rebalance: bool = True
    max_iter: int = 60
    tol_mw: float = 1e-6
    thermostat: bool = True
    undervoltage_shed: bool = True  # cut electrolyzer load when a bus falls below its lower limit


@dataclass
class Flag:
    kind: str
    step: int
    where: str
    detail: str

    def to_dict(self):
        return {"kind": self.kind, "step": self.step, "where": self.where, "detail": self.detail}


@dataclass
class SimulationReport:
    scenario: str
    method: str
    dt: float
    bus_ids: list[int]
    voltage: np.ndarray  # (n_bus, T) p.u.
    branch_loss: np.ndarray  # (n_branch, T) MW
    states: np.ndarray
    current: np.ndarray  # applied kA
    temperature: np.ndarray  # (M, T+1)
    p_cool: np.ndarray
    unit_p: np.ndarray  # MW per unit
    unit_q: np.ndarray  # MVar per unit
    h2: np.ndarray  # kg per unit per step
    p_wt: np.ndarray
    q_wt: np.ndarray
    wt_avail: np.ndarray
    p_pv: np.ndarray
    q_pv: np.ndarray
    pv_avail: np.ndarray
    p_es: np.ndarray  # discharge positive
    q_es: np.ndarray
    soc: np.ndarray
    n_cb: np.ndarray
    q_cb: np.ndarray
    q_svc: np.ndarray
    profit_terms: dict
    flags: list[Flag] = field(default_factory=list)
    adjustments: dict = field(default_factory=dict)
    residual: float = 0.0  # worst DistFlow identity residual, p.u.

    @property
    def horizon(self) -> int:
        return self.voltage.shape[1]

    @property
    def hydrogen_kg(self) -> float:
        return float(self.h2.sum())

    @property
    def losses_mwh(self) -> float:
        return float(self.branch_loss.sum() * self.dt)

    @property
    def generation_mwh(self) -> float:
        return float((self.p_wt.sum() + self.p_pv.sum() + np.maximum(self.p_es, 0.0).sum()) * self.dt)

    @property
    def loss_ratio(self) -> float:
        """Network losses as a percentage of total generation."""
        g = self.generation_mwh
        return 100.0 * self.losses_mwh / g if g > 0 else 0.0

    @property
    def profit(self) -> float:
        return float(sum(self.profit_terms.values()))

    def violations(self, kinds=VIOLATION_KINDS) -> list[Flag]:
        return [f for f in self.flags if f.kind in kinds]

    def summary(self) -> dict:
        kinds = sorted({f.kind for f in self.flags if f.kind in VIOLATION_KINDS})
        notes = sorted({f.kind for f in self.flags if f.kind not in VIOLATION_KINDS})
        return {
            "scenario": self.scenario, "method": self.method,
            "hydrogen_kg": self.hydrogen_kg, "losses_mwh": self.losses_mwh,
            "generation_mwh": self.generation_mwh, "loss_ratio_pct": self.loss_ratio,
            "profit_cny": self.profit, "profit_terms": self.profit_terms,
            "v_min_pu": float(self.voltage.min()), "v_max_pu": float(self.voltage.max()),
            "violations": {k: len(self.violations([k])) for k in kinds},
            "notices": {k: len(self.violations([k])) for k in notes},
            "adjustments": self.adjustments, "distflow_residual": self.residual,
        }

    def rows(self) -> list[dict]:
        out = []
        for t in range(self.horizon):
            r = {"step": t, "p_wind_mw": self.p_wt[:, t].sum(), "p_wind_avail_mw": self.wt_avail[:, t].sum(),
                 "q_wind_mvar": self.q_wt[:, t].sum(), "p_pv_mw": self.p_pv[:, t].sum(),
                 "p_pv_avail_mw": self.pv_avail[:, t].sum(), "q_pv_mvar": self.q_pv[:, t].sum(),
                 "p_es_mw": self.p_es[:, t].sum(), "q_es_mvar": self.q_es[:, t].sum(),
                 "soc_mwh": self.soc[:, t + 1].sum(), "n_cb": int(self.n_cb[:, t].sum()),
                 "q_cb_mvar": self.q_cb[:, t].sum(), "q_svc_mvar": self.q_svc[:, t].sum(),
                 "p_load_mw": self.unit_p[:, t].sum(), "q_load_mvar": self.unit_q[:, t].sum(),
                 "loss_mw": self.branch_loss[:, t].sum()}
            for j, b in enumerate(self.bus_ids):
                r[f"v_bus{b}_pu"] = self.voltage[j, t]
            for m in range(self.states.shape[0]):
                r[f"elz{m}_state"] = CODE_STATES[int(self.states[m, t])].value
                r[f"elz{m}_current_ka"] = self.current[m, t]
                r[f"elz{m}_temp_c"] = self.temperature[m, t]
                r[f"elz{m}_p_mw"] = self.unit_p[m, t]
                r[f"elz{m}_q_mvar"] = self.unit_q[m, t]
                r[f"elz{m}_h2_kg"] = self.h2[m, t]
            out.append(r)
        return out

    def to_csv(self, path) -> None:
        rows = self.rows()
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]))
            w.writeheader()
            for r in rows:
                w.writerow({k: (f"{v:.9g}" if isinstance(v, float) else v) for k, v in r.items()})

    def to_json(self, path) -> None:
        d = self.summary()
        d["flags"] = [f.to_dict() for f in self.flags]
        Path(path).write_text(json.dumps(d, indent=1, default=float) + "\n")


def _apparent(u, state, i, t, p_cool, u_ac):
    return rc.apparent_load(u.rectifier, u.stack, u_ac, i, t, CODE_STATES[int(state)], u.aux, p_cool)


def _cooling(u, state, i, t_now, p_cool, t_amb, dt, thermostat):
    ax, st = u.aux, u.stack
    if state == IDLE:
        return 0.0
    hi = ep.cooling_limit(ax, t_now)
    pc = min(max(p_cool, 0.0), hi)
    if thermostat:
        nxt = ep.thermal_step(st, ax, t_now, i, pc, dt, t_amb, tol=1e-9)
        if nxt > st.t_max:
            need = pc + (nxt - st.t_max) * ax.c_heat / dt
            pc = min(need, hi)
    return pc


def _shed(units, states, temps, i_now, u_ac, target_mw):
    """Uniformly lower on-unit currents toward i_min so stack+loss power hits ``target_mw``."""
    on = [m for m in range(len(units)) if states[m] == PRODUCTION]
    if not on:
        return i_now

    def power(alpha):
        tot = 0.0
        for m in on:
            u = units[m]
            i = u.stack.i_min + alpha * (i_now[m] - u.stack.i_min)
            tot += (float(ep.stack_power(u.stack, i, temps[m])) + float(rc.rectifier_loss(u.rectifier, i))) / 1000.0
        return tot

    out = i_now.copy()
    if power(0.0) >= target_mw:
        alpha = 0.0
    else:
        lo, hi = 0.0, 1.0
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            lo, hi = (mid, hi) if power(mid) <= target_mw else (lo, mid)
        alpha = lo
    for m in on:
        u = units[m]
        out[m] = u.stack.i_min + alpha * (i_now[m] - u.stack.i_min)
    return out


def simulate(scn: Scenario, schedule: FleetSchedule, setpoints: DeviceSetpoints,
             method: str = "schedule", opts: SimulationOptions | None = None) -> SimulationReport:
    opts = opts or SimulationOptions()
    net, res, units = scn.network, scn.resources, scn.units
    M, T, dt = scn.n_units, scn.horizon, scn.dt
    base = net.base_mva
    nb, n_bus = len(net.branches), net.n_bus
    root = net.index[net.ref_bus]
    plant = net.index[net.plant_bus]
    if schedule.horizon != T or schedule.n_units != M:
        raise ValueError("schedule shape does not match the scenario")
    es_root = [e for e, es in enumerate(res.storage) if es.bus == net.ref_bus]
    flags: list[Flag] = []

    volt = np.ones((n_bus, T))
    bloss = np.zeros((nb, T))
    cur = np.zeros((M, T))
    temp = np.zeros((M, T + 1))
    temp[:, 0] = scn.initial.temperatures
    pcool = np.zeros((M, T))
    up, uq, h2 = np.zeros((M, T)), np.zeros((M, T)), np.zeros((M, T))
    sp = setpoints.copy()
    p_es = np.zeros((len(res.storage), T))
    q_es = np.zeros((len(res.storage), T))
    soc = np.zeros((len(res.storage), T + 1))
    soc[:, 0] = scn.initial.soc
    q_cb = np.zeros((len(res.cbs), T))
    shed_mwh = uncurtailed_mwh = curtailed_mwh = uv_mwh = 0.0
    path_r = path_x = 0.0
    bus = net.plant_bus
    while bus != net.ref_bus:
        br = net.branches[net.branch_into(bus)]
        path_r, path_x = path_r + br.r, path_x + br.x
        bus = net.parent[bus]
    worst_res = 0.0

    for t in range(T):
        states = schedule.states[:, t]
        t_now = temp[:, t]
        amb = float(scn.series.ambient_c[t])
        i_act = np.where(states == PRODUCTION, schedule.current[:, t], 0.0)
        for m, u in enumerate(units):
            if states[m] == PRODUCTION:
                if not u.stack.t_min - 1e-6 <= t_now[m] <= u.stack.t_max + 1e-6:
                    flags.append(Flag("temperature", t, f"elz{m}", f"{t_now[m]:.3f} degC outside limits"))
                i_act[m] = min(max(i_act[m], u.stack.i_min), u.stack.i_max)
        es_target = sp.p_es_out[:, t] - sp.p_es_in[:, t]
        v_plant = 1.0
        shed_step = 0.0
        gs = None
        for it in range(opts.max_iter):
            u_ac_pu = v_plant
            for m, u in enumerate(units):
                if states[m] == PRODUCTION:
                    ceil = rc.max_feasible_current(u.rectifier, u.stack, u_ac_pu * u.rectifier.u_ac_nominal,
                                                   t_now[m])
                    if i_act[m] > ceil:
                        i_act[m] = ceil
            pc = np.array([_cooling(u, states[m], i_act[m], t_now[m], schedule.p_cool[m, t], amb, dt,
                                    opts.thermostat) for m, u in enumerate(units)])
            loads = [_apparent(u, states[m], i_act[m], t_now[m], pc[m], u_ac_pu * u.rectifier.u_ac_nominal)
                     for m, u in enumerate(units)]
            p_l = sum(p for p, _ in loads)
            q_l = sum(q for _, q in loads)
            step_sp = sp
            p_inj, q_inj = assemble_injections(net, res, step_sp, (p_l, q_l), t, v2=np.zeros(n_bus))
            # root-bus storage is the balancing unit; remove its scheduled injection
            for e in es_root:
                p_inj[root] -= sp.p_es_out[e, t] - sp.p_es_in[e, t]
                q_inj[root] -= sp.q_es[e, t]

            def q_cb_of(v2, _t=t):
                out = np.zeros(n_bus)
                for c, cbk in enumerate(res.cbs):
                    j = net.index[cbk.bus]
                    out[j] += cb_q(int(sp.n_cb[c, _t]), v2[j], cbk.dq_mvar) / base
                return out

            gs = run_powerflow(net, p_inj / base, q_inj / base, 1.0, q_cb_of)
            v_plant = math.sqrt(gs.v2[plant])
            other_p = p_inj[root]
            other_q = q_inj[root] + q_cb_of(gs.v2)[root] * base
            slack_p = gs.p_inj[root] * base - other_p
            slack_q = gs.q_inj[root] * base - other_q
            if not es_root:
                break
            e0 = es_root[0]
            es = res.storage[e0]
            deficit = slack_p - es_target.sum()
            q_room = math.sqrt(max(es.s_mva**2 - slack_p**2, 0.0))
            q_over = abs(slack_q) - q_room
            v_low = min(math.sqrt(gs.v2[j]) - b.v_min for j, b in enumerate(net.buses))
            if it == 0 and v_low < -V_TOL:
                flags.append(Flag("voltage", t, "scheduled", f"undervoltage {v_low:+.5f} p.u. before load reduction"))
            under = opts.rebalance and opts.undervoltage_shed and v_low < -V_TOL
            if not opts.rebalance or (abs(deficit) <= opts.tol_mw and q_over <= opts.tol_mw and not under):
                break
            if under and q_l > 0:
                # linearized drop along the feeding path: dv ~ (R dp + X dq) / (S_base v)
                p_elz = sum(loads[m][0] for m in range(M) if states[m] == PRODUCTION)
                aux = sum(pc[m] / units[m].aux.eta_cool / 1000.0 for m in range(M) if states[m] == PRODUCTION)
                sens = (path_r + path_x * q_l / max(p_l, 1e-9)) / base
                dp = min((V_MARGIN - v_low) * v_plant / sens, p_elz - aux)
                i_act = _shed(units, states, t_now, i_act, u_ac_pu, p_elz - aux - dp)
                shed_step += dp
                uv_mwh += dp * dt
                continue
            if deficit > opts.tol_mw:
                head_w = scn.series.wind_mw[:, t] - sp.p_wt[:, t]
                head_p = scn.series.pv_mw[:, t] - sp.p_pv[:, t]
                head = head_w.sum() + head_p.sum()
                add = min(deficit, head)
                if add > 0:
                    sp.p_wt[:, t] += add * head_w / head
                    sp.p_pv[:, t] += add * head_p / head
                    uncurtailed_mwh += add * dt
                rest = deficit - add
                # settle reactive flows first: they change the losses this deficit includes
                if rest > opts.tol_mw and q_over <= opts.tol_mw:
                    p_elz = sum(loads[m][0] for m in range(M) if states[m] == PRODUCTION)
                    aux = sum(pc[m] / units[m].aux.eta_cool / 1000.0 for m in range(M) if states[m] == PRODUCTION)
                    new_i = _shed(units, states, t_now, i_act, u_ac_pu, p_elz - aux - rest)
                    shed_step += rest
                    i_act = new_i
            elif deficit < -opts.tol_mw:
                surplus = -deficit
                tot = sp.p_wt[:, t].sum() + sp.p_pv[:, t].sum()
                cut = min(surplus, tot)
                if cut > 0:
                    sp.p_wt[:, t] *= 1 - cut / tot
                    sp.p_pv[:, t] *= 1 - cut / tot
                    curtailed_mwh += cut * dt
                if cut < surplus - opts.tol_mw and it == opts.max_iter - 1:
                    flags.append(Flag("balance", t, "storage", "surplus beyond curtailment"))
            # keep renewable reactive set-points inside the envelopes of the new active outputs
            for w, wt in enumerate(res.wind):
                lo, hi = wt_envelope(wt.s_mva, min(sp.p_wt[w, t], wt.s_mva))
                sp.q_wt[w, t] = min(max(sp.q_wt[w, t], lo), hi)
            for k, pv in enumerate(res.pv):
                lim = pv_q_limit(pv.s_mva, pv.theta_deg, sp.p_pv[k, t])
                sp.q_pv[k, t] = min(max(sp.q_pv[k, t], -lim), lim)
            if q_over > opts.tol_mw:
                need = q_over * math.copysign(1.0, slack_q)
                for k, sv in enumerate(res.svcs):
                    q_new = min(max(sp.q_svc[k, t] + need, -sv.q_max), sv.q_max)
                    need -= q_new - sp.q_svc[k, t]
                    sp.q_svc[k, t] = q_new
                if abs(need) > opts.tol_mw:
                    rooms = []
                    for w, wt in enumerate(res.wind):
                        lo, hi = wt_envelope(wt.s_mva, min(sp.p_wt[w, t], wt.s_mva))
                        rooms.append(("wt", w, (hi - sp.q_wt[w, t]) if need > 0 else (lo - sp.q_wt[w, t])))
                    for k, pv in enumerate(res.pv):
                        lim = pv_q_limit(pv.s_mva, pv.theta_deg, sp.p_pv[k, t])
                        rooms.append(("pv", k, (lim - sp.q_pv[k, t]) if need > 0 else (-lim - sp.q_pv[k, t])))
                    total = sum(abs(r) for *_, r in rooms)
                    use = min(abs(need), total)
                    for kind, k, r in rooms:
                        if total > 0:
                            dq = use * r / total if r * need > 0 else 0.0
                            if kind == "wt":
                                sp.q_wt[k, t] += dq
                            else:
                                sp.q_pv[k, t] += dq
                    need -= math.copysign(use, need)
                if abs(need) > opts.tol_mw and need > 0 and q_l > 0:
                    # shed electrolyzer power in proportion to its reactive share
                    p_elz = sum(loads[m][0] for m in range(M) if states[m] == PRODUCTION)
                    aux = sum(pc[m] / units[m].aux.eta_cool / 1000.0 for m in range(M) if states[m] == PRODUCTION)
                    dp = min(abs(need) * p_elz / q_l, p_elz)
                    i_act = _shed(units, states, t_now, i_act, u_ac_pu, p_elz - aux - dp)
                    shed_step += dp
        else:
            flags.append(Flag("balance", t, "storage", "re-balancing did not settle"))

        # record the step
        shed_mwh += shed_step * dt
        worst_res = max(worst_res, max(distflow_residuals(net, gs).values()))
        volt[:, t] = np.sqrt(gs.v2)
        bloss[:, t] = np.array([br.r * gs.l2[k] for k, br in enumerate(net.branches)]) * base
        cur[:, t] = i_act
        pcool[:, t] = pc
        for m, u in enumerate(units):
            up[m, t], uq[m, t] = loads[m]
            if states[m] == PRODUCTION:
                h2[m, t] = float(ep.hydrogen_flow(u.stack, i_act[m])) * dt
            temp[m, t + 1] = ep.thermal_step(u.stack, u.aux, t_now[m], i_act[m], pc[m], dt, amb, tol=1e-9)
        for c, cbk in enumerate(res.cbs):
            q_cb[c, t] = cb_q(int(sp.n_cb[c, t]), gs.v2[net.index[cbk.bus]], cbk.dq_mvar)
        for e, es in enumerate(res.storage):
            if e in es_root and es_root[0] == e:
                p_es[e, t], q_es[e, t] = slack_p - sum(sp.p_es_out[k, t] - sp.p_es_in[k, t] for k in es_root[1:]), slack_q
            else:
                p_es[e, t], q_es[e, t] = sp.p_es_out[e, t] - sp.p_es_in[e, t], sp.q_es[e, t]
            pe, qe = p_es[e, t], q_es[e, t]
            if math.hypot(pe, qe) > es.s_mva + 1e-6:
                flags.append(Flag("capability", t, f"es{e}", f"apparent power {math.hypot(pe, qe):.4f} > {es.s_mva} MVA"))
            if pe > es.p_out_max + 1e-6 or -pe > es.p_in_max + 1e-6:
                flags.append(Flag("capability", t, f"es{e}", f"active power {pe:.4f} MW beyond limits"))
            soc[e, t + 1] = soc[e, t] + (es.eta_in * max(-pe, 0.0) - max(pe, 0.0) / es.eta_out) * dt
            if not es.soc_min - SOC_TOL <= soc[e, t + 1] <= es.soc_max + SOC_TOL:
                flags.append(Flag("capability", t, f"es{e}", f"SOC {soc[e, t + 1]:.4f} MWh outside bounds"))
        for j, b in enumerate(net.buses):
            vj = volt[j, t]
            if vj < b.v_min - V_TOL or vj > b.v_max + V_TOL:
                flags.append(Flag("voltage", t, f"bus{b.id}", f"{vj:.5f} p.u."))
        for w, wt in enumerate(res.wind):
            lo, hi = wt_envelope(wt.s_mva, min(sp.p_wt[w, t], wt.s_mva))
            if not lo - 1e-6 <= sp.q_wt[w, t] <= hi + 1e-6:
                flags.append(Flag("capability", t, f"wt{w}", "reactive output outside envelope"))
        for k, sv in enumerate(res.svcs):
            if abs(sp.q_svc[k, t]) > sv.q_max + 1e-6:
                flags.append(Flag("capability", t, f"svc{k}", "reactive output beyond rating"))
        for m, u in enumerate(units):
            if states[m] == PRODUCTION and schedule.current[m, t] - i_act[m] > 1e-6 and shed_step == 0.0:
                flags.append(Flag("rectifier_ceiling", t, f"elz{m}", f"current limited to {i_act[m]:.3f} kA"))

    for v in validate_transitions(schedule.sequence(), scn.initial.states):
        flags.append(Flag("transition", v.step, f"elz{v.unit}", v.rule))

    su, sd = derive_transitions(schedule.states, scn.initial.states)
    n_prev = np.column_stack([scn.initial.cb_counts.reshape(-1, 1), sp.n_cb[:, :-1]]) if len(res.cbs) else np.zeros((0, T))
    econ = scn.economics
    terms = {
        "hydrogen_revenue": econ.c_h2 * float(h2.sum()),
        "startup_cost": -econ.c_su * float(su.sum()),
        "shutdown_cost": -econ.c_sd * float(sd.sum()),
        "cb_switching_cost": -econ.c_cb * float(np.abs(sp.n_cb - n_prev).sum()) if len(res.cbs) else 0.0,
    }
    return SimulationReport(
        scenario=scn.name, method=method, dt=dt, bus_ids=[b.id for b in net.buses],
        voltage=volt, branch_loss=bloss, states=schedule.states.copy(), current=cur, temperature=temp,
        p_cool=pcool, unit_p=up, unit_q=uq, h2=h2, p_wt=sp.p_wt, q_wt=sp.q_wt, wt_avail=scn.series.wind_mw,
        p_pv=sp.p_pv, q_pv=sp.q_pv, pv_avail=scn.series.pv_mw, p_es=p_es, q_es=q_es, soc=soc,
        n_cb=sp.n_cb, q_cb=q_cb, q_svc=sp.q_svc, profit_terms=terms, flags=flags,
        adjustments={"shed_mwh": shed_mwh, "uncurtailed_mwh": uncurtailed_mwh, "curtailed_mwh": curtailed_mwh,
                     "undervoltage_shed_mwh": uv_mwh},
        residual=worst_res,
    )


# -- comparison -----------------------------------------------------------------

@dataclass
class ComparisonTable:
    rows: list[dict]
    delta: dict

    def format(self) -> str:
        head = f"{'Method':<14}{'Hydrogen [kg]':>16}{'Loss ratio':>12}{'Profit [CNY]':>16}"
        lines = [head, "-" * len(head)]
        for r in self.rows:
            lines.append(f"{r['method']:<14}{r['hydrogen_kg']:>16.2f}{r['loss_ratio_pct']:>11.2f}%{r['profit_cny']:>16.0f}")
        d = self.delta
        lines.append("-" * len(head))
        lines.append(f"{'Change':<14}{d['hydrogen_pct']:>+15.2f}%{d['loss_ratio_pp']:>+10.2f}pp{d['profit_pct']:>+15.2f}%")
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {"rows": self.rows, "delta": self.delta}


def compare(a: SimulationReport, b: SimulationReport) -> ComparisonTable:
    """Changes of ``b`` relative to ``a`` (e.g. a = baseline, b = coordinated)."""
    if a.horizon != b.horizon or a.scenario != b.scenario:
        raise ValueError("reports cover different scenarios or horizons")

    def row(r):
        return {"method": r.method, "hydrogen_kg": r.hydrogen_kg, "loss_ratio_pct": r.loss_ratio,
                "profit_cny": r.profit}

    def pct(x, y):
        return 100.0 * (y - x) / abs(x) if x else 0.0

    delta = {"hydrogen_kg": b.hydrogen_kg - a.hydrogen_kg, "hydrogen_pct": pct(a.hydrogen_kg, b.hydrogen_kg),
             "loss_ratio_pp": b.loss_ratio - a.loss_ratio, "profit_cny": b.profit - a.profit,
             "profit_pct": pct(a.profit, b.profit)}
    return ComparisonTable([row(a), row(b)], delta)


# -- conventional plant operation ---------------------------------------------------

def greedy_reactive(scn: Scenario, schedule: FleetSchedule, sp: DeviceSetpoints) -> DeviceSetpoints:
    """Reactive set-points for a schedule planned without the network.

    The plant's reactive demand (at nominal voltage) is met by the capacitor
    banks first, then the SVC, then wind and PV in proportion to their
    headroom; whatever remains falls to the grid-forming storage.
    """
    res, T = scn.resources, scn.horizon
    out = sp.copy()
    n_prev = scn.initial.cb_counts.astype(int).copy()
    for t in range(T):
        q_dem = 0.0
        for m, u in enumerate(scn.units):
            state = int(schedule.states[m, t])
            if state == PRODUCTION:
                q_dem += float(rc.reactive_power(u.rectifier, u.stack, u.rectifier.u_ac_nominal,
                                                 schedule.current[m, t], schedule.temperature[m, t]))
        need = q_dem
        for c, cbk in enumerate(res.cbs):
            want = int(min(cbk.n_max, max(0, math.floor(need / cbk.dq_mvar + 1e-9))))
            n = int(np.clip(want, n_prev[c] - cbk.n_switch_max, n_prev[c] + cbk.n_switch_max))
            out.n_cb[c, t] = n
            n_prev[c] = n
            need -= n * cbk.dq_mvar
        for k, sv in enumerate(res.svcs):
            out.q_svc[k, t] = float(np.clip(need, -sv.q_max, sv.q_max))
            need -= out.q_svc[k, t]
        rooms = []
        for w, wt in enumerate(res.wind):
            lo, hi = wt_envelope(wt.s_mva, min(out.p_wt[w, t], wt.s_mva))
            rooms.append(hi if need > 0 else lo)
        for k, pv in enumerate(res.pv):
            lim = pv_q_limit(pv.s_mva, pv.theta_deg, out.p_pv[k, t])
            rooms.append(lim if need > 0 else -lim)
        total = sum(abs(r) for r in rooms)
        share = min(abs(need), total) / total if total > 0 else 0.0
        for w in range(len(res.wind)):
            out.q_wt[w, t] = share * rooms[w]
        for k in range(len(res.pv)):
            out.q_pv[k, t] = share * rooms[len(res.wind) + k]
        out.q_es[:, t] = 0.0
    return out


def baseline_traditional(scn: Scenario, opts=None):
    """Schedule from the network-blind plant optimization plus greedy reactive dispatch."""
    from .optimizer import OptimizerOptions, optimize

    o = opts or OptimizerOptions()
    o = OptimizerOptions(**{**o.__dict__, "method": "baseline"})
    result = optimize(scn, o)
    result.setpoints = greedy_reactive(scn, result.schedule, result.setpoints)
    return result
