"""Tiny two-bus instances and an exhaustive reference solver for them.

Bus 1 holds the reference storage (with no power capacity) and one wind turbine;
bus 2 holds the plant and an SVC large enough to cover its reactive draw, so the
feeder only carries active power.  Wind availability is chosen so that the best
schedule puts each unit on a breakpoint of the enumeration grid.
"""
import itertools

import numpy as np

from h2sched import elz_phys as ep
from h2sched import rectifier as rc
from h2sched.fleet import IDLE, PRODUCTION, STANDBY, CODE_STATES, ElectrolyzerParams
from h2sched.grid import SVC, Branch, Bus, NetworkModel, ResourceParams, Storage, WindTurbine
from h2sched.scenario import Economics, InitialConditions, Scenario, ScenarioTimeSeries

import oracles

R, X = 0.002, 0.004  # per unit on 100 MVA
BASE = 100.0
GRID = np.linspace(3.0, 12.0, 21)


def plant_mw(u, code, i, t, p_cool=0.0):
    state = CODE_STATES[code]
    return rc.apparent_load(u.rectifier, u.stack, u.rectifier.u_ac_nominal, i, t, state, u.aux, p_cool)[0]


def sending_mw(load_mw):
    """Feeder sending-end power for a purely active load."""
    p = load_mw / BASE
    v = oracles.two_bus_voltage(R, X, p, 0.0)
    return (p + R * p * p / (v * v)) * BASE


def make_toy(init_states, init_temps, wind_mw, c_su=1000.0, name="toy", r=R, x=X, svc_mvar=12.0):
    m, horizon = len(init_states), len(wind_mw)
    net = NetworkModel([Bus(1), Bus(2)], [Branch(1, 2, r, x)], ref_bus=1, plant_bus=2, base_mva=BASE)
    res = ResourceParams(wind=[WindTurbine(1, 30.0)],
                         storage=[Storage(1, s_mva=0.01, p_in_max=0.0, p_out_max=0.0, soc_min=0.5,
                                          soc_max=4.75, soc_init=2.5)],
                         svcs=[SVC(2, svc_mvar)])
    series = ScenarioTimeSeries(np.array([wind_mw], float), np.zeros((0, horizon)), np.full(horizon, 25.0))
    init = InitialConditions(np.array(init_states), np.array(init_temps, float), np.array([2.5]),
                             np.zeros(0, int))
    return Scenario(name, [ElectrolyzerParams() for _ in range(m)], net, res, series,
                    Economics(c_su=c_su), horizon, 1.0, init)


def wind_for(scn, currents):
    """Availability that exactly feeds the given production currents (all units producing)."""
    u = scn.units[0]
    temps = list(scn.initial.temperatures)
    out = []
    for t in range(len(currents[0])):
        load = sum(plant_mw(u, PRODUCTION, currents[m][t], temps[m]) for m in range(scn.n_units))
        out.append(sending_mw(load) + 1e-7)
        temps = [oracles.thermal_next(temps[m], currents[m][t], 0.0) for m in range(scn.n_units)]
    return out


def _valid(row, initial):
    hist = [initial, initial] + list(row)
    return not any(hist[k] != IDLE and hist[k + 1] == IDLE and hist[k + 2] != IDLE
                   for k in range(1, len(hist) - 2))


def _unit_kw(code, i, t):
    if code == PRODUCTION:
        return oracles.stack_kw(i, t) + oracles.loss_kw(i)
    return np.full_like(t, oracles.P_STANDBY if code == STANDBY else 0.0)


def brute_force(scn):
    """Best profit over every state pattern and every grid current, with the path that attains it."""
    M, T = scn.n_units, scn.horizon
    econ, wind = scn.economics, scn.series.wind_mw[0]
    t_max = scn.units[0].stack.t_max
    best = (-np.inf, None)
    rows = [[r for r in itertools.product((PRODUCTION, STANDBY, IDLE), repeat=T)
             if _valid(r, int(scn.initial.states[m]))] for m in range(M)]
    for pattern in itertools.product(*rows):
        cost = 0.0
        for m, r in enumerate(pattern):
            prev = [int(scn.initial.states[m])] + list(r[:-1])
            cost += sum(econ.c_su * (a == IDLE and b != IDLE) + econ.c_sd * (a != IDLE and b == IDLE)
                        for a, b in zip(prev, r))
        slots = [(m, t) for m in range(M) for t in range(T) if pattern[m][t] == PRODUCTION]
        combos = list(itertools.product(GRID, repeat=len(slots)))
        n = len(combos)
        combos = np.array(combos, float).reshape(n, len(slots))
        cur = np.zeros((n, M, T))
        for k, (m, t) in enumerate(slots):
            cur[:, m, t] = combos[:, k]
        temps = np.tile(np.asarray(scn.initial.temperatures, float), (n, 1))
        ok = np.ones(n, bool)
        for t in range(T):
            load = sum(_unit_kw(pattern[m][t], cur[:, m, t], temps[:, m]) for m in range(M)) / 1000.0
            p = load / BASE
            v2 = (1 - 2 * R * p + np.sqrt((1 - 2 * R * p) ** 2 - 4 * R * R * p * p)) / 2
            ok &= (p + R * p * p / v2) * BASE <= wind[t]
            temps = np.stack([oracles.thermal_next(temps[:, m], cur[:, m, t], 0.0) for m in range(M)], axis=1)
            ok &= np.all(temps <= t_max, axis=1)
        if not ok.any():
            continue
        h2 = sum(oracles.h2_kg_per_h(cur[:, m, t]) for m, t in slots) * scn.dt if slots else np.zeros(n)
        profit = np.where(ok, econ.c_h2 * h2 - cost, -np.inf)
        k = int(np.argmax(profit))
        if profit[k] > best[0]:
            best = (float(profit[k]), (pattern, cur[k]))
    return best


def pwl_budget(scn, surf):
    """Profit error the piecewise-linear tables can account for on this instance [CNY].

    Per producing unit-step: the hydrogen table error, plus the hydrogen that the
    power-table error could buy at the steepest hydrogen-per-kW slope.
    """
    sp = scn.units[0].stack
    i = np.linspace(sp.i_min, sp.i_max, 200)
    slope = np.max(np.gradient(ep.hydrogen_flow(sp, i), ep.stack_power(sp, i, sp.t_min)))
    per_slot = surf.errors["h2"] + slope * (surf.errors["p_stack"] + surf.errors["p_loss"])
    return scn.economics.c_h2 * scn.dt * per_slot * scn.n_units * scn.horizon
