"""Commitment logic for a fleet of electrolyzers.

States are encoded as small integers in schedules (see ``STATE_CODES``) so a
whole fleet fits in an ``(n_units, n_steps)`` integer array.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import elz_phys as ep
from . import rectifier as rc
from .errors import InfeasibleVoltageError

PRODUCTION, STANDBY, IDLE = 0, 1, 2
STATE_CODES = {ep.State.PRODUCTION: PRODUCTION, ep.State.STANDBY: STANDBY, ep.State.IDLE: IDLE}
CODE_STATES = {v: k for k, v in STATE_CODES.items()}


@dataclass(frozen=True)
class ElectrolyzerParams:
    """Everything needed to evaluate one unit: stack, auxiliaries, rectifier."""
    stack: ep.StackParams = field(default_factory=ep.StackParams)
    aux: ep.AuxParams = field(default_factory=ep.AuxParams)
    rectifier: rc.RectifierParams = field(default_factory=rc.RectifierParams)

    @property
    def rated_power_kw(self) -> float:
        return float(ep.stack_power(self.stack, self.stack.i_max, self.stack.t_max))


@dataclass(frozen=True)
class UnitState:
    b_on: int
    b_by: int
    b_idle: int
    b_su: int = 0
    b_sd: int = 0

    @classmethod
    def of(cls, state, su=0, sd=0) -> "UnitState":
        code = STATE_CODES[state] if isinstance(state, ep.State) else int(state)
        return cls(int(code == PRODUCTION), int(code == STANDBY), int(code == IDLE), su, sd)

    @property
    def code(self) -> int:
        if self.b_on:
            return PRODUCTION
        return STANDBY if self.b_by else IDLE


@dataclass(frozen=True)
class Violation:
    unit: int
    step: int
    rule: str
    detail: str = ""


def derive_transitions(states: np.ndarray, initial: np.ndarray):
    """Startup/shutdown indicators implied by a state array.

    ``states`` is ``(M, T)`` of state codes, ``initial`` the codes at step -1.
    A startup is leaving Idle; a shutdown is entering Idle.
    """
    states = np.atleast_2d(np.asarray(states, dtype=int))
    prev = np.column_stack([np.asarray(initial, dtype=int), states[:, :-1]])
    idle, idle_prev = states == IDLE, prev == IDLE
    return (idle_prev & ~idle).astype(int), (~idle_prev & idle).astype(int)


def validate_transitions(seq, initial=None) -> list[Violation]:
    """Check every state-logic row on a fleet sequence.

    ``seq[m][t]`` is a :class:`UnitState`.  ``initial[m]`` is the state code
    before the horizon (assumed held for two steps); defaults to the first state.
    """
    out = []
    for m, row in enumerate(seq):
        init = row[0].code if initial is None else int(initial[m])
        init_st = UnitState.of(init)
        hist = [init_st, init_st] + list(row)
        for t, s in enumerate(row):
            prev, prev2 = hist[t + 1], hist[t]
            if s.b_on + s.b_by + s.b_idle != 1:
                out.append(Violation(m, t, "one_hot", "state flags do not sum to 1"))
            if s.b_on + s.b_by + prev.b_idle - 1 > s.b_su:
                out.append(Violation(m, t, "startup", "left Idle without a startup flag"))
            if prev.b_on + prev.b_by + s.b_idle - 1 > s.b_sd:
                out.append(Violation(m, t, "shutdown", "entered Idle without a shutdown flag"))
            if t >= 1 and -prev2.b_idle - s.b_idle + prev.b_idle > 0:
                out.append(Violation(m, t, "min_idle", f"single-step Idle at step {t - 1}"))
    return out


def sequence_from_codes(states, initial) -> list[list[UnitState]]:
    """Build a fully-flagged UnitState sequence from a state-code array."""
    states = np.atleast_2d(np.asarray(states, dtype=int))
    su, sd = derive_transitions(states, initial)
    return [[UnitState.of(int(states[m, t]), int(su[m, t]), int(sd[m, t]))
             for t in range(states.shape[1])] for m in range(states.shape[0])]


def transition_costs(seq, c_su: float = 1000.0, c_sd: float = 0.0) -> float:
    """Startup and shutdown costs [CNY] of a flagged sequence."""
    return float(sum(c_su * s.b_su + c_sd * s.b_sd for row in seq for s in row))


@dataclass
class FleetSchedule:
    """Per-unit, per-step commitment and set-points.

    ``temperature`` has one more column than the other arrays: column ``t`` is
    the temperature at the start of step ``t``.
    """
    states: np.ndarray  # (M, T) int codes
    current: np.ndarray  # (M, T) kA
    p_cool: np.ndarray  # (M, T) kW
    temperature: np.ndarray  # (M, T+1) degC
    initial_states: np.ndarray  # (M,)

    def __post_init__(self):
        self.states = np.atleast_2d(np.asarray(self.states, dtype=int))
        self.current = np.atleast_2d(np.asarray(self.current, dtype=float))
        self.p_cool = np.atleast_2d(np.asarray(self.p_cool, dtype=float))
        self.temperature = np.atleast_2d(np.asarray(self.temperature, dtype=float))
        self.initial_states = np.asarray(self.initial_states, dtype=int)

    @property
    def n_units(self) -> int:
        return self.states.shape[0]

    @property
    def horizon(self) -> int:
        return self.states.shape[1]

    def transitions(self):
        return derive_transitions(self.states, self.initial_states)

    def sequence(self):
        return sequence_from_codes(self.states, self.initial_states)

    def box_violations(self, units: list[ElectrolyzerParams], tol: float = 1e-6) -> list[Violation]:
        out = []
        for m, u in enumerate(units):
            for t in range(self.horizon):
                op = ep.OperatingPoint(self.current[m, t], self.temperature[m, t],
                                       CODE_STATES[int(self.states[m, t])])
                out += [Violation(m, t, "box", msg) for msg in op.check(u.stack, tol)]
        return out

    def to_dict(self) -> dict:
        return {
            "states": [[CODE_STATES[int(c)].value for c in row] for row in self.states],
            "current_kA": self.current.tolist(),
            "p_cool_kW": self.p_cool.tolist(),
            "temperature_C": self.temperature.tolist(),
            "initial_states": [CODE_STATES[int(c)].value for c in self.initial_states],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FleetSchedule":
        enc = {s.value: c for s, c in STATE_CODES.items()}
        return cls(
            states=[[enc[s] for s in row] for row in d["states"]],
            current=d["current_kA"], p_cool=d["p_cool_kW"],
            temperature=d["temperature_C"],
            initial_states=[enc[s] for s in d["initial_states"]],
        )


def unit_load(u: ElectrolyzerParams, state_code: int, i: float, t: float, p_cool: float,
              u_ac: float) -> tuple[float, float]:
    state = CODE_STATES[int(state_code)]
    return rc.apparent_load(u.rectifier, u.stack, u_ac, i, t, state, u.aux, p_cool)


def fleet_load(schedule: FleetSchedule, units: list[ElectrolyzerParams], u_ac=None):
    """Per-step plant-bus load ``(p_L [MW], q_L [MVar])`` summed over units.

    ``u_ac`` is the transformer primary voltage [kV], scalar or per step;
    defaults to each rectifier's nominal value.
    """
    T = schedule.horizon
    p_l, q_l = np.zeros(T), np.zeros(T)
    for t in range(T):
        for m, u in enumerate(units):
            v = u.rectifier.u_ac_nominal if u_ac is None else float(np.broadcast_to(u_ac, T)[t])
            try:
                p, q = unit_load(u, schedule.states[m, t], schedule.current[m, t],
                                 schedule.temperature[m, t], schedule.p_cool[m, t], v)
            except InfeasibleVoltageError as exc:
                raise InfeasibleVoltageError(f"unit {m} step {t}: {exc}") from exc
            p_l[t] += p
            q_l[t] += q
    return p_l, q_l


@dataclass(frozen=True)
class SplitResult:
    currents: tuple[float, ...]  # kA per loaded unit
    efficiency: float  # total hydrogen LHV over total DC power
    q_mvar: float  # rectifier reactive power summed over units


def evaluate_split(u: ElectrolyzerParams, powers_kw, t: float = 80.0, u_ac: float | None = None) -> SplitResult:
    """Operate identical units at the given DC powers and report the plant-level outcome."""
    u_ac = u.rectifier.u_ac_nominal if u_ac is None else u_ac
    currents = tuple(ep.current_for_power(u.stack, p, t) for p in powers_kw)
    h2 = sum(float(ep.hydrogen_flow(u.stack, i)) for i in currents)
    q = sum(float(rc.reactive_power(u.rectifier, u.stack, u_ac, i, t)) for i in currents)
    return SplitResult(currents, h2 * u.stack.lhv / float(sum(powers_kw)), q)
