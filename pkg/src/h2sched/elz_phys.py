"""Electro-thermal model of one alkaline electrolyzer stack.

Units used throughout: current in kA, temperature in degC, cell voltage in V,
power in kW, hydrogen flow in kg/h, heat capacity in kWh/degC.

The empirical U-I curve is evaluated *per cell*; the DC voltage of the stack is
``n_cell`` times that value.  Every quantity that scales with stack size
(power, hydrogen flow, generated heat) carries the ``n_cell`` factor exactly once.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq

from .errors import ConstraintError, DomainError

FARADAY = 96485.0  # C/mol
H2_MOLAR_MASS = 2.0  # g/mol, as used in the production formula


class State(str, enum.Enum):
    PRODUCTION = "Production"
    STANDBY = "Standby"
    IDLE = "Idle"


@dataclass(frozen=True)
class StackParams:
    u_rev: float = 1.229
    r1: float = 8.05e-5  # ohm m^2
    r2: float = -2.5e-7  # ohm m^2 / degC
    s: float = 0.185  # V (base-10 logarithm)
    t1: float = -0.1002  # m^2/A
    t2: float = 8.424  # m^2 degC/A
    t3: float = 247.3  # m^2 degC^2/A
    area_a: float = 3.0  # m^2
    n_cell: int = 221
    f1: float = 25000.0  # (A/m^2)^2
    f2: float = 0.96
    i_min: float = 3.0  # kA
    i_max: float = 12.0  # kA
    t_min: float = 25.0
    t_max: float = 80.0
    lhv: float = 33.33  # kWh/kg

    def __post_init__(self):
        if not self.i_min < self.i_max:
            raise DomainError(f"i_min ({self.i_min}) must be below i_max ({self.i_max})")
        if not self.t_min < self.t_max:
            raise DomainError(f"t_min ({self.t_min}) must be below t_max ({self.t_max})")
        if not 0.0 < self.f2 <= 1.0:
            raise DomainError(f"f2 must lie in (0, 1], got {self.f2}")
        if self.area_a <= 0:
            raise DomainError("electrode area must be positive")
        if self.n_cell < 1:
            raise DomainError("n_cell must be at least 1")

    def with_(self, **kw) -> "StackParams":
        return replace(self, **kw)


@dataclass(frozen=True)
class AuxParams:
    eta_cool: float = 0.85
    p_standby: float = 50.0  # kW
    c_heat: float = 90.0  # kWh/degC
    r_diss: float = 0.045  # degC/kW
    u_th: float = 1.48  # V per cell
    t_ambient: float = 25.0  # stack hall temperature
    c_cool: float = 15.0  # kW/degC
    t_cool: float = 15.0

    def __post_init__(self):
        if not 0.0 < self.eta_cool <= 1.0:
            raise DomainError(f"eta_cool must lie in (0, 1], got {self.eta_cool}")
        if self.c_heat <= 0:
            raise DomainError("c_heat must be positive")
        if self.r_diss <= 0:
            raise DomainError("r_diss must be positive")

    def with_(self, **kw) -> "AuxParams":
        return replace(self, **kw)


@dataclass(frozen=True)
class OperatingPoint:
    current: float
    temperature: float
    state: State = State.PRODUCTION

    def check(self, p: StackParams, tol: float = 1e-9) -> list[str]:
        """Return the list of broken invariants (empty when consistent)."""
        out = []
        if self.state == State.PRODUCTION:
            if not p.i_min - tol <= self.current <= p.i_max + tol:
                out.append(f"current {self.current:.4f} kA outside [{p.i_min}, {p.i_max}]")
            if not p.t_min - tol <= self.temperature <= p.t_max + tol:
                out.append(f"temperature {self.temperature:.3f} C outside [{p.t_min}, {p.t_max}]")
        elif abs(self.current) > tol:
            out.append(f"{self.state.value} unit carries {self.current} kA")
        return out


def ulleberg_pack() -> tuple[StackParams, AuxParams]:
    """Builtin 5 MW alkaline pack: Ulleberg coefficients, 3 m^2 cells, 221 cells.

    Sized so 12 kA at 80 degC draws ~5.0 MW of DC power.
    """
    return StackParams(), AuxParams()


def current_density(p: StackParams, i):
    return np.asarray(i, dtype=float) * 1000.0 / p.area_a


def _log_arg(p: StackParams, i, t):
    t = np.asarray(t, dtype=float)
    return (p.t1 + p.t2 / t + p.t3 / t**2) * current_density(p, i) + 1.0


def stack_voltage(p: StackParams, i, t):
    """Cell voltage [V] from the empirical U-I curve (base-10 logarithm)."""
    i = np.asarray(i, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(i < 0):
        raise DomainError("current must be non-negative")
    if np.any((t <= 0) | (t > 100)):
        raise DomainError(f"temperature outside (0, 100] degC: {t}")
    arg = _log_arg(p, i, t)
    if np.any(arg <= 0):
        raise DomainError("log term: argument (t1 + t2/T + t3/T^2) j + 1 is not positive")
    ohmic = (p.r1 + p.r2 * t) * current_density(p, i)
    u = p.u_rev + ohmic + p.s * np.log10(arg)
    if not np.all(np.isfinite(u)):
        raise DomainError("stack voltage is not finite")
    return u


def dc_voltage_kv(p: StackParams, i, t):
    """DC bus voltage of the whole stack [kV]."""
    return p.n_cell * stack_voltage(p, i, t) / 1000.0


def stack_power(p: StackParams, i, t):
    """DC power drawn by the stack [kW] (V * kA = kW)."""
    return p.n_cell * stack_voltage(p, i, t) * np.asarray(i, dtype=float)


def current_for_power(p: StackParams, p_kw: float, t: float) -> float:
    """Stack current [kA] that draws ``p_kw`` of DC power at temperature ``t``."""
    if p_kw < 0:
        raise DomainError("power must be non-negative")
    if p_kw == 0:
        return 0.0
    hi = p.i_max
    while float(stack_power(p, hi, t)) < p_kw:
        hi *= 2.0
    return float(brentq(lambda i: float(stack_power(p, i, t)) - p_kw, 0.0, hi, xtol=1e-13, rtol=1e-14))


def faraday_efficiency(p: StackParams, i):
    j2 = current_density(p, i) ** 2
    return j2 / (p.f1 + j2) * p.f2


def hydrogen_flow(p: StackParams, i):
    """Hydrogen production [kg/h]."""
    i = np.asarray(i, dtype=float)
    if np.any(i < 0):
        raise DomainError("current must be non-negative")
    mol_per_s = p.n_cell * i * 1000.0 / (2.0 * FARADAY)
    return faraday_efficiency(p, i) * mol_per_s * H2_MOLAR_MASS * 3600.0 / 1000.0


def conversion_efficiency(p: StackParams, i, t):
    """Hydrogen LHV output over DC input."""
    i = np.asarray(i, dtype=float)
    if np.any(i <= 0):
        raise DomainError("efficiency is undefined at zero current")
    return hydrogen_flow(p, i) * p.lhv / stack_power(p, i, t)


def heat_generation(p: StackParams, a: AuxParams, i, t):
    """Electrolytic heat [kW]: current times the overvoltage above thermoneutral."""
    i = np.asarray(i, dtype=float)
    return i * p.n_cell * (stack_voltage(p, i, t) - a.u_th)


def heat_dissipation(a: AuxParams, t, t_ambient=None):
    t_am = a.t_ambient if t_ambient is None else t_ambient
    return (np.asarray(t, dtype=float) - t_am) / a.r_diss


def cooling_limit(a: AuxParams, t_now: float) -> float:
    """Upper bound on the cooling heat flow at temperature ``t_now`` [kW]."""
    return max(0.0, a.c_cool * (t_now - a.t_cool))


def thermal_step(p: StackParams, a: AuxParams, t_now: float, i: float, p_cool: float,
                 dt: float, t_ambient: float | None = None, tol: float = 1e-9) -> float:
    """Advance the first-order thermal model by one step of ``dt`` hours."""
    if dt <= 0:
        raise ConstraintError("dt must be positive")
    lim = cooling_limit(a, t_now)
    if p_cool < -tol or p_cool > lim + tol:
        raise ConstraintError(f"cooling {p_cool:.3f} kW outside [0, {lim:.3f}] at T={t_now:.2f} C")
    gen = float(heat_generation(p, a, i, t_now)) if i > 0 else 0.0
    diss = float(heat_dissipation(a, t_now, t_ambient))
    return t_now + dt / a.c_heat * (gen - diss - p_cool)


def aux_power(a: AuxParams, state: State, p_cool: float) -> float:
    """Auxiliary electric draw [kW]: cooling unless idle, plus standby load."""
    out = 0.0
    if state != State.IDLE:
        out += p_cool / a.eta_cool
    if state == State.STANDBY:
        out += a.p_standby
    return out


def temperature_trajectory(p, a, t0, currents, p_cool, dt, t_ambient=None):
    """Integrate ``thermal_step`` over a sequence; returns len(currents)+1 temperatures."""
    temps = [float(t0)]
    for k, i in enumerate(currents):
        amb = None if t_ambient is None else np.broadcast_to(t_ambient, len(currents))[k]
        temps.append(thermal_step(p, a, temps[-1], float(i), float(p_cool[k]), dt, amb))
    return np.array(temps)
