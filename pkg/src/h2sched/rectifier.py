"""AC-side model of the 24-pulse thyristor rectifier feeding one stack.

Voltages in kV (AC line voltage at the transformer primary, DC stack voltage),
currents in kA on the DC side, powers in kW internally; the public reactive
power and apparent-load results are in MVar / MW.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import elz_phys as ep
from .errors import DomainError, InfeasibleVoltageError

PULSE_CONSTANT = 2.44


@dataclass(frozen=True)
class RectifierParams:
    turns_ratio_k: float = 167.0
    harmonic_factor_nu: float = 0.989
    loss_a0: float = 10.0  # kW
    loss_a1: float = 2.5  # kW/kA
    loss_a2: float = 0.245  # kW/kA^2
    u_ac_nominal: float = 35.0  # kV, transformer primary at 1.0 p.u.
    pulse_constant: float = PULSE_CONSTANT

    def __post_init__(self):
        if not 0.0 < self.harmonic_factor_nu <= 1.0:
            raise DomainError("harmonic factor must lie in (0, 1]")
        if self.pulse_constant != PULSE_CONSTANT:
            raise DomainError("only the 24-pulse bridge (constant 2.44) is supported")
        if self.turns_ratio_k <= 0:
            raise DomainError("turns ratio must be positive")

    def with_(self, **kw) -> "RectifierParams":
        return replace(self, **kw)


@dataclass(frozen=True)
class AcOperatingPoint:
    u_ac: float  # kV
    phi: float  # rad
    i_ac: float  # kA


def rectifier_loss(rp: RectifierParams, i):
    """Conduction/transformer loss [kW] as a quadratic in the DC current."""
    i = np.asarray(i, dtype=float)
    if np.any(i < 0):
        raise DomainError("current must be non-negative")
    return rp.loss_a2 * i**2 + rp.loss_a1 * i + rp.loss_a0


def _cos_phi(rp: RectifierParams, u_stack, u_ac):
    return rp.turns_ratio_k * np.asarray(u_stack, dtype=float) / (rp.pulse_constant * np.asarray(u_ac, dtype=float))


def firing_angle(rp: RectifierParams, u_stack, u_ac):
    """Firing angle [rad] that maps ``u_ac`` [kV] onto the DC voltage ``u_stack`` [kV]."""
    c = _cos_phi(rp, u_stack, u_ac)
    if np.any(c > 1.0 + 1e-12):
        worst = float(np.max(c))
        raise InfeasibleVoltageError(
            f"DC demand exceeds converter ceiling: K*U_dc/(2.44*U_ac) = {worst:.6f} > 1")
    if np.any(c <= 0):
        raise DomainError("firing-angle cosine must be positive")
    return np.arccos(np.minimum(c, 1.0))


def reactive_power(rp: RectifierParams, sp: ep.StackParams, u_ac, i, t):
    """Total reactive power [MVar] from the single closed form in (U_ac, I, T).

    Returns 0 for a de-energized unit (i == 0).
    """
    i = np.asarray(i, dtype=float)
    u_ac = np.asarray(u_ac, dtype=float)
    if np.any(i < 0):
        raise DomainError("current must be non-negative")
    on = i > 0
    i_eval = np.where(on, i, sp.i_min)
    u_dc = ep.dc_voltage_kv(sp, i_eval, t)
    ratio = _cos_phi(rp, u_dc, u_ac)
    if np.any(on & (ratio > 1.0 + 1e-12)):
        raise InfeasibleVoltageError(
            f"DC demand exceeds converter ceiling: K*U_dc/(2.44*U_ac) = {float(np.max(ratio[on])):.6f} > 1")
    nu = rp.harmonic_factor_nu
    p_kw = u_dc * 1000.0 * i_eval + rectifier_loss(rp, i_eval)
    root = np.sqrt(np.sin(np.arccos(np.minimum(ratio, 1.0))) ** 2 + (1 - nu**2) / nu**2)
    q_kvar = rp.pulse_constant * p_kw * u_ac / (rp.turns_ratio_k * u_dc) * root
    q = np.where(on, q_kvar / 1000.0, 0.0)
    return q if q.ndim else float(q)


def reactive_components(rp: RectifierParams, sp: ep.StackParams, u_ac: float, i: float, t: float):
    """Phase-shift and distortion components via the AC line current.

    Returns ``(q_s, q_d, AcOperatingPoint)`` with the powers in MVar.  This is a
    separate evaluation path from :func:`reactive_power`.
    """
    if i <= 0:
        return 0.0, 0.0, AcOperatingPoint(u_ac, 0.0, 0.0)
    u_dc = float(ep.dc_voltage_kv(sp, i, t))
    phi = float(firing_angle(rp, u_dc, u_ac))
    p_kw = u_dc * 1000.0 * i + float(rectifier_loss(rp, i))
    i_ac = p_kw / (np.sqrt(3.0) * u_ac * np.cos(phi))  # A
    s = np.sqrt(3.0) * u_ac * i_ac  # kVA
    nu = rp.harmonic_factor_nu
    q_s = s * np.sin(phi) / 1000.0
    q_d = s * np.sqrt(1 - nu**2) / nu / 1000.0
    return q_s, q_d, AcOperatingPoint(u_ac, phi, i_ac / 1000.0)


def reactive_power_two_path(rp, sp, u_ac, i, t) -> float:
    q_s, q_d, _ = reactive_components(rp, sp, u_ac, i, t)
    return float(np.hypot(q_s, q_d))


def max_feasible_current(rp: RectifierParams, sp: ep.StackParams, u_ac: float, t: float) -> float:
    """Largest current in [0, i_max] for which the firing angle exists (bisection)."""
    def ok(i):
        return _cos_phi(rp, ep.dc_voltage_kv(sp, i, t), u_ac) <= 1.0
    if ok(sp.i_max):
        return sp.i_max
    lo, hi = 0.0, sp.i_max
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if ok(mid) else (lo, mid)
    return lo


def worst_case_cos_phi(rp: RectifierParams, sp: ep.StackParams, v_min_pu: float) -> float:
    """cos(phi) at the corner of the operating box that stresses the converter most."""
    u = max(float(ep.dc_voltage_kv(sp, sp.i_max, tt)) for tt in np.linspace(sp.t_min, sp.t_max, 23))
    return float(_cos_phi(rp, u, v_min_pu * rp.u_ac_nominal))


def apparent_load(rp: RectifierParams, sp: ep.StackParams, u_ac: float, i: float, t: float,
                  state: ep.State = ep.State.PRODUCTION, aux: ep.AuxParams | None = None,
                  p_cool: float = 0.0) -> tuple[float, float]:
    """(P [MW], Q [MVar]) one unit draws at its AC bus."""
    aux_kw = ep.aux_power(aux, state, p_cool) if aux is not None else 0.0
    if state == ep.State.IDLE:
        return 0.0, 0.0
    if state == ep.State.STANDBY:
        if aux is None:
            raise DomainError("standby draw needs AuxParams")
        return aux_kw / 1000.0, 0.0
    p_kw = float(ep.stack_power(sp, i, t)) + float(rectifier_loss(rp, i)) + aux_kw
    return p_kw / 1000.0, float(reactive_power(rp, sp, u_ac, i, t))
