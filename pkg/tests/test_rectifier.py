import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from h2sched import elz_phys as ep
from h2sched import rectifier as rc
from h2sched.errors import DomainError, InfeasibleVoltageError

import oracles

RP, SP, AX = rc.RectifierParams(), ep.StackParams(), ep.AuxParams()


def test_loss_polynomial():
    zero = RP.with_(loss_a0=0.0, loss_a1=0.0, loss_a2=0.0)
    assert rc.rectifier_loss(zero, 7.0) == 0.0
    hand = RP.with_(loss_a2=0.1, loss_a1=1.0, loss_a0=5.0)
    assert rc.rectifier_loss(hand, 10.0) == pytest.approx(25.0)
    assert float(rc.rectifier_loss(RP, SP.i_max)) == pytest.approx(75.28, rel=1e-12)


def test_loss_near_one_and_a_half_percent_of_rated():
    rated = float(ep.stack_power(SP, SP.i_max, SP.t_max))
    assert float(rc.rectifier_loss(RP, SP.i_max)) / rated == pytest.approx(0.015, abs=0.001)


def test_firing_angle_boundaries():
    u_ac = 35.0
    assert rc.firing_angle(RP, 2.44 * u_ac / RP.turns_ratio_k, u_ac) == pytest.approx(0.0, abs=1e-7)
    assert rc.firing_angle(RP, 1.22 * u_ac / RP.turns_ratio_k, u_ac) == pytest.approx(math.pi / 3, rel=1e-12)
    with pytest.raises(InfeasibleVoltageError):
        rc.firing_angle(RP, 1.01 * 2.44 * u_ac / RP.turns_ratio_k, u_ac)
    with pytest.raises(DomainError):
        rc.firing_angle(RP, 0.0, u_ac)


def test_firing_angle_at_rated_point():
    u_dc = float(ep.dc_voltage_kv(SP, SP.i_max, SP.t_max))
    assert float(rc.firing_angle(RP, u_dc, 35.0)) == pytest.approx(0.617653453984383, rel=1e-12)


def test_reactive_power_pinned_mid_load():
    q = rc.reactive_power(RP, SP, 35.0, 6.0, 80.0)
    assert q == pytest.approx(2.1487528031300633, rel=1e-9)
    assert q == pytest.approx(rc.reactive_power_two_path(RP, SP, 35.0, 6.0, 80.0), rel=1e-9)


def test_no_reactive_power_without_shift_or_distortion():
    ideal = RP.with_(harmonic_factor_nu=1.0)
    u_dc = float(ep.dc_voltage_kv(SP, 6.0, 80.0))
    u_ac = ideal.turns_ratio_k * u_dc / 2.44
    assert rc.reactive_power(ideal, SP, u_ac, 6.0, 80.0) == pytest.approx(0.0, abs=1e-6)
    assert rc.reactive_power(RP, SP, 35.0, 0.0, 80.0) == 0.0


def test_reactive_power_rises_with_current():
    i = np.linspace(SP.i_min, SP.i_max, 40)
    q = rc.reactive_power(RP, SP, 35.0, i, 60.0)
    assert np.all(np.diff(q) > 0)
    assert np.allclose(q, [oracles.q_two_path(35.0, x, 60.0) for x in i], rtol=1e-9)


feasible = st.tuples(st.floats(0.95 * 35, 1.05 * 35), st.floats(3.0, 12.0), st.floats(25.0, 80.0))


@given(feasible)
def test_two_path_consistency(p):
    u_ac, i, t = p
    a = rc.reactive_power(RP, SP, u_ac, i, t)
    b = rc.reactive_power_two_path(RP, SP, u_ac, i, t)
    assert a == pytest.approx(b, rel=1e-9)
    assert a > 0


@given(feasible)
def test_power_factor_identity(p):
    u_ac, i, t = p
    q_s, _, op = rc.reactive_components(RP, SP, u_ac, i, t)
    p_mw = (float(ep.stack_power(SP, i, t)) + float(rc.rectifier_loss(RP, i))) / 1000.0
    assert p_mw / math.hypot(p_mw, q_s) == pytest.approx(math.cos(op.phi), rel=1e-9)


@given(st.floats(0.95 * 35, 1.05 * 35), st.floats(3.0, 12.0), st.floats(30.0, 75.0))
def test_temperature_sensitivity_matches_voltage_sensitivity(u_ac, i, t):
    h = 0.1
    dq = (rc.reactive_power(RP, SP, u_ac, i, t + h) - rc.reactive_power(RP, SP, u_ac, i, t - h)) / (2 * h)
    du = float(ep.stack_voltage(SP, i, t + h) - ep.stack_voltage(SP, i, t - h)) / (2 * h)
    # numerical derivative against its own finer estimate, and the sign rule
    h2 = h / 10
    dq_fine = (rc.reactive_power(RP, SP, u_ac, i, t + h2) - rc.reactive_power(RP, SP, u_ac, i, t - h2)) / (2 * h2)
    assert dq == pytest.approx(dq_fine, rel=1e-4, abs=1e-12)
    dq_du = (rc.reactive_power(RP, SP, u_ac, i, t) - _q_with_cell_shift(u_ac, i, t, -1e-6)) / 1e-6
    assert np.sign(dq) == np.sign(dq_du * du)


def _q_with_cell_shift(u_ac, i, t, shift):
    shifted = SP.with_(u_rev=SP.u_rev + shift)
    return rc.reactive_power(RP, shifted, u_ac, i, t)


def test_ceiling_and_max_current():
    u_low = 0.80 * 35.0
    i_cap = rc.max_feasible_current(RP, SP, u_low, 25.0)
    assert 0 < i_cap < SP.i_max
    with pytest.raises(InfeasibleVoltageError):
        rc.reactive_power(RP, SP, u_low, min(SP.i_max, i_cap + 0.05), 25.0)
    assert rc.max_feasible_current(RP, SP, 35.0, 80.0) == SP.i_max
    assert rc.worst_case_cos_phi(RP, SP, 0.95) < 1.0


def test_apparent_load():
    assert rc.apparent_load(RP, SP, 35.0, 0.0, 60.0, ep.State.IDLE, AX) == (0.0, 0.0)
    assert rc.apparent_load(RP, SP, 35.0, 0.0, 60.0, ep.State.STANDBY, AX) == (AX.p_standby / 1000.0, 0.0)
    p, q = rc.apparent_load(RP, SP, 35.0, 12.0, 80.0)
    assert p == pytest.approx(5.078020021049981, rel=1e-12)
    assert q == pytest.approx(3.725637501106203, rel=1e-9)
    p_c, _ = rc.apparent_load(RP, SP, 35.0, 12.0, 80.0, ep.State.PRODUCTION, AX, p_cool=85.0)
    assert p_c - p == pytest.approx(0.1)


def test_rectifier_invariants():
    with pytest.raises(DomainError):
        rc.RectifierParams(harmonic_factor_nu=0.0)
    with pytest.raises(DomainError):
        rc.RectifierParams(pulse_constant=1.35)
