"""Independent scalar re-derivations used as test oracles.

Written against plain ``math``/``numpy`` with constants spelled out, so they share
no code with the package.  The scalar formulas also accept arrays.
"""
import math

import numpy as np

# default stack pack
U_REV, R1, R2, S = 1.229, 8.05e-5, -2.5e-7, 0.185
T1, T2, T3 = -0.1002, 8.424, 247.3
AREA, N_CELL = 3.0, 221
F1, F2 = 25000.0, 0.96
LHV = 33.33
FARADAY = 96485.0

# default rectifier pack
K, NU = 167.0, 0.989
A0, A1, A2 = 10.0, 2.5, 0.245

# default thermal pack
C_HEAT, R_DISS, U_TH, T_AMB = 90.0, 0.045, 1.48, 25.0
P_STANDBY = 50.0


def cell_voltage(i_ka, t_c):
    j = i_ka * 1000.0 / AREA
    return U_REV + (R1 + R2 * t_c) * j + S * np.log10((T1 + T2 / t_c + T3 / t_c ** 2) * j + 1.0)


def stack_kw(i_ka, t_c):
    return N_CELL * cell_voltage(i_ka, t_c) * i_ka


def h2_kg_per_h(i_ka):
    j = i_ka * 1000.0 / AREA
    eta_f = j * j / (F1 + j * j) * F2
    return eta_f * N_CELL * i_ka * 1000.0 / (2 * FARADAY) * 2.0 * 3.6


def efficiency(i_ka, t_c):
    return h2_kg_per_h(i_ka) * LHV / stack_kw(i_ka, t_c)


def loss_kw(i_ka):
    return A2 * i_ka * i_ka + A1 * i_ka + A0


def q_two_path(u_ac_kv, i_ka, t_c):
    """Reactive power [MVar] through the firing angle and the AC line current."""
    u_dc = N_CELL * cell_voltage(i_ka, t_c) / 1000.0
    phi = math.acos(K * u_dc / (2.44 * u_ac_kv))
    p = stack_kw(i_ka, t_c) + loss_kw(i_ka)
    i_line = p / (math.sqrt(3) * u_ac_kv * math.cos(phi))
    s_va = math.sqrt(3) * u_ac_kv * i_line
    q_shift = s_va * math.sin(phi)
    q_dist = s_va * math.sqrt(1 - NU * NU) / NU
    return math.hypot(q_shift, q_dist) / 1000.0


def thermal_next(t_now, i_ka, p_cool, dt=1.0):
    gen = np.where(np.asarray(i_ka) > 0, i_ka * N_CELL * (cell_voltage(i_ka, t_now) - U_TH), 0.0)
    return t_now + dt / C_HEAT * (gen - (t_now - T_AMB) / R_DISS - p_cool)


def two_bus_voltage(r, x, p_load, q_load, v0=1.0):
    """Receiving-end voltage of a radial 2-bus line (p.u.) from the quartic in |V|."""
    # |V|^4 + (2(rP + xQ) - V0^2)|V|^2 + (r^2 + x^2)(P^2 + Q^2) = 0
    b = 2 * (r * p_load + x * q_load) - v0 * v0
    c = (r * r + x * x) * (p_load * p_load + q_load * q_load)
    w = (-b + math.sqrt(b * b - 4 * c)) / 2
    return math.sqrt(w)
