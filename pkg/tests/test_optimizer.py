import numpy as np
import pytest

from h2sched import elz_phys as ep
from h2sched.cases import case_study
from h2sched.fleet import IDLE, PRODUCTION, STANDBY
from h2sched.grid import distflow_residuals
from h2sched.micp import Budget, solve
from h2sched.optimizer import OptimizerOptions, build_model, extract_schedule, optimize
from h2sched.powerflow import run_powerflow
from h2sched.pwl import build_surfaces

import toys

TIGHT = Budget(time_limit=60.0, mip_rel_gap=1e-6)


@pytest.fixture(scope="module")
def toy_one():
    s = toys.make_toy([IDLE], [40.0], [1.0, 1.0], c_su=3000.0)
    return toys.make_toy([IDLE], [40.0], toys.wind_for(s, [[9.3, 6.6]]), c_su=3000.0)


def _opts(**kw):
    return OptimizerOptions(budget=TIGHT, **kw)


def test_toy_matches_brute_force(toy_one):
    best, (pattern, cur) = toys.brute_force(toy_one)
    res = optimize(toy_one, _opts())
    budget = toys.pwl_budget(toy_one, build_surfaces(toy_one.units[0], (7, 5), None, strict=False))
    assert pattern == ((PRODUCTION, PRODUCTION),)
    assert np.array_equal(res.schedule.states, [[PRODUCTION, PRODUCTION]])
    assert abs(res.model_profit - best) <= budget
    assert res.schedule.current == pytest.approx(cur, abs=0.05)


def test_baseline_agrees_on_uncongested_toy(toy_one):
    co = optimize(toy_one, _opts())
    bl = optimize(toy_one, _opts(method="baseline"))
    assert np.array_equal(co.schedule.states, bl.schedule.states)
    assert co.model_profit == pytest.approx(bl.model_profit, rel=2e-3)


def test_no_wind_means_no_production():
    scn = toys.make_toy([PRODUCTION, IDLE], [60.0, 30.0], [0.0, 0.0, 0.0])
    res = optimize(scn, _opts())
    assert np.all(res.schedule.states == IDLE)
    assert res.model_profit == pytest.approx(0.0, abs=1e-6)
    assert res.model_hydrogen == pytest.approx(0.0, abs=1e-9)


def test_standby_is_cheaper_than_restarting():
    # power only at steps 0 and 2: idling in between would cost a second startup
    s = toys.make_toy([PRODUCTION], [60.0], [1.0, 1.0, 1.0], c_su=5000.0)
    wind = toys.wind_for(s, [[12.0, 12.0, 12.0]])
    wind[1] = 0.06
    scn = toys.make_toy([PRODUCTION], [60.0], wind, c_su=5000.0)
    res = optimize(scn, _opts())
    assert res.schedule.states.tolist() == [[PRODUCTION, STANDBY, PRODUCTION]]


def test_temperature_follows_the_thermal_recurrence(toy_one):
    res = optimize(toy_one, _opts())
    sch = res.schedule
    u = toy_one.units[0]
    # the model integrates the tabulated heat; compare against the closed form
    exact = ep.temperature_trajectory(u.stack, u.aux, sch.temperature[0, 0], sch.current[0], sch.p_cool[0], 1.0)
    assert sch.temperature[0] == pytest.approx(exact, abs=0.2)


def test_temperature_of_an_idle_unit_decays_freely():
    scn = toys.make_toy([IDLE], [70.0], [0.0, 0.0])
    sch = optimize(scn, _opts()).schedule
    u = scn.units[0]
    exact = ep.temperature_trajectory(u.stack, u.aux, 70.0, [0.0, 0.0], [0.0, 0.0], 1.0)
    assert sch.temperature[0] == pytest.approx(exact, abs=1e-6)


def _weak_toy(svc):
    # a long feeder that cannot carry the plant's reactive draw within the voltage band
    return toys.make_toy([PRODUCTION], [60.0], [8.0, 8.0], r=0.3, x=1.0, svc_mvar=svc)


def test_more_compensation_never_hurts():
    objs = [optimize(_weak_toy(q), _opts()).solution.objective for q in (0.0, 1.0, 3.0, 6.0)]
    assert all(b >= a - 1e-6 * abs(a) for a, b in zip(objs, objs[1:]))
    assert objs[-1] > objs[0]


def test_weak_feeder_respects_voltage_limit():
    built = build_model(_weak_toy(0.0), _opts())
    sol = solve(built.model, None, TIGHT)
    v2 = sol.x[built.v["v2"]]
    assert v2.min() >= (0.95 + built.options.voltage_margin) ** 2 - 1e-7


@pytest.mark.parametrize("rounds, slack", [(0, 0.02), (2, 1e-6)])
def test_sweep_agrees_with_relaxed_distflow(rounds, slack):
    scn = _weak_toy(1.0)
    built = build_model(scn, _opts())
    sol = solve(built.model, None, TIGHT, cone_rounds=rounds)
    x, v, net = sol.x, built.v, scn.network
    for t in range(scn.horizon):
        pf, qf, l2 = (x[v[key][0, t]] for key in ("P", "Q", "l"))
        v2 = x[v["v2"][:, t]]
        s2 = pf**2 + qf**2
        # the polyhedral cone is an outer approximation; tangent rounds close it
        assert abs(l2 * v2[0] - s2) <= slack * s2
        p_inj = np.array([0.0, -(pf - 0.3 * l2)])
        q_inj = np.array([0.0, -(qf - 1.0 * l2)])
        st = run_powerflow(net, p_inj, q_inj, tol=1e-12)
        assert np.sqrt(st.v2) == pytest.approx(np.sqrt(v2), abs=1e-4)
        assert max(distflow_residuals(net, st).values()) < 1e-9


def test_extraction_is_deterministic(toy_one):
    a = optimize(toy_one, _opts())
    b = optimize(toy_one, _opts())
    assert np.array_equal(a.schedule.states, b.schedule.states)
    assert np.allclose(a.schedule.current, b.schedule.current)
    assert a.model_profit == b.model_profit


def test_case_study_model_size():
    scn = case_study()
    co = build_model(scn).model.stats()
    bl = build_model(scn, OptimizerOptions(method="baseline")).model.stats()
    assert co == {"variables": 6101, "binaries": 960, "integers": 0, "linear_rows": 4076, "nonzeros": 47231,
                  "rotated_cones": 192, "disks": 72, "sos2_sets": 96}
    assert bl["rotated_cones"] == 0 and bl["disks"] == 0
    assert bl["binaries"] == 888


def test_model_is_well_formed():
    assert build_model(case_study().truncated(2)).model.check() == []


def test_bad_options_rejected():
    with pytest.raises(ValueError):
        OptimizerOptions(method="magic")
    with pytest.raises(ValueError):
        OptimizerOptions(sos2_encoding="unary")


def test_interval_encoding_gives_same_answer(toy_one):
    a = optimize(toy_one, _opts())
    b = optimize(toy_one, _opts(sos2_encoding="interval"))
    assert b.model_profit == pytest.approx(a.model_profit, rel=1e-4)


def test_extract_requires_incumbent(toy_one):
    from h2sched.errors import SolverError
    from h2sched.micp import Solution
    built = build_model(toy_one, _opts())
    with pytest.raises(SolverError):
        extract_schedule(built, Solution("no_incumbent", None, np.nan, np.nan, np.inf, "highs", 0.0))
