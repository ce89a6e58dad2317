import copy
import json
from importlib import resources

import numpy as np
import pytest

from h2sched.cases import case_study, random_profiles
from h2sched.errors import ScenarioError
from h2sched.scenario import load_scenario, save_scenario, scenario_from_dict, scenario_to_dict, validate_file

DATA = resources.files("h2sched") / "data"


@pytest.fixture(scope="module")
def raw():
    return json.loads((DATA / "case_study.json").read_text())


def problems_of(d):
    with pytest.raises(ScenarioError) as exc:
        scenario_from_dict(d)
    return dict(exc.value.problems)


def test_bundled_files_are_clean():
    assert validate_file(DATA / "case_study.json") == []
    files = sorted((DATA / "scenarios").iterdir())
    assert len(files) >= 10
    for f in files:
        assert validate_file(f) == [], f.name


def test_bundled_case_matches_generator():
    scn = load_scenario(DATA / "case_study.json")
    ref = case_study()
    assert np.allclose(scn.series.wind_mw, ref.series.wind_mw)
    assert scn.n_units == 4 and scn.horizon == 24
    assert scn.meta["synthetic"] is True


def test_truncated_series_is_located(raw):
    d = copy.deepcopy(raw)
    d["series"]["wind_mw"][2] = d["series"]["wind_mw"][2][:20]
    probs = problems_of(d)
    assert "series.wind_mw" in probs or "series.wind_mw[2]" in probs


def test_negative_price_is_located(raw):
    d = copy.deepcopy(raw)
    d["economics"]["c_h2"] = -1.0
    assert "economics.c_h2" in problems_of(d)


def test_negative_availability_is_located(raw):
    d = copy.deepcopy(raw)
    d["series"]["pv_mw"][0][5] = -0.5
    assert "series.pv_mw[0][5]" in problems_of(d)


def test_every_problem_reported_at_once(raw):
    d = copy.deepcopy(raw)
    d["economics"]["c_su"] = -5
    d["devices"]["svcs"][0]["bus"] = 42
    d["initial"]["states"][1] = "Sleeping"
    probs = problems_of(d)
    assert {"economics.c_su", "devices.svcs[0].bus", "initial.states[1]"} <= set(probs)


def test_missing_section(raw):
    d = copy.deepcopy(raw)
    del d["network"]
    assert problems_of(d) == {"network": "missing section"}


def test_unknown_field_is_rejected(raw):
    d = copy.deepcopy(raw)
    d["plant"]["units"][0]["stack"]["n_cells"] = 100
    assert any(k.startswith("plant.units[0].stack") for k in problems_of(d))


def test_invalid_json_points_at_position(tmp_path):
    p = tmp_path / "broken.json"
    p.write_text('{"name": "x",\n  "horizon": }')
    (loc, msg), = validate_file(p)
    assert loc.startswith("broken.json:2:") and "invalid JSON" in msg


def test_round_trip(tmp_path):
    scn = case_study(random_profiles(7), name="rt")
    path = tmp_path / "rt.json"
    save_scenario(scn, path)
    back = load_scenario(path)
    assert scenario_to_dict(back) == scenario_to_dict(scn)


def test_truncation():
    scn = case_study().truncated(5)
    assert scn.horizon == 5 and scn.series.wind_mw.shape == (4, 5) and scn.series.ambient_c.shape == (5,)
    with pytest.raises(ValueError):
        case_study().truncated(0)
