import csv
import json
import shutil
import time
from importlib import resources

import pytest

from h2sched.cli import BATCH_FIELDS, EXIT_INVALID, EXIT_OK, main

DATA = resources.files("h2sched") / "data"
CASE = str(DATA / "case_study.json")
FAST = ["--budget-seconds", "20", "--horizon", "1"]


def test_validate_ok(capsys):
    assert main(["validate", CASE]) == EXIT_OK
    assert capsys.readouterr().out.strip().endswith(": ok")


def test_validate_reports_locations(tmp_path, capsys):
    d = json.loads(open(CASE).read())
    d["economics"]["c_h2"] = -3
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(d))
    assert main(["validate", str(p)]) == EXIT_INVALID
    assert "economics.c_h2" in capsys.readouterr().out


def test_optimize_invalid_file(tmp_path):
    p = tmp_path / "x.json"
    p.write_text("{")
    assert main(["optimize", str(p), "--out", str(tmp_path / "o")]) == EXIT_INVALID


def test_optimize_one_step_writes_outputs(tmp_path, capsys):
    out = tmp_path / "run"
    t0 = time.perf_counter()
    code = main(["optimize", CASE, *FAST, "--baseline", "--out", str(out)])
    assert time.perf_counter() - t0 < 30
    assert code == EXIT_OK
    text = capsys.readouterr().out
    assert "Change" in text and "hydrogen" in text
    for name in ("schedule.json", "baseline_schedule.json", "summary.json"):
        json.loads((out / name).read_text())
    rows = list(csv.DictReader(open(out / "simulation.csv")))
    assert len(rows) == 1
    sched = json.loads((out / "schedule.json").read_text())
    assert len(sched["schedule"]["states"]) == 4


@pytest.mark.parametrize("grid", ["7", "2x5", "ax3", "7x2"])
def test_bad_pwl_grid(grid, tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["optimize", CASE, "--pwl-grid", grid, "--out", str(tmp_path)])
    assert exc.value.code == 2  # argparse usage error


def test_bad_horizon(tmp_path):
    assert main(["optimize", CASE, "--horizon", "0", "--out", str(tmp_path)]) == EXIT_INVALID


def test_batch_on_missing_directory(tmp_path):
    assert main(["batch", str(tmp_path / "nope"), "--out", str(tmp_path)]) == EXIT_INVALID


def test_batch_on_empty_directory(tmp_path):
    (tmp_path / "in").mkdir()
    assert main(["batch", str(tmp_path / "in"), "--out", str(tmp_path / "o")]) == EXIT_OK
    rows = list(csv.DictReader(open(tmp_path / "o" / "batch.csv")))
    assert rows == []


def test_batch_isolates_failures(tmp_path):
    src = tmp_path / "in"
    src.mkdir()
    for name in ("synthetic_101.json", "synthetic_102.json"):
        shutil.copy(DATA / "scenarios" / name, src / name)
    (src / "zz_broken.json").write_text("[]")
    code = main(["batch", str(src), *FAST, "--out", str(tmp_path / "o")])
    rows = list(csv.DictReader(open(tmp_path / "o" / "batch.csv")))
    assert [r["scenario"] for r in rows] == ["synthetic_101", "synthetic_102", "zz_broken", "mean"]
    assert rows[2]["status"].startswith("invalid")
    assert rows[3]["status"] == "2/3 ok"
    assert list(rows[0]) == BATCH_FIELDS
    assert code == EXIT_INVALID
    assert (tmp_path / "o" / "synthetic_101" / "summary.json").exists()
