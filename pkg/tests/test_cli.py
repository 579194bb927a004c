import json

import pytest
import yaml

from blowup_lab.cli import main, report_rows

ODE = {
    "problem": {"n": 1, "R": 1.0, "lambda1": 1.0, "lambda2": 1.0,
                "u0": {"kind": "constant", "value": 0.0},
                "v0": {"kind": "constant", "value": 0.0},
                "toggles": {"diffusion": False, "reaction": True, "flux": False}},
    "grid": {"J": 16},
    "controls": {"u_stop": 18.0, "t_max": 10.0, "snapshot_every": 100},
}

FULL = {
    "problem": {"n": 1, "R": 1.0, "lambda1": 0.01, "lambda2": 0.01,
                "u0": {"kind": "quadratic-compatible", "base": -1.0},
                "v0": {"kind": "quadratic-compatible", "base": -1.5}},
    "grid": {"J": 32},
    "controls": {"snapshot_every": 2000},
    "barrier": {"A": "auto", "B": "auto"},
}


def write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(obj) if isinstance(obj, dict) else obj)
    return path


def test_validate_compatible_data(tmp_path, capsys):
    assert main(["validate", str(write(tmp_path, "full.yaml", FULL))]) == 0
    out = capsys.readouterr().out
    assert "flux-u" in out and "small-lambda" in out


def test_validate_constant_data_fails_compatibility(tmp_path, capsys):
    flat = {"kind": "constant", "value": 0.0}
    cfg = dict(FULL, problem=dict(FULL["problem"], u0=flat, v0=flat))
    assert main(["validate", str(write(tmp_path, "c.yaml", cfg))]) == 1
    assert "!! flux-u" in capsys.readouterr().out


def test_validate_without_compatible_profile(tmp_path):
    high = {"kind": "quadratic-compatible", "base": 0.5}
    cfg = dict(FULL, problem=dict(FULL["problem"], u0=high, v0=high))
    assert main(["validate", str(write(tmp_path, "nc.yaml", cfg))]) == 1


def test_validate_names_bad_field(tmp_path, capsys):
    cfg = dict(FULL, problem=dict(FULL["problem"], lambda1=-1.0))
    assert main(["validate", str(write(tmp_path, "bad.yaml", cfg))]) == 2
    assert "problem.lambda1" in capsys.readouterr().err


def test_validate_unparseable_yaml(tmp_path, capsys):
    assert main(["validate", str(write(tmp_path, "broken.yaml", "problem: [1, 2\n"))]) == 2
    assert "line" in capsys.readouterr().err


def test_validate_missing_file(tmp_path):
    assert main(["validate", str(tmp_path / "nope.yaml")]) == 2


def test_run_ode_config(tmp_path, capsys):
    out = tmp_path / "ode"
    assert main(["run", str(write(tmp_path, "ode.yaml", ODE)), "--out", str(out)]) == 0
    for name in ("config.yaml", "manifest.json", "trace.csv", "report.json"):
        assert (out / name).exists()
    assert list((out / "snapshots").glob("snap_*.csv"))
    report = json.loads((out / "report.json").read_text())
    assert report["stop_reason"] == "threshold"
    assert abs(report["T"]["T"] - 1.0) <= 1e-3
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["status"] == "completed"
    # the resolved config reproduces the run
    assert main(["run", str(out / "config.yaml"), "--out", str(tmp_path / "again")]) == 0
    assert (tmp_path / "again" / "trace.csv").read_bytes() == (out / "trace.csv").read_bytes()


def test_run_output_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("BLOWUP_LAB_OUT", str(tmp_path / "env"))
    assert main(["run", str(write(tmp_path, "ode.yaml", ODE))]) == 0
    assert (tmp_path / "env" / "ode" / "report.json").exists()


def test_run_horizon_reports_no_rates(tmp_path, capsys):
    cfg = dict(ODE, controls={"t_max": 0.5, "snapshot_every": 100})
    out = tmp_path / "h"
    assert main(["run", str(write(tmp_path, "h.yaml", cfg)), "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["stop_reason"] == "horizon"
    assert report["T"] is None and report["alpha_u"] is None and report["alpha_v"] is None
    assert main(["report", str(out)]) == 0
    text = capsys.readouterr().out
    assert "lower rate window (alpha >= 1/2)" in text and "not evaluated" in text


def test_run_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["run", str(write(tmp_path, "ode.yaml", ODE)),
                 "--out", str(blocker / "sub")]) == 3


def test_run_bad_config(tmp_path):
    cfg = dict(ODE, grid={"J": 4})
    assert main(["run", str(write(tmp_path, "j.yaml", cfg)), "--out", str(tmp_path / "o")]) == 2


def test_report_full_run(tmp_path, capsys):
    out = tmp_path / "full"
    assert main(["run", str(write(tmp_path, "full.yaml", FULL)), "--out", str(out)]) == 0
    capsys.readouterr()
    assert main(["report", str(out)]) == 0
    text = capsys.readouterr().out
    for label in ("radial/temporal monotonicity", "ratio bound", "gradient functionals",
                  "small-lambda condition", "interior bound", "supersolution dominates"):
        assert label in text
    assert "FAIL" not in text


def test_report_rows_without_barrier():
    report = {"monotonicity": None,
              "ratio": {"satisfied": True, "M_used": 1.0, "max_exp_v_minus_u": 1.0,
                        "max_exp_u_minus_v": 1.0},
              "gradient_functionals": {"J1": {"satisfied": True, "min": 0.0},
                                       "J2": {"satisfied": True, "min": 0.0}},
              "blowup_detected": False,
              "blowup_set": {"interior_bounded": True, "A": 1.0,
                             "table": [{"r": 0.5, "sup_u": 0.0, "sup_v": 0.0, "bound": 1.0}]},
              "barrier": {"evaluated": False, "reason": "blow-up time unavailable"}}
    rows = {label: (status, detail) for label, status, detail in report_rows(report)}
    assert rows["supersolution dominates u, v"] == ("not evaluated", "blow-up time unavailable")
    assert rows["radial/temporal monotonicity"][0] == "not evaluated"
    assert rows["small-lambda condition"][0] == "not evaluated"


def test_report_corrupted_json(tmp_path, capsys):
    (tmp_path / "report.json").write_text("{not json")
    assert main(["report", str(tmp_path)]) == 2
    assert "not valid JSON" in capsys.readouterr().err
    assert main(["report", str(tmp_path / "missing")]) == 2


def test_sweep_records_failed_entry(tmp_path):
    sweep = {"base": ODE, "parameters": {"problem.lambda1,problem.lambda2": [1.0, 2.0, "x"]}}
    out = tmp_path / "sw"
    assert main(["sweep", str(write(tmp_path, "sw.yaml", sweep)), "--out", str(out)]) == 0
    index = json.loads((out / "index.json").read_text())
    assert [e["status"] for e in index] == ["completed", "completed", "failed"]
    assert abs(index[0]["T"] - 1.0) <= 1e-3 and abs(index[1]["T"] - 0.5) <= 1e-3
    assert "lambda1" in index[2]["error"]
    assert len((out / "index.csv").read_text().splitlines()) == 4


def test_sweep_base_path_and_product(tmp_path):
    write(tmp_path, "ode.yaml", ODE)
    sweep = {"base": "ode.yaml",
             "parameters": {"problem.lambda1": [1.0, 2.0], "controls.u_stop": [12.0, 14.0]}}
    out = tmp_path / "p"
    assert main(["sweep", str(write(tmp_path, "p.yaml", sweep)), "--out", str(out)]) == 0
    index = json.loads((out / "index.json").read_text())
    assert len(index) == 4 and all(e["status"] == "completed" for e in index)


@pytest.mark.parametrize("params", [{}, {"problem.lambda1": []}])
def test_sweep_empty_product(tmp_path, params):
    path = write(tmp_path, "e.yaml", {"base": ODE, "parameters": params})
    assert main(["sweep", str(path), "--out", str(tmp_path / "e")]) == 2


def test_sweep_unknown_key(tmp_path):
    path = write(tmp_path, "u.yaml", {"base": ODE, "parameters": {}, "extra": 1})
    assert main(["sweep", str(path)]) == 2
