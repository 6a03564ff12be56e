"""Command-line interface: artifacts, exit codes, determinism."""

import json

import numpy as np
import pytest

from saacert.cli import main

BOX01 = '{"kind":"box","lo":[0],"hi":[1]}'


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def artifact(capsys, *argv):
    code, out, err = run_cli(capsys, *argv)
    assert code == 0, err
    return json.loads(out)


def test_entropy_artifact(capsys):
    blob = artifact(capsys, "entropy", "--space", BOX01,
                    "--theta", "0.4", "--h", "0.01")
    assert blob["schema_version"] == 1
    assert blob["kind"] == "entropy"
    assert blob["results"]["size"] == 3
    assert set(blob) >= {"schema_version", "kind", "seed", "params",
                         "results", "timestamp"}


def test_aalpha_artifact(capsys):
    blob = artifact(capsys, "aalpha", "--space",
                    '{"kind":"cloud","points":[[0],[1]]}', "--alpha", "1")
    assert blob["results"]["A_alpha"] == pytest.approx(1.5519953931848245)


def test_certify_with_sigma(capsys):
    blob = artifact(capsys, "certify", "--theorem", "fixed", "--eps", "0.1",
                    "--p", "0.05", "--C", "1", "--sigma", "2")
    assert blob["results"]["n_required"] == 1199


def test_certify_with_profile(capsys, tmp_path):
    profile = {"theorem": "fixed",
               "entries": {"sigma0_hat_X": 1.0, "sigma0_breve_z": 2.0,
                           "sigma0_breve_x_star": 0.5}}
    path = tmp_path / "profile.json"
    path.write_text(json.dumps(profile))
    blob = artifact(capsys, "certify", "--theorem", "fixed", "--eps", "0.1",
                    "--p", "0.05", "--profile", str(path))
    assert blob["results"]["sigma_hat"] == pytest.approx(2.0)


def test_certify_missing_inputs_exits_2(capsys):
    code, out, err = run_cli(capsys, "certify", "--theorem", "fixed",
                             "--eps", "0.1", "--p", "0.05")
    assert code == 2
    payload = json.loads(err)
    assert payload["error"] == "config"


def test_interior_margin_error_exits_2(capsys):
    code, _, err = run_cli(capsys, "certify", "--theorem", "interior",
                           "--eps", "0.4", "--p", "0.05", "--sigma", "2",
                           "--m", "1", "--slater", "0.2")
    assert code == 2
    assert json.loads(err)["error"] == "slater-margin"


def test_solve_artifact_deterministic(capsys):
    argv = ["solve", "--problem", '{"family":"quad1d","params":{"a":0.3}}',
            "--n", "200", "--seed", "9"]
    first = artifact(capsys, *argv)
    second = artifact(capsys, *argv)
    first.pop("timestamp")
    second.pop("timestamp")
    assert json.dumps(first, sort_keys=True) == json.dumps(second,
                                                           sort_keys=True)


def test_solve_reads_scenario_csv(capsys, tmp_path):
    path = tmp_path / "scen.csv"
    rng = np.random.default_rng(2)
    rows = ["xi_1"] + [f"{v}" for v in rng.standard_t(3, size=100)]
    path.write_text("\n".join(rows) + "\n")
    blob = artifact(capsys, "solve", "--problem", '{"family":"quad1d"}',
                    "--scenarios", str(path))
    assert blob["results"]["problem"]["n_scenarios"] == 100
    assert blob["results"]["solution"]["feasible"] is True


def test_validate_tail_plan(capsys, tmp_path):
    plan = {"experiment": "tail", "distribution": {"name": "t3"},
            "n": 100, "t_grid": [0.5, 1.0], "replications": 200,
            "constant": 3.0, "seed": 11}
    path = tmp_path / "plan.json"
    path.write_text(json.dumps(plan))
    blob = artifact(capsys, "validate", "--plan", str(path))
    assert blob["results"]["passed"] is True
    assert blob["seed"] == 11


def test_validate_unknown_experiment_exits_2(capsys):
    code, _, err = run_cli(capsys, "validate", "--plan",
                           '{"experiment":"nope"}')
    assert code == 2
    assert "experiment" in json.loads(err)["message"]


def test_calibrate_then_consume_constant(capsys, tmp_path):
    spec = {"plans": [{"family": "quad1d", "params": {"a": 0.3},
                       "theorem": "fixed", "event": "near-optimal-subset",
                       "eps": 0.1, "p": 0.1, "replications": 40,
                       "seed": 5, "h": 0.01}],
            "c_grid": [0.5, 1.0]}
    spec_path = tmp_path / "plans.json"
    spec_path.write_text(json.dumps(spec))
    out_path = tmp_path / "calibration.json"
    code, _, err = run_cli(capsys, "calibrate", "--families", str(spec_path),
                           "--out", str(out_path))
    assert code == 0, err
    calib = json.loads(out_path.read_text())
    c_star = calib["results"]["c_star"]
    blob = artifact(capsys, "certify", "--theorem", "fixed", "--eps", "0.1",
                    "--p", "0.05", "--sigma", "2", "--C-from", str(out_path))
    assert blob["results"]["constant"] == pytest.approx(c_star)


def test_portfolio_artifact(capsys):
    blob = artifact(capsys, "portfolio", "--synthetic", "2,120",
                    "--p", "0.2", "--beta", "0.05", "--seed", "3",
                    "--h", "0.05")
    res = blob["results"]
    assert res["cvar_of_solution"] <= res["beta"] + 1e-9
    assert sum(res["weights"]) == pytest.approx(1.0, abs=1e-9)


def test_lasso_artifact(capsys, tmp_path):
    rng = np.random.default_rng(5)
    X = rng.normal(size=(80, 2))
    y = 1.5 * X[:, 0] - 0.5 * X[:, 1] + 0.1 * rng.normal(size=80)
    rows = ["age,income,spend"] + [f"{a},{b},{c}"
                                   for a, b, c in np.column_stack([X, y])]
    path = tmp_path / "lasso.csv"
    path.write_text("\n".join(rows) + "\n")
    blob = artifact(capsys, "lasso", "--data", str(path), "--radius", "2.0",
                    "--budget", "3000")
    coef = blob["results"]["coefficients"]
    assert coef[0] == pytest.approx(1.5, abs=0.15)
    assert coef[1] == pytest.approx(-0.5, abs=0.15)
    assert blob["results"]["features"] == ["age", "income"]
    assert blob["results"]["response"] == "spend"


def test_report_validates_artifacts(capsys, tmp_path):
    plan = {"experiment": "tail", "distribution": {"name": "t3"}, "n": 50,
            "t_grid": [1.0], "replications": 50, "seed": 0}
    plan_path = tmp_path / "plan.json"
    plan_path.write_text(json.dumps(plan))
    out_path = tmp_path / "artifact.json"
    code, _, _ = run_cli(capsys, "validate", "--plan", str(plan_path),
                         "--out", str(out_path))
    assert code == 0
    blob = artifact(capsys, "report", str(out_path))
    assert blob["results"]["valid"] is True
    # a mangled artifact is rejected
    bad_path = tmp_path / "bad.json"
    bad_path.write_text(json.dumps({"kind": "x"}))
    code, _, err = run_cli(capsys, "report", str(bad_path))
    assert code == 2
    assert "missing" in json.loads(err)["message"]


def test_threads_env_fallback(capsys, monkeypatch):
    monkeypatch.setenv("SAA_CERTIFY_THREADS", "4")
    blob = artifact(capsys, "entropy", "--space", BOX01, "--theta", "0.5")
    assert blob["params"]["threads"] == 4
    monkeypatch.delenv("SAA_CERTIFY_THREADS")
    blob = artifact(capsys, "entropy", "--space", BOX01, "--theta", "0.5")
    assert blob["params"]["threads"] == 1
