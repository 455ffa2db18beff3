import csv
import json
import os
import subprocess
import sys

import jsonschema
import numpy as np
import pytest

from todacurve import hexagon
from todacurve.cli import ConfigError, RunConfig, main, parse_config, write_atomic

REPORT_SCHEMA = {
    "type": "object",
    "required": ["config", "checks", "pass"],
    "properties": {
        "config": {"type": "object"},
        "pass": {"type": "boolean"},
        "checks": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["name", "value", "tol", "pass"],
                "properties": {
                    "name": {"type": "string"},
                    "value": {"type": "number"},
                    "tol": {"type": "number"},
                    "pass": {"type": "boolean"},
                },
            },
        },
    },
}


def run(tmp_path, *args, name="out"):
    path = tmp_path / name
    code = main([*args, "--out", str(path)])
    return code, path


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=float)


def test_default_verify_passes(tmp_path):
    code, path = run(tmp_path, "--command", "verify")
    report = json.loads(path.read_text())
    jsonschema.validate(report, REPORT_SCHEMA)
    assert code == 0 and report["pass"]
    assert report["config"]["n"] == 6
    names = {ch["name"].split("[")[0] for ch in report["checks"]}
    assert names == {"induced_bracket", "gradients_fd", "lambda_grade", "jacobi", "zero_curvature",
                     "monodromy_identity"}


def test_verify_is_byte_identical(tmp_path):
    _, p1 = run(tmp_path, "--n", "5", "--trials", "2", "--seed", "3", name="a.json")
    _, p2 = run(tmp_path, "--n", "5", "--trials", "2", "--seed", "3", name="b.json")
    assert p1.read_bytes() == p2.read_bytes()


def test_verify_rejects_small_n(tmp_path, capsys):
    code, path = run(tmp_path, "--n", "3")
    assert code == 2
    assert "N > 3" in capsys.readouterr().err
    assert not path.exists()


def test_unattainable_tolerance_fails(tmp_path):
    code, path = run(tmp_path, "--n", "4", "--trials", "1", "--tol", "1e-30")
    report = json.loads(path.read_text())
    jsonschema.validate(report, REPORT_SCHEMA)
    assert code == 1 and not report["pass"]
    assert all(ch["tol"] == 1e-30 for ch in report["checks"])


@pytest.mark.parametrize("args", [
    ["--tol", "0"],
    ["--tol", "-1"],
    ["--command", "simulate", "--dt", "0"],
    ["--n", "0", "--command", "generate"],
    ["--seed", "-4"],
    ["--command", "nope"],
    ["--format", "xml"],
])
def test_usage_errors_exit_with_two(args):
    assert main(args) == 2


def test_verify_csv_report(tmp_path):
    code, path = run(tmp_path, "--n", "4", "--trials", "1", "--format", "csv")
    header = path.read_text().splitlines()[0].split(",")
    assert code == 0 and header == ["name", "value", "tol", "pass"]


def test_simulate_columns_and_rows(tmp_path):
    code, path = run(tmp_path, "--command", "simulate", "--n", "4", "--t-end", "0.5", "--dt", "0.01",
                     "--lambda", "0.5", "--lambda", "2", "--format", "csv", "--preset", "polygon")
    header, data = read_csv(path)
    assert code == 0
    assert header == ["t", "a_0", "a_1", "a_2", "a_3", "b_0", "b_1", "b_2", "b_3",
                      "trT_0.5", "trT_2"]
    assert data.shape == (int(np.floor(0.5 / 0.01)) + 1, 11)
    np.testing.assert_allclose(data[:, 0], 0.01 * np.arange(51), atol=1e-12)


def test_simulate_conserves_traces(tmp_path):
    code, path = run(tmp_path, "--command", "simulate", "--n", "6", "--preset", "polygon",
                     "--format", "csv", "--seed", "2")
    _, data = read_csv(path)
    assert code == 0
    tr = data[:, -3:]
    assert np.abs(tr - tr[0]).max() < 1e-6


def test_simulate_hexagon_is_constant(tmp_path):
    code, path = run(tmp_path, "--command", "simulate", "--preset", "hexagon", "--t-end", "0.2",
                     "--dt", "0.01", "--format", "csv")
    _, data = read_csv(path)
    assert code == 0
    np.testing.assert_allclose(data[:, 1:7], 4 / 3, rtol=1e-14)
    np.testing.assert_allclose(data[:, 7:13], 2 / np.sqrt(3), rtol=1e-14)
    assert np.all(data[:, 1:] == data[0, 1:])


def test_simulate_first_lambda_sets_b(tmp_path):
    code, path = run(tmp_path, "--command", "simulate", "--preset", "hexagon", "--t-end", "0",
                     "--lambda", "1", "--format", "csv")
    _, data = read_csv(path)
    assert code == 0 and data[0, 7] == pytest.approx(2 / np.sqrt(3) - 1)


def test_simulate_json_reports_consistency(tmp_path):
    code, path = run(tmp_path, "--command", "simulate", "--n", "5", "--preset", "polygon",
                     "--t-end", "0.1", "--dt", "0.01")
    rep = json.loads(path.read_text())
    assert code == 0
    assert rep["consistency"]["max_deviation"] < 1e-6
    assert len(rep["rows"]) == 11


def test_simulate_is_byte_identical(tmp_path):
    args = ["--command", "simulate", "--n", "5", "--t-end", "0.05", "--dt", "0.001", "--format", "csv"]
    _, p1 = run(tmp_path, *args, name="a.csv")
    _, p2 = run(tmp_path, *args, name="b.csv")
    assert p1.read_bytes() == p2.read_bytes()


def test_simulate_reports_degeneracy(tmp_path, capsys):
    # a long horizon on a rough random curve drives some a_k out of range
    code = main(["--command", "simulate", "--n", "6", "--seed", "1", "--t-end", "200", "--dt", "0.5",
                 "--format", "csv", "--out", str(tmp_path / "x.csv")])
    assert code == 1
    assert "t=" in capsys.readouterr().err
    assert not (tmp_path / "x.csv").exists()


def test_generate_matches_library(tmp_path):
    from todacurve import generate_curve
    code, path = run(tmp_path, "--command", "generate", "--n", "7", "--seed", "5")
    rep = json.loads(path.read_text())
    c = generate_curve(7, 5)
    assert code == 0
    assert rep["x"] == c.x.tolist() and rep["y"] == c.y.tolist()


def test_generate_hexagon_csv(tmp_path):
    code, path = run(tmp_path, "--command", "generate", "--preset", "hexagon", "--format", "csv")
    header, data = read_csv(path)
    assert header == ["k", "x", "y"]
    np.testing.assert_allclose(data[:, 1:], hexagon().points)


def test_expand_hexagon(tmp_path):
    code, path = run(tmp_path, "--command", "expand", "--preset", "hexagon")
    rep = json.loads(path.read_text())
    assert code == 0 and rep["pass"]
    P1 = np.array(rep["tables"]["P1"])
    i, j = rep["labels"].index("b1"), rep["labels"].index("a0")
    assert P1[i, j] == pytest.approx(4 / 3, rel=1e-10)


def test_invariants_hexagon(tmp_path):
    code, path = run(tmp_path, "--command", "invariants", "--preset", "hexagon")
    rep = json.loads(path.read_text())
    assert code == 0
    assert rep["trace"][0] == pytest.approx(2.0, abs=1e-12)


def test_stdout_when_no_out(capsys):
    assert main(["--command", "invariants", "--preset", "hexagon", "--lambda", "0"]) == 0
    assert json.loads(capsys.readouterr().out)["trace"] == [pytest.approx(2.0)]


def test_write_atomic_replaces_whole_file(tmp_path):
    target = tmp_path / "r.json"
    target.write_text("old contents that are longer")
    write_atomic(str(target), "new")
    assert target.read_text() == "new"
    assert os.listdir(tmp_path) == ["r.json"]


def test_config_validation():
    with pytest.raises(ConfigError):
        RunConfig(command="expand", n=2).validate()
    RunConfig(command="simulate", n=2).validate()
    cfg = parse_config(["--lambda", "2", "--lambda", "-3"])
    assert cfg.lambdas == [2.0, -3.0]
    assert parse_config([]).lambdas == [0.0, 1.0, -1.0]


def test_log_level_from_environment(tmp_path):
    env = dict(os.environ, TODA_CURVE_LOG="info")
    out = subprocess.run([sys.executable, "-m", "todacurve", "--n", "4", "--trials", "1",
                          "--out", str(tmp_path / "r.json")],
                         env=env, capture_output=True, text=True)
    assert out.returncode == 0
    assert "INFO" in out.stderr
    env["TODA_CURVE_LOG"] = "quiet"
    out = subprocess.run([sys.executable, "-m", "todacurve", "--n", "4", "--trials", "1",
                          "--out", str(tmp_path / "r.json")],
                         env=env, capture_output=True, text=True)
    assert out.returncode == 0 and out.stderr == ""
