import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from polysing.cli import ConfigError, main, parse_config


def write_cfg(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def run_cli(tmp_path, text, *extra, out="out"):
    cfg = write_cfg(tmp_path, text)
    out_dir = tmp_path / out
    code = main(["--config", cfg, "--out", str(out_dir), *extra])
    report = json.loads((out_dir / "report.json").read_text())
    return code, report, out_dir


SOLVE = """
command = solve
problem.m = 2
problem.f.kind = power
problem.f.p = 2
problem.a.sigma = -1
problem.alpha_fraction = 0.5
grid.n = 256
"""


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_parse_config():
    cfg = parse_config("grid.n = 64  # cells\n\nestimates.alpha = 1, 2.5\n")
    assert cfg == {"grid.n": 64, "estimates.alpha": [1, 2.5]}
    with pytest.raises(ConfigError):
        parse_config("grid.size = 3")
    with pytest.raises(ConfigError):
        parse_config("grid.n 3")


def test_solve_writes_report_and_csv(tmp_path):
    code, rep, out = run_cli(tmp_path, SOLVE)
    assert code == 0 and rep["status"] == "ok" and rep["converged"]
    assert rep["schema_version"] == 1 and rep["exit_code"] == 0
    assert rep["iteration"]["monotonicity_violations"] == 0
    rows = read_csv(out / "solution.csv")
    assert list(rows[0]) == ["r", "u", "neg_laplacian_u", "ubar"]
    u = np.array([float(x["u"]) for x in rows])
    ub = np.array([float(x["ubar"]) for x in rows])
    assert np.all(u >= 0) and np.all(u <= ub)


def test_solve_is_deterministic(tmp_path):
    _, _, a = run_cli(tmp_path, SOLVE, out="a")
    _, _, b = run_cli(tmp_path, SOLVE, out="b")
    assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()
    assert (a / "solution.csv").read_bytes() == (b / "solution.csv").read_bytes()


def test_overrides(tmp_path):
    code, rep, _ = run_cli(tmp_path, SOLVE, "--grid-n", "128", "--tol", "1e-6")
    assert code == 0
    assert rep["config"]["grid.n"] == 128 and rep["config"]["problem.tol"] == 1e-6


def test_charges_roundtrip(tmp_path):
    code, rep, out = run_cli(tmp_path, SOLVE + "problem.alpha_fraction = 0.25\n")
    assert code == 0
    direct = rep["charges"]
    cfg = f"command = charges\ncharges.input = {out / 'solution.csv'}\n"
    code, rep2, _ = run_cli(tmp_path, cfg, out="charges")
    assert code == 0
    fit = rep2["fit"]
    assert abs(fit["alpha_hat"] - direct["alpha_hat"]) <= 1e-10 * abs(direct["alpha_hat"])
    assert fit["alpha_hat"] == pytest.approx(rep["alpha"], rel=1e-3)


def test_csv_values_roundtrip_exactly(tmp_path):
    _, _, out = run_cli(tmp_path, SOLVE)
    rows = read_csv(out / "solution.csv")
    for row in rows[:20]:
        for text in row.values():
            assert repr(float(text)) == text


def test_classify(tmp_path):
    code, rep, _ = run_cli(tmp_path, "command = classify\nproblem.f.kind = exp_power\nproblem.f.delta = 2\n")
    assert code == 0 and rep["class"] == "super_exponential"
    assert rep["verdict"] == {"alpha": "alpha must be 0", "beta": "beta must be 0"}
    code, rep, _ = run_cli(tmp_path, "command = classify\nproblem.f.p = 1\n", out="lin")
    assert rep["verdict"]["beta"] == "undetermined"
    assert rep["verdict"]["alpha"] == "alpha may be nonzero"


def test_verify_example(tmp_path):
    code, rep, _ = run_cli(tmp_path, "command = verify-example\ngrid.n = 256\n")
    assert code == 0
    assert rep["refinement_ratio"] == pytest.approx(4.0, rel=0.1)
    assert rep["result"]["b1"] == pytest.approx(16.0)


def test_check_estimates(tmp_path):
    code, rep, _ = run_cli(tmp_path, "command = check-estimates\nproblem.f.kind = exp_power\n"
                                     "problem.f.delta = 2\ngrid.n = 256\n")
    assert code == 0
    vals = [e["value"] for e in rep["exp_integrability"]]
    assert all(e["finite"] for e in rep["exp_integrability"])
    assert vals == sorted(vals)
    assert all(x["half"]["diverged"] and x["full"]["diverged"] for x in rep["alpha_removability"])
    assert rep["threshold"] == pytest.approx(32 * np.pi ** 2)


def test_property_suite_seeded(tmp_path):
    code, rep, _ = run_cli(tmp_path, "command = property-suite\nproperty.trials = 10\ngrid.n = 128\n",
                           "--seed", "7")
    assert code == 0 and rep["property"]["seed"] == 7 and rep["property"]["passed"]


@pytest.mark.parametrize("text, expected", [
    ("grid.bogus = 1\n", 2),
    ("command = solve\ngrid.grading = spiral\n", 2),
    ("command = solve\nproblem.a.sigma = -5\n", 3),
    ("command = solve\nproblem.f.kind = exp_power\nproblem.f.delta = 2\nproblem.barrier = false\n"
     "problem.alpha = 1\n", 3),
    ("command = solve\nproblem.f.kind = exponential\nproblem.f.gamma = 1\nproblem.alpha = 400\n"
     "problem.barrier = false\ngrid.n = 256\n", 4),
])
def test_exit_codes(tmp_path, text, expected):
    cfg = write_cfg(tmp_path, text)
    assert main(["--config", cfg, "--out", str(tmp_path / "o")]) == expected


def test_failed_runs_still_report(tmp_path):
    code, rep, _ = run_cli(tmp_path, "command = solve\nproblem.a.sigma = -5\n")
    assert code == 3 and rep["status"] == "hypothesis_failure" and rep["exit_code"] == 3


def test_missing_charges_input(tmp_path):
    code, rep, _ = run_cli(tmp_path, f"command = charges\ncharges.input = {tmp_path / 'nope.csv'}\n")
    assert code == 2


def test_help_documents_columns_and_codes():
    out = subprocess.run([sys.executable, "-m", "polysing", "--help"], capture_output=True, text=True)
    assert out.returncode == 0
    assert "neg_laplacian_u" in out.stdout and "Exit codes" in out.stdout
    for cmd in ("solve", "classify", "charges", "verify-example", "check-estimates", "property-suite"):
        assert cmd in out.stdout
