import json
import math
import os
import subprocess
import sys

import pytest

from ladderlab.cli import config_from_args, main

POLY = ["1", "x", "x^2"]


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def ansatz_file(tmp_path):
    def make(**doc):
        path = tmp_path / "ansatz.json"
        path.write_text(json.dumps(doc))
        return str(path)
    return make


def test_catalog(capsys):
    code, out, _ = run(capsys, "catalog")
    assert code == 0
    doc = json.loads(out)
    assert [d["case_id"] for d in doc] == [1, 2, 3, 4, 5, 6]


def test_derive_case1_gap(capsys):
    code, out, _ = run(capsys, "derive", "--case", "1", "--set", "alpha=0", "--set", "lambda=1")
    assert code == 0
    doc = json.loads(out)
    assert doc["checks"]["constraints"]["passed"]
    assert doc["g2"] in ("1.4142135623730951", "sqrt(2)") or "1.414213562373095" in doc["g2"]


def test_derive_bad_relation(capsys):
    code, _, err = run(capsys, "derive", "--case", "3", "--set", "c1=1", "--set", "c2=1",
                       "--set", "alpha=1")
    assert code == 1
    assert "c1 + alpha*c2" in err


@pytest.mark.parametrize("argv", [
    ["derive", "--case", "7"],
    ["derive"],
    ["derive", "--case", "1", "--set", "alpha"],
    ["derive", "--case", "1", "--set", "alpha=abc"],
    ["spectrum", "--case", "1", "--grid", "1,2"],
    ["frobnicate"],
])
def test_input_errors(capsys, argv):
    assert run(capsys, *argv)[0] == 1


def test_spectrum_case1(capsys):
    code, out, _ = run(capsys, "spectrum", "--case", "1")
    assert code == 0
    doc = json.loads(out)
    assert len(doc["grid_energies"]) == 6
    assert all(abs(g - math.sqrt(2)) < 1e-6 for g in doc["grid_gaps"])
    assert doc["max_discrepancy"] < 1e-3


def test_spectrum_case4_gaps_grow(capsys):
    code, out, _ = run(capsys, "spectrum", "--case", "4")
    assert code == 0
    gaps = json.loads(out)["grid_gaps"]
    assert gaps == pytest.approx([5, 7, 9, 11, 13], abs=1e-4)


def test_spectrum_box(capsys):
    code, out, _ = run(capsys, "spectrum", "--custom", "V=0", "--grid", "0,3.141592653589793,4001",
                       "--levels", "4")
    assert code == 0
    assert json.loads(out)["grid_energies"] == pytest.approx([1, 4, 9, 16], rel=1e-4)


def test_spectrum_positive_x(capsys):
    code, _, err = run(capsys, "spectrum", "--custom", "X=1", "--grid", "0,1,101")
    assert code == 1
    assert "negative" in err


def test_spectrum_csv(capsys):
    code, out, _ = run(capsys, "spectrum", "--case", "1", "--grid", "-6,6,101", "--levels", "2",
                       "--format", "csv")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "x,psi_0,psi_1"
    assert len(lines) == 102


@pytest.mark.parametrize("case", [1, 2, 3, 4, 5, 6])
def test_verify_passes(capsys, case):
    code, out, _ = run(capsys, "verify", "--case", str(case))
    assert code == 0, out
    assert json.loads(out)["passed"]


def test_verify_reports_failure(capsys):
    # a grid too coarse for the ground state makes the E0 comparison fail
    code, out, _ = run(capsys, "verify", "--case", "1", "--grid", "-3,3,41")
    assert code == 2
    assert json.loads(out)["passed"] is False


def test_groundstate(capsys):
    code, out, _ = run(capsys, "groundstate", "--case", "5")
    assert code == 0
    doc = json.loads(out)
    # r = 1, c3 = 2: roots r/2 (1 +- 3) = 2, -1; the grid picks 2
    assert doc["E0"] == pytest.approx(2.0)
    assert sum(c["physical"] for c in doc["candidates"]) == 1


def test_search_converges(capsys, ansatz_file):
    path = ansatz_file(X="-1", Y="1", Z_basis=POLY, Q_basis=POLY, V_basis=POLY)
    code, out, _ = run(capsys, "search", path)
    assert code == 0
    doc = json.loads(out)
    assert doc["fit"]["converged"]
    assert doc["system"]["class"] == "harmonic-like"
    assert doc["verification"]["constraints"]["passed"]


def test_search_cubic_exit_3(capsys, ansatz_file):
    path = ansatz_file(X="-1", Y="x^3", Z_basis=POLY, Q_basis=POLY, V_basis=POLY)
    assert run(capsys, "search", path)[0] == 3


def test_search_missing_field(capsys, ansatz_file):
    path = ansatz_file(Y="1", Z_basis=POLY, Q_basis=POLY, V_basis=POLY)
    code, _, err = run(capsys, "search", path)
    assert code == 1
    assert "'X'" in err


def test_search_missing_file(capsys, tmp_path):
    assert run(capsys, "search", str(tmp_path / "nope.json"))[0] == 1


def test_out_file(capsys, tmp_path):
    path = tmp_path / "cat.json"
    code, out, _ = run(capsys, "catalog", "--out", str(path))
    assert code == 0 and out == ""
    assert json.loads(path.read_text())[0]["case_id"] == 1


def test_seed_env_override(monkeypatch):
    monkeypatch.setenv("LADDERLAB_SEED", "42")
    assert config_from_args(["derive", "--case", "1", "--seed", "3"]).seed == 42
    monkeypatch.setenv("LADDERLAB_SEED", "x")
    with pytest.raises(Exception):
        config_from_args(["derive", "--case", "1"])


def test_defaults():
    cfg = config_from_args(["verify", "--case", "2"])
    assert (cfg.seed, cfg.levels, cfg.format, cfg.grid, cfg.out) == (0, 6, "json", None, None)


@pytest.mark.parametrize("argv", [["derive", "--case", "3", "--seed", "5"],
                                  ["spectrum", "--case", "6"],
                                  ["groundstate", "--case", "2"]])
def test_byte_identical_runs(capsys, argv):
    first = run(capsys, *argv)
    second = run(capsys, *argv)
    assert first == second


def test_module_entry_point():
    env = dict(os.environ, LADDERLAB_SEED="1")
    out = subprocess.run([sys.executable, "-m", "ladderlab", "catalog"], capture_output=True,
                         text=True, env=env, check=True)
    assert json.loads(out.stdout)[5]["case_id"] == 6
