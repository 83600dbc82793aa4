import json

import pytest

from mrdprice.cli import main

import oracles

EXP1 = '{"family":"exponential","params":{"lambda":1}}'


def _numeric(path):
    return [l for l in path.read_text().splitlines() if not l.startswith("#")]


def test_solve_writes_outputs(tmp_path):
    assert main(["solve", "--dist", EXP1, "--out", str(tmp_path)]) == 0
    payload = json.loads((tmp_path / "solve.json").read_text())
    assert payload["equilibrium"]["prices"] == [pytest.approx(1.0)]
    assert payload["manifest"]["command"] == "solve"
    assert _numeric(tmp_path / "profit_curve.csv")[0] == "r,profit"


def test_solve_from_file(tmp_path):
    f = tmp_path / "d.json"
    f.write_text(EXP1)
    assert main(["solve", "--dist", str(f), "--out", str(tmp_path)]) == 0


@pytest.mark.parametrize("argv,code", [
    (["solve", "--dist", '{"family":"pareto","params":{"L":1,"k":1.5}}'], 2),
    (["solve", "--dist", '{"family":"bogus"}'], 1),
    (["solve", "--dist", "{not json"], 1),
    (["solve", "--dist", "/nonexistent.json"], 1),
    (["solve"], 1),
    (["performance", "--alpha-grid", "3:1:5"], 1),
])
def test_exit_codes(tmp_path, argv, code):
    assert main(argv + ["--out", str(tmp_path)]) == code


def test_orders_exit_codes(tmp_path):
    u = '{"family":"uniform","params":{}}'
    p = json.dumps({"family": "piecewise", "knots": oracles.PIECEWISE_KNOTS})
    assert main(["orders", "--dist", u, "--dist2", p, "--order", "st", "--out", str(tmp_path)]) == 0
    assert main(["orders", "--dist", u, "--dist2", p, "--order", "mrl", "--out", str(tmp_path)]) == 3


def test_statics_and_notrade(tmp_path):
    scn = json.dumps({"theorem": "size_i", "X": json.loads(EXP1), "c": 2})
    assert main(["statics", "--scenario", scn, "--out", str(tmp_path)]) == 0
    assert "PASS" in (tmp_path / "statics.csv").read_text()
    assert main(["notrade", "--dist", EXP1, "--out", str(tmp_path)]) == 0


def test_performance_and_simulate(tmp_path):
    assert main(["performance", "--n", "2,5", "--alpha-grid", "3:20:50", "--gnuplot",
                 "--out", str(tmp_path)]) == 0
    assert (tmp_path / "figures.gp").exists()
    assert len(_numeric(tmp_path / "performance.csv")) == 1 + 2 * 50
    assert main(["simulate", "--dist", EXP1, "--draws", "20000", "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "sim.json").read_text())
    assert rep["report"]["empirical_argmax"] == pytest.approx(1.0, abs=0.11)
