from __future__ import annotations

import json

import pytest

from magicsq.cli import main


def test_square_check(capsys):
    assert main(["square", "check"]) == 0
    assert "PASS" in capsys.readouterr().out


def test_run_writes_json(tmp_path):
    out = tmp_path / "r.json"
    assert main(["run", "--state", "singlet", "--plan", "33,32,31", "--n", "20000", "--out", str(out)]) == 0
    res = json.loads(out.read_text())
    assert set(res) == {"config", "counts", "frequencies", "oracle", "tv_distance", "pass"}


def test_run_simultaneous_with_order(tmp_path):
    out = tmp_path / "r.json"
    csvp = tmp_path / "t.csv"
    rc = main(["run", "--mode", "simultaneous", "--context", "row3", "--order", "31,32,33", "--n", "5000",
               "--out", str(out), "--csv", str(csvp), "--csv-limit", "2"])
    assert rc == 0
    assert json.loads(out.read_text())["config"]["plan"] == "31,32,33"
    assert len(csvp.read_text().splitlines()) == 1 + 6


def test_run_state_file(tmp_path):
    sf = tmp_path / "s.json"
    sf.write_text(json.dumps({"named": "mixed"}))
    assert main(["run", "--state", str(sf), "--plan", "11", "--n", "20000", "--out", str(tmp_path / "o.json")]) == 0


def test_run_bad_plan(capsys):
    assert main(["run", "--plan", "11,99"]) == 2
    assert "error" in capsys.readouterr().err


@pytest.mark.parametrize("exp", ["1", "2", "3", "3c", "4"])
def test_replay(exp, capsys):
    assert main(["replay", "--experiment", exp, "--json"]) == 0
    assert json.loads(capsys.readouterr().out)["pass"] is True


def test_verify_corollary(capsys):
    assert main(["verify", "corollary", "--n", "300"]) == 0


@pytest.mark.parametrize("what", ["huang", "hasegawa", "cabello"])
def test_analyze(what, tmp_path):
    out = tmp_path / "a.json"
    assert main(["analyze", what, "--n", "1000", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["pass"] is True
