import json

import pytest

from mzfshuffle.cli import EXIT_CONFIG, EXIT_EVAL, EXIT_FAIL, EXIT_OK, main, parse_value


def test_parse_value():
    assert parse_value("3") == 3
    assert parse_value("2.5") == 2.5
    # complex values and fractions stay as JSON-friendly strings
    assert parse_value("1.5+0.5i") == "1.5+0.5j"
    assert complex(parse_value("2-1j")) == 2 - 1j
    assert parse_value("3/4") == "3/4"
    assert parse_value("[1, 2.5]") == [1, 2.5]


def test_verify_pass(tmp_path, capsys):
    rc = main(["verify", "--id", "shuffle-double", "--s", "2.5", "--t", "3.5", "--out", str(tmp_path)])
    assert rc == EXIT_OK
    d = json.loads((tmp_path / "shuffle-double.json").read_text())
    assert d["payload"]["verdict"] == "pass"
    assert (tmp_path / "shuffle-double.csv").read_text().startswith("id,point")
    assert "shuffle-double" in capsys.readouterr().out


def test_verify_residual_failure(tmp_path, monkeypatch):
    # sides that disagree well beyond tolerance and error estimate
    from mzfshuffle import verifier

    monkeypatch.setitem(verifier.CHECKS, "shuffle-double", lambda p, plan: (1.0, 1.5, 1e-12, {}))
    rc = main(["verify", "--id", "shuffle-double", "--s", "2.5", "--t", "3.5", "--out", str(tmp_path)])
    assert rc == EXIT_FAIL
    assert json.loads((tmp_path / "shuffle-double.json").read_text())["payload"]["verdict"] == "fail"


def test_verify_evaluation_error(tmp_path):
    rc = main(["verify", "--id", "shuffle-double", "--s", "1", "--t", "2", "--out", str(tmp_path)])
    assert rc == EXIT_EVAL
    d = json.loads((tmp_path / "shuffle-double.json").read_text())
    assert d["payload"]["points"][0]["error"]


@pytest.mark.parametrize("argv", [
    ["verify", "--id", "nope"],
    ["verify", "--id", "shuffle-double", "--cutoff", "abc"],
    ["verify", "--id", "shuffle-double", "--workers", "0"],
    ["verify", "--id", "shuffle-double", "--points", "/nonexistent.json"],
    ["frobnicate"],
    [],
])
def test_config_errors(argv, capsys):
    assert main(argv) == EXIT_CONFIG
    assert "error" in capsys.readouterr().err


def test_config_file_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nid = shuffle-double\nat = s=2.5,t=3.5\ncutoff = 77\n")
    out = tmp_path / "o1"
    assert main(["verify", "--config", str(cfg), "--out", str(out)]) == EXIT_OK
    plan = json.loads((out / "shuffle-double.json").read_text())["payload"]["config"]["plan"]
    assert plan["cutoff"] == 77
    out2 = tmp_path / "o2"
    assert main(["verify", "--config", str(cfg), "--cutoff", "64", "--out", str(out2)]) == EXIT_OK
    assert json.loads((out2 / "shuffle-double.json").read_text())["payload"]["config"]["plan"]["cutoff"] == 64


def test_config_file_unknown_key(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = blue\n")
    assert main(["verify", "--config", str(cfg)]) == EXIT_CONFIG


def test_expand_integer(capsys):
    assert main(["expand", "--left", "s", "--right", "t", "--integer", "s=2,t=3"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "zeta(2) zeta(3) = 6*zeta_2(1,4) + 3*zeta_2(2,3) + 1*zeta_2(3,2)" in out


def test_expand_writes_json(tmp_path, capsys):
    assert main(["expand", "--left", "s1,s2", "--right", "t", "--layout", "zeta", "--out", str(tmp_path)]) == EXIT_OK
    d = json.loads((tmp_path / "expansion.json").read_text())
    assert len(d["terms"]) == 7
    assert capsys.readouterr().out.startswith("zeta_2(s1, s2) zeta_1(t) =")


def test_expand_realize(capsys):
    assert main(["expand", "--left", "s", "--right", "t", "--realize", "s=2.5,t=3.5"]) == EXIT_OK


def test_expand_depth_cap():
    assert main(["expand", "--left", "a,b,c", "--right", "d,e"]) == EXIT_CONFIG


def test_plot_data(tmp_path):
    rc = main(["plot-data", "--id", "ipfd-pointwise", "--at", "s=2.5,t=3,x=2,y=3", "--cutoffs", "25,50", "--out", str(tmp_path)])
    assert rc == EXIT_OK
    lines = (tmp_path / "ipfd-pointwise-convergence.csv").read_text().splitlines()
    assert lines[0].startswith("K,residual,err_est")
    assert [l.split(",")[0] for l in lines[1:]] == ["25", "50"]


def test_selftest_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["selftest", "--out", str(a)]) == EXIT_OK
    assert main(["selftest", "--workers", "2", "--out", str(b)]) == EXIT_OK
    assert (a / "selftest-payload.json").read_bytes() == (b / "selftest-payload.json").read_bytes()
