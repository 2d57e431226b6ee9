import json
import os
import subprocess
import sys

import pytest

from equivariant_ins.cli import build_parser, main
from equivariant_ins.output import read_csv


def test_help_lists_subcommands(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--help"])
    assert exc.value.code == 0
    out = capsys.readouterr().out
    for name in ("simulate", "reproduce-paper", "check-gains", "pe-report"):
        assert name in out


@pytest.mark.parametrize("argv", [[], ["frobnicate"], ["simulate", "--dt", "abc"],
                                  ["simulate", "--integrator", "heun"], ["reproduce-paper", "--config", "x.json"]])
def test_usage_errors(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2


def test_unknown_override_is_usage_error(tmp_path, capsys):
    assert main(["simulate", "--out", str(tmp_path), "--set", "gains.zeta=1"]) == 2
    assert "--set" in capsys.readouterr().err


def test_missing_config(tmp_path, capsys):
    assert main(["simulate", "--config", str(tmp_path / "missing.json"), "--out", str(tmp_path)]) == 1
    assert "missing.json" in capsys.readouterr().err


def test_invalid_json(tmp_path):
    p = tmp_path / "c.json"
    p.write_text("{not json")
    assert main(["simulate", "--config", str(p), "--out", str(tmp_path)]) == 1


def test_override_echo(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"duration": 0.5, "integrator": "rk4"}))
    out = tmp_path / "out"
    argv = ["simulate", "--config", str(cfg), "--set", "gains.c=8.0", "--out", str(out)]
    assert main(argv) == 0
    echo = json.loads((out / "config.json").read_text())
    assert echo["gains"]["c"] == 8.0
    assert echo["integrator"] == "rk4" and echo["duration"] == 0.5
    assert read_csv(out / "trajectory.csv")["t"].size == 51
    for name in ("estimates.svg", "errors.svg", "summary.txt"):
        assert (out / name).exists()


def test_flags_override_file(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"duration": 0.5}))
    out = tmp_path / "out"
    assert main(["simulate", "--config", str(cfg), "--duration", "0.2", "--dt", "0.001", "--seed", "3",
                 "--out", str(out)]) == 0
    echo = json.loads((out / "config.json").read_text())
    assert (echo["duration"], echo["dt"], echo["seed"]) == (0.2, 0.001, 3)


def test_echoed_config_reproduces(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["simulate", "--duration", "0.3", "--set", "gains.l_p=30", "--out", str(a)]) == 0
    assert main(["simulate", "--config", str(a / "config.json"), "--out", str(b)]) == 0
    assert (a / "trajectory.csv").read_bytes() == (b / "trajectory.csv").read_bytes()


def test_blowup_exit(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"duration": 0.1, "input_profile": {"name": "sinusoid",
                                                                  "params": {"bias": [0, 0, 0, 1e16, 0, 0]}}}))
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1
    assert "blow-up" in capsys.readouterr().err


def test_reproduce_short_duration_warns(tmp_path, capsys):
    assert main(["reproduce-paper", "--duration", "0.1", "--out", str(tmp_path)]) == 0
    err = capsys.readouterr().err
    assert "warning" in err
    summary = (tmp_path / "summary.txt").read_text()
    assert "final_limit: neither" in summary.lower()


def test_reproduce_bad_gains_fails_checks(tmp_path):
    # still admissible, but too short at this gain to reach the stable point
    assert main(["reproduce-paper", "--set", "gains.c=0.05", "--out", str(tmp_path)]) == 1


def test_unwritable_out(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["reproduce-paper", "--duration", "0.1", "--out", str(blocker / "sub")]) == 1


@pytest.mark.parametrize("gains, code", [((4, 24, 20), 0), ((4, 100, 20), 1), ((4, 24, -1), 1),
                                         ((0, 24, 20), 1), ((4, 0, 20), 1)])
def test_check_gains(gains, code, capsys):
    c, lv, lp = gains
    assert main(["check-gains", "--c", str(c), "--lv", str(lv), "--lp", str(lp)]) == code
    out = capsys.readouterr().out
    if code == 0:
        assert "-1.282202" in out and "-18.717798" in out
        assert "alpha = 1.559816" in out
    else:
        assert "inadmissible" in out


def test_pe_report(capsys):
    assert main(["pe-report", "--duration", "20"]) == 0
    out = capsys.readouterr().out
    assert "PE metric of R a" in out
    assert "cascade rate k = 1.282202" in out


def test_pe_report_window_too_long(capsys):
    assert main(["pe-report", "--duration", "2"]) == 1


def test_parser_defaults():
    args = build_parser().parse_args(["simulate"])
    assert args.out == "results" and args.overrides == [] and args.config is None


def test_module_entry_point(tmp_path):
    env = {**os.environ, "EQUIVARIANT_INS_LOG": "debug"}
    res = subprocess.run([sys.executable, "-m", "equivariant_ins", "check-gains"], capture_output=True,
                         text=True, env=env, check=False)
    assert res.returncode == 0
    assert "admissible" in res.stdout
