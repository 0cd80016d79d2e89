"""Command-line interface tests: every subcommand end to end on small
workloads, provenance headers, overwrite protection and error reporting."""

import numpy as np
import pytest

from sitcontrol.cli import run_cli


def run(capsys, *argv):
    code = run_cli(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_equilibria(capsys):
    code, out, _ = run(capsys, "equilibria")
    assert code == 0
    vals = dict(line.split(" = ") for line in out.strip().splitlines())
    assert float(vals["E*"]) == pytest.approx(49428.571429, rel=1e-9)
    assert float(vals["M*"]) == pytest.approx(63021.428571, rel=1e-9)
    assert float(vals["F*"]) == pytest.approx(151375.0, rel=1e-9)
    assert float(vals["U*"]) == pytest.approx(163540.607143, rel=1e-9)


def test_simulate_writes_csv(tmp_path, capsys):
    out = tmp_path / "run"
    code, _, _ = run(capsys, "simulate", "--control", "constant",
                     "--u-bar", "12", "--ic", "0,0,0,100",
                     "--t-end", "5", "--out", str(out), "--dump-config")
    assert code == 0
    lines = (out / "trajectory.csv").read_text().splitlines()
    header_end = next(i for i, l in enumerate(lines) if not l.startswith("#"))
    assert any("u_bar = 12" in l for l in lines[:header_end])
    assert lines[header_end] == "t,E,M,F,Ms,Fs,u,m_total,f_total"
    last = [float(v) for v in lines[-1].split(",")]
    assert last[0] == 5.0 and last[4] == pytest.approx(100.0)
    # --dump-config wrote a reloadable configuration.
    cfg_text = (out / "config.txt").read_text()
    assert "u_bar = 12" in cfg_text and "t_end = 5" in cfg_text


def test_simulate_refuses_overwrite(tmp_path, capsys):
    out = tmp_path / "run"
    args = ("simulate", "--control", "constant", "--ic", "0,0,0,1",
            "--t-end", "1", "--out", str(out))
    assert run(capsys, *args)[0] == 0
    code, _, err = run(capsys, *args)
    assert code == 1 and "--force" in err
    assert run(capsys, *args, "--force")[0] == 0


def test_config_file_with_flag_override(tmp_path, capsys):
    cfg = tmp_path / "c.txt"
    cfg.write_text("control = constant\nu_bar = 12\nt_end = 2\n")
    out = tmp_path / "run"
    code, _, _ = run(capsys, "simulate", "--params", str(cfg),
                     "--u-bar", "7", "--ic", "0,0,0,100", "--out", str(out))
    assert code == 0
    lines = (out / "trajectory.csv").read_text().splitlines()
    assert any("u_bar = 7" in l for l in lines if l.startswith("#"))


def test_bad_control_name_lists_valid_ones(capsys):
    with pytest.raises(SystemExit) as exc:
        run_cli(["simulate", "--control", "bogus"])
    assert exc.value.code == 2
    err = capsys.readouterr().err
    for name in ("constant", "ureg", "vreg"):
        assert name in err


def test_bad_config_file_is_reported(tmp_path, capsys):
    cfg = tmp_path / "c.txt"
    cfg.write_text("nonsense_key = 1\n")
    code, _, err = run(capsys, "simulate", "--params", str(cfg))
    assert code == 1 and "unknown key" in err


def test_bad_ic_is_reported(tmp_path, capsys):
    code, _, err = run(capsys, "simulate", "--ic", "1,2,3",
                       "--out", str(tmp_path))
    assert code == 1 and "four" in err


def test_batch(tmp_path, capsys):
    out = tmp_path / "run"
    code, stdout, _ = run(capsys, "batch", "--control", "constant",
                          "--u-bar", "0", "--t-end", "10", "--n-sims", "5",
                          "--checkpoints", "5,10", "--out", str(out))
    assert code == 0
    assert "statistics over 5 simulations" in stdout
    assert (out / "stats.csv").exists() and (out / "report.txt").exists()


def test_heatmap(tmp_path, capsys):
    out = tmp_path / "run"
    code, _, _ = run(capsys, "heatmap", "--control", "vreg",
                     "--grid-size", "4", "--out", str(out))
    assert code == 0
    lines = (out / "heatmap.csv").read_text().splitlines()
    data = [l for l in lines if not l.startswith("#")]
    assert data[0] == "m_total,f_total,u"
    assert len(data) == 17


def test_env_rollout(tmp_path, capsys):
    actions = tmp_path / "actions.txt"
    actions.write_text("-1\n0\n1\n")
    out = tmp_path / "run"
    code, _, _ = run(capsys, "env-rollout", "--actions", str(actions),
                     "--episode-seed", "5", "--out", str(out))
    assert code == 0
    lines = (out / "rollout.csv").read_text().splitlines()
    data = [l for l in lines if not l.startswith("#")]
    assert data[0] == "step,action,u,E,M,F,Ms,reward,done"
    assert len(data) == 4
    assert float(data[1].split(",")[2]) == 0.0      # a=-1 -> u=0
    assert float(data[3].split(",")[2]) == 5e5      # a=1 -> u=5e5


def test_sweep(tmp_path, capsys):
    out = tmp_path / "run"
    code, stdout, _ = run(capsys, "sweep", "--control", "vreg",
                          "--umin-values", "5", "--ic", "10000,10000,10000,0",
                          "--out", str(out))
    assert code == 0
    assert "u_min=5: converged" in stdout
    assert (out / "verdicts.txt").exists()
    assert (out / "sweep_0_umin_5.csv").exists()
