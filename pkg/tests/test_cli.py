"""Command line interface: verbs, outputs, and exit codes."""

import yaml
from click.testing import CliRunner

from flowmi.cli import main

from helpers import tiny_grid_config


def _write_config(tmp_path, **overrides):
    path = tmp_path / "exp.yaml"
    path.write_text(yaml.safe_dump(tiny_grid_config(**overrides)))
    return path


def test_run_executes_grid_and_writes_outputs(tmp_path):
    config = _write_config(tmp_path)
    out = tmp_path / "out"
    result = CliRunner().invoke(main, ["run", str(config), "--out", str(out)])
    assert result.exit_code == 0, result.output
    assert (out / "results.csv").exists()
    assert (out / "summary.csv").exists()
    assert (out / "traces").is_dir()
    assert "[1/" in result.output and "mi_hat=" in result.output
    assert "task_id" in result.output  # summary table printed


def test_run_single_seed_override(tmp_path):
    config = _write_config(tmp_path)
    out = tmp_path / "out"
    result = CliRunner().invoke(
        main, ["run", str(config), "--out", str(out), "--seed", "7"])
    assert result.exit_code == 0, result.output
    lines = (out / "results.csv").read_text().splitlines()
    assert len(lines) == 3  # header + 2 estimators x 1 seed
    assert all(",7," in line for line in lines[1:])


def test_run_reports_failures_with_exit_2(tmp_path):
    config = _write_config(tmp_path, estimators=[
        {"name": "boom", "kind": "flow_joint",
         "params": {"batch_size": 64, "epochs": 2, "holdout": 64,
                    "hidden_layers": 1, "hidden_mult": 2, "lr": 1000.0}}])
    result = CliRunner().invoke(
        main, ["run", str(config), "--out", str(tmp_path / "out")])
    assert result.exit_code == 2
    assert "runs failed" in result.output


def test_run_bad_config_exit_1(tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text("tasks: []\nestimators: []\n")
    result = CliRunner().invoke(main, ["run", str(bad)])
    assert result.exit_code == 1
    assert "config error" in result.output


def test_run_unknown_preset_exit_1():
    result = CliRunner().invoke(main, ["run", "no-such-preset"])
    assert result.exit_code == 1
    assert "config error" in result.output


def test_summarize_prints_and_writes(tmp_path):
    config = _write_config(tmp_path)
    out = tmp_path / "out"
    CliRunner().invoke(main, ["run", str(config), "--out", str(out)])
    dest = tmp_path / "table.csv"
    result = CliRunner().invoke(
        main, ["summarize", str(out / "results.csv"), "--out", str(dest)])
    assert result.exit_code == 0, result.output
    assert "mean_err" in result.output
    assert dest.exists()


def test_plot_writes_svg_and_rejects_bad_spec(tmp_path):
    config = _write_config(tmp_path)
    out = tmp_path / "out"
    CliRunner().invoke(main, ["run", str(config), "--out", str(out)])
    result = CliRunner().invoke(
        main, ["plot", str(out / "results.csv"), "--out", str(tmp_path / "p")])
    assert result.exit_code == 0, result.output
    assert result.output.strip().endswith("error.svg")
    bad = CliRunner().invoke(
        main, ["plot", str(out / "results.csv"), "--spec", "pie"])
    assert bad.exit_code == 1


def test_oracle_prints_value_and_analytic():
    result = CliRunner().invoke(
        main, ["oracle", "family=gaussian,dim=1,rho=0.9",
               "--samples", "50000"])
    assert result.exit_code == 0, result.output
    assert "mc mi = 0.8" in result.output
    assert "analytic = 0.830366" in result.output


def test_oracle_bad_task_exit_1():
    result = CliRunner().invoke(main, ["oracle", "family=zeta,dim=1"])
    assert result.exit_code == 1
    assert "config error" in result.output


def test_oracle_precision_gate_exit_1():
    result = CliRunner().invoke(
        main, ["oracle", "family=gaussian,dim=1,rho=0.9",
               "--samples", "2000", "--max-se", "1e-9"])
    assert result.exit_code == 1
    assert "oracle error" in result.output


def test_gradcheck_reports_every_loss():
    result = CliRunner().invoke(main, ["gradcheck"])
    assert result.exit_code == 0, result.output
    assert "all gradients certified" in result.output
    for name in ("l1_bnaf", "l2_bnaf", "nwj", "mine", "infonce"):
        assert name in result.output
    assert result.output.count("pass") >= 10
