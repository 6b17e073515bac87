"""Command line interface for the mutual information toolkit.

Verbs: ``run`` (execute a config or named preset grid), ``summarize``
(aggregate a results CSV), ``plot`` (render SVG figures), ``oracle``
(Monte Carlo ground truth for a task string), and ``gradcheck`` (the
autodiff certification suite).  Exit codes: 0 full success, 2 partial
run failures, 1 configuration or validation errors.
"""

from __future__ import annotations

import importlib.resources
import sys
from pathlib import Path

import click

from .benchmarks import make_task, mc_oracle_mi
from .benchmarks.tasks import analytic_mi
from .certify import DEFAULT_TOLERANCE, run_certification
from .exceptions import ConfigError, OraclePrecisionError
from .harness import (
    emit_plots,
    format_summary,
    load_config,
    run_grid,
    summarize,
    write_summary,
)

__all__ = ["main"]


def _preset_path(name: str):
    ref = importlib.resources.files("flowmi") / "presets" / f"{name}.yaml"
    return ref if ref.is_file() else None


def _resolve_config(config: str):
    path = Path(config)
    if path.exists():
        return load_config(path)
    preset = _preset_path(config)
    if preset is not None:
        with importlib.resources.as_file(preset) as real:
            return load_config(real)
    raise ConfigError(f"no config file or preset named {config!r}")


@click.group()
def main():
    """Mutual information estimation with flows, DoE models, and critics."""


@main.command()
@click.argument("config")
@click.option("--out", type=click.Path(), default=None,
              help="Output directory; defaults to the config's, then "
                   "results/<name>.")
@click.option("--jobs", type=int, default=None,
              help="Parallel worker count; defaults to the config's.")
@click.option("--seed", type=int, default=None,
              help="Replace the config seed list with this single seed.")
def run(config, out, jobs, seed):
    """Execute the run grid of CONFIG (a YAML path or preset name)."""
    try:
        cfg = _resolve_config(config)
        if seed is not None:
            cfg.seeds = (int(seed),)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(1)

    out_dir = Path(out or cfg.output or f"results/{cfg.name}")
    total = cfg.n_runs
    done = [0]

    def progress(result):
        done[0] += 1
        mi = "-" if result.mi_hat is None else f"{result.mi_hat:+.4f}"
        click.echo(f"[{done[0]}/{total}] {result.task_id} {result.estimator} "
                   f"seed={result.seed} mi_hat={mi} "
                   f"({result.wall_s:.1f}s, {result.status})")

    results = run_grid(cfg, out_dir, jobs=jobs, progress=progress)
    table = summarize(results)
    write_summary(table, out_dir / "summary.csv")
    click.echo("")
    click.echo(format_summary(table))
    click.echo(f"\nresults: {out_dir / 'results.csv'}")
    n_failed = sum(1 for r in results if r.status != "ok")
    if n_failed:
        click.echo(f"{n_failed}/{total} runs failed", err=True)
        sys.exit(2)


@main.command(name="summarize")
@click.argument("results", type=click.Path(exists=True))
@click.option("--out", type=click.Path(), default=None,
              help="Also write the table to this CSV file.")
def summarize_cmd(results, out):
    """Aggregate RESULTS (a results.csv) into per-cell statistics."""
    table = summarize(results)
    click.echo(format_summary(table))
    if out:
        write_summary(table, out)
        click.echo(f"\nwrote {out}")


@main.command()
@click.argument("results", type=click.Path(exists=True))
@click.option("--spec", default="error", show_default=True,
              help="Plot spec: kind plus optional key=value filters, "
                   "e.g. 'error,estimators=bnaf+doe' or 'trace,dim=5'.")
@click.option("--out", type=click.Path(), default=None,
              help="Output directory; defaults next to the results file.")
def plot(results, spec, out):
    """Render SVG figures from RESULTS (a results.csv)."""
    results = Path(results)
    out_dir = Path(out) if out else results.parent / "plots"
    try:
        paths = emit_plots(results, spec, out_dir)
    except ValueError as exc:
        click.echo(f"plot error: {exc}", err=True)
        sys.exit(1)
    for path in paths:
        click.echo(str(path))


def _parse_task_string(text: str) -> dict:
    kwargs = {}
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise ConfigError(f"bad task field {part!r}; expected key=value")
        key, value = (s.strip() for s in part.split("=", 1))
        if key in ("dim", "dof"):
            kwargs[key] = int(value)
        elif key in ("mi", "rho"):
            kwargs[key] = float(value)
        elif key == "swap":
            kwargs[key] = value.lower() in ("1", "true", "yes")
        elif key in ("family", "transform", "name"):
            kwargs[key] = value
        else:
            raise ConfigError(f"unknown task field {key!r}")
    return kwargs


@main.command()
@click.argument("task")
@click.option("--samples", type=int, default=1_000_000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--max-se", type=float, default=None,
              help="Fail if the standard error exceeds this bound.")
def oracle(task, samples, seed, max_se):
    """Print Monte Carlo ground truth for TASK, e.g.

    'family=gaussian,dim=1,rho=0.9' or 'family=student_t,dim=5,dof=5'.
    """
    try:
        spec = make_task(**_parse_task_string(task))
    except (ConfigError, TypeError, ValueError) as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(1)
    try:
        mc = mc_oracle_mi(spec, n_samples=samples, rng=seed,
                          max_std_error=max_se)
    except OraclePrecisionError as exc:
        click.echo(f"oracle error: {exc}", err=True)
        sys.exit(1)
    click.echo(f"task {spec.task_id}")
    click.echo(f"mc mi = {mc.mi:.6f} nats (se {mc.std_error:.2e}, "
               f"n={mc.n_samples})")
    exact = analytic_mi(spec)
    if exact is not None:
        click.echo(f"analytic = {exact:.6f} nats")


@main.command()
@click.option("--tolerance", type=float, default=DEFAULT_TOLERANCE,
              show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
def gradcheck(tolerance, seed):
    """Check every training loss gradient against finite differences."""
    report = run_certification(seed=seed)
    failed = 0
    for name, worst in report.items():
        ok = worst < tolerance
        failed += 0 if ok else 1
        click.echo(f"{name:<20s} max rel err {worst:.3e}  "
                   f"{'pass' if ok else 'FAIL'}")
    if failed:
        click.echo(f"{failed} losses failed at tolerance {tolerance:g}",
                   err=True)
        sys.exit(1)
    click.echo("all gradients certified")


if __name__ == "__main__":
    main()
