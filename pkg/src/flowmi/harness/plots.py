"""Static SVG plots of grid results.

Two kinds are supported.  ``error`` draws mean error (ground truth minus
estimate) against true mutual information with one panel per dimension
and ±1 sd bars over seeds.  ``trace`` draws the per-epoch estimate of
individual runs from their sidecar trace files.  Output is byte-stable
for fixed input: the SVG hash salt is pinned and the date metadata is
suppressed.

A plot spec is a comma-separated string: the kind, then optional
``key=value`` filters, with ``+`` separating alternatives inside a
value.  Examples: ``error``, ``error,estimators=bnaf+doe``,
``trace,tasks=gaussian-d5-rho0.9-n32768``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .grid import RunResult, TRACE_COLUMNS, load_results

__all__ = ["PlotSpec", "parse_plot_spec", "emit_plots"]

_KINDS = ("error", "trace")
_FILTER_KEYS = {"estimators", "tasks", "dim", "family", "transform", "seeds"}


@dataclass(frozen=True)
class PlotSpec:
    """Parsed plot request: kind plus row filters."""

    kind: str
    filters: tuple[tuple[str, tuple[str, ...]], ...] = ()


def parse_plot_spec(text: str) -> PlotSpec:
    parts = [p.strip() for p in str(text).split(",") if p.strip()]
    if not parts:
        raise ValueError("empty plot spec")
    kind = parts[0]
    if kind not in _KINDS:
        raise ValueError(f"plot kind must be one of {_KINDS}, got {kind!r}")
    filters = []
    for part in parts[1:]:
        if "=" not in part:
            raise ValueError(f"bad filter {part!r}; expected key=value")
        key, value = part.split("=", 1)
        key = key.strip()
        if key not in _FILTER_KEYS:
            raise ValueError(f"unknown filter key {key!r}; "
                             f"choose from {sorted(_FILTER_KEYS)}")
        options = tuple(v.strip() for v in value.split("+") if v.strip())
        if not options:
            raise ValueError(f"filter {key} has no values")
        filters.append((key, options))
    return PlotSpec(kind=kind, filters=tuple(filters))


_FILTER_FIELD = {"estimators": "estimator", "tasks": "task_id", "dim": "dim",
                 "family": "family", "transform": "transform", "seeds": "seed"}


def _select(rows: list[dict], spec: PlotSpec) -> list[dict]:
    out = rows
    for key, options in spec.filters:
        name = _FILTER_FIELD[key]
        out = [r for r in out if str(r[name]) in options]
    return out


def _style() -> None:
    plt.rcParams["svg.hashsalt"] = "flowmi"
    plt.rcParams["svg.fonttype"] = "path"


def _save(fig, path: Path) -> None:
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _train_n(task_id: str) -> str:
    tail = task_id.rsplit("-n", 1)
    return tail[1] if len(tail) == 2 and tail[1].isdigit() else ""


def _error_figure(rows: list[dict], out_dir: Path) -> Path:
    ok = [r for r in rows if r["status"] == "ok" and r["err"] is not None]
    if not ok:
        raise ValueError("no successful rows to plot")
    dims = sorted({r["dim"] for r in ok})
    sizes = sorted({_train_n(r["task_id"]) for r in ok})
    split_n = len(sizes) > 1

    fig, axes = plt.subplots(1, len(dims), figsize=(4.2 * len(dims), 3.4),
                             squeeze=False, sharey=True)
    for ax, dim in zip(axes[0], dims):
        panel = [r for r in ok if r["dim"] == dim]
        series: dict[str, dict[float, list[float]]] = {}
        for r in panel:
            label = r["estimator"]
            if split_n:
                label = f"{label}/n{_train_n(r['task_id'])}"
            series.setdefault(label, {}).setdefault(r["true_mi"], []).append(
                r["err"])
        for label in sorted(series):
            xs = sorted(series[label])
            means, sds = [], []
            for x in xs:
                vals = series[label][x]
                means.append(sum(vals) / len(vals))
                if len(vals) > 1:
                    m = means[-1]
                    sds.append((sum((v - m) ** 2 for v in vals)
                                / (len(vals) - 1)) ** 0.5)
                else:
                    sds.append(0.0)
            ax.errorbar(xs, means, yerr=sds, marker="o", capsize=3,
                        label=label)
        ax.axhline(0.0, color="0.6", linewidth=0.8, zorder=0)
        ax.set_title(f"dim {dim}")
        ax.set_xlabel("true MI (nats)")
    axes[0][0].set_ylabel("error, true minus estimate (nats)")
    axes[0][-1].legend(fontsize=8)
    fig.tight_layout()
    path = out_dir / "error.svg"
    _save(fig, path)
    return path


def _load_trace(path: Path) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        rows = []
        for row in reader:
            rows.append({k: (float(row[k]) if row.get(k) else None)
                         for k in TRACE_COLUMNS})
        return rows


def _trace_figure(rows: list[dict], out_dir: Path, traces_dir: Path) -> Path:
    series = []
    for r in rows:
        path = traces_dir / f"{r['task_id']}.{r['estimator']}.s{r['seed']}.csv"
        if not path.exists():
            continue
        trace = [t for t in _load_trace(path) if t["mi"] is not None]
        if trace:
            series.append((f"{r['estimator']} s{r['seed']}", trace, r))
    if not series:
        raise ValueError("no trace data for the selected rows")

    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    drawn_truth = set()
    for label, trace, r in series:
        ax.plot([t["epoch"] for t in trace], [t["mi"] for t in trace],
                marker="o", markersize=2.5, linewidth=1.0, label=label)
        if r["true_mi"] is not None and r["task_id"] not in drawn_truth:
            ax.axhline(r["true_mi"], color="0.6", linewidth=0.8,
                       linestyle="--", zorder=0)
            drawn_truth.add(r["task_id"])
    ax.set_xlabel("epoch")
    ax.set_ylabel("estimate (nats)")
    ax.legend(fontsize=7)
    fig.tight_layout()
    path = out_dir / "trace.svg"
    _save(fig, path)
    return path


def emit_plots(results, spec, out_dir, traces_dir=None) -> list[Path]:
    """Render the requested plot kind from results rows or a CSV path.

    Raises ValueError when the spec is malformed or selects nothing.
    """
    if isinstance(spec, str):
        spec = parse_plot_spec(spec)
    if isinstance(results, (str, Path)):
        source = Path(results)
        rows = load_results(source)
        if traces_dir is None:
            traces_dir = source.parent / "traces"
    else:
        rows = [r.row() | {"n_train": r.n_train} if isinstance(r, RunResult)
                else dict(r) for r in results]
    rows = _select(rows, spec)
    if not rows:
        raise ValueError("plot selection matched no rows")

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _style()
    if spec.kind == "error":
        return [_error_figure(rows, out_dir)]
    if traces_dir is None:
        raise ValueError("trace plots need a traces directory")
    return [_trace_figure(rows, out_dir, Path(traces_dir))]
