"""Aggregation of grid results into per-cell error statistics.

A cell is one (task, estimator) pair.  The summary reports the mean
signed error, its standard deviation over seeds (ddof=1, zero for a
single run), the mean absolute error, and how many seeds failed.  Cells
whose runs all failed keep ``None`` statistics so downstream consumers
can tell "missing" from "zero error".
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from .grid import RunResult, load_results

__all__ = ["SUMMARY_COLUMNS", "summarize", "format_summary", "write_summary"]

SUMMARY_COLUMNS = ["task_id", "estimator", "n_ok", "n_failed", "mean_err",
                   "sd_err", "mean_abs_err"]


def _as_rows(results) -> list[dict]:
    if isinstance(results, (str, Path)):
        return load_results(results)
    rows = []
    for item in results:
        rows.append(item.row() if isinstance(item, RunResult) else dict(item))
    return rows


def summarize(results) -> list[dict]:
    """Per (task, estimator) statistics from results rows or a CSV path."""
    rows = _as_rows(results)
    order: list[tuple[str, str]] = []
    cells: dict[tuple[str, str], list[dict]] = {}
    for row in rows:
        key = (row["task_id"], row["estimator"])
        if key not in cells:
            cells[key] = []
            order.append(key)
        cells[key].append(row)

    table = []
    for key in order:
        group = cells[key]
        errs = [row["err"] for row in group
                if row["status"] == "ok" and row["err"] is not None]
        n_failed = sum(1 for row in group if row["status"] != "ok")
        if errs:
            arr = np.asarray(errs, dtype=np.float64)
            mean_err = float(np.mean(arr))
            sd_err = 0.0 if arr.size == 1 else float(np.std(arr, ddof=1))
            mean_abs = float(np.mean(np.abs(arr)))
        else:
            mean_err = sd_err = mean_abs = None
        table.append({
            "task_id": key[0],
            "estimator": key[1],
            "n_ok": len(errs),
            "n_failed": n_failed,
            "mean_err": mean_err,
            "sd_err": sd_err,
            "mean_abs_err": mean_abs,
        })
    return table


def format_summary(table: list[dict]) -> str:
    """Aligned plain-text rendering of a summary table."""
    def fmt(value):
        if value is None:
            return "-"
        if isinstance(value, float):
            return f"{value:+.4f}" if math.isfinite(value) else str(value)
        return str(value)

    rows = [[fmt(entry[c]) for c in SUMMARY_COLUMNS] for entry in table]
    widths = [max(len(SUMMARY_COLUMNS[i]), *(len(r[i]) for r in rows))
              if rows else len(SUMMARY_COLUMNS[i])
              for i in range(len(SUMMARY_COLUMNS))]
    lines = ["  ".join(name.ljust(widths[i])
                       for i, name in enumerate(SUMMARY_COLUMNS))]
    for row in rows:
        lines.append("  ".join(cell.ljust(widths[i])
                               for i, cell in enumerate(row)))
    return "\n".join(lines)


def write_summary(table: list[dict], path) -> None:
    """Persist a summary table as CSV with round-trip float formatting."""
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SUMMARY_COLUMNS)
        for entry in table:
            writer.writerow(["" if entry[c] is None
                             else repr(entry[c]) if isinstance(entry[c], float)
                             else str(entry[c]) for c in SUMMARY_COLUMNS])
