"""Seeded grid execution with append-only CSV persistence.

Every (task, estimator, seed) triple runs independently.  The dataset
random stream is derived from the seed and the task identity alone, so
all estimators on a triple see the same data; the estimator stream adds
the estimator label so different methods do not share training noise.
Both derivations go through SeedSequence, which mixes the entropy words
properly, so run order and parallelism cannot affect any result.

Results append to ``results.csv`` as they complete (one row per run,
fixed column order) and each run writes its per-epoch trace to a sidecar
CSV under ``traces/``.  Failures mark the row ``status=failed`` and
never abort the grid.
"""

from __future__ import annotations

import concurrent.futures
import csv
import hashlib
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..benchmarks import sample_task, task_ground_truth
from ..estimators import REGISTRY
from ..rng import Rng
from .config import EstimatorSpec, ExperimentConfig, TaskSpec

__all__ = ["RESULT_COLUMNS", "TRACE_COLUMNS", "RunResult", "execute_run",
           "run_grid", "load_results", "trace_filename"]

logger = logging.getLogger(__name__)

RESULT_COLUMNS = ["task_id", "family", "dim", "transform", "true_mi",
                  "estimator", "seed", "mi_hat", "err", "l1", "l2",
                  "epochs", "wall_s", "status"]
TRACE_COLUMNS = ["epoch", "l1", "l2", "mi"]

_DATA_TAG = 0x0D47A
_EST_TAG = 0x0E577
_ORACLE_TAG = 0x0ACE5


@dataclass
class RunResult:
    """One grid cell: estimate, reference value, components, and trace."""

    task_id: str
    family: str
    dim: int
    transform: str
    true_mi: float
    estimator: str
    seed: int
    mi_hat: float | None
    err: float | None
    l1: float | None
    l2: float | None
    epochs: int
    wall_s: float
    status: str
    trace: list[dict] = field(default_factory=list)
    n_train: int = 0

    def row(self) -> dict:
        return {name: getattr(self, name) for name in RESULT_COLUMNS}


def _hash32(text: str) -> int:
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:4], "little")


def data_rng(task_spec: TaskSpec, seed: int) -> Rng:
    """Dataset stream; depends on the task and seed only."""
    return Rng(np.random.SeedSequence(
        [_DATA_TAG, int(seed), _hash32(task_spec.run_id)]))


def estimator_seed(task_spec: TaskSpec, est: EstimatorSpec, seed: int) -> int:
    """Training stream seed; adds the estimator label to the derivation."""
    seq = np.random.SeedSequence(
        [_EST_TAG, int(seed), _hash32(task_spec.run_id), _hash32(est.name)])
    return int(seq.generate_state(1)[0])


def oracle_rng(task_spec: TaskSpec) -> Rng:
    """Ground-truth stream; depends on the distribution only."""
    return Rng(np.random.SeedSequence(
        [_ORACLE_TAG, _hash32(task_spec.task.task_id)]))


def execute_run(task_spec: TaskSpec, est: EstimatorSpec, seed: int,
                true_mi: float) -> RunResult:
    """Run one (task, estimator, seed) triple, capturing failures."""
    task = task_spec.task
    params = est.param_dict()
    model = REGISTRY[est.kind](**params,
                               seed=estimator_seed(task_spec, est, seed))
    X, Y = sample_task(task, data_rng(task_spec, seed), task_spec.n_train)

    start = time.perf_counter()
    mi_hat = l1 = l2 = None
    trace: list[dict] = []
    status = "ok"
    try:
        model.fit(X, Y)
        mi_hat = float(model.mi_)
        l1, l2 = model.l1_, model.l2_
        trace = list(model.trace_)
        if not np.isfinite(mi_hat):
            raise FloatingPointError(f"non-finite estimate {mi_hat}")
    except Exception as exc:
        status = "failed"
        mi_hat = l1 = l2 = None
        trace = list(getattr(exc, "trace", None) or [])
        logger.warning("run failed: %s %s seed=%d: %s",
                       task_spec.run_id, est.name, seed, exc)
    wall = time.perf_counter() - start

    return RunResult(
        task_id=task_spec.run_id,
        family=task.family,
        dim=task.dim,
        transform=task.transform,
        true_mi=float(true_mi),
        estimator=est.name,
        seed=int(seed),
        mi_hat=mi_hat,
        err=None if mi_hat is None else float(true_mi) - mi_hat,
        l1=None if l1 is None else float(l1),
        l2=None if l2 is None else float(l2),
        epochs=int(model.epochs),
        wall_s=wall,
        status=status,
        trace=trace,
        n_train=task_spec.n_train,
    )


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def trace_filename(result: RunResult) -> str:
    return f"{result.task_id}.{result.estimator}.s{result.seed}.csv"


def _write_trace(path: Path, trace: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_COLUMNS)
        for entry in trace:
            writer.writerow([_cell(entry.get(k)) for k in TRACE_COLUMNS])


def _grid_cells(config: ExperimentConfig):
    for task_spec in config.tasks:
        for est in config.estimators:
            for seed in config.seeds:
                yield task_spec, est, seed


def run_grid(config: ExperimentConfig, out_dir, jobs: int | None = None,
             progress=None) -> list[RunResult]:
    """Execute the full grid, appending rows to ``out_dir/results.csv``.

    ``progress`` is an optional callable receiving each RunResult as it
    completes.  Returns results in grid order (tasks, then estimators,
    then seeds) regardless of execution order.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    traces_dir = out_dir / "traces"
    traces_dir.mkdir(exist_ok=True)
    results_path = out_dir / "results.csv"
    jobs = config.jobs if jobs is None else max(1, int(jobs))

    truth = {}
    for task_spec in config.tasks:
        task = task_spec.task
        if task not in truth:
            truth[task] = task_ground_truth(
                task, n_samples=config.oracle_samples,
                rng=oracle_rng(task_spec)).mi

    cells = list(_grid_cells(config))
    ordered: dict[int, RunResult] = {}

    def record(index: int, result: RunResult) -> None:
        ordered[index] = result
        writer.writerow([_cell(result.row()[c]) for c in RESULT_COLUMNS])
        fh.flush()
        _write_trace(traces_dir / trace_filename(result), result.trace)
        if progress is not None:
            progress(result)

    new_file = not results_path.exists() or results_path.stat().st_size == 0
    with open(results_path, "a", newline="") as fh:
        writer = csv.writer(fh)
        if new_file:
            writer.writerow(RESULT_COLUMNS)
            fh.flush()
        if jobs == 1:
            for i, (task_spec, est, seed) in enumerate(cells):
                record(i, execute_run(task_spec, est, seed,
                                      truth[task_spec.task]))
        else:
            with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
                futures = {
                    pool.submit(execute_run, task_spec, est, seed,
                                truth[task_spec.task]): i
                    for i, (task_spec, est, seed) in enumerate(cells)}
                for future in concurrent.futures.as_completed(futures):
                    record(futures[future], future.result())
    return [ordered[i] for i in range(len(cells))]


def _parse_cell(name: str, text: str):
    if text == "":
        return None
    if name in ("dim", "seed", "epochs"):
        return int(text)
    if name in ("true_mi", "mi_hat", "err", "l1", "l2", "wall_s"):
        return float(text)
    return text


def load_results(path) -> list[dict]:
    """Read a results CSV back into typed row dicts."""
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != RESULT_COLUMNS:
            raise ValueError(f"unexpected columns in {path}: "
                             f"{reader.fieldnames}")
        return [{name: _parse_cell(name, row[name]) for name in RESULT_COLUMNS}
                for row in reader]
