"""Experiment configuration: a YAML schema mapped onto validated specs.

A config lists benchmark tasks (each carrying its training-set size),
estimators (registry kind plus constructor parameters), and the seed
list; the grid runner executes the full cross product.  Task fields
``dim``, ``n``, ``mi`` and ``rho`` may be lists, in which case the entry
expands over their cross product, which keeps grid configs short.

Example::

    name: demo
    seeds: 5
    tasks:
      - family: gaussian
        dim: [1, 5]
        mi: [0.0, 2.0]
        n: 4096
    estimators:
      - name: bnaf
        kind: flow_joint
        params: {epochs: 50}
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from ..estimators import REGISTRY
from ..exceptions import ConfigError
from ..benchmarks import BenchmarkTask, make_task

__all__ = ["TaskSpec", "EstimatorSpec", "ExperimentConfig", "build_config",
           "load_config"]

_TASK_KEYS = {"family", "dim", "n", "mi", "rho", "dof", "transform",
              "transform_params", "swap", "name"}
_LIST_KEYS = ("dim", "n", "mi", "rho")
_ESTIMATOR_KEYS = {"name", "kind", "params"}
_TOP_KEYS = {"name", "seeds", "tasks", "estimators", "output",
             "oracle_samples", "jobs"}


@dataclass(frozen=True)
class TaskSpec:
    """A benchmark distribution paired with its training-set size."""

    task: BenchmarkTask
    n_train: int

    @property
    def run_id(self) -> str:
        return f"{self.task.task_id}-n{self.n_train}"


@dataclass(frozen=True)
class EstimatorSpec:
    """A registry kind with constructor parameters and a row label."""

    name: str
    kind: str
    params: tuple[tuple[str, object], ...] = ()

    def param_dict(self) -> dict:
        return dict(self.params)


@dataclass
class ExperimentConfig:
    """Validated experiment description driving the grid runner."""

    name: str
    seeds: tuple[int, ...]
    tasks: tuple[TaskSpec, ...]
    estimators: tuple[EstimatorSpec, ...]
    output: str | None = None
    oracle_samples: int = 400_000
    jobs: int = 1

    @property
    def n_runs(self) -> int:
        return len(self.tasks) * len(self.estimators) * len(self.seeds)


def _require_mapping(obj, what: str) -> dict:
    if not isinstance(obj, dict):
        raise ConfigError(f"{what} must be a mapping, got {type(obj).__name__}")
    return obj


def _expand_task_entry(entry: dict, index: int) -> list[TaskSpec]:
    entry = _require_mapping(entry, f"tasks[{index}]")
    unknown = set(entry) - _TASK_KEYS
    if unknown:
        raise ConfigError(f"tasks[{index}]: unknown keys {sorted(unknown)}")
    for key in ("family", "dim", "n"):
        if key not in entry:
            raise ConfigError(f"tasks[{index}]: missing required key {key!r}")

    axes = []
    for key in _LIST_KEYS:
        value = entry.get(key)
        if isinstance(value, (list, tuple)):
            if not value:
                raise ConfigError(f"tasks[{index}]: {key} list is empty")
            axes.append([(key, v) for v in value])
        elif value is not None:
            axes.append([(key, value)])
    combos = list(itertools.product(*axes)) if axes else [()]
    if len(combos) > 1 and entry.get("name") is not None:
        raise ConfigError(f"tasks[{index}]: explicit name conflicts with "
                          "list expansion; drop one")

    specs = []
    for combo in combos:
        kwargs = {k: v for k, v in entry.items() if k not in _LIST_KEYS}
        kwargs.update(dict(combo))
        n_train = kwargs.pop("n")
        try:
            n_train = int(n_train)
        except (TypeError, ValueError):
            raise ConfigError(f"tasks[{index}]: n must be an integer, "
                              f"got {n_train!r}") from None
        if n_train < 2:
            raise ConfigError(f"tasks[{index}]: n must be at least 2")
        task = make_task(**kwargs)
        specs.append(TaskSpec(task=task, n_train=n_train))
    return specs


def _build_estimator_entry(entry: dict, index: int) -> EstimatorSpec:
    entry = _require_mapping(entry, f"estimators[{index}]")
    unknown = set(entry) - _ESTIMATOR_KEYS
    if unknown:
        raise ConfigError(f"estimators[{index}]: unknown keys {sorted(unknown)}")
    kind = entry.get("kind")
    if kind not in REGISTRY:
        raise ConfigError(f"estimators[{index}]: kind must be one of "
                          f"{sorted(REGISTRY)}, got {kind!r}")
    params = entry.get("params") or {}
    params = _require_mapping(params, f"estimators[{index}].params")
    if "seed" in params:
        raise ConfigError(f"estimators[{index}]: seed is assigned per run "
                          "from the seeds list, not via params")
    try:
        REGISTRY[kind](**params)
    except TypeError as exc:
        raise ConfigError(f"estimators[{index}]: bad params for {kind}: "
                          f"{exc}") from None
    name = str(entry.get("name") or kind)
    return EstimatorSpec(name=name, kind=kind,
                         params=tuple(sorted(params.items())))


def _parse_seeds(value) -> tuple[int, ...]:
    if value is None:
        return tuple(range(10))
    if isinstance(value, int) and not isinstance(value, bool):
        if value < 1:
            raise ConfigError("seeds count must be positive")
        return tuple(range(value))
    if isinstance(value, (list, tuple)):
        try:
            seeds = tuple(int(s) for s in value)
        except (TypeError, ValueError):
            raise ConfigError("seeds must be integers") from None
        if not seeds:
            raise ConfigError("seeds list is empty")
        return seeds
    raise ConfigError(f"seeds must be an int or a list, got {value!r}")


def build_config(mapping: dict) -> ExperimentConfig:
    """Validate a parsed mapping into an ExperimentConfig."""
    mapping = _require_mapping(mapping, "config")
    unknown = set(mapping) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown top-level keys {sorted(unknown)}")
    for key in ("tasks", "estimators"):
        if not mapping.get(key):
            raise ConfigError(f"config needs a non-empty {key!r} list")
        if not isinstance(mapping[key], list):
            raise ConfigError(f"{key!r} must be a list")

    tasks: list[TaskSpec] = []
    for i, entry in enumerate(mapping["tasks"]):
        tasks.extend(_expand_task_entry(entry, i))
    estimators = [_build_estimator_entry(e, i)
                  for i, e in enumerate(mapping["estimators"])]
    seeds = _parse_seeds(mapping.get("seeds"))

    seen = set()
    for spec in tasks:
        if spec.run_id in seen:
            raise ConfigError(f"duplicate task {spec.run_id!r}")
        seen.add(spec.run_id)
    names = [e.name for e in estimators]
    if len(set(names)) != len(names):
        raise ConfigError(f"duplicate estimator names in {names}")
    if len(set(seeds)) != len(seeds):
        raise ConfigError(f"duplicate seeds in {list(seeds)}")

    oracle_samples = mapping.get("oracle_samples", 400_000)
    if not isinstance(oracle_samples, int) or oracle_samples < 1000:
        raise ConfigError("oracle_samples must be an integer >= 1000")
    jobs = mapping.get("jobs", 1)
    if not isinstance(jobs, int) or jobs < 1:
        raise ConfigError("jobs must be a positive integer")

    return ExperimentConfig(
        name=str(mapping.get("name") or "experiment"),
        seeds=seeds,
        tasks=tuple(tasks),
        estimators=tuple(estimators),
        output=mapping.get("output"),
        oracle_samples=oracle_samples,
        jobs=jobs,
    )


def load_config(path) -> ExperimentConfig:
    """Read and validate a YAML experiment config file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        mapping = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML in {path}: {exc}") from None
    if mapping is None:
        raise ConfigError(f"config {path} is empty")
    return build_config(mapping)
