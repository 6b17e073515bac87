"""Benchmark task definitions and samplers.

Every task draws paired variables (X, Y) of equal dimension built from
per-coordinate correlated pairs, optionally warped by marginal
transforms.  Because the coupling is per pair, ground truth for the
gaussian-copula families is available in closed form; the student-t
family shares a single scale mixing variable across all coordinates and
needs the Monte Carlo oracle.

Families
--------
gaussian
    Each coordinate pair (x_i, y_i) is bivariate normal with
    correlation rho_i.
sparse_gaussian
    As gaussian but only the first two pairs are correlated.
uniform
    The gaussian task pushed through the normal CDF on both sides
    (a gaussian copula with uniform marginals).
student_t
    Correlated gaussian pairs divided by a shared chi-square scale;
    heavy tails and positive mutual information even at rho = 0.

Transforms: "cubic" warps y only; "asinh" and "wiggly" warp both sides.
All are strictly increasing coordinatewise maps, so they leave the
ground truth unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..exceptions import ConfigError
from ..rng import Rng
from .transforms import (
    ChainTransform,
    GaussianCdfTransform,
    MarginalTransform,
    get_transform,
)

__all__ = [
    "BenchmarkTask",
    "make_task",
    "sample_task",
    "gaussian_mi",
    "invert_mi_to_rho",
    "analytic_mi",
    "side_transform",
]

FAMILIES = ("gaussian", "sparse_gaussian", "uniform", "student_t")

#: Which sides each named transform warps.
_TRANSFORM_SIDES = {"none": (), "cubic": ("y",), "asinh": ("x", "y"),
                    "wiggly": ("x", "y")}


def gaussian_mi(rhos) -> float:
    """Mutual information of independent bivariate normal pairs, in nats."""
    rhos = np.asarray(rhos, dtype=np.float64)
    if np.any(np.abs(rhos) >= 1.0):
        raise ValueError("correlations must lie strictly inside (-1, 1)")
    return float(-0.5 * np.sum(np.log1p(-rhos * rhos)))


def invert_mi_to_rho(mi: float, pairs: int) -> float:
    """Common correlation giving total mutual information ``mi`` over ``pairs``."""
    mi = float(mi)
    if mi < 0.0:
        raise ValueError("mutual information must be non-negative")
    if pairs < 1:
        raise ValueError("need at least one correlated pair")
    return math.sqrt(-math.expm1(-2.0 * mi / pairs))


@dataclass(frozen=True)
class BenchmarkTask:
    """Immutable description of one benchmark distribution."""

    family: str
    dim: int
    rhos: tuple[float, ...]
    dof: int | None = None
    transform: str = "none"
    transform_params: tuple[tuple[str, tuple[float, ...]], ...] = ()
    swap: bool = False
    name: str | None = None

    @property
    def task_id(self) -> str:
        if self.name:
            return self.name
        parts = [f"{self.family}-d{self.dim}"]
        if self.family == "student_t":
            parts.append(f"dof{self.dof}")
        rho_max = max(abs(r) for r in self.rhos)
        parts.append(f"rho{rho_max:g}")
        if self.transform != "none":
            parts.append(self.transform)
        if self.swap:
            parts.append("swap")
        return "-".join(parts)


def make_task(family: str, dim: int, mi: float | None = None,
              rho: float | None = None, dof: int | None = None,
              transform: str = "none", transform_params: dict | None = None,
              swap: bool = False, name: str | None = None) -> BenchmarkTask:
    """Construct a validated benchmark task.

    Exactly one of ``mi`` (target mutual information, converted to a
    common per-pair correlation) or ``rho`` may be given; ``rho=0`` is
    the default.  The student-t family requires ``dof`` and accepts only
    ``rho`` since its ground truth is not analytic.
    """
    if family not in FAMILIES:
        raise ConfigError(f"unknown family {family!r}; choose from {FAMILIES}")
    dim = int(dim)
    if dim < 1:
        raise ConfigError("dim must be at least 1")
    if family == "sparse_gaussian" and dim < 2:
        raise ConfigError("sparse_gaussian needs dim >= 2 for its two correlated pairs")
    if mi is not None and rho is not None:
        raise ConfigError("give mi or rho, not both")

    pairs = 2 if family == "sparse_gaussian" else dim
    if mi is not None:
        if family == "student_t":
            raise ConfigError("student_t ground truth is not analytic; specify rho")
        rho = invert_mi_to_rho(float(mi), pairs)
    rho = 0.0 if rho is None else float(rho)
    if not -1.0 < rho < 1.0:
        raise ConfigError(f"rho must lie in (-1, 1), got {rho}")
    if family == "sparse_gaussian":
        rhos = (rho, rho) + (0.0,) * (dim - 2)
    else:
        rhos = (rho,) * dim

    if family == "student_t":
        if dof is None or int(dof) < 1:
            raise ConfigError("student_t needs a positive integer dof")
        dof = int(dof)
    elif dof is not None:
        raise ConfigError(f"dof only applies to student_t, not {family!r}")

    if transform not in _TRANSFORM_SIDES:
        raise ConfigError(f"unknown transform {transform!r}; choose from "
                          f"{sorted(_TRANSFORM_SIDES)}")
    # Validates parameters (wiggly monotonicity in particular).
    get_transform(transform, transform_params)
    frozen_params = tuple(sorted(
        (key, tuple(float(v) for v in values))
        for key, values in (transform_params or {}).items()))

    return BenchmarkTask(family=family, dim=dim, rhos=rhos, dof=dof,
                         transform=transform, transform_params=frozen_params,
                         swap=bool(swap), name=name)


def analytic_mi(task: BenchmarkTask) -> float | None:
    """Closed-form ground truth, or None when only the oracle can provide it."""
    if task.family in ("gaussian", "sparse_gaussian", "uniform"):
        return gaussian_mi(task.rhos)
    return None


def side_transform(task: BenchmarkTask, side: str) -> ChainTransform:
    """Total marginal map applied to one side ("x" or "y"), family step included."""
    steps: list[MarginalTransform] = []
    if task.family == "uniform":
        steps.append(GaussianCdfTransform())
    if side in _TRANSFORM_SIDES[task.transform]:
        steps.append(get_transform(task.transform, dict(
            (k, list(v)) for k, v in task.transform_params)))
    return ChainTransform(steps)


def sample_task(task: BenchmarkTask, rng: Rng, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Draw n paired samples (X, Y) from the task distribution."""
    n = int(n)
    if n < 1:
        raise ValueError("need at least one sample")
    rhos = np.asarray(task.rhos)
    g1 = rng.normal((n, task.dim))
    g2 = rng.normal((n, task.dim))
    vx = g1
    vy = rhos * g1 + np.sqrt(1.0 - rhos * rhos) * g2
    if task.family == "student_t":
        w = rng.chisquare(task.dof, n)
        s = np.sqrt(task.dof / w)[:, None]
        vx = vx * s
        vy = vy * s
    X = side_transform(task, "x").forward(vx)
    Y = side_transform(task, "y").forward(vy)
    if task.swap:
        X, Y = Y, X
    return X, Y
