"""Synthetic benchmark tasks with known or oracle-computed ground truth."""

from .tasks import (
    BenchmarkTask,
    gaussian_mi,
    invert_mi_to_rho,
    make_task,
    sample_task,
)
from .transforms import get_transform
from .oracle import GroundTruth, log_density_ratio, mc_oracle_mi, task_ground_truth

__all__ = [
    "BenchmarkTask",
    "make_task",
    "sample_task",
    "gaussian_mi",
    "invert_mi_to_rho",
    "get_transform",
    "GroundTruth",
    "mc_oracle_mi",
    "task_ground_truth",
    "log_density_ratio",
]
