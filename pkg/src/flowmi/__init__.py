"""Mutual information estimation via difference-of-entropies flows.

The estimators decompose I(X;Y) = H(X) - H(X|Y) and fit both entropies
with normalizing flows whose conditional and marginal views share one
set of weights through structural masking.  Parametric and critic-based
baselines, synthetic benchmarks with certified ground truth, and a
seeded experiment harness round out the toolkit.
"""

from .exceptions import (
    ConfigError,
    FlowNumericsError,
    FlowmiError,
    NonFiniteGradientError,
    OraclePrecisionError,
    TrainingDiverged,
)
from .rng import Rng
from .estimators import (
    REGISTRY,
    BaseMIEstimator,
    CriticMI,
    JointFlowMI,
    ParametricDoeMI,
    SeparateFlowsMI,
)
from .benchmarks import (
    BenchmarkTask,
    GroundTruth,
    gaussian_mi,
    invert_mi_to_rho,
    make_task,
    mc_oracle_mi,
    sample_task,
    task_ground_truth,
)

__version__ = "0.1.0"

__all__ = [
    "BaseMIEstimator",
    "BenchmarkTask",
    "ConfigError",
    "CriticMI",
    "FlowNumericsError",
    "FlowmiError",
    "GroundTruth",
    "JointFlowMI",
    "NonFiniteGradientError",
    "OraclePrecisionError",
    "ParametricDoeMI",
    "REGISTRY",
    "Rng",
    "SeparateFlowsMI",
    "TrainingDiverged",
    "__version__",
    "gaussian_mi",
    "invert_mi_to_rho",
    "make_task",
    "mc_oracle_mi",
    "sample_task",
    "task_ground_truth",
]
