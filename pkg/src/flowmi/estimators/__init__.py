"""Mutual information estimators with a fit/estimate interface."""

from .base import BaseMIEstimator
from .critic import CriticMI, CriticModel
from .doe import DoeModel, ParametricDoeMI
from .flow_joint import JointFlowMI
from .flow_separate import SeparateFlowsMI

#: Estimator kinds addressable from experiment configs.
REGISTRY: dict[str, type[BaseMIEstimator]] = {
    "flow_joint": JointFlowMI,
    "flow_separate": SeparateFlowsMI,
    "doe": ParametricDoeMI,
    "critic": CriticMI,
}

__all__ = [
    "BaseMIEstimator",
    "JointFlowMI",
    "SeparateFlowsMI",
    "ParametricDoeMI",
    "CriticMI",
    "DoeModel",
    "CriticModel",
    "REGISTRY",
]
