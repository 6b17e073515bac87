"""Invertible density models with block triangular Jacobians."""

from .bnaf import BlockAutoregressiveFlow, FlowOutput, set_mask
from .realnvp import RealNvpFlow
from .checks import JacobianReport, jacobian_structure_check, numeric_jacobian
from .io import load_params, save_params

__all__ = [
    "BlockAutoregressiveFlow",
    "RealNvpFlow",
    "FlowOutput",
    "set_mask",
    "JacobianReport",
    "jacobian_structure_check",
    "numeric_jacobian",
    "save_params",
    "load_params",
]
