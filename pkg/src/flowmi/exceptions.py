"""Exception types shared across the package."""

from __future__ import annotations


class FlowmiError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(FlowmiError, ValueError):
    """Invalid experiment or task configuration."""


class FlowNumericsError(FlowmiError, FloatingPointError):
    """A flow produced a non-finite activation during evaluation."""

    def __init__(self, message: str, layer: int | None = None):
        super().__init__(message)
        self.layer = layer


class NonFiniteGradientError(FlowmiError, FloatingPointError):
    """An optimizer step received a NaN or infinite gradient."""


class TrainingDiverged(FlowmiError, RuntimeError):
    """Training loss exceeded the divergence threshold or became non-finite.

    Carries the per-epoch trace recorded up to the failing step so callers
    can inspect how the run went off the rails.
    """

    def __init__(self, message: str, trace=None, epoch: int | None = None,
                 loss: float | None = None):
        super().__init__(message)
        self.trace = list(trace) if trace is not None else []
        self.epoch = epoch
        self.loss = loss


class OraclePrecisionError(FlowmiError, RuntimeError):
    """A Monte Carlo ground-truth estimate missed its precision target."""

    def __init__(self, message: str, std_error: float, threshold: float):
        super().__init__(message)
        self.std_error = std_error
        self.threshold = threshold
