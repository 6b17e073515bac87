"""Numerically careful scalar and array kernels.

Small float64 building blocks used throughout the package: stabilized
log-space reductions, the log-derivative of tanh, the standard normal
log-density, and a validated Gaussian sampler.  Shapes are plain numpy
arrays; every kernel is total on finite float64 inputs.
"""

from __future__ import annotations

import math

import numpy as np

from .rng import Rng

__all__ = [
    "LOG_2PI",
    "matmul",
    "logsumexp",
    "logmeanexp",
    "softplus",
    "log_tanh_prime",
    "std_normal_logpdf",
    "sample_gaussian",
]

LOG_2PI = math.log(2.0 * math.pi)


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product with an explicit inner-dimension check."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2:
        raise ValueError(f"matmul expects 2-d operands, got {a.shape} and {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"matmul inner dimensions differ: {a.shape} vs {b.shape}")
    return a @ b


def logsumexp(v) -> float:
    """log(sum(exp(v))) of a 1-d array, stabilized by the running maximum."""
    v = np.asarray(v, dtype=np.float64).ravel()
    if v.size == 0:
        raise ValueError("logsumexp of an empty array is undefined")
    m = np.max(v)
    if not np.isfinite(m):
        return float(m)
    return float(m + np.log(np.sum(np.exp(v - m))))


def logmeanexp(v) -> float:
    """log of the mean of exp(v) for a 1-d array."""
    v = np.asarray(v, dtype=np.float64).ravel()
    return logsumexp(v) - math.log(v.size)


def softplus(x) -> np.ndarray:
    """log(1 + exp(x)) computed without overflow in either tail."""
    return np.logaddexp(0.0, np.asarray(x, dtype=np.float64))


def log_tanh_prime(x) -> np.ndarray:
    """log(1 - tanh(x)^2) in a form that stays finite for large |x|."""
    x = np.asarray(x, dtype=np.float64)
    return 2.0 * (math.log(2.0) - x - softplus(-2.0 * x))


def std_normal_logpdf(z) -> float:
    """Log-density of a standard normal vector at ``z``."""
    z = np.asarray(z, dtype=np.float64).ravel()
    return float(-0.5 * np.dot(z, z) - 0.5 * z.size * LOG_2PI)


def sample_gaussian(rng: Rng, mean, chol, size: int | None = None) -> np.ndarray:
    """Draw from N(mean, L L^T) given the lower-triangular factor L.

    Returns one vector of shape (n,) when ``size`` is None, otherwise a
    (size, n) matrix of independent draws.
    """
    mean = np.asarray(mean, dtype=np.float64).ravel()
    chol = np.asarray(chol, dtype=np.float64)
    n = mean.size
    if chol.shape != (n, n):
        raise ValueError(f"covariance factor must be ({n}, {n}), got {chol.shape}")
    if not np.allclose(chol, np.tril(chol)):
        raise ValueError("covariance factor must be lower triangular")
    if np.any(np.diag(chol) < 0.0):
        raise ValueError("covariance factor must have non-negative diagonal")
    m = 1 if size is None else int(size)
    z = rng.normal((m, n))
    draws = mean + z @ chol.T
    return draws[0] if size is None else draws
