"""First-order optimizers over name-keyed parameter dictionaries.

Parameters live in a flat ``dict[str, ndarray]`` owned by the model;
``step`` updates them in place from an equally keyed gradient mapping.
Moment buffers are allocated lazily per parameter name, so one optimizer
instance can drive any subset of a model's parameters.  Gradients are
checked for finiteness before any state is touched: a NaN or infinite
gradient raises and leaves both parameters and moments unchanged.
"""

from __future__ import annotations

from typing import Mapping, MutableMapping

import numpy as np

from .exceptions import NonFiniteGradientError

__all__ = ["Adam", "Adamax", "clip_grad_norm", "global_grad_norm"]


def global_grad_norm(grads: Mapping[str, np.ndarray]) -> float:
    """Global L2 norm across all entries of all gradient arrays."""
    total = 0.0
    for g in grads.values():
        total += float(np.sum(np.asarray(g) ** 2))
    return float(np.sqrt(total))


def clip_grad_norm(grads: Mapping[str, np.ndarray], max_norm: float) -> dict[str, np.ndarray]:
    """Scale all gradients by max_norm / norm when the global norm exceeds it."""
    if max_norm <= 0.0:
        raise ValueError("max_norm must be positive")
    norm = global_grad_norm(grads)
    if norm <= max_norm:
        return dict(grads)
    factor = max_norm / norm
    return {name: np.asarray(g) * factor for name, g in grads.items()}


def _check_finite(grads: Mapping[str, np.ndarray]) -> None:
    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise NonFiniteGradientError(f"non-finite gradient for parameter {name!r}")


class Adam:
    """Adam with bias-corrected first and second moments."""

    def __init__(self, lr: float = 5e-4, beta1: float = 0.9, beta2: float = 0.999,
                 eps: float = 1e-8):
        self.lr = float(lr)
        self.beta1 = float(beta1)
        self.beta2 = float(beta2)
        self.eps = float(eps)
        self.t = 0
        self._m: dict[str, np.ndarray] = {}
        self._v: dict[str, np.ndarray] = {}

    def step(self, params: MutableMapping[str, np.ndarray],
             grads: Mapping[str, np.ndarray]) -> None:
        _check_finite(grads)
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        for name, g in grads.items():
            g = np.asarray(g, dtype=np.float64)
            if name not in self._m:
                self._m[name] = np.zeros_like(params[name])
                self._v[name] = np.zeros_like(params[name])
            m, v = self._m[name], self._v[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            params[name] -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


class Adamax:
    """Adam variant with an infinity-norm second moment."""

    def __init__(self, lr: float = 1e-3, beta1: float = 0.9, beta2: float = 0.999,
                 eps: float = 1e-8):
        self.lr = float(lr)
        self.beta1 = float(beta1)
        self.beta2 = float(beta2)
        self.eps = float(eps)
        self.t = 0
        self._m: dict[str, np.ndarray] = {}
        self._u: dict[str, np.ndarray] = {}

    def step(self, params: MutableMapping[str, np.ndarray],
             grads: Mapping[str, np.ndarray]) -> None:
        _check_finite(grads)
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        for name, g in grads.items():
            g = np.asarray(g, dtype=np.float64)
            if name not in self._m:
                self._m[name] = np.zeros_like(params[name])
                self._u[name] = np.zeros_like(params[name])
            m, u = self._m[name], self._u[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            np.maximum(self.beta2 * u, np.abs(g), out=u)
            # The denominator is clamped so it never drops below eps.
            params[name] -= self.lr * (m / c1) / np.maximum(u, self.eps)
