"""Strictly increasing marginal transforms.

Applying a coordinatewise diffeomorphism to either variable leaves
mutual information unchanged, so these transforms turn easy benchmark
distributions into harder ones with the same ground truth.  Every
transform exposes its forward map, exact or numeric inverse, and the
log-derivative needed for change-of-variables density bookkeeping.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import ndtr, ndtri

from ..exceptions import ConfigError

__all__ = [
    "MarginalTransform",
    "IdentityTransform",
    "CubicTransform",
    "AsinhTransform",
    "WigglyTransform",
    "GaussianCdfTransform",
    "ChainTransform",
    "get_transform",
]


class MarginalTransform:
    """Scalar strictly increasing map applied elementwise to arrays."""

    name = "base"

    def forward(self, v: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def inverse(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def log_deriv(self, v: np.ndarray) -> np.ndarray:
        """log of d forward / d v, evaluated at v."""
        raise NotImplementedError


class IdentityTransform(MarginalTransform):
    name = "none"

    def forward(self, v):
        return np.asarray(v, dtype=np.float64)

    def inverse(self, t):
        return np.asarray(t, dtype=np.float64)

    def log_deriv(self, v):
        return np.zeros_like(np.asarray(v, dtype=np.float64))


class CubicTransform(MarginalTransform):
    """v -> v**3; the derivative vanishes at zero, stressing estimators."""

    name = "cubic"

    def forward(self, v):
        v = np.asarray(v, dtype=np.float64)
        return v * v * v

    def inverse(self, t):
        return np.cbrt(np.asarray(t, dtype=np.float64))

    def log_deriv(self, v):
        v = np.asarray(v, dtype=np.float64)
        # Diverges at v = 0, a measure-zero set for continuous samples.
        return math.log(3.0) + 2.0 * np.log(np.abs(v))


class AsinhTransform(MarginalTransform):
    """v -> asinh(v), a smooth compression of the tails."""

    name = "asinh"

    def forward(self, v):
        return np.arcsinh(np.asarray(v, dtype=np.float64))

    def inverse(self, t):
        return np.sinh(np.asarray(t, dtype=np.float64))

    def log_deriv(self, v):
        v = np.asarray(v, dtype=np.float64)
        return -0.5 * np.log1p(v * v)


class WigglyTransform(MarginalTransform):
    """v -> v + sum_j a_j sin(b_j v + c_j), kept monotone by construction.

    Requires sum_j |a_j b_j| < 1 so the derivative stays positive; the
    inverse is computed by bisection on the bracket [t - A, t + A] with
    A = sum_j |a_j|.
    """

    name = "wiggly"

    def __init__(self, a=(0.4, 0.2), b=(1.0, 2.0), c=(0.0, 1.0)):
        self.a = tuple(float(v) for v in a)
        self.b = tuple(float(v) for v in b)
        self.c = tuple(float(v) for v in c)
        if not (len(self.a) == len(self.b) == len(self.c)):
            raise ConfigError("wiggly coefficient lists must have equal length")
        slope_margin = sum(abs(ai * bi) for ai, bi in zip(self.a, self.b))
        if slope_margin >= 1.0:
            raise ConfigError(
                f"wiggly transform not monotone: sum |a_j b_j| = {slope_margin} >= 1")
        self._amplitude = sum(abs(ai) for ai in self.a)

    def forward(self, v):
        v = np.asarray(v, dtype=np.float64)
        out = v.copy()
        for ai, bi, ci in zip(self.a, self.b, self.c):
            out += ai * np.sin(bi * v + ci)
        return out

    def _deriv(self, v):
        d = np.ones_like(v)
        for ai, bi, ci in zip(self.a, self.b, self.c):
            d += ai * bi * np.cos(bi * v + ci)
        return d

    def log_deriv(self, v):
        return np.log(self._deriv(np.asarray(v, dtype=np.float64)))

    def inverse(self, t):
        t = np.asarray(t, dtype=np.float64)
        lo = t - self._amplitude
        hi = t + self._amplitude
        for _ in range(64):
            mid = 0.5 * (lo + hi)
            below = self.forward(mid) < t
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        return 0.5 * (lo + hi)


class GaussianCdfTransform(MarginalTransform):
    """Standard normal CDF, mapping gaussian marginals onto (0, 1)."""

    name = "gauss_cdf"

    def forward(self, v):
        return ndtr(np.asarray(v, dtype=np.float64))

    def inverse(self, t):
        return ndtri(np.asarray(t, dtype=np.float64))

    def log_deriv(self, v):
        v = np.asarray(v, dtype=np.float64)
        return -0.5 * v * v - 0.5 * math.log(2.0 * math.pi)


class ChainTransform(MarginalTransform):
    """Composition of transforms, applied left to right."""

    def __init__(self, steps: list[MarginalTransform]):
        self.steps = list(steps)
        self.name = "+".join(s.name for s in self.steps) or "none"

    def forward(self, v):
        out = np.asarray(v, dtype=np.float64)
        for step in self.steps:
            out = step.forward(out)
        return out

    def inverse(self, t):
        out = np.asarray(t, dtype=np.float64)
        for step in reversed(self.steps):
            out = step.inverse(out)
        return out

    def log_deriv(self, v):
        v = np.asarray(v, dtype=np.float64)
        total = np.zeros_like(v)
        for step in self.steps:
            total += step.log_deriv(v)
            v = step.forward(v)
        return total

    def inverse_with_log_deriv(self, t):
        """(pre-image, accumulated forward log-derivative at the pre-images)."""
        v = self.inverse(t)
        return v, self.log_deriv(v)


_NAMED = {
    "none": IdentityTransform,
    "cubic": CubicTransform,
    "asinh": AsinhTransform,
    "wiggly": WigglyTransform,
}


def get_transform(name: str, params: dict | None = None) -> MarginalTransform:
    """Build a named marginal transform; only "wiggly" takes parameters."""
    if name not in _NAMED:
        raise ConfigError(f"unknown transform {name!r}; choose from {sorted(_NAMED)}")
    cls = _NAMED[name]
    params = dict(params or {})
    if params and cls is not WigglyTransform:
        raise ConfigError(f"transform {name!r} takes no parameters")
    return cls(**params)
