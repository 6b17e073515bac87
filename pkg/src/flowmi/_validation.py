"""Input validation helpers for the public estimator and sampling API."""

from __future__ import annotations

import numpy as np

__all__ = ["check_matrix", "check_paired"]


def check_matrix(arr, name: str = "X") -> np.ndarray:
    """Coerce to a finite 2-d float64 array, treating a vector as one column."""
    out = np.asarray(arr, dtype=np.float64)
    if out.ndim == 1:
        out = out[:, None]
    if out.ndim != 2:
        raise ValueError(f"{name} must be 2-d (n_samples, n_features), got shape {out.shape}")
    if out.shape[0] == 0:
        raise ValueError(f"{name} has no samples")
    if not np.all(np.isfinite(out)):
        raise ValueError(f"{name} contains NaN or infinite entries")
    return np.ascontiguousarray(out)


def check_paired(X, Y) -> tuple[np.ndarray, np.ndarray]:
    """Validate a paired sample: equal row counts, finite float64 matrices."""
    X = check_matrix(X, "X")
    Y = check_matrix(Y, "Y")
    if X.shape[0] != Y.shape[0]:
        raise ValueError(
            f"X and Y must pair row for row: {X.shape[0]} vs {Y.shape[0]} samples"
        )
    return X, Y
