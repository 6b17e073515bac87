"""Shared fixtures and small builders for the test suite."""

from __future__ import annotations

import numpy as np

from flowmi.rng import Rng


def correlated_pairs(seed: int, n: int, dim: int, rho: float):
    """Per-coordinate correlated standard normal pairs (X, Y)."""
    rng = Rng(seed)
    g1 = rng.normal((n, dim))
    g2 = rng.normal((n, dim))
    y = g1
    x = rho * g1 + np.sqrt(1.0 - rho * rho) * g2
    return x, y


def quick_flow_params(**overrides):
    """Constructor arguments for a fast flow-based estimator."""
    base = dict(hidden_mult=3, hidden_layers=1, epochs=3, batch_size=64,
                holdout=128, trace_samples=128, seed=0)
    base.update(overrides)
    return base


def tiny_grid_config(tmp_path=None, **overrides):
    """A grid config mapping that runs in about a second."""
    cfg = {
        "name": "tiny",
        "seeds": [0, 1],
        "oracle_samples": 20_000,
        "tasks": [{"family": "gaussian", "dim": 1, "n": 512, "mi": 1.0}],
        "estimators": [
            {"name": "doe", "kind": "doe",
             "params": {"hidden": 8, "epochs": 2, "holdout": 64}},
            {"name": "smile", "kind": "critic",
             "params": {"bound": "smile", "hidden": 8, "epochs": 2,
                        "holdout": 64}},
        ],
    }
    cfg.update(overrides)
    return cfg
