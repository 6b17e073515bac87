"""Shared fitting protocol for mutual information estimators.

Estimators follow the scikit-learn conventions: constructors only store
hyperparameters, ``fit(X, Y)`` learns and sets trailing-underscore
attributes, and ``get_params``/``set_params`` work for free via
:class:`sklearn.base.BaseEstimator`.  ``X`` is the variable whose
entropies are modeled; ``Y`` is the conditioning variable.

``fit`` accepts an explicit held-out set through ``eval_set``; without
one it splits off min(10240, n // 4) rows (or ``holdout`` rows when
given) before training.  The mutual information estimate ``mi_`` is
always computed on held-out data, never on training rows.  Training
keeps a per-epoch trace of held-out losses, and a loss that turns
non-finite or exceeds 1e6 aborts with :class:`TrainingDiverged`
carrying that trace.
"""

from __future__ import annotations

import time

import numpy as np
from sklearn.base import BaseEstimator

from .._validation import check_paired
from ..exceptions import FlowNumericsError, NonFiniteGradientError, TrainingDiverged
from ..rng import Rng

__all__ = ["BaseMIEstimator", "minibatch_indices"]

_DIVERGE_AT = 1e6


def minibatch_indices(rng: Rng, n: int, batch_size: int):
    """Yield index arrays for one epoch: a fresh shuffle, full batches only.

    When fewer than ``batch_size`` rows exist the single shuffled batch
    of everything is yielded instead.
    """
    perm = rng.permutation(n)
    if n < batch_size:
        yield perm
        return
    for start in range(0, n - batch_size + 1, batch_size):
        yield perm[start:start + batch_size]


class BaseMIEstimator(BaseEstimator):
    """Template for estimators of I(X; Y) in nats."""

    def fit(self, X, Y, eval_set=None):
        """Train on (X, Y) pairs and estimate mutual information.

        Parameters
        ----------
        X, Y : array-like of shape (n_samples, n_features)
            Paired observations of the two variables.
        eval_set : tuple (X_eval, Y_eval), optional
            Held-out data for the estimate.  Without it a split of
            min(10240, n // 4) rows (or ``holdout`` rows) is taken from
            the provided sample before training.
        """
        X, Y = check_paired(X, Y)
        rng = Rng(self.seed)
        if eval_set is not None:
            X_ev, Y_ev = check_paired(*eval_set)
            if X_ev.shape[1] != X.shape[1] or Y_ev.shape[1] != Y.shape[1]:
                raise ValueError("eval_set feature sizes do not match the training data")
            X_tr, Y_tr = X, Y
        else:
            n = X.shape[0]
            n_ev = self.holdout if self.holdout is not None else min(10240, n // 4)
            if not 0 < n_ev < n:
                raise ValueError(
                    f"cannot hold out {n_ev} of {n} samples; pass eval_set or "
                    f"adjust holdout")
            perm = rng.spawn(0).permutation(n)
            X_ev, Y_ev = X[perm[:n_ev]], Y[perm[:n_ev]]
            X_tr, Y_tr = X[perm[n_ev:]], Y[perm[n_ev:]]

        self.n_x_ = X.shape[1]
        self.n_y_ = Y.shape[1]
        started = time.perf_counter()
        try:
            self._fit(X_tr, Y_tr, X_ev, Y_ev, rng)
        except (FlowNumericsError, NonFiniteGradientError) as exc:
            trace = list(getattr(self, "trace_", None) or [])
            raise TrainingDiverged(
                f"numeric failure during training: {exc}",
                trace=trace, epoch=len(trace), loss=float("nan")) from exc
        finally:
            self.fit_seconds_ = time.perf_counter() - started
        return self

    def estimate(self, X, Y) -> float:
        """Mutual information estimate on fresh data from the trained model."""
        if not hasattr(self, "mi_"):
            raise RuntimeError("estimator is not fitted; call fit first")
        X, Y = check_paired(X, Y)
        if X.shape[1] != self.n_x_ or Y.shape[1] != self.n_y_:
            raise ValueError(
                f"feature sizes ({X.shape[1]}, {Y.shape[1]}) do not match the "
                f"fitted model ({self.n_x_}, {self.n_y_})")
        return self._estimate(X, Y)

    # ------------------------------------------------------------------
    # subclass hooks and helpers

    def _fit(self, X_tr, Y_tr, X_ev, Y_ev, rng: Rng) -> None:
        raise NotImplementedError

    def _estimate(self, X, Y) -> float:
        raise NotImplementedError

    def _trace_slice(self, X_ev, Y_ev):
        k = min(int(self.trace_samples), X_ev.shape[0])
        return X_ev[:k], Y_ev[:k]

    @staticmethod
    def _guard(value: float, trace, epoch: int) -> float:
        value = float(value)
        if not np.isfinite(value) or value > _DIVERGE_AT:
            raise TrainingDiverged(
                f"training loss {value} at epoch {epoch}",
                trace=trace, epoch=epoch, loss=value)
        return value
