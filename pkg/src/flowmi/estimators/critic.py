"""Variational critic bounds on mutual information.

A scalar critic network f(x, y) is trained to maximize a lower bound on
I(X; Y) built from its scores on paired ("positive") and mispaired
("negative") samples:

* nwj:     E_p[f] - exp(-1) E_q[exp(f)]
* mine:    E_p[f] - log E_q[exp(f)]  (the Donsker-Varadhan form)
* smile:   the mine form with the negative exponent smoothly clipped to
           [-clip, clip], which bounds the partition-term variance
* infonce: batch softmax classification of the matched pair, capped at
           log(batch size) by construction

Negatives pair each x with a deranged batch of y (no pair left intact);
infonce scores the full batch-by-batch grid instead.  These bounds are
biased low in different ways (high variance for nwj/mine, the hard cap
for infonce), which is what makes them useful baselines.
"""

from __future__ import annotations

import math

import numpy as np

from .. import autodiff as ad
from ..optim import Adam
from ..rng import Rng
from .base import BaseMIEstimator, minibatch_indices

__all__ = ["CriticModel", "CriticMI"]

_KINDS = ("nwj", "mine", "smile", "infonce")


class CriticModel:
    """Scalar critic network over concatenated (x, y) with smooth activations."""

    def __init__(self, n_x: int, n_y: int, hidden: int = 128,
                 rng: Rng | None = None):
        self.n_x = int(n_x)
        self.n_y = int(n_y)
        self.hidden = int(hidden)
        if rng is None:
            rng = Rng(0)
        h = self.hidden
        d_in = self.n_x + self.n_y
        self.params: dict[str, np.ndarray] = {
            "w0": rng.normal((d_in, h)) / math.sqrt(max(1, d_in)),
            "b0": np.zeros(h),
            "w1": rng.normal((h, h)) / math.sqrt(h),
            "b1": np.zeros(h),
            "w2": rng.normal((h, 1)) / math.sqrt(h),
            "b2": np.zeros(1),
        }

    def bind(self, tape: ad.Tape) -> dict[str, ad.Var]:
        return {name: tape.leaf(arr) for name, arr in self.params.items()}

    def scores(self, tape: ad.Tape, pv, pairs: np.ndarray) -> ad.Var:
        """Critic values for a (M, n_x + n_y) stack of pairs, shape (M,)."""
        p = tape.leaf(np.asarray(pairs, dtype=np.float64))
        h1 = ad.softplus(ad.add(ad.matmul(p, pv["w0"]), pv["b0"]))
        h2 = ad.softplus(ad.add(ad.matmul(h1, pv["w1"]), pv["b1"]))
        out = ad.add(ad.matmul(h2, pv["w2"]), pv["b2"])
        return ad.reshape(out, (pairs.shape[0],))

    # ------------------------------------------------------------------
    # bounds

    def pair_bound(self, tape: ad.Tape, pv, X: np.ndarray, Y: np.ndarray,
                   Y_neg: np.ndarray, kind: str, clip: float) -> ad.Var:
        """nwj / mine / smile lower bound from positives and negatives."""
        m = X.shape[0]
        f_pos = self.scores(tape, pv, np.concatenate([X, Y], axis=1))
        f_neg = self.scores(tape, pv, np.concatenate([X, Y_neg], axis=1))
        mean_pos = ad.scale(ad.sum_all(f_pos), 1.0 / m)
        if kind == "smile":
            lo, hi = -float(clip), float(clip)
            f_neg = ad.add(ad.add(tape.leaf(lo),
                                  ad.softplus(ad.add(f_neg, tape.leaf(-lo)))),
                           ad.scale(ad.softplus(ad.add(f_neg, tape.leaf(-hi))), -1.0))
        log_mean_neg = ad.add(ad.logsumexp(f_neg), tape.leaf(-math.log(m)))
        if kind == "nwj":
            partition = ad.exp(ad.add(log_mean_neg, tape.leaf(-1.0)))
        elif kind in ("mine", "smile"):
            partition = log_mean_neg
        else:
            raise ValueError(f"unknown pairwise bound {kind!r}")
        return ad.add(mean_pos, ad.scale(partition, -1.0))

    def infonce_bound(self, tape: ad.Tape, pv, X: np.ndarray, Y: np.ndarray) -> ad.Var:
        """Full-grid softmax bound; structurally at most log(batch size)."""
        m = X.shape[0]
        grid = np.concatenate([np.repeat(X, m, axis=0), np.tile(Y, (m, 1))], axis=1)
        s = ad.reshape(self.scores(tape, pv, grid), (m, m))
        matched = ad.sum_last(ad.hadamard(s, tape.leaf(np.eye(m))))
        row_lse = ad.logsumexp(s)
        per = ad.add(matched, ad.scale(row_lse, -1.0))
        return ad.add(ad.scale(ad.sum_all(per), 1.0 / m), tape.leaf(math.log(m)))

    def js_objective(self, tape: ad.Tape, pv, X: np.ndarray, Y: np.ndarray,
                     Y_neg: np.ndarray) -> ad.Var:
        """Jensen-Shannon surrogate used to train the smile critic.

        Maximizing E_p[-softplus(-f)] - E_q[softplus(f)] trains the same
        critic the clipped bound evaluates, without the runaway scores
        the clipped partition term would permit (its gradient vanishes
        for scores beyond the clip, leaving positives unopposed).
        """
        m = X.shape[0]
        f_pos = self.scores(tape, pv, np.concatenate([X, Y], axis=1))
        f_neg = self.scores(tape, pv, np.concatenate([X, Y_neg], axis=1))
        pos_term = ad.scale(ad.sum_all(ad.softplus(ad.scale(f_pos, -1.0))), -1.0 / m)
        neg_term = ad.scale(ad.sum_all(ad.softplus(f_neg)), -1.0 / m)
        return ad.add(pos_term, neg_term)


class CriticMI(BaseMIEstimator):
    """Mutual information lower bound from a trained critic.

    Parameters
    ----------
    bound : {"nwj", "mine", "smile", "infonce"}
    clip : float
        Exponent clip half-width for the smile bound.
    hidden : int
        Critic hidden width (two hidden layers).
    """

    def __init__(self, bound: str = "smile", clip: float = 5.0,
                 hidden: int = 128, epochs: int = 50, batch_size: int = 128,
                 lr: float = 5e-4, seed: int = 0, holdout: int | None = None,
                 trace_samples: int = 2048):
        self.bound = bound
        self.clip = clip
        self.hidden = hidden
        self.epochs = epochs
        self.batch_size = batch_size
        self.lr = lr
        self.seed = seed
        self.holdout = holdout
        self.trace_samples = trace_samples

    # ------------------------------------------------------------------

    def _bound_value(self, model: CriticModel, X: np.ndarray, Y: np.ndarray,
                     rng: Rng) -> float:
        """Bound evaluated without gradients, batched for infonce."""
        if self.bound == "infonce":
            m = int(self.batch_size)
            n = X.shape[0]
            if n <= m:
                slices = [np.arange(n)]
            else:
                slices = [np.arange(s, s + m) for s in range(0, n - m + 1, m)]
            vals = []
            for idx in slices:
                tape = ad.Tape()
                pv = model.bind(tape)
                vals.append(float(model.infonce_bound(tape, pv, X[idx], Y[idx]).value))
            return float(np.mean(vals))
        tape = ad.Tape()
        pv = model.bind(tape)
        neg = Y[rng.derangement(Y.shape[0])]
        return float(model.pair_bound(tape, pv, X, Y, neg, self.bound, self.clip).value)

    def _fit(self, X_tr, Y_tr, X_ev, Y_ev, rng: Rng) -> None:
        if self.bound not in _KINDS:
            raise ValueError(f"unknown bound {self.bound!r}; choose from {_KINDS}")
        model = CriticModel(X_tr.shape[1], Y_tr.shape[1], hidden=self.hidden,
                            rng=rng.spawn(1))
        opt = Adam(lr=self.lr)
        batch_rng = rng.spawn(2)
        neg_rng = rng.spawn(3)
        X_tc, Y_tc = self._trace_slice(X_ev, Y_ev)
        trace: list[dict] = []
        self.trace_ = trace

        for epoch in range(int(self.epochs)):
            for idx in minibatch_indices(batch_rng, X_tr.shape[0], int(self.batch_size)):
                xb, yb = X_tr[idx], Y_tr[idx]
                tape = ad.Tape()
                pv = model.bind(tape)
                if self.bound == "infonce":
                    objective = model.infonce_bound(tape, pv, xb, yb)
                elif self.bound == "smile":
                    neg = yb[neg_rng.derangement(yb.shape[0])]
                    objective = model.js_objective(tape, pv, xb, yb, neg)
                else:
                    neg = yb[neg_rng.derangement(yb.shape[0])]
                    objective = model.pair_bound(tape, pv, xb, yb, neg, self.bound,
                                                 self.clip)
                self._guard(-float(objective.value), trace, epoch)
                grads = ad.backward(ad.scale(objective, -1.0))
                opt.step(model.params, {n: grads[v] for n, v in pv.items()})
            mi_tc = self._bound_value(model, X_tc, Y_tc, rng.spawn(4, epoch))
            self._guard(-mi_tc, trace, epoch)
            trace.append({"epoch": epoch, "mi": mi_tc})

        self.model_ = model
        self.trace_ = trace
        self.l1_ = None
        self.l2_ = None
        self.mi_ = self._bound_value(model, X_ev, Y_ev, rng.spawn(5))

    def _estimate(self, X, Y) -> float:
        return self._bound_value(self.model_, X, Y, Rng(self.seed).spawn(6))
