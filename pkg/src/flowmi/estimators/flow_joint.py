"""Mutual information from one jointly trained flow with a deactivatable bridge.

Each minibatch takes two optimization steps on the same parameters: one
on the conditional cross-entropy through the active view (y feeds x),
one on the marginal cross-entropy through the masked view (every y-to-x
connection disconnected).  All weights off the bridge are shared by both
objectives, so their approximation errors tend to cancel in the
difference; the bridge weights receive gradient only from the
conditional step because the masked forward multiplies them by zero.

The estimate is l2 - l1: held-out marginal minus conditional
cross-entropy, evaluated after the final epoch.
"""

from __future__ import annotations

import numpy as np

from .. import autodiff as ad
from ..flows import BlockAutoregressiveFlow, RealNvpFlow
from ..optim import Adam, Adamax
from ..rng import Rng
from .base import BaseMIEstimator, minibatch_indices
from .losses import build_flow_x_nll, flow_nll_values

__all__ = ["JointFlowMI"]


class JointFlowMI(BaseMIEstimator):
    """Difference-of-entropies estimator sharing one flow across both terms.

    Parameters
    ----------
    flow : {"bnaf", "realnvp"}
        Architecture of the joint flow.
    hidden_mult, hidden_layers, gated
        Block autoregressive flow shape (used when ``flow="bnaf"``).
    couplings, nvp_hidden, s_max
        Coupling flow shape (used when ``flow="realnvp"``).
    optimizer : {"adam", "adamax"}
    moments : {"split", "shared"}
        "split" gives each of the two objectives its own optimizer
        moment buffers; "shared" reuses one optimizer for both steps.
    holdout : int, optional
        Held-out rows when no eval_set is passed (default min(10240, n/4)).
    trace_samples : int
        Held-out rows used for the per-epoch trace.
    """

    def __init__(self, flow: str = "bnaf", hidden_mult: int = 10,
                 hidden_layers: int = 2, gated: bool = True, couplings: int = 4,
                 nvp_hidden: int = 64, s_max: float = 5.0,
                 optimizer: str = "adam", moments: str = "split",
                 epochs: int = 100, batch_size: int = 128, lr: float = 5e-4,
                 seed: int = 0, holdout: int | None = None,
                 trace_samples: int = 2048):
        self.flow = flow
        self.hidden_mult = hidden_mult
        self.hidden_layers = hidden_layers
        self.gated = gated
        self.couplings = couplings
        self.nvp_hidden = nvp_hidden
        self.s_max = s_max
        self.optimizer = optimizer
        self.moments = moments
        self.epochs = epochs
        self.batch_size = batch_size
        self.lr = lr
        self.seed = seed
        self.holdout = holdout
        self.trace_samples = trace_samples

    # ------------------------------------------------------------------

    def _make_flow(self, n_y: int, n_x: int, rng: Rng):
        if self.flow == "bnaf":
            return BlockAutoregressiveFlow(
                n_y, n_x, hidden_mult=self.hidden_mult,
                hidden_layers=self.hidden_layers, gated=self.gated, rng=rng)
        if self.flow == "realnvp":
            return RealNvpFlow(n_y, n_x, couplings=self.couplings,
                               hidden=self.nvp_hidden, s_max=self.s_max, rng=rng)
        raise ValueError(f"unknown flow {self.flow!r}")

    def _make_optimizer(self):
        if self.optimizer == "adam":
            return Adam(lr=self.lr)
        if self.optimizer == "adamax":
            return Adamax(lr=self.lr)
        raise ValueError(f"unknown optimizer {self.optimizer!r}")

    def _fit(self, X_tr, Y_tr, X_ev, Y_ev, rng: Rng) -> None:
        if self.moments not in ("split", "shared"):
            raise ValueError(f"unknown moments mode {self.moments!r}")
        flow = self._make_flow(Y_tr.shape[1], X_tr.shape[1], rng.spawn(1))
        opt_active = self._make_optimizer()
        opt_masked = opt_active if self.moments == "shared" else self._make_optimizer()

        yx_tr = np.concatenate([Y_tr, X_tr], axis=1)
        batch_rng = rng.spawn(2)
        X_tc, Y_tc = self._trace_slice(X_ev, Y_ev)
        trace: list[dict] = []
        self.trace_ = trace

        for epoch in range(int(self.epochs)):
            for idx in minibatch_indices(batch_rng, yx_tr.shape[0], int(self.batch_size)):
                batch = yx_tr[idx]
                for masked, opt in ((False, opt_active), (True, opt_masked)):
                    tape = ad.Tape()
                    pv = flow.bind(tape)
                    loss = build_flow_x_nll(tape, flow, pv, batch, masked=masked)
                    self._guard(loss.value, trace, epoch)
                    grads = ad.backward(loss)
                    opt.step(flow.params, {n: grads[v] for n, v in pv.items()})
            l1, _ = flow_nll_values(flow, Y_tc, X_tc, masked=False, chain="x")
            l2, _ = flow_nll_values(flow, Y_tc, X_tc, masked=True, chain="x")
            self._guard(l1, trace, epoch)
            self._guard(l2, trace, epoch)
            trace.append({"epoch": epoch, "l1": l1, "l2": l2, "mi": l2 - l1})

        self.flow_ = flow
        self.trace_ = trace
        self.l1_, _ = flow_nll_values(flow, Y_ev, X_ev, masked=False, chain="x")
        self.l2_, _ = flow_nll_values(flow, Y_ev, X_ev, masked=True, chain="x")
        self.mi_ = self.l2_ - self.l1_

    def _estimate(self, X, Y) -> float:
        l1, _ = flow_nll_values(self.flow_, Y, X, masked=False, chain="x")
        l2, _ = flow_nll_values(self.flow_, Y, X, masked=True, chain="x")
        return l2 - l1
