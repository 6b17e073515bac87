"""Difference-of-entropies baseline with two independent flows.

One flow models the joint density of (y, x); a second, architecturally
matched flow models the x marginal alone.  Nothing is shared between
them, so their approximation errors do not cancel the way the jointly
trained estimator's do.  The conditional cross-entropy is the x part of
the joint flow's held-out loss (the autoregressive ordering makes that
term a normalized model of p(x | y)); the estimate is the marginal
flow's cross-entropy minus it.
"""

from __future__ import annotations

import numpy as np

from .. import autodiff as ad
from ..flows import BlockAutoregressiveFlow, RealNvpFlow
from ..optim import Adam, Adamax
from ..rng import Rng
from .base import BaseMIEstimator, minibatch_indices
from .losses import build_flow_joint_nll, build_flow_x_nll, flow_nll_values

__all__ = ["SeparateFlowsMI"]


class SeparateFlowsMI(BaseMIEstimator):
    """Two-flow difference-of-entropies baseline without weight sharing.

    Hyperparameters mirror :class:`JointFlowMI`; both flows use the same
    architecture settings and their own optimizer state.
    """

    def __init__(self, flow: str = "bnaf", hidden_mult: int = 10,
                 hidden_layers: int = 2, gated: bool = True, couplings: int = 4,
                 nvp_hidden: int = 64, s_max: float = 5.0,
                 optimizer: str = "adam", epochs: int = 50,
                 batch_size: int = 128, lr: float = 5e-4, seed: int = 0,
                 holdout: int | None = None, trace_samples: int = 2048):
        self.flow = flow
        self.hidden_mult = hidden_mult
        self.hidden_layers = hidden_layers
        self.gated = gated
        self.couplings = couplings
        self.nvp_hidden = nvp_hidden
        self.s_max = s_max
        self.optimizer = optimizer
        self.epochs = epochs
        self.batch_size = batch_size
        self.lr = lr
        self.seed = seed
        self.holdout = holdout
        self.trace_samples = trace_samples

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
        joint = self._make_flow(Y_tr.shape[1], X_tr.shape[1], rng.spawn(1))
        marginal = self._make_flow(0, X_tr.shape[1], rng.spawn(3))
        opt_joint = self._make_optimizer()
        opt_marginal = self._make_optimizer()

        yx_tr = np.concatenate([Y_tr, X_tr], axis=1)
        batch_rng = rng.spawn(2)
        X_tc, Y_tc = self._trace_slice(X_ev, Y_ev)
        empty_tc = np.zeros((X_tc.shape[0], 0))
        empty_ev = np.zeros((X_ev.shape[0], 0))
        trace: list[dict] = []
        self.trace_ = trace

        for epoch in range(int(self.epochs)):
            for idx in minibatch_indices(batch_rng, yx_tr.shape[0], int(self.batch_size)):
                batch = yx_tr[idx]
                tape = ad.Tape()
                pv = joint.bind(tape)
                loss = build_flow_joint_nll(tape, joint, pv, batch)
                self._guard(loss.value, trace, epoch)
                grads = ad.backward(loss)
                opt_joint.step(joint.params, {n: grads[v] for n, v in pv.items()})

                tape = ad.Tape()
                pv = marginal.bind(tape)
                loss = build_flow_x_nll(tape, marginal, pv, batch[:, Y_tr.shape[1]:],
                                        masked=False)
                self._guard(loss.value, trace, epoch)
                grads = ad.backward(loss)
                opt_marginal.step(marginal.params, {n: grads[v] for n, v in pv.items()})
            l1, _ = flow_nll_values(joint, Y_tc, X_tc, masked=False, chain="x")
            l2, _ = flow_nll_values(marginal, empty_tc, X_tc, masked=False, chain="x")
            self._guard(l1, trace, epoch)
            self._guard(l2, trace, epoch)
            trace.append({"epoch": epoch, "l1": l1, "l2": l2, "mi": l2 - l1})

        self.joint_flow_ = joint
        self.marginal_flow_ = marginal
        self.trace_ = trace
        self.l1_, _ = flow_nll_values(joint, Y_ev, X_ev, masked=False, chain="x")
        self.l2_, _ = flow_nll_values(marginal, empty_ev, X_ev, masked=False, chain="x")
        self.mi_ = self.l2_ - self.l1_

    def _estimate(self, X, Y) -> float:
        empty = np.zeros((X.shape[0], 0))
        l1, _ = flow_nll_values(self.joint_flow_, Y, X, masked=False, chain="x")
        l2, _ = flow_nll_values(self.marginal_flow_, empty, X, masked=False, chain="x")
        return l2 - l1
