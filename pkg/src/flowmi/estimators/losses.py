"""Cross-entropy losses for flow models.

A flow with a standard normal base density models log p(x) as the base
log-density of its output plus the log-determinant of its Jacobian.  The
losses here are Monte Carlo cross-entropies (negative mean log-density)
over a minibatch: minimizing them fits the flow by maximum likelihood,
and their held-out values estimate entropies.

For a flow over (y, x) the x part of the joint loss is the conditional
cross-entropy, because the autoregressive structure makes the x outputs
a normalized model of p(x | y).  The same expression under the
deactivated (masked) view is the marginal cross-entropy of x.  The gap
between the two held-out values is the mutual information estimate.
"""

from __future__ import annotations

import numpy as np

from .. import autodiff as ad
from ..kernels import LOG_2PI

__all__ = [
    "build_flow_x_nll",
    "build_flow_joint_nll",
    "flow_nll_values",
]


def _base_logp_rows(tape: ad.Tape, f: ad.Var, width: int) -> ad.Var:
    """Standard normal log-density of each row of a (M, width) block."""
    sq = ad.sum_last(ad.hadamard(f, f))
    return ad.add(ad.scale(sq, -0.5), tape.leaf(-0.5 * width * LOG_2PI))


def _mean(v: ad.Var, m_batch: int) -> ad.Var:
    return ad.scale(ad.sum_all(v), 1.0 / m_batch)


def build_flow_x_nll(tape: ad.Tape, flow, pv, yx: np.ndarray,
                     masked: bool) -> ad.Var:
    """Cross-entropy of the x block: conditional when active, marginal when masked."""
    out = flow.forward(tape, pv, yx, masked=masked, chain="x")
    per = ad.add(_base_logp_rows(tape, out.f2, flow.n_x), out.logdet_x)
    return ad.scale(_mean(per, yx.shape[0]), -1.0)


def build_flow_joint_nll(tape: ad.Tape, flow, pv, yx: np.ndarray) -> ad.Var:
    """Joint cross-entropy over (y, x) under the active view."""
    out = flow.forward(tape, pv, yx, masked=False, chain="both")
    per_x = ad.add(_base_logp_rows(tape, out.f2, flow.n_x), out.logdet_x)
    per_y = ad.add(_base_logp_rows(tape, out.f1, flow.n_y), out.logdet_y)
    return ad.scale(_mean(ad.add(per_x, per_y), yx.shape[0]), -1.0)


def flow_nll_values(flow, Y: np.ndarray, X: np.ndarray, masked: bool = False,
                    chain: str = "both") -> tuple[float, float]:
    """(x part, y part) cross-entropy values without building gradients.

    The y part is NaN when ``chain="x"`` skips its Jacobian accounting.
    """
    f1, f2, ld_y, ld_x = flow.transform(Y, X, masked=masked, chain=chain)
    x_nll = float(np.mean(0.5 * np.sum(f2 * f2, axis=1)
                          + 0.5 * f2.shape[1] * LOG_2PI - np.sum(ld_x, axis=1)))
    if ld_y is None:
        return x_nll, float("nan")
    y_nll = float(np.mean(0.5 * np.sum(f1 * f1, axis=1)
                          + 0.5 * f1.shape[1] * LOG_2PI - np.sum(ld_y, axis=1)))
    return x_nll, y_nll
