"""Block autoregressive flow over a (y, x) coordinate split.

The flow maps the concatenated vector u = (y, x) through a stack of
masked dense layers.  Coordinates are ordered with all y components
first; each layer assigns every coordinate a private column of hidden
units.  Three kinds of connections exist between coordinate i's units
and coordinate j's units:

* j == i: the per-coordinate diagonal block.  Its weights are stored as
  logarithms and enter through an elementwise exp, so the block is
  strictly positive and the map is strictly increasing in each
  coordinate's own input.
* j > i (reading order): free strictly lower block weights, stored
  densely and multiplied by a constant 0/1 structure mask.
* j < i: structurally absent (the mask zeroes them), which makes the
  Jacobian lower triangular by coordinate blocks.

A second mask additionally removes every connection from y coordinates
into x coordinates.  Evaluating under that mask makes the x outputs a
flow of x alone, while reusing the exact same parameter storage; the
active and deactivated views of one model therefore share every weight.

Because the Jacobian is triangular with positive diagonal, the
log-determinant of the x block is the sum of per-coordinate log
diagonal entries.  These are accumulated in log space layer by layer:
each layer contributes log of (activation derivative times the positive
diagonal block), and the chain across layers is a log-matrix product
evaluated with log-sum-exp.  Gated residual connections on the inner
layers mix each layer with its input through a learned sigmoid gate;
the chain then mixes the two branches with a log-add-exp.
"""

from __future__ import annotations

import math
from typing import Mapping, NamedTuple

import numpy as np

from .. import autodiff as ad
from ..exceptions import FlowNumericsError
from ..rng import Rng

__all__ = ["BlockAutoregressiveFlow", "FlowOutput", "set_mask"]

_LOG4 = 2.0 * math.log(2.0)


class FlowOutput(NamedTuple):
    """Forward results; entries are tape variables with a leading batch axis.

    The y-side log-diagonal fields are ``None`` when the forward pass was
    asked to track the Jacobian chain for x coordinates only.
    """

    f1: ad.Var                  # (M, n_y) outputs for the y block
    f2: ad.Var                  # (M, n_x) outputs for the x block
    logdiag_y: ad.Var | None    # (M, n_y) log Jacobian diagonal for y coordinates
    logdiag_x: ad.Var           # (M, n_x) log Jacobian diagonal for x coordinates
    logdet_y: ad.Var | None     # (M,) sum of logdiag_y
    logdet_x: ad.Var            # (M,) sum of logdiag_x


def _structure_masks(d: int, n_y: int, a_in: int, a_out: int) -> tuple[np.ndarray, np.ndarray]:
    """0/1 masks of shape (d*a_in, d*a_out) for the free weight matrix."""
    cin = np.repeat(np.arange(d), a_in)
    cout = np.repeat(np.arange(d), a_out)
    lower = (cin[:, None] < cout[None, :]).astype(np.float64)
    cross = (cin[:, None] < n_y) & (cout[None, :] >= n_y)
    return lower, lower * (~cross)


class BlockAutoregressiveFlow:
    """Masked autoregressive flow with positive per-coordinate diagonals.

    Parameters
    ----------
    n_y, n_x : int
        Sizes of the two coordinate groups; y comes first in reading
        order, so x outputs may depend on y but never the reverse.
        ``n_y=0`` yields a plain flow over x alone.
    hidden_mult : int
        Hidden units per coordinate; each hidden layer is ``(n_y+n_x) *
        hidden_mult`` wide.
    hidden_layers : int
        Number of tanh hidden layers.  Zero gives a single linear layer.
    gated : bool
        Learned residual gates on the inner equal-width layers.
    init : {"random", "zero"}
        ``"zero"`` starts at the identity map (unit diagonal, zero
        elsewhere), ``"random"`` uses scaled Gaussian weights.
    """

    def __init__(self, n_y: int, n_x: int, hidden_mult: int = 10,
                 hidden_layers: int = 2, gated: bool = True,
                 init: str = "random", rng: Rng | None = None):
        if n_x < 1:
            raise ValueError("n_x must be at least 1")
        if n_y < 0:
            raise ValueError("n_y must be non-negative")
        if hidden_mult < 1:
            raise ValueError("hidden_mult must be at least 1")
        if hidden_layers < 0:
            raise ValueError("hidden_layers must be non-negative")
        self.n_y = int(n_y)
        self.n_x = int(n_x)
        self.d = self.n_y + self.n_x
        self.hidden_mult = int(hidden_mult)
        self.hidden_layers = int(hidden_layers)
        self.gated = bool(gated)

        widths = [1] + [self.hidden_mult] * self.hidden_layers + [1]
        self._layers = list(zip(widths[:-1], widths[1:]))
        self._masks = [_structure_masks(self.d, self.n_y, a_in, a_out)
                       for a_in, a_out in self._layers]
        self.params: dict[str, np.ndarray] = {}
        self._init_params(init, rng)

    # ------------------------------------------------------------------
    # parameters

    def _gate_layers(self) -> list[int]:
        if not self.gated:
            return []
        return [k for k, (a_in, a_out) in enumerate(self._layers)
                if a_in == a_out and 0 < k < len(self._layers) - 1]

    def _init_params(self, init: str, rng: Rng | None) -> None:
        if init not in ("random", "zero"):
            raise ValueError(f"unknown init {init!r}")
        if init == "random" and rng is None:
            rng = Rng(0)
        d = self.d
        for k, (a_in, a_out) in enumerate(self._layers):
            fan_in = d * a_in
            if init == "zero":
                self.params[f"w{k}"] = np.zeros((d * a_in, d * a_out))
                self.params[f"d{k}"] = np.zeros((d, a_out, a_in))
            else:
                self.params[f"w{k}"] = rng.normal((d * a_in, d * a_out)) / math.sqrt(fan_in)
                self.params[f"d{k}"] = (-0.5 * math.log(fan_in)
                                        + 0.1 * rng.normal((d, a_out, a_in)))
            self.params[f"b{k}"] = np.zeros(d * a_out)
        for k in self._gate_layers():
            self.params[f"g{k}"] = np.zeros(())

    def bind(self, tape: ad.Tape) -> dict[str, ad.Var]:
        """Enter the current parameter arrays onto a tape as leaves."""
        return {name: tape.leaf(arr) for name, arr in self.params.items()}

    # ------------------------------------------------------------------
    # evaluation

    def forward(self, tape: ad.Tape, pv: Mapping[str, ad.Var], yx: np.ndarray,
                masked: bool = False, chain: str = "both") -> FlowOutput:
        """Run a (M, n_y + n_x) batch through the flow on the given tape.

        With ``masked=True`` every y-to-x connection is zeroed, so f2 and
        logdiag_x describe the flow of the x marginal.  ``chain`` selects
        whose Jacobian diagonal is accumulated: "both" or, when only the
        x entropy terms are needed, the cheaper "x".
        """
        if chain not in ("both", "x"):
            raise ValueError(f"chain must be 'both' or 'x', got {chain!r}")
        yx = np.asarray(yx, dtype=np.float64)
        if yx.ndim != 2 or yx.shape[1] != self.d:
            raise ValueError(f"expected batch of shape (M, {self.d}), got {yx.shape}")
        m_batch = yx.shape[0]
        d, n_y, n_x = self.d, self.n_y, self.n_x
        groups = [("y", n_y, 0), ("x", n_x, n_y)] if chain == "both" and n_y > 0 \
            else [("x", n_x, n_y)]
        last = len(self._layers) - 1
        gate_layers = self._gate_layers()

        h = tape.leaf(yx)
        # Log of the running per-coordinate Jacobian chain per tracked
        # group, width a_in.
        chains = {name: tape.leaf(np.zeros((m_batch, size, 1)))
                  for name, size, _ in groups}

        for k, (a_in, a_out) in enumerate(self._layers):
            mask = self._masks[k][1] if masked else self._masks[k][0]
            w_masked = ad.hadamard(pv[f"w{k}"], tape.leaf(mask))
            off = ad.matmul(h, w_masked)                      # (M, d*a_out)

            diag_log = pv[f"d{k}"]                            # (d, a_out, a_in)
            h3 = ad.reshape(h, (m_batch, d, 1, a_in))
            diag_part = ad.sum_last(ad.hadamard(h3, ad.exp(diag_log)))
            pre = ad.add(ad.add(off, ad.reshape(diag_part, (m_batch, d * a_out))),
                         pv[f"b{k}"])
            if not np.all(np.isfinite(pre.value)):
                raise FlowNumericsError(
                    f"non-finite activation in layer {k}", layer=k)

            if k < last:
                act = ad.tanh(pre)
            new_chains = {}
            for name, size, lo in groups:
                # This group's slice of the diagonal log-weights; the
                # first axis is coordinate-major, so it is a contiguous
                # run of the flattened tensor.
                block = a_out * a_in
                d_grp = ad.reshape(
                    ad.slice_last(ad.reshape(diag_log, (d * block,)),
                                  lo * block, (lo + size) * block),
                    (size, a_out, a_in))
                terms = ad.add(d_grp, ad.reshape(chains[name], (m_batch, size, 1, a_in)))
                if k < last:
                    # log d tanh(t)/dt = 2 (log 2 - t - softplus(-2t))
                    pre_grp = ad.slice_last(pre, lo * a_out, (lo + size) * a_out)
                    sp = ad.softplus(ad.scale(pre_grp, -2.0))
                    log_deriv = ad.add(ad.scale(ad.add(pre_grp, sp), -2.0),
                                       tape.leaf(_LOG4))
                    terms = ad.add(terms, ad.reshape(log_deriv,
                                                     (m_batch, size, a_out, 1)))
                new_chains[name] = ad.logsumexp(terms)        # (M, size, a_out)

            if k < last:
                if k in gate_layers:
                    g = pv[f"g{k}"]
                    log_sig = ad.scale(ad.softplus(ad.scale(g, -1.0)), -1.0)
                    log_one_minus = ad.scale(ad.softplus(g), -1.0)
                    sig = ad.exp(log_sig)
                    one_minus = ad.exp(log_one_minus)
                    act = ad.add(ad.hadamard(act, sig), ad.hadamard(h, one_minus))
                    for name in new_chains:
                        new_chains[name] = ad.logaddexp(
                            ad.add(new_chains[name], log_sig),
                            ad.add(chains[name], log_one_minus))
                h = act
            else:
                h = pre
            chains = new_chains

        f1 = ad.slice_last(h, 0, n_y)
        f2 = ad.slice_last(h, n_y, d)
        logdiag_x = ad.reshape(chains["x"], (m_batch, n_x))
        logdet_x = ad.sum_last(logdiag_x)
        logdiag_y = logdet_y = None
        if "y" in chains:
            logdiag_y = ad.reshape(chains["y"], (m_batch, n_y))
            logdet_y = ad.sum_last(logdiag_y)
        elif chain == "both":  # n_y == 0
            logdiag_y = tape.leaf(np.zeros((m_batch, 0)))
            logdet_y = ad.sum_last(logdiag_y)
        return FlowOutput(f1, f2, logdiag_y, logdiag_x, logdet_y, logdet_x)

    def transform(self, Y: np.ndarray, X: np.ndarray, masked: bool = False,
                  chain: str = "both"):
        """Numpy-only evaluation; returns (f1, f2, logdiag_y, logdiag_x).

        With ``chain="x"`` the y log-diagonal entry is ``None``.
        """
        Y = np.asarray(Y, dtype=np.float64)
        X = np.asarray(X, dtype=np.float64)
        yx = np.concatenate([Y, X], axis=1)
        tape = ad.Tape()
        out = self.forward(tape, self.bind(tape), yx, masked=masked, chain=chain)
        logdiag_y = None if out.logdiag_y is None else out.logdiag_y.value
        return (out.f1.value, out.f2.value, logdiag_y, out.logdiag_x.value)


class FlowView:
    """A flow bound to one masking mode; parameters are shared, not copied."""

    def __init__(self, flow, masked: bool):
        self.flow = flow
        self.masked = bool(masked)

    @property
    def params(self) -> dict[str, np.ndarray]:
        return self.flow.params

    def forward(self, tape: ad.Tape, pv: Mapping[str, ad.Var], yx: np.ndarray) -> FlowOutput:
        return self.flow.forward(tape, pv, yx, masked=self.masked)

    def transform(self, Y: np.ndarray, X: np.ndarray):
        return self.flow.transform(Y, X, masked=self.masked)


def set_mask(flow, masked: bool) -> FlowView:
    """View of a flow with y-to-x connections active or deactivated."""
    return FlowView(flow, masked)
