"""Affine coupling flow over a (y, x) split with a deactivatable bridge.

The stack alternates couplings that transform the y group (reading only
y) with couplings that transform the x group (reading the kept x part
and, through a 0/1 context gate, the current y state).  Each coupling
keeps one half of its group fixed and maps the other half elementwise
through ``moved * exp(s) + t`` where s and t come from a small tanh
conditioner network; s is soft-clamped to (-s_max, s_max).  Groups of
size one keep nothing and condition on the context alone.

Deactivating the context gate zeroes the y input of every x coupling,
making the x outputs a flow of the x marginal with unchanged parameter
storage, which mirrors the masked mode of the block autoregressive
flow.  The per-group log-determinant is the sum of the s fields of that
group's couplings; ``logdiag`` entries report each coordinate's
accumulated s contribution, which row-sum to the log-determinants.
"""

from __future__ import annotations

import math
from typing import Mapping

import numpy as np

from .. import autodiff as ad
from ..exceptions import FlowNumericsError
from ..rng import Rng
from .bnaf import FlowOutput

__all__ = ["RealNvpFlow"]


def _halves(n: int, parity: int) -> tuple[tuple[int, int], tuple[int, int]]:
    """(keep, move) index ranges for one coupling of a size-n group."""
    if n == 1:
        return (0, 0), (0, 1)
    half = n // 2
    if parity % 2 == 0:
        return (0, half), (half, n)
    return (half, n), (0, half)


class RealNvpFlow:
    """Stack of affine couplings over (y, x) with shared masked parameters.

    Parameters
    ----------
    n_y, n_x : int
        Group sizes; ``n_y=0`` drops the y couplings entirely.
    couplings : int
        Couplings per group, alternating the kept half.
    hidden : int
        Width of the two tanh hidden layers of each conditioner.
    s_max : float
        Soft clamp bound: s = s_max * tanh(s_raw / s_max).
    """

    def __init__(self, n_y: int, n_x: int, couplings: int = 4, hidden: int = 64,
                 s_max: float = 5.0, init: str = "random", rng: Rng | None = None):
        if n_x < 1:
            raise ValueError("n_x must be at least 1")
        if n_y < 0:
            raise ValueError("n_y must be non-negative")
        if couplings < 1:
            raise ValueError("couplings must be at least 1")
        if s_max <= 0.0:
            raise ValueError("s_max must be positive")
        self.n_y = int(n_y)
        self.n_x = int(n_x)
        self.couplings = int(couplings)
        self.hidden = int(hidden)
        self.s_max = float(s_max)

        self._plan: list[dict] = []
        for j in range(self.couplings):
            if self.n_y >= 1:
                keep, move = _halves(self.n_y, j)
                self._plan.append({"group": "y", "keep": keep, "move": move, "ctx": False})
            keep, move = _halves(self.n_x, j)
            self._plan.append({"group": "x", "keep": keep, "move": move, "ctx": self.n_y >= 1})

        self.params: dict[str, np.ndarray] = {}
        self._init_params(init, rng)

    # ------------------------------------------------------------------
    # parameters

    def _conditioner_dims(self, spec: dict) -> tuple[int, int]:
        keep = spec["keep"][1] - spec["keep"][0]
        move = spec["move"][1] - spec["move"][0]
        in_dim = keep + (self.n_y if spec["ctx"] else 0)
        return in_dim, move

    def _init_params(self, init: str, rng: Rng | None) -> None:
        if init not in ("random", "zero"):
            raise ValueError(f"unknown init {init!r}")
        if init == "random" and rng is None:
            rng = Rng(0)
        h = self.hidden
        for j, spec in enumerate(self._plan):
            in_dim, move = self._conditioner_dims(spec)
            shapes = [(in_dim, h), (h,), (h, h), (h,), (h, 2 * move), (2 * move,)]
            names = ["w0", "b0", "w1", "b1", "w2", "b2"]
            for name, shape in zip(names, shapes):
                key = f"c{j}.{name}"
                if init == "zero" or name in ("b0", "b1", "w2", "b2"):
                    # The final layer starts at zero so the flow begins
                    # as the identity map.
                    self.params[key] = np.zeros(shape)
                else:
                    fan_in = max(1, shape[0])
                    self.params[key] = rng.normal(shape) / math.sqrt(fan_in)

    def bind(self, tape: ad.Tape) -> dict[str, ad.Var]:
        return {name: tape.leaf(arr) for name, arr in self.params.items()}

    # ------------------------------------------------------------------
    # evaluation

    def _conditioner(self, tape, pv, j: int, inp: ad.Var, move: int):
        h1 = ad.tanh(ad.add(ad.matmul(inp, pv[f"c{j}.w0"]), pv[f"c{j}.b0"]))
        h2 = ad.tanh(ad.add(ad.matmul(h1, pv[f"c{j}.w1"]), pv[f"c{j}.b1"]))
        out = ad.add(ad.matmul(h2, pv[f"c{j}.w2"]), pv[f"c{j}.b2"])
        if not np.all(np.isfinite(out.value)):
            raise FlowNumericsError(f"non-finite conditioner output in coupling {j}", layer=j)
        s_raw = ad.slice_last(out, 0, move)
        t = ad.slice_last(out, move, 2 * move)
        s = ad.scale(ad.tanh(ad.scale(s_raw, 1.0 / self.s_max)), self.s_max)
        return s, t

    def forward(self, tape: ad.Tape, pv: Mapping[str, ad.Var], yx: np.ndarray,
                masked: bool = False, chain: str = "both") -> FlowOutput:
        # Both log-determinants come free here, so ``chain`` only needs
        # validating for interface parity with the autoregressive flow.
        if chain not in ("both", "x"):
            raise ValueError(f"chain must be 'both' or 'x', got {chain!r}")
        yx = np.asarray(yx, dtype=np.float64)
        d = self.n_y + self.n_x
        if yx.ndim != 2 or yx.shape[1] != d:
            raise ValueError(f"expected batch of shape (M, {d}), got {yx.shape}")
        m_batch = yx.shape[0]

        state = {"y": None, "x": None}
        data = tape.leaf(yx)
        state["y"] = ad.slice_last(data, 0, self.n_y)
        state["x"] = ad.slice_last(data, self.n_y, d)
        ld = {"y": tape.leaf(np.zeros((m_batch, self.n_y))),
              "x": tape.leaf(np.zeros((m_batch, self.n_x)))}

        for j, spec in enumerate(self._plan):
            group = spec["group"]
            u = state[group]
            (k0, k1), (m0, m1) = spec["keep"], spec["move"]
            kept = ad.slice_last(u, k0, k1)
            pieces = [kept]
            if spec["ctx"]:
                pieces.append(ad.scale(state["y"], 0.0 if masked else 1.0))
            inp = ad.concat_last(pieces) if len(pieces) > 1 else kept
            s, t = self._conditioner(tape, pv, j, inp, m1 - m0)
            moved = ad.add(ad.hadamard(ad.slice_last(u, m0, m1), ad.exp(s)), t)
            zeros = tape.leaf(np.zeros((m_batch, k1 - k0)))
            if m0 >= k1:
                state[group] = ad.concat_last([kept, moved])
                ld[group] = ad.add(ld[group], ad.concat_last([zeros, s]))
            else:
                state[group] = ad.concat_last([moved, kept])
                ld[group] = ad.add(ld[group], ad.concat_last([s, zeros]))

        return FlowOutput(state["y"], state["x"], ld["y"], ld["x"],
                          ad.sum_last(ld["y"]), ad.sum_last(ld["x"]))

    def transform(self, Y: np.ndarray, X: np.ndarray, masked: bool = False,
                  chain: str = "both"):
        """Numpy-only evaluation; returns (f1, f2, logdiag_y, logdiag_x)."""
        Y = np.asarray(Y, dtype=np.float64)
        X = np.asarray(X, dtype=np.float64)
        yx = np.concatenate([Y, X], axis=1)
        tape = ad.Tape()
        out = self.forward(tape, self.bind(tape), yx, masked=masked, chain=chain)
        return (out.f1.value, out.f2.value, out.logdiag_y.value, out.logdiag_x.value)

    # ------------------------------------------------------------------
    # inversion (numpy only; used by round-trip tests)

    def _conditioner_np(self, j: int, inp: np.ndarray, move: int):
        p = self.params
        h1 = np.tanh(inp @ p[f"c{j}.w0"] + p[f"c{j}.b0"])
        h2 = np.tanh(h1 @ p[f"c{j}.w1"] + p[f"c{j}.b1"])
        out = h2 @ p[f"c{j}.w2"] + p[f"c{j}.b2"]
        s = self.s_max * np.tanh(out[:, :move] / self.s_max)
        return s, out[:, move:]

    def _apply_np(self, j: int, spec: dict, u: np.ndarray, ctx: np.ndarray | None,
                  invert: bool) -> np.ndarray:
        (k0, k1), (m0, m1) = spec["keep"], spec["move"]
        kept = u[:, k0:k1]
        inp = kept if ctx is None else np.concatenate([kept, ctx], axis=1)
        s, t = self._conditioner_np(j, inp, m1 - m0)
        if invert:
            moved = (u[:, m0:m1] - t) * np.exp(-s)
        else:
            moved = u[:, m0:m1] * np.exp(s) + t
        out = u.copy()
        out[:, m0:m1] = moved
        return out

    def inverse(self, F1: np.ndarray, F2: np.ndarray, masked: bool = False):
        """Map flow outputs back to (Y, X)."""
        F1 = np.atleast_2d(np.asarray(F1, dtype=np.float64))
        F2 = np.atleast_2d(np.asarray(F2, dtype=np.float64))
        y_specs = [(j, s) for j, s in enumerate(self._plan) if s["group"] == "y"]
        x_specs = [(j, s) for j, s in enumerate(self._plan) if s["group"] == "x"]

        y = F1.copy()
        for j, spec in reversed(y_specs):
            y = self._apply_np(j, spec, y, None, invert=True)

        # Replay the y chain to recover the context state seen by each
        # x coupling: x coupling i runs after y coupling i.
        contexts = []
        y_state = y.copy()
        for j, spec in y_specs:
            y_state = self._apply_np(j, spec, y_state, None, invert=False)
            contexts.append(y_state.copy())
        if not y_specs:
            contexts = [None] * len(x_specs)

        x = F2.copy()
        for i in range(len(x_specs) - 1, -1, -1):
            j, spec = x_specs[i]
            ctx = None
            if spec["ctx"]:
                ctx = np.zeros_like(contexts[i]) if masked else contexts[i]
            x = self._apply_np(j, spec, x, ctx, invert=True)
        return y, x
