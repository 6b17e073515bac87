"""Tape-based reverse-mode automatic differentiation on float64 arrays.

Evaluation is eager: each operation computes its value immediately and
appends one node to a :class:`Tape`.  A node records its operation kind,
value, parent node ids, and whatever small context the backward rule
needs.  :func:`backward` seeds the (scalar) root with adjoint 1 and walks
the node list once in reverse, accumulating vector-Jacobian products
into its parents; nodes the root does not depend on are never visited
and read back as zero gradients.

The operation vocabulary is deliberately closed and small.  Losses in
this package are composed only from the functions exported here, so a
finite-difference certification of these rules (see :func:`grad_check`)
covers every gradient the training loops ever take.  Reductions and
structural operations act along the last axis; batched quantities keep
the sample axis first.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

__all__ = [
    "Tape",
    "Var",
    "Grads",
    "backward",
    "grad_check",
    "matmul",
    "add",
    "hadamard",
    "scale",
    "tanh",
    "exp",
    "log",
    "softplus",
    "logsumexp",
    "sum_last",
    "sum_all",
    "slice_last",
    "concat_last",
    "reshape",
    "logaddexp",
]


class _Node:
    __slots__ = ("kind", "value", "parents", "ctx")

    def __init__(self, kind: str, value: np.ndarray, parents: tuple[int, ...], ctx):
        self.kind = kind
        self.value = value
        self.parents = parents
        self.ctx = ctx


class Var:
    """Handle to one tape node."""

    __slots__ = ("tape", "nid")

    def __init__(self, tape: "Tape", nid: int):
        self.tape = tape
        self.nid = nid

    @property
    def value(self) -> np.ndarray:
        return self.tape.nodes[self.nid].value

    @property
    def shape(self) -> tuple[int, ...]:
        return self.tape.nodes[self.nid].value.shape

    def __repr__(self) -> str:  # pragma: no cover
        node = self.tape.nodes[self.nid]
        return f"Var(nid={self.nid}, kind={node.kind}, shape={node.value.shape})"


class Tape:
    """Append-only record of one forward computation."""

    def __init__(self):
        self.nodes: list[_Node] = []

    def __len__(self) -> int:
        return len(self.nodes)

    def _push(self, kind: str, value: np.ndarray, parents: tuple[int, ...], ctx=None) -> Var:
        self.nodes.append(_Node(kind, value, parents, ctx))
        return Var(self, len(self.nodes) - 1)

    def leaf(self, value) -> Var:
        """Enter an input (parameter or data constant) onto the tape."""
        arr = np.asarray(value, dtype=np.float64)
        return self._push("leaf", arr, ())


def _same_tape(*vs: Var) -> Tape:
    tape = vs[0].tape
    for v in vs[1:]:
        if v.tape is not tape:
            raise ValueError("operands live on different tapes")
    return tape


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Reduce a broadcasted adjoint back to the operand's shape."""
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g.reshape(shape)


# ---------------------------------------------------------------------------
# operations


def matmul(a: Var, b: Var) -> Var:
    """Matrix product of 2-d operands."""
    tape = _same_tape(a, b)
    av, bv = a.value, b.value
    if av.ndim != 2 or bv.ndim != 2 or av.shape[1] != bv.shape[0]:
        raise ValueError(f"matmul shapes incompatible: {av.shape} @ {bv.shape}")
    return tape._push("matmul", av @ bv, (a.nid, b.nid))


def add(a: Var, b: Var) -> Var:
    """Elementwise sum with numpy broadcasting."""
    tape = _same_tape(a, b)
    return tape._push("add", a.value + b.value, (a.nid, b.nid))


def hadamard(a: Var, b: Var) -> Var:
    """Elementwise product with numpy broadcasting."""
    tape = _same_tape(a, b)
    return tape._push("hadamard", a.value * b.value, (a.nid, b.nid))


def scale(a: Var, c: float) -> Var:
    """Multiply by a python constant."""
    return a.tape._push("scale", a.value * float(c), (a.nid,), float(c))


def tanh(a: Var) -> Var:
    return a.tape._push("tanh", np.tanh(a.value), (a.nid,))


def exp(a: Var) -> Var:
    # Overflow to inf is deliberate: downstream finiteness guards turn a
    # diverged model into a reported failure instead of a warning storm.
    with np.errstate(over="ignore"):
        return a.tape._push("exp", np.exp(a.value), (a.nid,))


def log(a: Var) -> Var:
    return a.tape._push("log", np.log(a.value), (a.nid,))


def softplus(a: Var) -> Var:
    """log(1 + exp(a)), stable in both tails."""
    x = a.value
    out = np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x)))
    return a.tape._push("softplus", out, (a.nid,))


def logsumexp(a: Var) -> Var:
    """Stabilized log-sum-exp along the last axis (axis is dropped)."""
    av = a.value
    if av.ndim == 0 or av.shape[-1] == 0:
        raise ValueError("logsumexp needs a non-empty last axis")
    m = np.max(av, axis=-1, keepdims=True)
    out = np.squeeze(m, axis=-1) + np.log(np.sum(np.exp(av - m), axis=-1))
    return a.tape._push("logsumexp", out, (a.nid,))


def sum_last(a: Var) -> Var:
    """Sum along the last axis (axis is dropped)."""
    if a.value.ndim == 0:
        raise ValueError("sum_last needs at least one axis")
    return a.tape._push("sum_last", np.sum(a.value, axis=-1), (a.nid,))


def sum_all(a: Var) -> Var:
    """Sum of all entries, producing a scalar."""
    return a.tape._push("sum_all", np.asarray(np.sum(a.value)), (a.nid,), a.value.shape)


def slice_last(a: Var, start: int, stop: int) -> Var:
    """Contiguous slice [start, stop) along the last axis."""
    av = a.value
    width = av.shape[-1]
    if not (0 <= start <= stop <= width):
        raise ValueError(f"slice [{start}, {stop}) out of range for width {width}")
    return a.tape._push("slice_last", av[..., start:stop], (a.nid,), (start, stop))


def concat_last(parts: Sequence[Var]) -> Var:
    """Concatenate along the last axis."""
    parts = list(parts)
    if not parts:
        raise ValueError("concat_last needs at least one operand")
    tape = _same_tape(*parts)
    values = [p.value for p in parts]
    widths = tuple(v.shape[-1] for v in values)
    out = np.concatenate(values, axis=-1)
    return tape._push("concat_last", out, tuple(p.nid for p in parts), widths)


def reshape(a: Var, shape: tuple[int, ...]) -> Var:
    """View the operand under a new shape with the same number of entries."""
    return a.tape._push("reshape", a.value.reshape(shape), (a.nid,), a.value.shape)


def logaddexp(a: Var, b: Var) -> Var:
    """Elementwise log(exp(a) + exp(b)) for equal-shaped operands.

    Composed from reshape, concat and logsumexp so the primitive
    vocabulary stays closed.
    """
    if a.shape != b.shape:
        raise ValueError(f"logaddexp needs equal shapes, got {a.shape} and {b.shape}")
    stacked = concat_last([reshape(a, a.shape + (1,)), reshape(b, b.shape + (1,))])
    return logsumexp(stacked)


# ---------------------------------------------------------------------------
# reverse pass


class Grads:
    """Gradient map produced by :func:`backward`.

    Indexing with a :class:`Var` returns the accumulated adjoint, or a
    zero array for nodes the root did not depend on.
    """

    def __init__(self, tape: Tape, adjoints: list):
        self._tape = tape
        self._adjoints = adjoints

    def __getitem__(self, var: Var) -> np.ndarray:
        if var.tape is not self._tape:
            raise ValueError("variable belongs to a different tape")
        g = self._adjoints[var.nid]
        if g is None:
            return np.zeros_like(var.value)
        return g


def backward(root: Var) -> Grads:
    """Accumulate gradients of a scalar root with respect to every node."""
    tape = root.tape
    nodes = tape.nodes
    if root.value.size != 1:
        raise ValueError(f"backward needs a scalar root, got shape {root.value.shape}")

    adj: list = [None] * len(nodes)
    adj[root.nid] = np.ones_like(nodes[root.nid].value)

    def accum(nid: int, contribution: np.ndarray) -> None:
        if adj[nid] is None:
            adj[nid] = contribution
        else:
            adj[nid] = adj[nid] + contribution

    for nid in range(root.nid, -1, -1):
        g = adj[nid]
        if g is None:
            continue
        node = nodes[nid]
        kind = node.kind
        if kind == "leaf":
            continue
        elif kind == "matmul":
            ia, ib = node.parents
            accum(ia, g @ nodes[ib].value.T)
            accum(ib, nodes[ia].value.T @ g)
        elif kind == "add":
            ia, ib = node.parents
            accum(ia, _unbroadcast(g, nodes[ia].value.shape))
            accum(ib, _unbroadcast(g, nodes[ib].value.shape))
        elif kind == "hadamard":
            ia, ib = node.parents
            accum(ia, _unbroadcast(g * nodes[ib].value, nodes[ia].value.shape))
            accum(ib, _unbroadcast(g * nodes[ia].value, nodes[ib].value.shape))
        elif kind == "scale":
            accum(node.parents[0], g * node.ctx)
        elif kind == "tanh":
            accum(node.parents[0], g * (1.0 - node.value * node.value))
        elif kind == "exp":
            accum(node.parents[0], g * node.value)
        elif kind == "log":
            accum(node.parents[0], g / nodes[node.parents[0]].value)
        elif kind == "softplus":
            x = nodes[node.parents[0]].value
            accum(node.parents[0], g * np.exp(x - node.value))
        elif kind == "logsumexp":
            x = nodes[node.parents[0]].value
            accum(node.parents[0], g[..., None] * np.exp(x - node.value[..., None]))
        elif kind == "sum_last":
            x = nodes[node.parents[0]].value
            accum(node.parents[0], np.broadcast_to(g[..., None], x.shape))
        elif kind == "sum_all":
            accum(node.parents[0], np.broadcast_to(g, node.ctx))
        elif kind == "slice_last":
            start, stop = node.ctx
            full = np.zeros_like(nodes[node.parents[0]].value)
            full[..., start:stop] = g
            accum(node.parents[0], full)
        elif kind == "concat_last":
            offset = 0
            for pid, width in zip(node.parents, node.ctx):
                accum(pid, g[..., offset:offset + width])
                offset += width
        elif kind == "reshape":
            accum(node.parents[0], g.reshape(node.ctx))
        else:  # pragma: no cover
            raise AssertionError(f"unknown op kind {kind!r}")

    return Grads(tape, adj)


# ---------------------------------------------------------------------------
# certification


def grad_check(
    f: Callable[[Tape, list[Var]], Var],
    params: Sequence[np.ndarray],
    h: float = 1e-5,
    atol: float = 1e-7,
) -> float:
    """Worst-case relative disagreement with central differences.

    ``f`` builds a scalar loss from fresh leaves of the given parameter
    arrays.  Every coordinate of every parameter is perturbed by +-h and
    the symmetric difference quotient is compared against the tape
    gradient; the returned figure is the maximum over coordinates of

        |analytic - numeric| / (|analytic| + |numeric| + 1e-12)

    Coordinates where both magnitudes fall below ``atol`` count as exact
    agreement: losses invariant to a parameter (masked weights, uniform
    score shifts) have a true gradient of zero there, and the comparison
    would otherwise amplify rounding dust against difference noise.
    """
    params = [np.asarray(p, dtype=np.float64) for p in params]

    def evaluate(arrays) -> float:
        tape = Tape()
        leaves = [tape.leaf(a) for a in arrays]
        return float(f(tape, leaves).value)

    tape = Tape()
    leaves = [tape.leaf(p) for p in params]
    root = f(tape, leaves)
    grads = backward(root)
    analytic = [grads[v] for v in leaves]

    worst = 0.0
    for k in range(len(params)):
        flat_an = analytic[k].ravel()
        for j in range(params[k].size):
            shifted = [p.copy() for p in params]
            shifted[k].ravel()[j] += h
            up = evaluate(shifted)
            shifted[k].ravel()[j] -= 2.0 * h
            down = evaluate(shifted)
            numeric = (up - down) / (2.0 * h)
            a = float(flat_an[j])
            if abs(a) < atol and abs(numeric) < atol:
                continue
            rel = abs(a - numeric) / (abs(a) + abs(numeric) + 1e-12)
            worst = max(worst, rel)
    return worst
