"""Byte-stable JSON serialization of flow parameters.

The on-disk document records the flow architecture and every parameter
array as a base64 blob of little-endian float64 bytes in row-major
order.  Keys are sorted and separators fixed, so serializing the same
model twice yields identical bytes, and a load followed by a save
round-trips exactly.
"""

from __future__ import annotations

import base64
import json
from pathlib import Path

import numpy as np

from .bnaf import BlockAutoregressiveFlow
from .realnvp import RealNvpFlow

__all__ = ["save_params", "load_params", "dump_params"]

_FORMAT = "flowmi-flow-params-v1"

_TYPES = {
    "bnaf": BlockAutoregressiveFlow,
    "realnvp": RealNvpFlow,
}


def _architecture(flow) -> dict:
    if isinstance(flow, BlockAutoregressiveFlow):
        return {"type": "bnaf", "kwargs": {
            "n_y": flow.n_y, "n_x": flow.n_x, "hidden_mult": flow.hidden_mult,
            "hidden_layers": flow.hidden_layers, "gated": flow.gated}}
    if isinstance(flow, RealNvpFlow):
        return {"type": "realnvp", "kwargs": {
            "n_y": flow.n_y, "n_x": flow.n_x, "couplings": flow.couplings,
            "hidden": flow.hidden, "s_max": flow.s_max}}
    raise TypeError(f"cannot serialize flow of type {type(flow).__name__}")


def dump_params(flow) -> str:
    """Canonical JSON text for a flow's architecture and parameters."""
    architecture = _architecture(flow)
    params = {}
    for name, arr in flow.params.items():
        arr = np.asarray(arr, dtype=np.float64)
        blob = base64.b64encode(np.ascontiguousarray(arr).astype("<f8").tobytes())
        params[name] = {"shape": list(arr.shape), "data": blob.decode("ascii")}
    doc = {"format": _FORMAT, "flow": architecture, "params": params}
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def save_params(path, flow) -> None:
    """Write a flow's parameters to ``path`` as canonical JSON."""
    Path(path).write_text(dump_params(flow), encoding="ascii")


def load_params(path):
    """Reconstruct a flow from a file written by :func:`save_params`."""
    doc = json.loads(Path(path).read_text(encoding="ascii"))
    if doc.get("format") != _FORMAT:
        raise ValueError(f"unrecognized parameter file format: {doc.get('format')!r}")
    arch = doc["flow"]
    cls = _TYPES.get(arch.get("type"))
    if cls is None:
        raise ValueError(f"unknown flow type {arch.get('type')!r}")
    flow = cls(init="zero", **arch["kwargs"])
    stored = doc["params"]
    if set(stored) != set(flow.params):
        raise ValueError("parameter names do not match the declared architecture")
    for name, entry in stored.items():
        arr = np.frombuffer(base64.b64decode(entry["data"]), dtype="<f8")
        arr = arr.reshape(entry["shape"]).copy()
        if arr.shape != flow.params[name].shape:
            raise ValueError(f"parameter {name!r} has shape {arr.shape}, "
                             f"expected {flow.params[name].shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"parameter {name!r} contains non-finite values")
        flow.params[name] = arr
    return flow
