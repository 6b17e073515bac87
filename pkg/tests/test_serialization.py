"""Flow parameter files: byte-stable JSON, exact round-trips, validation."""

import json

import numpy as np
import pytest

from flowmi.flows import BlockAutoregressiveFlow, RealNvpFlow
from flowmi.flows.io import dump_params, load_params, save_params
from flowmi.rng import Rng


def _bnaf():
    return BlockAutoregressiveFlow(2, 3, hidden_mult=3, hidden_layers=2,
                                   gated=True, rng=Rng(0))


def _nvp():
    return RealNvpFlow(2, 3, couplings=2, hidden=8, rng=Rng(1))


@pytest.mark.parametrize("build", [_bnaf, _nvp], ids=["bnaf", "realnvp"])
def test_round_trip_preserves_bits_and_outputs(build, tmp_path):
    flow = build()
    path = tmp_path / "flow.json"
    save_params(path, flow)
    loaded = load_params(path)

    assert set(loaded.params) == set(flow.params)
    for name in flow.params:
        np.testing.assert_array_equal(loaded.params[name], flow.params[name])

    rng = Rng(2)
    Y, X = rng.normal((16, 2)), rng.normal((16, 3))
    for masked in (False, True):
        a = flow.transform(Y, X, masked=masked, chain="both")
        b = loaded.transform(Y, X, masked=masked, chain="both")
        for left, right in zip(a, b):
            np.testing.assert_array_equal(left, right)


@pytest.mark.parametrize("build", [_bnaf, _nvp], ids=["bnaf", "realnvp"])
def test_serialization_is_byte_stable(build, tmp_path):
    flow = build()
    text = dump_params(flow)
    assert dump_params(flow) == text
    p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
    save_params(p1, flow)
    save_params(p2, load_params(p1))
    assert p1.read_bytes() == p2.read_bytes()


def test_document_declares_format_and_architecture():
    doc = json.loads(dump_params(_bnaf()))
    assert doc["format"] == "flowmi-flow-params-v1"
    assert doc["flow"]["type"] == "bnaf"
    assert doc["flow"]["kwargs"]["n_y"] == 2
    assert doc["flow"]["kwargs"]["n_x"] == 3
    nvp_doc = json.loads(dump_params(_nvp()))
    assert nvp_doc["flow"]["type"] == "realnvp"
    assert nvp_doc["flow"]["kwargs"]["couplings"] == 2


def test_unknown_format_rejected(tmp_path):
    doc = json.loads(dump_params(_bnaf()))
    doc["format"] = "flowmi-flow-params-v999"
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(ValueError, match="format"):
        load_params(path)


def test_unknown_flow_type_rejected(tmp_path):
    doc = json.loads(dump_params(_bnaf()))
    doc["flow"]["type"] = "iaf"
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(ValueError, match="unknown flow type"):
        load_params(path)


def test_mismatched_parameter_names_rejected(tmp_path):
    doc = json.loads(dump_params(_bnaf()))
    first = sorted(doc["params"])[0]
    doc["params"]["extra"] = doc["params"].pop(first)
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(ValueError, match="parameter names"):
        load_params(path)


def test_mismatched_shape_rejected(tmp_path):
    flow = _bnaf()
    doc = json.loads(dump_params(flow))
    name = sorted(doc["params"])[0]
    doc["params"][name]["shape"] = [1, int(np.prod(flow.params[name].shape))]
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(ValueError, match="shape"):
        load_params(path)


def test_non_finite_values_rejected(tmp_path):
    flow = _bnaf()
    name = sorted(flow.params)[0]
    flow.params[name] = flow.params[name].copy()
    flow.params[name].flat[0] = np.inf
    path = tmp_path / "bad.json"
    save_params(path, flow)
    with pytest.raises(ValueError, match="non-finite"):
        load_params(path)


def test_unsupported_object_rejected():
    with pytest.raises(TypeError, match="cannot serialize"):
        dump_params(object())
