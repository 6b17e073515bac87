"""Weight deactivation: the masked view must be a pure function of x."""

import numpy as np
import pytest

from flowmi import autodiff as ad
from flowmi.estimators.losses import build_flow_x_nll
from flowmi.flows import BlockAutoregressiveFlow, RealNvpFlow, set_mask
from flowmi.flows.bnaf import FlowView, _structure_masks
from flowmi.rng import Rng


def _make_flow(kind: str):
    if kind == "bnaf":
        return BlockAutoregressiveFlow(2, 3, hidden_mult=3, hidden_layers=2,
                                       gated=True, rng=Rng(0))
    flow = RealNvpFlow(2, 3, couplings=3, hidden=8, rng=Rng(1))
    # Kick the conditioners off their zero-initialized identity start so
    # the couplings actually read their inputs.
    rng = Rng(99)
    for name in sorted(flow.params):
        flow.params[name] += 0.4 * rng.normal(flow.params[name].shape)
    return flow


@pytest.mark.parametrize("kind", ["bnaf", "realnvp"])
def test_masked_f2_ignores_y_exactly(kind):
    flow = _make_flow(kind)
    rng = Rng(2)
    Y, X = rng.normal((6, 2)), rng.normal((6, 3))
    Y_other = rng.normal((6, 2)) * 3.0
    _, f2_a, _, ld_a = flow.transform(Y, X, masked=True)
    _, f2_b, _, ld_b = flow.transform(Y_other, X, masked=True)
    assert np.array_equal(f2_a, f2_b)
    assert np.array_equal(ld_a, ld_b)


@pytest.mark.parametrize("kind", ["bnaf", "realnvp"])
def test_active_f2_does_use_y(kind):
    flow = _make_flow(kind)
    rng = Rng(3)
    Y, X = rng.normal((6, 2)), rng.normal((6, 3))
    _, f2_a, _, _ = flow.transform(Y, X, masked=False)
    _, f2_b, _, _ = flow.transform(Y * 2.0 + 1.0, X, masked=False)
    assert not np.array_equal(f2_a, f2_b)


@pytest.mark.parametrize("kind", ["bnaf", "realnvp"])
def test_masked_loss_bit_invariant_under_y_permutation(kind):
    flow = _make_flow(kind)
    rng = Rng(4)
    Y, X = rng.normal((16, 2)), rng.normal((16, 3))
    cols = np.array([1, 0])
    yx = np.concatenate([Y, X], axis=1)
    yx_perm = np.concatenate([Y[:, cols], X], axis=1)

    t1, t2 = ad.Tape(), ad.Tape()
    l_a = build_flow_x_nll(t1, flow, flow.bind(t1), yx, masked=True)
    l_b = build_flow_x_nll(t2, flow, flow.bind(t2), yx_perm, masked=True)
    assert float(l_a.value) == float(l_b.value)


def test_masked_gradient_of_cross_weights_is_exactly_zero():
    flow = BlockAutoregressiveFlow(2, 2, hidden_mult=3, hidden_layers=2,
                                   gated=True, rng=Rng(5))
    rng = Rng(6)
    yx = rng.normal((8, 4))
    tape = ad.Tape()
    pv = flow.bind(tape)
    loss = build_flow_x_nll(tape, flow, pv, yx, masked=True)
    grads = ad.backward(loss)

    saw_cross = False
    for k, (a_in, a_out) in enumerate(flow._layers):
        lower, nocross = _structure_masks(flow.d, flow.n_y, a_in, a_out)
        cross = (lower - nocross).astype(bool)
        g = grads[pv[f"w{k}"]]
        if cross.any():
            saw_cross = True
            assert np.all(g[cross] == 0.0)
    assert saw_cross


def test_active_gradient_of_cross_weights_is_nonzero():
    flow = BlockAutoregressiveFlow(2, 2, hidden_mult=3, hidden_layers=2,
                                   gated=True, rng=Rng(7))
    rng = Rng(8)
    yx = rng.normal((8, 4))
    tape = ad.Tape()
    pv = flow.bind(tape)
    loss = build_flow_x_nll(tape, flow, pv, yx, masked=False)
    grads = ad.backward(loss)

    a_in, a_out = flow._layers[0]
    lower, nocross = _structure_masks(flow.d, flow.n_y, a_in, a_out)
    cross = (lower - nocross).astype(bool)
    assert np.any(grads[pv["w0"]][cross] != 0.0)


def test_flow_view_shares_parameter_storage():
    flow = BlockAutoregressiveFlow(1, 1, hidden_mult=2, hidden_layers=1,
                                   rng=Rng(9))
    view = set_mask(flow, True)
    assert isinstance(view, FlowView)
    assert view.flow is flow
    assert view.masked is True

    rng = Rng(10)
    Y, X = rng.normal((4, 1)), rng.normal((4, 1))
    before = view.transform(Y, X)[1].copy()
    flow.params["d1"] += 0.5
    after = view.transform(Y, X)[1]
    assert not np.array_equal(before, after)


def test_masked_and_active_views_share_marginal_structure():
    # The x-to-x connections are identical in both views: replacing y
    # with zeros in the active view must reproduce the masked output
    # only when no y information flows, which is what masking enforces.
    flow = BlockAutoregressiveFlow(1, 2, hidden_mult=3, hidden_layers=1,
                                   gated=False, rng=Rng(11))
    rng = Rng(12)
    Y, X = rng.normal((5, 1)), rng.normal((5, 2))
    _, f2_masked, _, _ = flow.transform(Y, X, masked=True)
    _, f2_zero_y, _, _ = flow.transform(np.zeros_like(Y), X, masked=False)
    assert np.allclose(f2_masked, f2_zero_y, atol=1e-12)
