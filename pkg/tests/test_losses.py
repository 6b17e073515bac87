"""Flow cross-entropy losses: analytic values at identity initialization."""

import math

import numpy as np
import pytest

from flowmi import autodiff as ad
from flowmi.estimators.losses import (
    build_flow_joint_nll,
    build_flow_x_nll,
    flow_nll_values,
)
from flowmi.flows import BlockAutoregressiveFlow
from flowmi.kernels import LOG_2PI
from flowmi.rng import Rng


def _identity_flow(n_y, n_x):
    return BlockAutoregressiveFlow(n_y, n_x, hidden_layers=0, init="zero",
                                   rng=Rng(0))


def test_x_nll_at_identity_matches_base_density():
    rng = Rng(1)
    Y, X = rng.normal((64, 1)), rng.normal((64, 2))
    yx = np.concatenate([Y, X], axis=1)
    flow = _identity_flow(1, 2)
    tape = ad.Tape()
    loss = build_flow_x_nll(tape, flow, flow.bind(tape), yx, masked=False)
    expected = float(np.mean(0.5 * np.sum(X * X, axis=1) + 0.5 * 2 * LOG_2PI))
    assert float(loss.value) == pytest.approx(expected, rel=1e-12)


def test_joint_nll_at_identity_adds_both_blocks():
    rng = Rng(2)
    Y, X = rng.normal((32, 2)), rng.normal((32, 1))
    yx = np.concatenate([Y, X], axis=1)
    flow = _identity_flow(2, 1)
    tape = ad.Tape()
    loss = build_flow_joint_nll(tape, flow, flow.bind(tape), yx)
    expected = float(np.mean(0.5 * np.sum(yx * yx, axis=1) + 0.5 * 3 * LOG_2PI))
    assert float(loss.value) == pytest.approx(expected, rel=1e-12)


def test_flow_nll_values_matches_tape_losses():
    flow = BlockAutoregressiveFlow(1, 2, hidden_mult=3, hidden_layers=1,
                                   rng=Rng(3))
    rng = Rng(4)
    Y, X = rng.normal((40, 1)), rng.normal((40, 2))
    yx = np.concatenate([Y, X], axis=1)

    for masked in (False, True):
        tape = ad.Tape()
        loss = build_flow_x_nll(tape, flow, flow.bind(tape), yx, masked=masked)
        x_nll, y_nll = flow_nll_values(flow, Y, X, masked=masked, chain="both")
        assert x_nll == pytest.approx(float(loss.value), rel=1e-12)
        assert np.isfinite(y_nll)


def test_flow_nll_values_skips_y_part_on_x_chain():
    flow = BlockAutoregressiveFlow(1, 1, hidden_mult=2, hidden_layers=1,
                                   rng=Rng(5))
    rng = Rng(6)
    Y, X = rng.normal((10, 1)), rng.normal((10, 1))
    x_full, y_full = flow_nll_values(flow, Y, X, chain="both")
    x_part, y_part = flow_nll_values(flow, Y, X, chain="x")
    assert x_part == pytest.approx(x_full, rel=1e-12)
    assert math.isnan(y_part)
    assert math.isfinite(y_full)


def test_mi_decomposition_consistency():
    # l2 - l1 computed from the shared flow equals the difference of the
    # masked and active x losses on the same points.
    flow = BlockAutoregressiveFlow(2, 2, hidden_mult=3, hidden_layers=1,
                                   rng=Rng(7))
    rng = Rng(8)
    Y, X = rng.normal((30, 2)), rng.normal((30, 2))
    l1, _ = flow_nll_values(flow, Y, X, masked=False, chain="x")
    l2, _ = flow_nll_values(flow, Y, X, masked=True, chain="x")
    yx = np.concatenate([Y, X], axis=1)
    t1, t2 = ad.Tape(), ad.Tape()
    active = build_flow_x_nll(t1, flow, flow.bind(t1), yx, masked=False)
    masked = build_flow_x_nll(t2, flow, flow.bind(t2), yx, masked=True)
    assert (l2 - l1) == pytest.approx(
        float(masked.value) - float(active.value), rel=1e-12)
