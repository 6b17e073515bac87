"""Block autoregressive flow: structure, log-determinants, numerics."""

import math

import numpy as np
import pytest

from flowmi import autodiff as ad
from flowmi.exceptions import FlowNumericsError
from flowmi.flows import BlockAutoregressiveFlow, jacobian_structure_check
from flowmi.flows.bnaf import _structure_masks
from flowmi.kernels import LOG_2PI
from flowmi.rng import Rng


def test_structure_masks_tiny_cases():
    # The free matrix only carries strictly-lower block connections;
    # diagonal blocks live in the separate exponentiated tensors.  With
    # three coordinates (one y), coordinate 0 may feed 1 and 2, and 1
    # may feed 2; the nocross variant cuts everything leaving y.
    lower, nocross = _structure_masks(d=3, n_y=1, a_in=1, a_out=1)
    assert np.array_equal(lower, np.array([[0.0, 1.0, 1.0],
                                           [0.0, 0.0, 1.0],
                                           [0.0, 0.0, 0.0]]))
    assert np.array_equal(nocross, np.array([[0.0, 0.0, 0.0],
                                             [0.0, 0.0, 1.0],
                                             [0.0, 0.0, 0.0]]))

    # Widths replicate per coordinate: two output columns per coordinate.
    lower2, nocross2 = _structure_masks(d=2, n_y=1, a_in=1, a_out=2)
    assert np.array_equal(lower2, np.array([[0.0, 0.0, 1.0, 1.0],
                                            [0.0, 0.0, 0.0, 0.0]]))
    assert np.array_equal(nocross2, np.zeros((2, 4)))


def test_parameter_shapes():
    flow = BlockAutoregressiveFlow(2, 3, hidden_mult=4, hidden_layers=2,
                                   rng=Rng(0))
    d = 5
    assert flow.params["w0"].shape == (d * 1, d * 4)
    assert flow.params["w1"].shape == (d * 4, d * 4)
    assert flow.params["w2"].shape == (d * 4, d * 1)
    assert flow.params["d0"].shape == (d, 4, 1)
    assert flow.params["d1"].shape == (d, 4, 4)
    assert flow.params["d2"].shape == (d, 1, 4)


def test_forward_shapes_and_transform_consistency():
    flow = BlockAutoregressiveFlow(2, 3, hidden_mult=3, hidden_layers=2,
                                   rng=Rng(1))
    rng = Rng(2)
    Y, X = rng.normal((7, 2)), rng.normal((7, 3))
    yx = np.concatenate([Y, X], axis=1)

    tape = ad.Tape()
    out = flow.forward(tape, flow.bind(tape), yx, masked=False, chain="both")
    assert out.f1.value.shape == (7, 2)
    assert out.f2.value.shape == (7, 3)
    assert out.logdet_x.value.shape == (7,)

    f1, f2, ld_y, ld_x = flow.transform(Y, X, masked=False)
    assert np.array_equal(f1, out.f1.value)
    assert np.array_equal(f2, out.f2.value)
    assert np.allclose(np.sum(ld_x, axis=1), out.logdet_x.value, rtol=1e-12)


def test_chain_x_matches_full_chain():
    flow = BlockAutoregressiveFlow(3, 2, hidden_mult=5, hidden_layers=2,
                                   gated=True, rng=Rng(5))
    rng = Rng(6)
    yx = rng.normal((9, 5))
    t1, t2 = ad.Tape(), ad.Tape()
    full = flow.forward(t1, flow.bind(t1), yx, masked=False, chain="both")
    part = flow.forward(t2, flow.bind(t2), yx, masked=False, chain="x")
    assert np.array_equal(part.f2.value, full.f2.value)
    assert np.array_equal(part.logdet_x.value, full.logdet_x.value)
    assert part.logdet_y is None


def test_jacobian_structure_random_models():
    rng = Rng(7)
    for trial in range(5):
        n_y = int(rng.uniform() * 3) + 1
        n_x = int(rng.uniform() * 3) + 1
        flow = BlockAutoregressiveFlow(n_y, n_x, hidden_mult=3,
                                       hidden_layers=2,
                                       gated=bool(trial % 2),
                                       rng=rng.spawn(trial))
        point = rng.normal(n_y + n_x)
        report = jacobian_structure_check(flow, point[:n_y], point[n_y:])
        assert report.logdet_sign == 1.0
        assert report.logdet_abs_err < 1e-5
        assert report.max_f1_wrt_x_abs <= 1e-8
        assert report.max_upper_abs <= 1e-8
        assert report.min_diag > 0.0
        assert report.max_logdiag_rel_err < 1e-5


def test_identity_initialization_is_identity_map():
    flow = BlockAutoregressiveFlow(0, 2, hidden_layers=0, init="zero",
                                   rng=Rng(0))
    rng = Rng(1)
    X = rng.normal((50, 2))
    f1, f2, ld_y, ld_x = flow.transform(np.zeros((50, 0)), X)
    assert np.array_equal(f2, X)
    assert np.array_equal(ld_x, np.zeros((50, 2)))


def test_identity_init_entropy_of_standard_normal():
    n = 2
    flow = BlockAutoregressiveFlow(0, n, hidden_layers=0, init="zero",
                                   rng=Rng(0))
    X = Rng(3).normal((10_000, n))
    _, f2, _, ld_x = flow.transform(np.zeros((10_000, 0)), X)
    nll = float(np.mean(0.5 * np.sum(f2 * f2, axis=1)
                        + 0.5 * n * LOG_2PI - np.sum(ld_x, axis=1)))
    target = 0.5 * n * math.log(2 * math.pi * math.e)
    assert abs(nll - target) < 0.05


def test_numerics_guard_raises_with_layer():
    flow = BlockAutoregressiveFlow(1, 1, hidden_mult=2, hidden_layers=1,
                                   rng=Rng(0))
    flow.params["w0"][:] = 1e308
    with pytest.raises(FlowNumericsError) as err:
        flow.transform(np.full((2, 1), 2.0), np.full((2, 1), 2.0))
    assert err.value.layer == 0


def test_init_reproducible_and_seed_sensitive():
    a = BlockAutoregressiveFlow(1, 2, rng=Rng(9)).params
    b = BlockAutoregressiveFlow(1, 2, rng=Rng(9)).params
    c = BlockAutoregressiveFlow(1, 2, rng=Rng(10)).params
    assert all(np.array_equal(a[k], b[k]) for k in a)
    assert any(not np.array_equal(a[k], c[k]) for k in a)


def test_ungated_and_zero_hidden_variants_run():
    rng = Rng(11)
    yx = rng.normal((4, 3))
    for kwargs in ({"hidden_layers": 0}, {"gated": False},
                   {"hidden_layers": 3, "gated": True}):
        flow = BlockAutoregressiveFlow(1, 2, hidden_mult=2, rng=Rng(12),
                                       **kwargs)
        tape = ad.Tape()
        out = flow.forward(tape, flow.bind(tape), yx)
        assert np.all(np.isfinite(out.f2.value))
        assert np.all(np.isfinite(out.logdet_x.value))
