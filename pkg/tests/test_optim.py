"""Optimizer update rules against straight-line reference implementations."""

import numpy as np
import pytest

from flowmi.exceptions import NonFiniteGradientError
from flowmi.optim import Adam, Adamax, clip_grad_norm, global_grad_norm
from flowmi.rng import Rng


def _reference_adam(params, grad_seq, lr, b1=0.9, b2=0.999, eps=1e-8):
    p = {k: v.copy() for k, v in params.items()}
    m = {k: np.zeros_like(v) for k, v in params.items()}
    v2 = {k: np.zeros_like(v) for k, v in params.items()}
    for t, grads in enumerate(grad_seq, start=1):
        for k, g in grads.items():
            m[k] = b1 * m[k] + (1 - b1) * g
            v2[k] = b2 * v2[k] + (1 - b2) * g * g
            mhat = m[k] / (1 - b1 ** t)
            vhat = v2[k] / (1 - b2 ** t)
            p[k] = p[k] - lr * mhat / (np.sqrt(vhat) + eps)
    return p


def _reference_adamax(params, grad_seq, lr, b1=0.9, b2=0.999, eps=1e-8):
    p = {k: v.copy() for k, v in params.items()}
    m = {k: np.zeros_like(v) for k, v in params.items()}
    u = {k: np.zeros_like(v) for k, v in params.items()}
    for t, grads in enumerate(grad_seq, start=1):
        for k, g in grads.items():
            m[k] = b1 * m[k] + (1 - b1) * g
            u[k] = np.maximum(b2 * u[k], np.abs(g))
            p[k] = p[k] - lr * (m[k] / (1 - b1 ** t)) / np.maximum(u[k], eps)
    return p


def _random_problem(seed, steps=5):
    rng = Rng(seed)
    params = {"w": rng.normal((3, 2)), "b": rng.normal(2)}
    grad_seq = [{"w": rng.normal((3, 2)), "b": rng.normal(2)}
                for _ in range(steps)]
    return params, grad_seq


def test_adam_matches_reference_trajectory():
    params, grad_seq = _random_problem(0)
    expected = _reference_adam(params, grad_seq, lr=0.01)
    live = {k: v.copy() for k, v in params.items()}
    opt = Adam(lr=0.01)
    for grads in grad_seq:
        opt.step(live, grads)
    for k in params:
        assert np.allclose(live[k], expected[k], rtol=1e-12, atol=1e-12)


def test_adam_first_step_is_signed_lr():
    # With a single step the bias corrections cancel: delta = lr * g/|g|.
    params = {"p": np.zeros(3)}
    g = np.array([0.5, -2.0, 1e-3])
    Adam(lr=0.1).step(params, {"p": g})
    assert np.allclose(params["p"], -0.1 * np.sign(g), atol=1e-5)


def test_adamax_matches_reference_trajectory():
    params, grad_seq = _random_problem(1)
    expected = _reference_adamax(params, grad_seq, lr=0.02)
    live = {k: v.copy() for k, v in params.items()}
    opt = Adamax(lr=0.02)
    for grads in grad_seq:
        opt.step(live, grads)
    for k in params:
        assert np.allclose(live[k], expected[k], rtol=1e-12, atol=1e-12)


def test_step_mutates_in_place():
    params = {"p": np.ones(2)}
    ref = params["p"]
    Adam(lr=0.1).step(params, {"p": np.ones(2)})
    assert params["p"] is ref
    assert not np.array_equal(ref, np.ones(2))


def test_partial_gradient_dicts_only_touch_named_params():
    params = {"a": np.ones(2), "b": np.ones(2)}
    Adam(lr=0.1).step(params, {"a": np.ones(2)})
    assert np.array_equal(params["b"], np.ones(2))
    assert not np.array_equal(params["a"], np.ones(2))


def test_global_grad_norm_hand_value():
    grads = {"a": np.array([3.0]), "b": np.array([[4.0]])}
    assert global_grad_norm(grads) == pytest.approx(5.0, abs=1e-12)


def test_clip_grad_norm_scales_to_bound():
    grads = {"a": np.array([3.0]), "b": np.array([4.0])}
    clipped = clip_grad_norm(grads, 1.0)
    assert global_grad_norm(clipped) == pytest.approx(1.0, rel=1e-12)
    assert np.allclose(clipped["a"], [0.6])
    assert np.allclose(clipped["b"], [0.8])


def test_clip_grad_norm_noop_below_bound():
    grads = {"a": np.array([0.3, 0.4])}
    clipped = clip_grad_norm(grads, 10.0)
    assert np.array_equal(clipped["a"], grads["a"])
    with pytest.raises(ValueError):
        clip_grad_norm(grads, 0.0)


def test_nonfinite_gradient_leaves_state_untouched():
    params = {"p": np.ones(2)}
    opt = Adam(lr=0.1)
    opt.step(params, {"p": np.full(2, 0.5)})
    snapshot = params["p"].copy()
    t_before = opt.t
    with pytest.raises(NonFiniteGradientError):
        opt.step(params, {"p": np.array([1.0, np.nan])})
    assert np.array_equal(params["p"], snapshot)
    assert opt.t == t_before
