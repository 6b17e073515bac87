"""Numeric kernel correctness against independent references."""

import math

import numpy as np
import pytest
import scipy.special
import scipy.stats
from hypothesis import given, strategies as st

from flowmi.kernels import (
    LOG_2PI,
    log_tanh_prime,
    logmeanexp,
    logsumexp,
    matmul,
    sample_gaussian,
    softplus,
    std_normal_logpdf,
)
from flowmi.rng import Rng


def test_log_2pi_constant():
    assert LOG_2PI == pytest.approx(1.8378770664093453, abs=1e-15)


def test_logsumexp_matches_scipy():
    rng = Rng(0)
    for scale in (1.0, 50.0, 700.0):
        v = scale * rng.normal(40)
        assert logsumexp(v) == pytest.approx(
            float(scipy.special.logsumexp(v)), rel=1e-12)


def test_logsumexp_single_and_constant():
    assert logsumexp([3.5]) == pytest.approx(3.5, abs=1e-12)
    assert logsumexp(np.full(8, -2.0)) == pytest.approx(
        -2.0 + math.log(8), abs=1e-12)


def test_logsumexp_empty_rejected():
    with pytest.raises(ValueError):
        logsumexp([])


def test_logsumexp_extreme_values_stable():
    assert logsumexp([1000.0, 1000.0]) == pytest.approx(
        1000.0 + math.log(2), abs=1e-9)
    assert logsumexp([-1000.0, -1001.0]) == pytest.approx(
        -1000.0 + math.log1p(math.exp(-1.0)), abs=1e-9)


def test_logmeanexp_is_shifted_logsumexp():
    v = [0.3, -1.2, 2.0]
    assert logmeanexp(v) == pytest.approx(logsumexp(v) - math.log(3), abs=1e-12)
    assert logmeanexp(np.full(5, 1.25)) == pytest.approx(1.25, abs=1e-12)


@given(st.floats(min_value=-30, max_value=30))
def test_softplus_matches_reference(x):
    assert float(softplus(x)) == pytest.approx(
        float(np.logaddexp(0.0, x)), rel=1e-12, abs=1e-300)


def test_softplus_extremes():
    assert float(softplus(0.0)) == pytest.approx(math.log(2), abs=1e-15)
    assert float(softplus(800.0)) == pytest.approx(800.0, rel=1e-15)
    assert float(softplus(-800.0)) == 0.0


@given(st.floats(min_value=-5, max_value=5))
def test_log_tanh_prime_matches_direct_formula(x):
    direct = math.log(1.0 - math.tanh(x) ** 2)
    assert float(log_tanh_prime(x)) == pytest.approx(direct, rel=1e-10,
                                                     abs=1e-12)


def test_log_tanh_prime_large_arguments_finite():
    v = log_tanh_prime(np.array([-40.0, 40.0]))
    assert np.all(np.isfinite(v))
    assert v[0] == pytest.approx(2 * (math.log(2) - 40.0), rel=1e-12)


def test_std_normal_logpdf_matches_scipy():
    z = np.array([-3.0, -0.5, 0.0, 1.7])
    expected = float(scipy.stats.norm.logpdf(z).sum())
    assert std_normal_logpdf(z) == pytest.approx(expected, rel=1e-12)
    assert std_normal_logpdf([0.0]) == pytest.approx(-0.5 * LOG_2PI, abs=1e-15)


def test_matmul_matches_operator_and_validates():
    rng = Rng(1)
    a, b = rng.normal((3, 4)), rng.normal((4, 2))
    assert np.allclose(matmul(a, b), a @ b)
    with pytest.raises(ValueError):
        matmul(np.ones(3), np.ones((3, 2)))


def test_sample_gaussian_moments():
    mean = np.array([1.0, -2.0])
    cov = np.array([[2.0, 0.6], [0.6, 0.5]])
    chol = np.linalg.cholesky(cov)
    draws = sample_gaussian(Rng(2), mean, chol, size=200_000)
    assert np.allclose(draws.mean(axis=0), mean, atol=0.02)
    assert np.allclose(np.cov(draws.T), cov, atol=0.03)


def test_sample_gaussian_rejects_bad_factor():
    mean = np.zeros(2)
    upper = np.array([[1.0, 0.5], [0.0, 1.0]])
    with pytest.raises(ValueError):
        sample_gaussian(Rng(0), mean, upper, size=4)
