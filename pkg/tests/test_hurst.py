import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from muxstat.errors import DegenerateSampleError, DomainError, SampleSizeError
from muxstat.hurst import Persistence, classify_persistence, estimate_hurst


def brute_force_hurst(x, q, tau_min, tau_max):
    """Plain-Python structure function and least-squares slope."""
    xs, ys = [], []
    for tau in range(tau_min, tau_max + 1):
        terms = [abs(x[t + tau] - x[t]) ** q for t in range(len(x) - tau)]
        xs.append(math.log(tau))
        ys.append(math.log(math.fsum(terms) / len(terms)))
    m = len(xs)
    mx = math.fsum(xs) / m
    my = math.fsum(ys) / m
    sxy = math.fsum((a - mx) * (b - my) for a, b in zip(xs, ys))
    sxx = math.fsum((a - mx) ** 2 for a in xs)
    return sxy / sxx / q


def ar1(phi, n, seed):
    rng = np.random.default_rng(seed)
    e = rng.standard_normal(n)
    x = np.empty(n)
    x[0] = e[0]
    for t in range(1, n):
        x[t] = phi * x[t - 1] + e[t]
    return x


def test_linear_ramp_is_one():
    est = estimate_hurst(np.arange(1000.0), q=1, tau_min=1, tau_max=19)
    assert est.h == pytest.approx(1.0, abs=1e-9)
    assert est.slope_r2 == pytest.approx(1.0)
    assert est.classification is Persistence.TRENDING


@pytest.mark.parametrize("seed", range(20))
def test_random_walk_near_half(seed):
    x = np.cumsum(np.random.default_rng(seed).standard_normal(16384))
    assert abs(estimate_hurst(x).h - 0.5) <= 0.07


def test_ar1_level_series_mean_reverting():
    hs = [estimate_hurst(ar1(0.3, 16384, seed)).h for seed in range(20)]
    assert sum(h < 0.45 for h in hs) >= 18
    assert all(classify_persistence(h) is Persistence.MEAN_REVERTING for h in hs)


@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("q", [0.5, 1.0, 2.0])
def test_matches_brute_force(seed, q):
    x = np.cumsum(np.random.default_rng(seed).standard_normal(400)) + np.random.default_rng(seed + 50).normal(size=400)
    est = estimate_hurst(x, q=q, tau_min=2, tau_max=30)
    assert est.h == pytest.approx(brute_force_hurst(list(x), q, 2, 30), abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31), st.floats(-1e3, 1e3).filter(lambda a: abs(a) > 1e-3), st.floats(-1e4, 1e4))
def test_affine_invariance(seed, a, b):
    x = ar1(0.6, 300, seed)
    assert estimate_hurst(a * x + b).h == pytest.approx(estimate_hurst(x).h, abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31))
def test_reversal_invariance(seed):
    x = ar1(0.8, 500, seed)
    assert estimate_hurst(x[::-1]).h == pytest.approx(estimate_hurst(x).h, abs=1e-9)


def test_r2_in_unit_interval():
    est = estimate_hurst(ar1(0.3, 2000, 1))
    assert 0.0 <= est.slope_r2 <= 1.0


def test_errors():
    with pytest.raises(SampleSizeError):
        estimate_hurst(np.arange(50.0))
    with pytest.raises(DegenerateSampleError):
        estimate_hurst(np.ones(500))
    with pytest.raises(DomainError):
        estimate_hurst(np.arange(200.0), tau_max=60)
    with pytest.raises(DomainError):
        estimate_hurst(np.arange(200.0), tau_min=5, tau_max=7)
    with pytest.raises(DomainError):
        estimate_hurst(np.arange(200.0), q=0)
    with pytest.raises(DomainError):
        estimate_hurst(np.arange(200.0), tau_min=0)


@pytest.mark.parametrize("h,label", [
    (0.2, "mean_reverting"), (0.0, "mean_reverting"), (0.4, "mean_reverting"),
    (0.5, "random_walk"), (0.46, "random_walk"), (0.54, "random_walk"),
    (0.8, "trending"),
])
def test_classification(h, label):
    assert classify_persistence(h).value == label


def test_classification_rejects_non_finite():
    with pytest.raises(DomainError):
        classify_persistence(float("nan"))
