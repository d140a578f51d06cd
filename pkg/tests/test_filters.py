import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from exphurst.filters import (FilterSpec, apply_filter, dilate, filter_moments,
                              filtered_autocovariance, kappa, make_filter)
from exphurst.synth import HurstParams, mix_seed, simulate_fbm

D4 = make_filter("d4")
INC1 = make_filter("inc1")


def brute_moment(coeffs, j):
    return sum(q**j * a for q, a in enumerate(coeffs))


def test_d4_moments():
    assert abs(brute_moment(D4.coeffs, 0)) < 1e-10
    assert abs(brute_moment(D4.coeffs, 1)) < 1e-10
    # second moment is nonzero, so the order is exactly 2
    assert brute_moment(D4.coeffs, 2) == pytest.approx(1.2247448713915890, abs=1e-12)
    assert D4.order == 2 and D4.length == 3


def test_inc1_moments():
    assert brute_moment(INC1.coeffs, 0) == 0
    assert brute_moment(INC1.coeffs, 1) == -1
    assert INC1.order == 1


def test_unknown_filter():
    with pytest.raises(ValueError):
        make_filter("haar9")


def test_order_is_verified():
    with pytest.raises(ValueError):
        FilterSpec((1.0, -1.0), 2)
    with pytest.raises(ValueError):
        FilterSpec((1.0, 1.0), 1)
    with pytest.raises(ValueError):
        FilterSpec((1.0,), 1)


def test_dilate():
    assert dilate(INC1, 2).coeffs == (1.0, 0.0, -1.0)
    assert dilate(INC1, 3).coeffs == (1.0, 0.0, 0.0, -1.0)
    assert dilate(D4, 1) == D4
    d = dilate(D4, 4)
    assert d.length == 12 and d.order == 2
    with pytest.raises(ValueError):
        dilate(D4, 0)


def test_apply_filter_examples():
    np.testing.assert_array_equal(apply_filter([1, 3, 6], INC1), [2, 3])
    np.testing.assert_array_equal(apply_filter(np.full(10, 4.2), INC1), np.zeros(9))
    ramp = np.arange(50, dtype=float)
    np.testing.assert_allclose(apply_filter(ramp, D4), 0, atol=1e-10)
    np.testing.assert_allclose(apply_filter(ramp, dilate(D4, 3)), 0, atol=1e-10)
    with pytest.raises(ValueError):
        apply_filter([1.0, 2.0, 3.0], D4)


def test_apply_filter_indexing():
    x = np.random.default_rng(0).normal(size=20)
    a = D4.array
    out = apply_filter(x, D4)
    l = D4.length
    expected = [sum(a[q] * x[k + l - q] for q in range(l + 1)) for k in range(len(x) - l)]
    np.testing.assert_allclose(out, expected, rtol=1e-13)


@settings(max_examples=50, deadline=None)
@given(arrays(float, 30, elements=st.floats(-100, 100)),
       arrays(float, 30, elements=st.floats(-100, 100)),
       st.floats(-10, 10), st.floats(-10, 10))
def test_apply_filter_linear(x, y, al, be):
    lhs = apply_filter(al * x + be * y, D4)
    rhs = al * apply_filter(x, D4) + be * apply_filter(y, D4)
    np.testing.assert_allclose(lhs, rhs, atol=1e-9)


def kappa_brute(coeffs, H):
    total = 0.0
    for q, aq in enumerate(coeffs):
        for r, ar in enumerate(coeffs):
            total += aq * ar * abs(q - r) ** (2 * H)
    return -0.5 * total


def test_kappa_inc1_is_one():
    for H in np.round(np.arange(1, 10) * 0.1, 1):
        assert kappa(INC1, H) == pytest.approx(1.0, abs=1e-14)


def test_kappa_d4_brownian():
    # at H = 1/2 the filtered path is sum_k b_k G(i - k) with iid G, b = partial sums of a
    b = np.cumsum(D4.array)[:-1]
    oracle = float(np.sum(b**2))
    assert oracle == pytest.approx(0.375, abs=1e-12)
    assert kappa(D4, 0.5) == pytest.approx(oracle, abs=1e-12)
    assert kappa_brute(D4.coeffs, 0.5) == pytest.approx(oracle, abs=1e-12)


@pytest.mark.parametrize("H", [0.1, 0.37, 0.8, 0.95])
def test_kappa_matches_brute_force_and_covariance(H):
    assert kappa(D4, H) == pytest.approx(kappa_brute(D4.coeffs, H), rel=1e-13)
    assert kappa(D4, H) > 0
    assert kappa(D4, H) == pytest.approx(filtered_autocovariance(D4, 1, D4, 1, H, 1.0, 0), rel=1e-13)


def test_kappa_domain():
    with pytest.raises(ValueError):
        kappa(D4, 1.0)
    with pytest.raises(ValueError):
        filtered_autocovariance(D4, 1, D4, 1, 0.0, 1.0, 0)


def test_filtered_autocovariance_examples():
    assert filtered_autocovariance(INC1, 1, INC1, 1, 0.3, 2.0, 0) == pytest.approx(2.0)
    for j in range(1, 6):
        assert filtered_autocovariance(INC1, 1, INC1, 1, 0.5, 1.0, j) == pytest.approx(0, abs=1e-14)


@pytest.mark.parametrize("H", [0.2, 0.5, 0.8])
def test_sigma_m_law(H):
    sigma2 = 0.25
    for m in range(1, 6):
        v = filtered_autocovariance(D4, m, D4, m, H, sigma2, 0)
        assert abs(v - m ** (2 * H) * sigma2 * kappa(D4, H)) < 1e-10


def test_symmetry():
    for j in (-3, 0, 2, 7):
        a = filtered_autocovariance(D4, 2, D4, 3, 0.7, 1.0, j)
        b = filtered_autocovariance(D4, 3, D4, 2, 0.7, 1.0, -j)
        assert a == pytest.approx(b, rel=1e-12)


def test_dilated_filter_covariance_consistency():
    # cov through (a, m) equals cov through the explicitly dilated filter at m = 1
    for m in (2, 4):
        v1 = filtered_autocovariance(D4, m, D4, m, 0.6, 1.0, 5)
        v2 = filtered_autocovariance(dilate(D4, m), 1, dilate(D4, m), 1, 0.6, 1.0, 5)
        assert v1 == pytest.approx(v2, rel=1e-11)


def test_hyperbolic_decay():
    H = 0.8
    j = np.arange(50, 501)
    rho = filtered_autocovariance(D4, 1, D4, 1, H, 1.0, j) / kappa(D4, H)
    scaled = np.abs(rho) * j ** (2 * D4.order - 2 * H)
    assert np.all(np.isfinite(scaled))
    assert scaled.max() / scaled.min() < 1.2


@pytest.mark.slow
def test_monte_carlo_filtered_covariance():
    H, sigma, n, reps = 0.7, 0.5, 64, 3000
    out = np.array([apply_filter(simulate_fbm(HurstParams(H, sigma), n, mix_seed(5, r)).values, D4)
                    for r in range(reps)])
    L = out.shape[1]
    for j in range(4):
        prods = (out[:, : L - j] * out[:, j:]).mean(axis=1)
        se = prods.std(ddof=1) / np.sqrt(reps)
        exact = filtered_autocovariance(D4, 1, D4, 1, H, sigma**2, j)
        assert abs(prods.mean() - exact) < 3 * se


def test_filter_moments_helper():
    np.testing.assert_allclose(filter_moments(INC1.coeffs, 1), [0, -1])
