"""Statistical checks: grids, Monte Carlo estimators, tail-rate fitting."""

import math

import numpy as np
import pytest

from mfbm.expansion import (
    ModelParams,
    TruncationSpec,
    covariance_partial,
    field_matrix,
    resolve_truncation,
)
from mfbm.validation import (
    empirical_covariance,
    empirical_increment,
    halton_ball,
    kurtosis_stat,
    rate_regression,
    tail_profile,
    tail_sup_norm,
    term_count_exponent,
)


def test_halton_grid_is_deterministic_and_inside():
    a = halton_ball(3, 128)
    b = halton_ball(3, 128)
    np.testing.assert_array_equal(a, b)
    assert a.shape == (128, 3)
    assert float(np.linalg.norm(a, axis=1).max()) <= 1.0
    # extending the count keeps the prefix
    np.testing.assert_array_equal(halton_ball(3, 40), a[:40])
    with pytest.raises(ValueError):
        halton_ball(0, 5)
    with pytest.raises(ValueError):
        halton_ball(2, 0)


def test_halton_grid_fills_the_ball():
    pts = halton_ball(2, 400)
    # crude equidistribution: every quadrant sees a fair share
    for sx in (-1, 1):
        for sy in (-1, 1):
            frac = np.mean((np.sign(pts[:, 0]) == sx) & (np.sign(pts[:, 1]) == sy))
            assert 0.15 < frac < 0.35


def test_empirical_covariance_with_origin_is_exact_zero():
    params = ModelParams(dim=2, hurst=0.5)
    est, se = empirical_covariance(
        params, TruncationSpec.level(64.0), [0.4, 0.1], [0.0, 0.0], 200, 1
    )
    assert est == 0.0
    assert se == 0.0


def test_empirical_estimators_need_enough_replications():
    params = ModelParams(dim=2, hurst=0.5)
    with pytest.raises(ValueError):
        empirical_covariance(
            params, TruncationSpec.level(16.0), [0.4, 0.1], [0.2, 0.2], 50, 1
        )
    with pytest.raises(ValueError):
        empirical_increment(
            params, TruncationSpec.level(16.0), [0.4, 0.1], [0.2, 0.2], 50, 1
        )


def test_empirical_covariance_matches_partial_sum():
    # the estimator is unbiased for the truncated covariance at any level;
    # frozen run sits at -0.31 standard errors
    params = ModelParams(dim=2, hurst=0.3)
    spec = TruncationSpec.level(64.0)
    x = np.array([0.55, 0.2])
    y = np.array([-0.3, 0.4])
    est, se = empirical_covariance(params, spec, x, y, 2000, 4242)
    part = covariance_partial(params, resolve_truncation(params, spec), x, y)
    assert abs(est - part) <= 3.0 * se
    assert (est - part) / se == pytest.approx(-0.311, abs=0.01)


def test_empirical_increment_matches_partial_sum():
    params = ModelParams(dim=3, hurst=0.7)
    spec = TruncationSpec.level(128.0)
    trunc = resolve_truncation(params, spec)
    x = np.array([0.5, -0.2, 0.1])
    y = np.array([-0.1, 0.3, 0.4])
    est, se = empirical_increment(params, spec, x, y, 3000, 99)
    expected = (
        covariance_partial(params, trunc, x, x)
        + covariance_partial(params, trunc, y, y)
        - 2.0 * covariance_partial(params, trunc, x, y)
    )
    assert abs(est - expected) <= 3.0 * se


def test_tail_norm_degenerate_window_is_zero():
    params = ModelParams(dim=2, hurst=0.5)
    grid = halton_ball(2, 16)
    assert tail_sup_norm(params, 64.0, 64.0, grid, 8, 3) == 0.0
    with pytest.raises(ValueError):
        tail_sup_norm(params, 128.0, 64.0, grid, 8, 3)


def test_tail_profile_decreases_and_scaling_stays_bounded():
    # frozen: tails [0.8867 .. 0.2651] strictly decreasing; the scaled
    # product tail * q^(H/(2H+2)) / sqrt(log q) never exceeds 1
    params = ModelParams(dim=2, hurst=0.5)
    levels = [2.0**k for k in range(4, 11)]
    grid = halton_ball(2, 96)
    tails = tail_profile(params, levels, 2.0**12, grid, 32, 1234)
    assert all(a > b for a, b in zip(tails, tails[1:]))
    assert tails[0] == pytest.approx(0.8867, abs=2e-3)
    assert tails[-1] == pytest.approx(0.2651, abs=2e-3)
    exponent = params.hurst / (2 * params.hurst + 2)
    prods = [t * q**exponent / math.sqrt(math.log(q)) for t, q in zip(tails, levels)]
    assert max(prods) < 1.0


def test_tail_profile_validates_levels():
    params = ModelParams(dim=2, hurst=0.5)
    grid = halton_ball(2, 8)
    with pytest.raises(ValueError):
        tail_profile(params, [16.0, 4096.0], 1024.0, grid, 8, 1)


def test_rate_regression_recovers_synthetic_slopes():
    params = ModelParams(dim=2, hurst=0.5)
    p = np.array([10, 30, 90, 270, 810], dtype=float)
    # pure power law, no correction applied
    fit = rate_regression(params, p, 3.0 * p**-0.25, log_correction=False)
    assert fit.fitted_slope == pytest.approx(-0.25, abs=1e-6)
    assert fit.expected_slope == pytest.approx(-0.25, abs=1e-12)
    assert fit.slope_error < 1e-6
    assert fit.log_correction_used is False
    # power law times sqrt(log p): the default fit divides it back out
    fit2 = rate_regression(params, p, 3.0 * p**-0.25 * np.sqrt(np.log(p)))
    assert fit2.fitted_slope == pytest.approx(-0.25, abs=1e-6)
    assert fit2.log_correction_used is True
    assert fit2.p_values == (10, 30, 90, 270, 810)
    assert len(fit2.tail_norms) == 5


def test_rate_regression_preconditions():
    params = ModelParams(dim=1, hurst=0.5)
    good_p = [10, 20, 40, 80, 160]
    good_t = [1.0, 0.8, 0.6, 0.5, 0.4]
    with pytest.raises(ValueError):
        rate_regression(params, good_p[:4], good_t[:4])  # too few points
    with pytest.raises(ValueError):
        rate_regression(params, [10, 20, 20, 80, 160], good_t)  # not increasing
    with pytest.raises(ValueError):
        rate_regression(params, [10, 12, 14, 16, 18], good_t)  # under a decade
    with pytest.raises(ValueError):
        rate_regression(params, good_p, [1.0, 0.8, 0.0, 0.5, 0.4])  # zero tail
    with pytest.raises(ValueError):
        rate_regression(params, good_p, good_t[:4])  # length mismatch


def test_expected_slope_tracks_parameters():
    p = [10, 30, 90, 270, 810]
    t = [1.0, 0.9, 0.8, 0.7, 0.6]
    for dim, hurst in [(1, 0.5), (2, 0.3), (3, 0.7)]:
        fit = rate_regression(ModelParams(dim=dim, hurst=hurst), p, t)
        assert fit.expected_slope == pytest.approx(-hurst / dim, abs=1e-15)


def test_term_count_exponent_asymptotic_window():
    # counts follow q^(N/(2H+2)) once boundary effects fade; fitted over
    # q in 2^12..2^22 every combo with harmonics in all degrees sits
    # within 10 percent
    window = [2.0**k for k in range(12, 23, 2)]
    for dim, hurst in [(2, 0.3), (2, 0.5), (3, 0.7)]:
        got = term_count_exponent(ModelParams(dim=dim, hurst=hurst), window)
        law = dim / (2.0 * hurst + 2.0)
        assert abs(got - law) / law < 0.10, (dim, hurst, got, law)


def test_term_count_exponent_interval_law():
    # only two degrees carry harmonics on the interval, so the count grows
    # like q^(1/(2H+1)) instead of q^(N/(2H+2))
    window = [2.0**k for k in range(12, 23, 2)]
    got = term_count_exponent(ModelParams(dim=1, hurst=0.5), window)
    law = 1.0 / (2.0 * 0.5 + 1.0)
    assert abs(got - law) / law < 0.10
    with pytest.raises(ValueError):
        term_count_exponent(ModelParams(dim=1, hurst=0.5), [64.0])


def test_kurtosis_of_field_values_is_gaussian():
    # frozen: 2.9654 against the 3 sqrt(24/n) = 0.147 band
    params = ModelParams(dim=2, hurst=0.5)
    trunc = resolve_truncation(params, TruncationSpec.level(256.0))
    vals = field_matrix(params, trunc, np.array([[0.55, 0.2]]), 77, 10000)[:, 0]
    kurt, band = kurtosis_stat(vals)
    assert band == pytest.approx(3.0 * math.sqrt(24.0 / 10000.0), rel=1e-12)
    assert abs(kurt - 3.0) <= band
    assert kurt == pytest.approx(2.9654, abs=2e-3)
    with pytest.raises(ValueError):
        kurtosis_stat(np.ones(5))
