import datetime as dt

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from exogcast.exceptions import (
    DegenerateSeriesError,
    DimensionError,
    DomainError,
    LengthError,
)
from exogcast.series import (
    TimeSeries,
    TransformTag,
    acf,
    difference,
    integrate,
    invert_weekly_log_return,
    smape,
    weekly_log_return,
)

finite = st.floats(-1e3, 1e3, allow_nan=False)


def test_difference_constant_is_zero():
    assert np.all(difference(np.full(10, 3.5), d=1, D=0) == 0)


def test_difference_hand_example():
    np.testing.assert_array_equal(difference([1, 2, 4, 7], d=1, D=0), [1, 2, 3])


def test_difference_identity():
    y = np.array([4.0, -1.0, 2.5])
    np.testing.assert_array_equal(difference(y, d=0, D=0), y)


def test_difference_seasonal_matches_manual():
    y = np.arange(30.0) ** 1.5
    manual = np.diff(y[7:] - y[:-7])
    np.testing.assert_allclose(difference(y, d=1, D=1, season=7), manual)


def test_difference_too_short():
    with pytest.raises(LengthError):
        difference([1.0, 2.0], d=1, D=1, season=7)


def test_difference_keeps_timeseries_type():
    s = TimeSeries(dt.date(2020, 3, 1), [1.0, 2.0, 4.0])
    out = difference(s, d=1, D=0)
    assert isinstance(out, TimeSeries)
    assert out.start_date == dt.date(2020, 3, 2)


@settings(max_examples=60, deadline=None)
@given(
    arrays(float, st.integers(20, 60), elements=finite),
    st.integers(0, 2),
    st.integers(0, 1),
    st.sampled_from([2, 4, 7]),
)
def test_difference_integrate_roundtrip(y, d, D, s):
    m = d + D * s
    w = difference(y, d=d, D=D, season=s)
    back = integrate(w, y[:m], d=d, D=D, season=s)
    np.testing.assert_allclose(back, y, rtol=1e-10, atol=1e-10 * max(1.0, np.abs(y).max()))


def test_weekly_log_return_constant():
    assert np.all(weekly_log_return(np.full(20, 5.0)) == 0)


def test_weekly_log_return_hand_example():
    y = [1, 1, 1, 1, 1, 1, 1, np.e]
    np.testing.assert_allclose(weekly_log_return(y, offset=0.0), [1.0])


def test_weekly_log_return_uses_log1p_with_zeros():
    y = np.array([0, 3, 0, 1, 2, 0, 5, 4, 0, 2], float)
    expected = np.log(y[7:] + 1) - np.log(y[:3] + 1)
    np.testing.assert_allclose(weekly_log_return(y), expected)


def test_weekly_log_return_domain_error():
    with pytest.raises(DomainError):
        weekly_log_return(np.r_[np.ones(7), 0.0], offset=0.0)


def test_weekly_log_return_length():
    assert weekly_log_return(np.arange(1.0, 30.0)).size == 22


@settings(max_examples=50, deadline=None)
@given(arrays(float, st.integers(8, 40), elements=st.floats(0, 1e4)))
def test_transform_tags_invert(y):
    for kind in TransformTag.KINDS:
        z, tag = TransformTag.apply(y, kind)
        np.testing.assert_allclose(tag.invert(z), y, rtol=1e-10, atol=1e-10)


def test_invert_weekly_log_return_roundtrip():
    y = np.array([3, 0, 1, 7, 2, 2, 9, 4, 1, 0, 8, 3], float)
    z = weekly_log_return(y)
    np.testing.assert_allclose(invert_weekly_log_return(z, y[:7]), y, atol=1e-10)


def test_acf_lag_zero():
    rng = np.random.default_rng(0)
    assert acf(rng.normal(size=50), 5)[0] == 1.0


def test_acf_white_noise_within_band():
    rng = np.random.default_rng(2020)
    n = 5000
    r = acf(rng.normal(size=n), 20)
    assert np.all(np.abs(r[1:]) < 3 / np.sqrt(n))


def test_acf_weekly_sinusoid_peaks_at_seven():
    t = np.arange(700)
    r = acf(np.cos(2 * np.pi * t / 7), 14)
    assert r[7] > r[6] and r[7] > r[8]
    # population value is cos(2 pi k / 7); biased estimator shrinks by (n-k)/n
    np.testing.assert_allclose(r[7], (700 - 7) / 700, atol=1e-3)


def test_acf_constant_series():
    with pytest.raises(DegenerateSeriesError):
        acf(np.ones(10), 3)


def test_acf_too_short():
    with pytest.raises(LengthError):
        acf(np.arange(5.0), 5)


@settings(max_examples=50, deadline=None)
@given(arrays(float, st.integers(10, 50), elements=st.floats(-100, 100)), st.floats(-1e3, 1e3))
def test_acf_bounded_and_shift_invariant(y, c):
    if np.ptp(y) < 1e-3:
        return
    r = acf(y, 5)
    assert np.all(np.abs(r) <= 1 + 1e-12)
    np.testing.assert_allclose(acf(y + c, 5), r, atol=1e-7)


def test_smape_examples():
    assert smape([1, 2, 3], [1, 2, 3]) == 0
    assert smape([3], [1]) == pytest.approx(100.0)
    assert smape([1], [3]) == pytest.approx(100.0)


def test_smape_zero_zero_term_is_zero():
    assert smape([0, 2], [0, 2]) == 0
    assert smape([0, 0], [0, 1]) == pytest.approx(100.0)


def test_smape_range():
    assert smape([0.0], [5.0]) == pytest.approx(200.0)


def test_smape_length_mismatch():
    with pytest.raises(DimensionError):
        smape([1, 2], [1])


def test_timeseries_rejects_nan():
    with pytest.raises(DomainError):
        TimeSeries(dt.date(2020, 1, 1), [1.0, np.nan])
