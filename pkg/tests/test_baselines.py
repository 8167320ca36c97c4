import numpy as np
import pytest

from exogcast.baselines import RandomWalkForecaster, fit_rw, forecast_rw
from exogcast.exceptions import LengthError


def test_constant_series():
    m = fit_rw([5, 5, 5])
    assert m.sigma2 == 0 and m.last_value == 5


def test_biased_difference_variance():
    assert fit_rw([0, 1, 0, 1]).sigma2 == pytest.approx(8 / 9)


def test_too_short():
    with pytest.raises(LengthError):
        fit_rw([7])


def test_forecast_is_last_value():
    m = fit_rw([3.0, 10.0, 42.0])
    np.testing.assert_array_equal(forecast_rw(m, 14), np.full(14, 42.0))
    assert forecast_rw(m, 1)[0] == forecast_rw(m, 14)[0]
    assert np.all(forecast_rw(fit_rw([1.0, 0.0]), 3) == 0)


def test_estimator_wrapper():
    est = RandomWalkForecaster().fit(np.arange(10.0))
    np.testing.assert_array_equal(est.predict(3), [9.0, 9.0, 9.0])
