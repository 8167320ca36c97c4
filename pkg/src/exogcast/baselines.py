"""Gaussian random-walk baseline: the point forecast is the last value."""
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .exceptions import LengthError, ParameterError


@dataclass(frozen=True)
class RandomWalkModel:
    sigma2: float
    last_value: float

    def report(self):
        return f"sigma2 = {self.sigma2!r}\nlast_value = {self.last_value!r}\n"


def fit_rw(y):
    """Estimate the innovation variance (biased) from first differences."""
    y = np.asarray(getattr(y, "values", y), dtype=float).ravel()
    if y.size < 2:
        raise LengthError("random walk needs at least two observations")
    return RandomWalkModel(sigma2=float(np.var(np.diff(y))), last_value=float(y[-1]))


def forecast_rw(model, h):
    if h < 1:
        raise ParameterError("horizon must be >= 1")
    return np.full(h, model.last_value)


class RandomWalkForecaster(BaseEstimator):
    """Estimator wrapper around :func:`fit_rw` / :func:`forecast_rw`."""

    def fit(self, y, X=None):
        self.model_ = fit_rw(y)
        return self

    def predict(self, h, X=None):
        check_is_fitted(self, "model_")
        return forecast_rw(self.model_, h)

    def report(self):
        return self.model_.report()
