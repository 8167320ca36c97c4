"""Vector autoregression fit by equation-wise OLS with BIC order selection.

Coefficient matrices are stored oldest lag first: ``Phi[0]`` multiplies
``y_{t-q}`` and ``Phi[q-1]`` multiplies ``y_{t-1}``. Use
:attr:`VarModel.lag_matrices` for the usual lag-1-first ordering.
"""
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .exceptions import CollinearityError, DimensionError, LengthError, ParameterError
from .series import WEEK, weekly_log_return


@dataclass(frozen=True)
class VarModel:
    order: int
    delta: np.ndarray
    Phi: tuple
    sigma: np.ndarray
    variable_names: tuple = ()

    @property
    def n_vars(self):
        return self.delta.size

    @property
    def lag_matrices(self):
        """Coefficient matrices for lags ``1 .. q``."""
        return tuple(reversed(self.Phi))

    def companion(self):
        n, q = self.n_vars, self.order
        C = np.zeros((n * q, n * q))
        C[:n] = np.hstack(self.lag_matrices)
        C[n:, :-n] = np.eye(n * (q - 1))
        return C

    def report(self):
        lines = [f"order = {self.order}", f"variables = {','.join(self.variable_names)}",
                 "delta = " + " ".join(repr(float(v)) for v in self.delta)]
        for lag, B in enumerate(self.lag_matrices, start=1):
            for i, row in enumerate(B):
                lines.append(f"lag{lag}.row{i} = " + " ".join(repr(float(v)) for v in row))
        for i, row in enumerate(self.sigma):
            lines.append(f"sigma.row{i} = " + " ".join(repr(float(v)) for v in row))
        return "\n".join(lines) + "\n"


def _panel(panel):
    Y = np.asarray(panel, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    if Y.ndim != 2:
        raise DimensionError("panel must be a (time, variable) array")
    return Y


def _lagged(Y, q, start):
    """Rows ``start .. T-1`` of the regressor matrix ``[1, y_{t-1}, ..., y_{t-q}]``."""
    T = Y.shape[0]
    blocks = [np.ones((T - start, 1))]
    blocks += [Y[start - lag : T - lag] for lag in range(1, q + 1)]
    return np.hstack(blocks)


def _ols(Y, q, start):
    n = Y.shape[1]
    A = _lagged(Y, q, start)
    target = Y[start:]
    if A.shape[0] <= A.shape[1]:
        raise LengthError(f"{A.shape[0]} usable rows cannot identify {A.shape[1]} coefficients")
    scale = np.abs(A).max(axis=0)
    scale[scale == 0] = 1.0
    As = A / scale
    if np.linalg.matrix_rank(As) < As.shape[1]:
        raise CollinearityError(f"singular VAR({q}) regressor matrix")
    coef, *_ = np.linalg.lstsq(As, target, rcond=None)
    coef = coef / scale[:, None]
    resid = target - A @ coef
    delta = coef[0]
    lag1_first = [coef[1 + n * (lag - 1) : 1 + n * lag].T for lag in range(1, q + 1)]
    return delta, tuple(reversed(lag1_first)), resid


def fit_var(panel, q, variable_names=None):
    """Equation-by-equation OLS for a VAR(``q``) with intercept.

    ``panel`` is ``(T, n)``; the residual covariance is the ML estimate
    ``E'E / T_eff``.
    """
    if q < 1:
        raise ParameterError("order must be >= 1")
    Y = _panel(panel)
    T, n = Y.shape
    if T <= n * q + 1 + q:
        raise LengthError(f"T={T} too short for VAR({q}) with {n} variables")
    delta, Phi, resid = _ols(Y, q, q)
    sigma = resid.T @ resid / resid.shape[0]
    names = tuple(variable_names) if variable_names is not None else tuple(f"y{i}" for i in range(n))
    return VarModel(q, delta, Phi, (sigma + sigma.T) / 2, names)


def bic_values(panel, q_max=14):
    """BIC for orders ``1 .. q_max`` on the rows valid at ``q_max``."""
    Y = _panel(panel)
    n = Y.shape[1]
    out = np.empty(q_max)
    for q in range(1, q_max + 1):
        _, _, resid = _ols(Y, q, q_max)
        t_eff = resid.shape[0]
        _, logdet = np.linalg.slogdet(resid.T @ resid / t_eff)
        out[q - 1] = logdet + np.log(t_eff) / t_eff * n * (n * q + 1)
    return out


def select_order_bic(panel, q_max=14):
    if q_max < 1:
        raise ParameterError("q_max must be >= 1")
    if q_max == 1:
        return 1
    return int(np.argmin(bic_values(panel, q_max))) + 1


def forecast_var(model, recent, h):
    """Conditional mean of ``y_{T+h}`` by iterating the recursion."""
    Y = _panel(recent)
    if Y.shape[1] != model.n_vars:
        raise DimensionError(f"window has {Y.shape[1]} variables, model has {model.n_vars}")
    if Y.shape[0] < model.order:
        raise LengthError(f"window of {Y.shape[0]} rows shorter than order {model.order}")
    if h < 1:
        raise ParameterError("horizon must be >= 1")
    hist = list(Y[-model.order :])
    lags = model.lag_matrices
    for _ in range(h):
        nxt = model.delta + sum(B @ hist[-lag] for lag, B in enumerate(lags, start=1))
        hist.append(nxt)
    return np.asarray(hist[-1])


class VARForecaster(BaseEstimator):
    """VAR on weekly log-returns of the target and exogenous counts.

    The order is chosen by BIC up to ``q_max`` (reduced when the series is
    too short). Exogenous columns whose log-returns are constant are dropped.
    Target forecasts are inverted to counts through the week-earlier value,
    chaining earlier forecasts beyond a week.
    """

    def __init__(self, q_max=14, order=None, exog_names=None, offset=1.0):
        self.q_max = q_max
        self.order = order
        self.exog_names = exog_names
        self.offset = offset

    def fit(self, y, X=None):
        y = np.asarray(y, dtype=float)
        cols = [weekly_log_return(y, offset=self.offset)]
        if X is not None:
            X = np.asarray(X, dtype=float).reshape(len(y), -1)
            for j in range(X.shape[1]):
                z = weekly_log_return(X[:, j], offset=self.offset)
                if np.ptp(z) > 0:
                    cols.append(z)
        Z = np.column_stack(cols)
        T, n = Z.shape
        # keep enough rows for the largest candidate order
        q_cap = max(1, min(self.q_max, (T - 2) // (n + 2)))
        if self.order is not None:
            q = self.order
        else:
            q = 1
            while q_cap >= 1:
                try:
                    q = select_order_bic(Z, q_cap)
                    break
                except CollinearityError:
                    q_cap -= 1
        self.model_ = fit_var(Z, q)
        self.y_ = y
        self.z_ = Z
        return self

    def predict(self, h, X=None):
        check_is_fitted(self, "model_")
        y = self.y_
        out = []
        for step in range(1, h + 1):
            z_hat = forecast_var(self.model_, self.z_, step)[0]
            base_idx = y.size - 1 + step - WEEK
            base = y[base_idx] if base_idx < y.size else out[base_idx - y.size]
            out.append(max((base + self.offset) * np.exp(z_hat) - self.offset, 0.0))
        return np.array(out)

    def report(self):
        return self.model_.report()
