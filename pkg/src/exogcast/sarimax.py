"""Seasonal ARIMA with exogenous regressors, estimated by exact Gaussian MLE.

The model is regression with SARIMA errors::

    D(B) y_t = c + sum_i beta_i D(B) x_t^i + u_t
    phi(B) Phi(B^s) u_t = theta(B) Theta(B^s) eps_t

where ``D(B) = (1 - B)^d (1 - B^s)^D``. Differencing is applied up front, so
the Kalman filter only ever sees a stationary ARMA process and its
initial state covariance is the exact stationary one. The intercept ``c``
and the ``beta`` coefficients enter linearly and are concentrated out of the
likelihood by generalized least squares on the filtered innovations; the
innovation variance is concentrated out as well. The numerical optimizer
therefore only searches over the ARMA coefficients.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy.optimize import minimize
from scipy.signal import lfilter
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .exceptions import (
    CollinearityError,
    ConvergenceError,
    DomainError,
    InputError,
    LengthError,
    ParameterError,
)
from .series import diff_polynomial

LOG_2PI = math.log(2.0 * math.pi)
_BAD_OBJECTIVE = 1e10


@dataclass(frozen=True)
class SarimaxSpec:
    """Model orders and options.

    ``transform="log1p"`` fits the model to ``log(y + 1)`` and ``log(x + 1)``
    and back-transforms forecasts to the count scale.
    """

    p: int = 0
    d: int = 0
    q: int = 0
    P: int = 0
    D: int = 0
    Q: int = 0
    s: int = 7
    trend: str = "none"
    exog_names: tuple = ()
    transform: str = "identity"

    def __post_init__(self):
        object.__setattr__(self, "exog_names", tuple(self.exog_names))
        for name in ("p", "d", "q", "P", "D", "Q"):
            if int(getattr(self, name)) < 0:
                raise ParameterError(f"order {name} must be non-negative")
        if self.s < 1:
            raise ParameterError("season length must be positive")
        if (self.P, self.D, self.Q) != (0, 0, 0) and self.s < 2:
            raise ParameterError("seasonal terms need s >= 2")
        if self.trend not in ("none", "constant"):
            raise ParameterError(f"trend must be 'none' or 'constant', got {self.trend!r}")
        if self.transform not in ("identity", "log1p"):
            raise ParameterError(f"unknown transform {self.transform!r}")

    @classmethod
    def from_orders(cls, order, seasonal_order=(0, 0, 0, 7), **kwargs):
        p, d, q = order
        P, D, Q, s = seasonal_order
        return cls(p, d, q, P, D, Q, s, **kwargs)

    @property
    def n_arma(self):
        return self.p + self.P + self.q + self.Q

    @property
    def n_diff(self):
        return self.d + self.D * self.s

    @property
    def k_exog(self):
        return len(self.exog_names)

    @property
    def n_params(self):
        """Estimated parameters, counting sigma2."""
        return self.n_arma + self.k_exog + (self.trend == "constant") + 1


@dataclass(frozen=True)
class FittedSarimax:
    spec: SarimaxSpec
    phi: np.ndarray
    theta: np.ndarray
    Phi: np.ndarray
    Theta: np.ndarray
    beta: np.ndarray
    trend_const: float
    sigma2: float
    loglik: float = float("nan")
    nobs: int = 0
    n_iter: int = 0
    converged: bool = True

    def __post_init__(self):
        for name in ("phi", "theta", "Phi", "Theta", "beta"):
            object.__setattr__(self, name, np.atleast_1d(np.asarray(getattr(self, name), float)))
        s = self.spec
        expected = {"phi": s.p, "theta": s.q, "Phi": s.P, "Theta": s.Q, "beta": s.k_exog}
        for name, size in expected.items():
            if getattr(self, name).size != size:
                raise ParameterError(f"{name} has {getattr(self, name).size} entries, spec needs {size}")

    def to_text(self):
        """Flat ``key = value`` dump used for reproducibility snapshots."""
        s = self.spec
        lines = [
            f"order = {s.p},{s.d},{s.q}",
            f"seasonal_order = {s.P},{s.D},{s.Q},{s.s}",
            f"trend = {s.trend}",
            f"transform = {s.transform}",
            f"exog_names = {','.join(s.exog_names)}",
        ]
        for name in ("phi", "theta", "Phi", "Theta", "beta"):
            lines.append(f"{name} = {','.join(repr(float(v)) for v in getattr(self, name))}")
        lines += [
            f"trend_const = {self.trend_const!r}",
            f"sigma2 = {self.sigma2!r}",
            f"loglik = {self.loglik!r}",
            f"nobs = {self.nobs}",
        ]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        kv = {}
        for line in text.splitlines():
            if "=" in line:
                key, _, value = line.partition("=")
                kv[key.strip()] = value.strip()

        def vec(key):
            return np.array([float(v) for v in kv[key].split(",") if v], dtype=float)

        p, d, q = (int(v) for v in kv["order"].split(","))
        P, D, Q, s = (int(v) for v in kv["seasonal_order"].split(","))
        names = tuple(v for v in kv["exog_names"].split(",") if v)
        spec = SarimaxSpec(p, d, q, P, D, Q, s, kv["trend"], names, kv["transform"])
        return cls(
            spec,
            vec("phi"),
            vec("theta"),
            vec("Phi"),
            vec("Theta"),
            vec("beta"),
            float(kv["trend_const"]),
            float(kv["sigma2"]),
            float(kv["loglik"]),
            int(kv["nobs"]),
        )


# -- parameter transforms -----------------------------------------------------


def constrain_stationary(x):
    """Map unconstrained reals to coefficients of a stationary AR polynomial.

    ``tanh`` gives partial autocorrelations in (-1, 1); the Durbin-Levinson
    recursion turns them into ``phi`` with ``1 - sum phi_i z^i`` having all
    roots outside the unit circle.
    """
    phi = np.empty(0)
    for r in np.tanh(np.asarray(x, dtype=float)):
        phi = np.concatenate([phi - r * phi[::-1], [r]])
    return phi


def unconstrain_stationary(phi):
    """Inverse of :func:`constrain_stationary`."""
    phi = np.array(phi, dtype=float)
    k = phi.size
    partial = np.empty(k)
    for m in range(k - 1, -1, -1):
        r = float(np.clip(phi[m], -1 + 1e-12, 1 - 1e-12))
        partial[m] = r
        if m:
            phi = (phi[:m] + r * phi[:m][::-1]) / (1.0 - r * r)
    return np.arctanh(partial)


def _split(spec, x):
    p, P, q = spec.p, spec.P, spec.q
    return x[:p], x[p : p + P], x[p + P : p + P + q], x[p + P + q :]


def params_from_unconstrained(spec, x):
    xp, xP, xq, xQ = _split(spec, np.asarray(x, dtype=float))
    return (
        constrain_stationary(xp),
        constrain_stationary(xP),
        -constrain_stationary(xq),
        -constrain_stationary(xQ),
    )


def params_to_unconstrained(spec, phi, Phi, theta, Theta):
    return np.concatenate(
        [
            unconstrain_stationary(phi),
            unconstrain_stationary(Phi),
            unconstrain_stationary(-np.asarray(theta, float)),
            unconstrain_stationary(-np.asarray(Theta, float)),
        ]
    )


def expand_polynomials(phi, Phi, theta, Theta, s):
    """Multiply out regular and seasonal lag polynomials.

    Returns ``(ar, ma)`` such that the error process satisfies
    ``u_t = sum ar_i u_{t-i} + eps_t + sum ma_j eps_{t-j}``.
    """
    ar_reg = np.r_[1.0, -np.asarray(phi, float)]
    ma_reg = np.r_[1.0, np.asarray(theta, float)]
    ar_seas = np.zeros(s * len(Phi) + 1)
    ar_seas[0] = 1.0
    ar_seas[s::s] = -np.asarray(Phi, float)
    ma_seas = np.zeros(s * len(Theta) + 1)
    ma_seas[0] = 1.0
    ma_seas[s::s] = np.asarray(Theta, float)
    return -np.convolve(ar_reg, ar_seas)[1:], np.convolve(ma_reg, ma_seas)[1:]


# -- state space and Kalman filter -------------------------------------------


def state_space(ar, ma):
    """Harvey-form transition column and disturbance loading for an ARMA.

    The transition matrix is the companion matrix with ``ar`` in its first
    column and ones on the superdiagonal; it is passed around as that column.
    """
    r = max(ar.size, ma.size + 1, 1)
    phi = np.zeros(r)
    phi[: ar.size] = ar
    R = np.zeros(r)
    R[0] = 1.0
    R[1 : ma.size + 1] = ma
    return phi, R


def transition_matrix(phi):
    r = phi.size
    T = np.zeros((r, r))
    T[:, 0] = phi
    T[np.arange(r - 1), np.arange(1, r)] = 1.0
    return T


def arma_autocovariance(ar, ma, nlags):
    """Autocovariances ``gamma(0..nlags)`` of a unit-variance ARMA process.

    Solves the first ``p + 1`` Yule-Walker-type equations directly and
    extends with the AR recursion.
    """
    ar = np.asarray(ar, float)
    ma = np.asarray(ma, float)
    p, q = ar.size, ma.size
    b = np.r_[1.0, ma]
    psi = lfilter(b, np.r_[1.0, -ar], np.r_[1.0, np.zeros(q)])
    rhs = np.zeros(max(nlags, p) + 1)
    for k in range(min(q, rhs.size - 1) + 1):
        rhs[k] = np.dot(b[k:], psi[: q + 1 - k])
    gamma = np.zeros(rhs.size)
    if p:
        A = np.eye(p + 1)
        for k in range(p + 1):
            for j in range(1, p + 1):
                A[k, abs(k - j)] -= ar[j - 1]
        gamma[: p + 1] = np.linalg.solve(A, rhs[: p + 1])
        for k in range(p + 1, gamma.size):
            gamma[k] = np.dot(ar, gamma[k - p : k][::-1]) + rhs[k]
    else:
        gamma[:] = rhs
    return gamma[: nlags + 1]


def stationary_covariance(phi, R):
    """Unconditional state covariance for unit innovation variance.

    Each Harvey-form state is a linear combination of
    ``u_{t-1}, ..., u_{t-r}`` and ``eps_t, ..., eps_{t-r+1}``; their joint
    covariance follows from the ARMA autocovariances and psi weights.
    """
    r = phi.size
    gamma = arma_autocovariance(phi, R[1:], r)
    psi = lfilter(R, np.r_[1.0, -phi], np.r_[1.0, np.zeros(r)])
    L = np.zeros((r, 2 * r))
    for i in range(r):
        L[i, : r - i] = phi[i:]
        L[i, r : 2 * r - i] = R[i:]
    C = np.zeros((2 * r, 2 * r))
    lags = np.abs(np.subtract.outer(np.arange(r), np.arange(r)))
    C[:r, :r] = gamma[lags]
    C[r:, r:] = np.eye(r)
    # cov(u_{t-1-j}, eps_{t-k}) = psi_{k-1-j} for k > j
    for j in range(r):
        for k in range(j + 1, r):
            C[j, r + k] = C[r + k, j] = psi[k - 1 - j]
    P0 = L @ C @ L.T
    return 0.5 * (P0 + P0.T)


@njit(cache=True)
def _kalman_filter(phi, R, P0, Y):  # pragma: no cover - compiled
    n, k = Y.shape
    r = phi.size
    a = np.zeros((r, k))
    P = P0.copy()
    V = np.empty((n, k))
    F = np.empty(n)
    TP = np.empty((r, r))
    for t in range(n):
        f = P[0, 0]
        F[t] = f
        for j in range(k):
            V[t, j] = Y[t, j] - a[0, j]
        # measurement update
        K = P[:, 0] / f
        for i in range(r):
            for j in range(k):
                a[i, j] += K[i] * V[t, j]
        row0 = P[0, :].copy()
        for i in range(r):
            for m in range(r):
                P[i, m] -= K[i] * row0[m]
        # time update with the companion transition
        for j in range(k):
            a0 = a[0, j]
            for i in range(r - 1):
                a[i, j] = phi[i] * a0 + a[i + 1, j]
            a[r - 1, j] = phi[r - 1] * a0
        for m in range(r):
            for i in range(r - 1):
                TP[i, m] = phi[i] * P[0, m] + P[i + 1, m]
            TP[r - 1, m] = phi[r - 1] * P[0, m]
        for i in range(r):
            tp0 = TP[i, 0]
            for m in range(r - 1):
                P[i, m] = TP[i, m + 1] + phi[m] * tp0 + R[i] * R[m]
            P[i, r - 1] = phi[r - 1] * tp0 + R[i] * R[r - 1]
    return V, F, a, P


def kalman_filter(phi, R, Y, P0=None):
    """Filter each column of ``Y`` through the ARMA state space.

    Runs with unit innovation variance. Because the gain sequence does not
    depend on the data, several columns share one pass.

    Returns
    -------
    V : (n, k) one-step prediction errors
    F : (n,) prediction error variances (in units of sigma2)
    a : (r, k) predicted state for time n + 1
    P : (r, r) its covariance
    """
    Y = np.ascontiguousarray(np.atleast_2d(np.asarray(Y, float).T).T)
    if P0 is None:
        P0 = stationary_covariance(phi, R)
    return _kalman_filter(
        np.ascontiguousarray(phi, dtype=float),
        np.ascontiguousarray(R, dtype=float),
        np.ascontiguousarray(P0, dtype=float),
        Y,
    )


# -- data preparation ----------------------------------------------------------


def _as_exog(spec, exog, n):
    if spec.k_exog == 0:
        return np.empty((n, 0))
    if exog is None:
        raise InputError(f"model needs exogenous columns {spec.exog_names}")
    X = np.asarray(exog, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.shape != (n, spec.k_exog):
        raise InputError(f"exog has shape {X.shape}, expected {(n, spec.k_exog)}")
    return X


def _transform(spec, values, what):
    values = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(values)):
        raise DomainError(f"{what} contains non-finite values")
    if spec.transform == "log1p":
        if np.any(values <= -1.0):
            raise DomainError(f"{what} must exceed -1 for the log1p transform")
        return np.log1p(values)
    return values


def _difference_rows(spec, Z):
    poly = diff_polynomial(spec.d, spec.D, spec.s)
    m = poly.size - 1
    if m == 0:
        return Z.copy()
    out = np.zeros((Z.shape[0] - m,) + Z.shape[1:])
    for j, c in enumerate(poly):
        if c != 0.0:
            out += c * Z[m - j : Z.shape[0] - j]
    return out


def _design(spec, X_diff, active):
    cols = []
    if spec.trend == "constant":
        cols.append(np.ones((X_diff.shape[0], 1)))
    cols.append(X_diff[:, active])
    return np.hstack(cols)


def _prepare(spec, y, exog):
    y = np.asarray(getattr(y, "values", y), dtype=float).ravel()
    X = _as_exog(spec, exog, y.size)
    yt = _transform(spec, y, "y")
    Xt = _transform(spec, X, "exog")
    if y.size <= spec.n_diff:
        raise LengthError(f"differenced series is empty: n={y.size}, lost {spec.n_diff}")
    return yt, Xt, _difference_rows(spec, yt), _difference_rows(spec, Xt)


def _regression_vector(model):
    """Coefficients aligned with ``_design`` columns (intercept first)."""
    parts = [[model.trend_const]] if model.spec.trend == "constant" else []
    parts.append(model.beta)
    return np.concatenate(parts) if parts else np.empty(0)


def _arma_state(model):
    ar, ma = expand_polynomials(model.phi, model.Phi, model.theta, model.Theta, model.spec.s)
    return state_space(ar, ma)


# -- likelihood ------------------------------------------------------------------


def loglikelihood(model, y, exog=None):
    """Exact Gaussian log-likelihood of the differenced data under ``model``."""
    spec = model.spec
    vals = np.r_[model.phi, model.theta, model.Phi, model.Theta, model.beta,
                 model.trend_const, model.sigma2]
    if not np.all(np.isfinite(vals)):
        raise DomainError("model parameters must be finite")
    if model.sigma2 <= 0:
        raise DomainError("sigma2 must be positive")
    _, _, y_diff, X_diff = _prepare(spec, y, exog)
    Z = _design(spec, X_diff, np.ones(spec.k_exog, dtype=bool))
    w = y_diff - Z @ _regression_vector(model)
    phi, R = _arma_state(model)
    V, F, _, _ = kalman_filter(phi, R, w[:, None])
    n = w.size
    v = V[:, 0]
    return float(
        -0.5 * n * LOG_2PI
        - 0.5 * np.sum(np.log(model.sigma2 * F))
        - 0.5 * np.sum(v * v / F) / model.sigma2
    )


def _profile(phi, R, y_diff, Z):
    """Concentrated log-likelihood plus the GLS coefficients and sigma2."""
    n = y_diff.size
    V, F, _, _ = kalman_filter(phi, R, np.column_stack([y_diff, Z]))
    if not np.all(F > 0) or not np.all(np.isfinite(V)):
        return -np.inf, np.zeros(Z.shape[1]), float("nan")
    w = 1.0 / np.sqrt(F)
    v = V[:, 0] * w
    if Z.shape[1]:
        Vz = V[:, 1:] * w[:, None]
        b, *_ = np.linalg.lstsq(Vz, v, rcond=None)
        e = v - Vz @ b
    else:
        b = np.empty(0)
        e = v
    sigma2 = float(np.dot(e, e) / n)
    if not sigma2 > 0:
        return -np.inf, b, sigma2
    ll = -0.5 * n * (LOG_2PI + 1.0 + math.log(sigma2)) - 0.5 * float(np.sum(np.log(F)))
    return ll, b, sigma2


def _css_start(spec, y_diff, Z):
    """Conditional-sum-of-squares estimates of the ARMA coefficients."""
    if Z.shape[1]:
        b, *_ = np.linalg.lstsq(Z, y_diff, rcond=None)
        u = y_diff - Z @ b
    else:
        u = y_diff
    x0 = np.zeros(spec.n_arma)

    def css(x):
        phi, Phi, theta, Theta = params_from_unconstrained(spec, x)
        ar, ma = expand_polynomials(phi, Phi, theta, Theta, spec.s)
        e = lfilter(np.r_[1.0, -ar], np.r_[1.0, ma], u)
        val = float(np.mean(e[ar.size :] ** 2)) if e.size > ar.size else float(np.mean(e**2))
        return val if np.isfinite(val) else _BAD_OBJECTIVE

    try:
        res = minimize(css, x0, method="BFGS", options={"maxiter": 200})
    except (ValueError, FloatingPointError, np.linalg.LinAlgError):
        return x0
    return res.x if np.all(np.isfinite(res.x)) else x0


def fit(spec, y, exog=None, start_params=None, maxiter=500, gtol=1e-6):
    """Maximum-likelihood fit of ``spec`` to ``y`` (and ``exog``).

    Parameters
    ----------
    spec : SarimaxSpec
    y : array-like or TimeSeries
    exog : array-like of shape (n, k_exog), optional
    start_params : array-like, optional
        Unconstrained ARMA start vector (layout ``phi, Phi, theta, Theta``).
        By default the better of the CSS estimate and the zero vector is used.
    maxiter, gtol : BFGS budget and gradient tolerance.

    Raises
    ------
    CollinearityError
        If the differenced regressors (plus intercept) are rank deficient.
    ConvergenceError
        If BFGS exhausts ``maxiter``; ``best_params`` holds the last iterate
        as a :class:`FittedSarimax`.
    """
    _, _, y_diff, X_diff = _prepare(spec, y, exog)
    n = y_diff.size
    span = max(spec.p + spec.P * spec.s, spec.q + spec.Q * spec.s)
    if n <= span + spec.n_params:
        raise LengthError(
            f"{n} usable observations after differencing; need more than {span + spec.n_params}"
        )
    # identically-zero regressors carry no information; pin their beta to 0
    active = np.any(X_diff != 0.0, axis=0)
    Z = _design(spec, X_diff, active)
    if Z.shape[1] and np.linalg.matrix_rank(Z) < Z.shape[1]:
        raise CollinearityError("exogenous regressors are collinear after differencing")

    def unpack(x, b, sigma2, ll, n_iter, converged):
        phi, Phi, theta, Theta = params_from_unconstrained(spec, x)
        const = float(b[0]) if spec.trend == "constant" else 0.0
        beta = np.zeros(spec.k_exog)
        beta[active] = b[int(spec.trend == "constant") :]
        return FittedSarimax(spec, phi, theta, Phi, Theta, beta, const, sigma2, ll,
                             nobs=n, n_iter=n_iter, converged=converged)

    def profile_at(x):
        phi, Phi, theta, Theta = params_from_unconstrained(spec, x)
        ar, ma = expand_polynomials(phi, Phi, theta, Theta, spec.s)
        return _profile(*state_space(ar, ma), y_diff, Z)

    def objective(x):
        try:
            ll = profile_at(x)[0]
        except (np.linalg.LinAlgError, ValueError, FloatingPointError):
            return _BAD_OBJECTIVE
        return -ll / n if np.isfinite(ll) else _BAD_OBJECTIVE

    if spec.n_arma == 0:
        ll, b, sigma2 = profile_at(np.empty(0))
        return unpack(np.empty(0), b, sigma2, ll, 0, True)

    if start_params is None:
        candidates = [_css_start(spec, y_diff, Z), np.zeros(spec.n_arma)]
        x0 = min(candidates, key=objective)
    else:
        x0 = np.asarray(start_params, dtype=float)
        if x0.size != spec.n_arma:
            raise ParameterError(f"start_params needs {spec.n_arma} entries")

    res = minimize(objective, x0, method="BFGS", options={"maxiter": maxiter, "gtol": gtol})
    x = res.x if res.fun <= objective(x0) else x0
    ll, b, sigma2 = profile_at(x)
    # status 2 (precision loss) means the line search stalled at an optimum
    # to working precision; only an exhausted budget counts as failure
    if res.status == 1:
        best = unpack(x, b, sigma2, ll, res.nit, False)
        raise ConvergenceError(f"BFGS did not converge in {maxiter} iterations", best)
    return unpack(x, b, sigma2, ll, res.nit, True)


# -- forecasting -----------------------------------------------------------------


def forecast(model, history, exog_future=None, h=1, exog_history=None):
    """Conditional-mean forecasts ``h`` steps beyond ``history``.

    The residual process is filtered over the full history with the fitted
    parameters, projected forward, the regression part is added back, the
    differencing is inverted and, for ``log1p`` specs, the log transform is
    undone (negative back-transformed values are clamped to 0).
    """
    spec = model.spec
    if h < 1:
        raise ParameterError("horizon must be at least 1")
    y_t, X_t, y_diff, X_diff = _prepare(spec, history, exog_history)
    X_f = np.empty((h, 0))
    if spec.k_exog:
        if exog_future is None:
            raise InputError(f"forecast needs {h} rows of future exogenous values")
        X_f = np.asarray(exog_future, dtype=float)
        if X_f.ndim == 1:
            X_f = X_f[:, None]
        if X_f.shape[0] < h or X_f.shape[1] != spec.k_exog:
            raise InputError(
                f"exog_future has shape {X_f.shape}, need at least ({h}, {spec.k_exog})"
            )
        X_f = _transform(spec, X_f[:h], "exog_future")

    all_mask = np.ones(spec.k_exog, dtype=bool)
    coef = _regression_vector(model)
    w = y_diff - _design(spec, X_diff, all_mask) @ coef
    phi, R = _arma_state(model)
    _, _, a, _ = kalman_filter(phi, R, w[:, None])
    state = a[:, 0].copy()
    w_hat = np.empty(h)
    for j in range(h):
        w_hat[j] = state[0]
        a0 = state[0]
        state[:-1] = phi[:-1] * a0 + state[1:]
        state[-1] = phi[-1] * a0

    X_all = np.vstack([X_t, X_f])
    X_future_diff = _difference_rows(spec, X_all)[-h:]
    y_diff_hat = _design(spec, X_future_diff, all_mask) @ coef + w_hat

    poly = diff_polynomial(spec.d, spec.D, spec.s)
    m = poly.size - 1
    path = np.concatenate([y_t, np.empty(h)])
    n = y_t.size
    for j in range(h):
        acc = y_diff_hat[j]
        for i in range(1, m + 1):
            acc -= poly[i] * path[n + j - i]
        path[n + j] = acc
    out = path[n:]
    if spec.transform == "log1p":
        out = np.maximum(np.expm1(out), 0.0)
    return out


# -- estimator -------------------------------------------------------------------


class SARIMAXForecaster(BaseEstimator):
    """Scikit-learn style wrapper around :func:`fit` and :func:`forecast`.

    ``fit(y, X)`` estimates parameters; ``update(y, X)`` swaps in a longer
    history without re-estimating; ``predict(h, X_future)`` forecasts.
    With ``accept_unconverged`` a fit that runs out of iterations keeps the
    best parameters found (with a warning) instead of raising.
    """

    def __init__(self, order=(4, 1, 4), seasonal_order=(3, 1, 1, 7), trend="constant",
                 transform="log1p", exog_names=None, maxiter=500, gtol=1e-6,
                 accept_unconverged=True):
        self.order = order
        self.seasonal_order = seasonal_order
        self.trend = trend
        self.transform = transform
        self.exog_names = exog_names
        self.maxiter = maxiter
        self.gtol = gtol
        self.accept_unconverged = accept_unconverged

    def _spec(self, X):
        names = self.exog_names
        if names is None:
            k = 0 if X is None else np.atleast_2d(np.asarray(X).T).T.shape[1]
            names = tuple(f"x{i}" for i in range(k))
        return SarimaxSpec.from_orders(self.order, self.seasonal_order, trend=self.trend,
                                       exog_names=tuple(names), transform=self.transform)

    def fit(self, y, X=None):
        spec = self._spec(X)
        try:
            self.model_ = fit(spec, y, X if spec.k_exog else None,
                              maxiter=self.maxiter, gtol=self.gtol)
        except ConvergenceError as err:
            if not self.accept_unconverged or err.best_params is None:
                raise
            warnings.warn(f"{err}; keeping the best parameters found", RuntimeWarning, stacklevel=2)
            self.model_ = err.best_params
        return self.update(y, X)

    def update(self, y, X=None):
        self.y_ = np.asarray(y, dtype=float)
        self.X_ = None if X is None or not self.model_.spec.k_exog else np.asarray(X, float)
        return self

    def predict(self, h, X=None):
        check_is_fitted(self, "model_")
        spec = self.model_.spec
        return forecast(self.model_, self.y_, X if spec.k_exog else None, h, self.X_)

    def report(self):
        check_is_fitted(self, "model_")
        return self.model_.to_text()
