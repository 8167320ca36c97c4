"""MCP-penalized regression on lagged weekly log-returns.

For horizon ``h`` and lag depth ``k`` the response ``z_t`` (weekly log-return
of the target) is regressed on ``z_{t-h}, ..., z_{t-h-k+1}`` and the same
lags of each exogenous series. Sure independence screening keeps the
``m`` columns most correlated with ``z``; the minimax concave penalty is then
fit by coordinate descent with cross-validated ``lambda``.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from numba import njit
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .exceptions import (
    ConvergenceError,
    DegenerateSeriesError,
    InputError,
    LengthError,
    ParameterError,
)
from .series import WEEK, weekly_log_return

DEFAULT_GAMMA = 3.0


@dataclass(frozen=True)
class LagDesign:
    """Response vector and lagged design matrix for one horizon.

    ``lags`` lists ``(source, lag)`` for every column, with source 0 the
    target and source ``j >= 1`` the ``j``-th exogenous series; ``rows`` gives
    the time index ``t`` (into the untransformed input) of every row.
    """

    response: np.ndarray
    matrix: np.ndarray
    h: int
    k: int
    column_names: tuple
    lags: tuple
    rows: np.ndarray

    @property
    def n_columns(self):
        return self.matrix.shape[1]

    def take(self, columns):
        columns = list(columns)
        return replace(
            self,
            matrix=self.matrix[:, columns],
            column_names=tuple(self.column_names[c] for c in columns),
            lags=tuple(self.lags[c] for c in columns),
        )


@dataclass(frozen=True)
class McpModel:
    """Fitted MCP regression for one horizon (coefficients on the raw scale)."""

    beta: np.ndarray
    intercept: float
    lam: float
    gamma: float
    screened_columns: tuple
    column_names: tuple = ()
    lags: tuple = ()
    h: int = 1
    k: int = 14
    n_sweeps: int = 0

    @property
    def nonzero(self):
        return int(np.count_nonzero(self.beta))

    def report(self):
        """Plain-text listing of the selected columns and coefficients."""
        lines = [f"h = {self.h}", f"lambda = {self.lam!r}", f"gamma = {self.gamma!r}",
                 f"intercept = {self.intercept!r}"]
        for name, b in zip(self.column_names, self.beta):
            lines.append(f"{name} = {b!r}")
        return "\n".join(lines) + "\n"


# -- design -------------------------------------------------------------------


def _log_returns(target, exog, offset):
    y = np.asarray(getattr(target, "values", target), dtype=float).ravel()
    X = np.empty((y.size, 0)) if exog is None else np.asarray(exog, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.shape[0] != y.size:
        raise InputError(f"exog has {X.shape[0]} rows, target has {y.size}")
    z = weekly_log_return(y, offset=offset)
    zx = [weekly_log_return(X[:, j], offset=offset) for j in range(X.shape[1])]
    return y, np.column_stack([z] + zx)


def build_lag_design(target, exog=None, h=1, k=14, exog_names=None, offset=1.0):
    """Lagged design for regressing ``z_t`` on lags ``h .. h + k - 1``.

    Both the target and the exogenous series (raw counts) are converted to
    weekly log-returns with ``log(x + offset)``.
    """
    if not 1 <= h:
        raise ParameterError("horizon must be >= 1")
    if k < 1:
        raise ParameterError("lag depth must be >= 1")
    y, Z = _log_returns(target, exog, offset)
    n = y.size
    if n <= h + k + WEEK:
        raise LengthError(f"series of length {n} too short for h={h}, k={k}")
    n_src = Z.shape[1]
    names = ["z"] + list(exog_names or [f"x{j}" for j in range(1, n_src)])
    if len(names) != n_src:
        raise InputError("exog_names does not match the number of exogenous columns")
    # time t corresponds to Z[t - WEEK]; the deepest lag is h + k - 1
    first = WEEK + h + k - 1
    rows = np.arange(first, n)
    cols, col_names, lags = [], [], []
    for src in range(n_src):
        for lag in range(h, h + k):
            cols.append(Z[rows - lag - WEEK, src])
            col_names.append(f"{names[src]}[t-{lag}]")
            lags.append((src, lag))
    return LagDesign(
        response=Z[rows - WEEK, 0],
        matrix=np.column_stack(cols),
        h=h,
        k=k,
        column_names=tuple(col_names),
        lags=tuple(lags),
        rows=rows,
    )


def _abs_correlations(X, z):
    Xc = X - X.mean(axis=0)
    zc = z - z.mean()
    sx = np.sqrt((Xc * Xc).sum(axis=0))
    sz = np.sqrt(zc @ zc)
    corr = np.full(X.shape[1], -1.0)
    ok = sx > 1e-12 * np.maximum(1.0, np.abs(X).max(axis=0))
    if sz > 0:
        corr[ok] = np.abs(Xc[:, ok].T @ zc) / (sx[ok] * sz)
    else:
        corr[ok] = 0.0
    return corr


def sis_screen(design, m=7, screen_target_lags=True):
    """Keep the ``m`` columns with the largest absolute Pearson correlation.

    Zero-variance columns are never selected. With
    ``screen_target_lags=False`` every target-lag column is kept and ``m``
    exogenous columns are screened in addition. Column order is preserved.
    """
    if m < 1:
        raise ParameterError("m must be positive")
    X = design.matrix
    if X.shape[1] < m:
        raise ParameterError(f"design has {X.shape[1]} columns, cannot keep {m}")
    corr = _abs_correlations(X, design.response)
    forced = []
    if not screen_target_lags:
        forced = [j for j, (src, _) in enumerate(design.lags) if src == 0]
        corr[forced] = -np.inf
    eligible = np.flatnonzero(corr >= 0)
    # stable sort keeps the earlier column on ties
    order = eligible[np.argsort(-corr[eligible], kind="stable")]
    keep = sorted(set(forced) | set(order[:m].tolist()))
    return design.take(keep)


# -- penalty and solver -------------------------------------------------------------


def mcp_penalty(beta, lam, gamma=DEFAULT_GAMMA):
    """Minimax concave penalty, elementwise."""
    if gamma <= 1:
        raise ParameterError("gamma must exceed 1")
    if lam < 0:
        raise ParameterError("lambda must be non-negative")
    b = np.abs(np.asarray(beta, dtype=float))
    out = np.where(b <= gamma * lam, lam * b - b * b / (2.0 * gamma), 0.5 * gamma * lam * lam)
    return out if out.ndim else float(out)


def mcp_objective(X, z, beta, lam, gamma=DEFAULT_GAMMA):
    r = z - X @ beta
    return float(r @ r / (2 * len(z)) + np.sum(mcp_penalty(beta, lam, gamma)))


@njit(cache=True)
def _firm(u, v, lam, gamma):  # pragma: no cover - compiled
    au = abs(u)
    if au <= lam:
        return 0.0
    if au <= gamma * lam * v:
        return np.sign(u) * (au - lam) / (v - 1.0 / gamma)
    return u / v


@njit(cache=True)
def _cd(G, c, zz, beta, lam, gamma, tol, max_sweeps, track):  # pragma: no cover - compiled
    p = c.size
    grad = c - G @ beta
    hist = np.empty(max_sweeps + 1 if track else 1)
    sweeps = 0
    converged = False
    while sweeps < max_sweeps:
        delta = 0.0
        for j in range(p):
            v = G[j, j]
            if v <= 0.0:
                continue
            old = beta[j]
            new = _firm(grad[j] + v * old, v, lam, gamma)
            if new != old:
                diff = new - old
                beta[j] = new
                for i in range(p):
                    grad[i] -= G[i, j] * diff
                if abs(diff) > delta:
                    delta = abs(diff)
        sweeps += 1
        if track:
            quad = 0.5 * zz - c @ beta + 0.5 * beta @ (G @ beta)
            pen = 0.0
            for j in range(p):
                b = abs(beta[j])
                if b <= gamma * lam:
                    pen += lam * b - b * b / (2.0 * gamma)
                else:
                    pen += 0.5 * gamma * lam * lam
            hist[sweeps] = quad + pen
        if delta < tol:
            converged = True
            break
    return beta, sweeps, converged, hist[: sweeps + 1]


class _Standardized:
    """Column standardization shared by fitting and path computations."""

    def __init__(self, X, z):
        X = np.asarray(X, dtype=float)
        z = np.asarray(z, dtype=float)
        self.n = X.shape[0]
        self.x_mean = X.mean(axis=0)
        sd = X.std(axis=0)
        self.usable = sd > 1e-12 * np.maximum(1.0, np.abs(X).max(axis=0, initial=0.0))
        self.x_sd = np.where(self.usable, sd, 1.0)
        Xs = (X - self.x_mean) / self.x_sd
        Xs[:, ~self.usable] = 0.0
        self.z_mean = z.mean()
        zc = z - self.z_mean
        self.G = Xs.T @ Xs / self.n
        self.c = Xs.T @ zc / self.n
        self.zz = float(zc @ zc / self.n)

    @property
    def lambda_max(self):
        return float(np.max(np.abs(self.c), initial=0.0))

    def solve(self, lam, gamma, beta0=None, tol=1e-7, max_sweeps=10_000, track=False):
        p = self.c.size
        beta = np.zeros(p) if beta0 is None else np.array(beta0, dtype=float)
        beta, sweeps, converged, hist = _cd(
            np.ascontiguousarray(self.G), np.ascontiguousarray(self.c), self.zz,
            beta, float(lam), float(gamma), tol, max_sweeps, track,
        )
        if not converged:
            raise ConvergenceError(f"coordinate descent did not converge in {max_sweeps} sweeps",
                                   best_params=self.unscale(beta))
        return beta, sweeps, hist

    def objective(self, beta, lam, gamma):
        return float(0.5 * self.zz - self.c @ beta + 0.5 * beta @ self.G @ beta
                     + np.sum(mcp_penalty(beta, lam, gamma)))

    def refine(self, beta, lam, gamma, **kw):
        """Swap search: drop or add one coordinate, rerun CD, keep improvements."""
        f = self.objective(beta, lam, gamma)
        improved = True
        while improved:
            improved = False
            for j in np.flatnonzero(np.diag(self.G) > 0):
                start = beta.copy()
                if start[j] != 0.0:
                    start[j] = 0.0
                else:
                    start[j] = (self.c[j] - self.G[j] @ start) / self.G[j, j]
                    if start[j] == 0.0:
                        continue
                cand, _, _ = self.solve(lam, gamma, start, **kw)
                fc = self.objective(cand, lam, gamma)
                if fc < f - 1e-12 * max(1.0, abs(f)):
                    beta, f, improved = cand, fc, True
        return beta

    def minimize(self, lam, gamma, beta0=None, **kw):
        """Best refined CD solution over several starting points.

        The objective is nonconvex, so CD alone only finds a stationary
        point. Starts: ``beta0`` (zero by default), the warm start carried down
        the lambda path, and the least-squares fit.
        """
        first, sweeps, _ = self.solve(lam, gamma, beta0, **kw)
        starts = [first]
        warm = np.zeros(self.c.size)
        for lam_k in lambda_path(self.lambda_max):
            if lam_k <= lam:
                break
            warm, _, _ = self.solve(lam_k, gamma, warm, **kw)
        starts.append(self.solve(lam, gamma, warm, **kw)[0])
        ls = np.linalg.lstsq(self.G, self.c, rcond=None)[0]
        starts.append(self.solve(lam, gamma, ls, **kw)[0])
        refined = [self.refine(b, lam, gamma, **kw) for b in starts]
        values = [self.objective(b, lam, gamma) for b in refined]
        return refined[int(np.argmin(values))], sweeps

    def unscale(self, beta_std):
        beta = np.where(self.usable, beta_std / self.x_sd, 0.0)
        return beta, float(self.z_mean - self.x_mean @ beta)


def _unpack(design_or_X, z):
    if isinstance(design_or_X, LagDesign):
        d = design_or_X
        return d.matrix, d.response, d
    if z is None:
        raise InputError("a response vector is required with a plain design matrix")
    return np.asarray(design_or_X, float), np.asarray(z, float), None


def fit_mcp(design, lam, gamma=DEFAULT_GAMMA, z=None, beta0=None, tol=1e-7,
            max_sweeps=10_000, return_path=False, search="multistart"):
    """Minimize ``(1/2N)||z - X b||^2 + sum_j MCP(b_j)`` by coordinate descent.

    Columns are standardized to zero mean and unit variance and the response
    centered; returned coefficients are on the original column scale.
    ``design`` is a :class:`LagDesign` or a plain matrix (then pass ``z``).
    ``beta0`` is a start point on the standardized scale.

    ``search="single"`` runs plain CD from ``beta0``. The default
    ``"multistart"`` also starts from the lambda-path warm start and the
    least-squares fit, refines each by single-coordinate swaps, and keeps the
    lowest objective; this escapes most of the poor local minima the
    concave penalty creates.

    With ``return_path=True`` the per-sweep objective values of the first CD
    run (standardized problem, entry 0 is the start point) are returned too.
    """
    if search not in ("single", "multistart"):
        raise ParameterError("search must be 'single' or 'multistart'")
    if gamma <= 1:
        raise ParameterError("gamma must exceed 1")
    if lam < 0:
        raise ParameterError("lambda must be non-negative")
    X, zv, d = _unpack(design, z)
    if X.shape[0] < 1:
        raise LengthError("empty design")
    st = _Standardized(X, zv)
    if search == "multistart":
        beta_std, sweeps = st.minimize(lam, gamma, beta0, tol=tol, max_sweeps=max_sweeps)
        if return_path:
            hist = st.solve(lam, gamma, beta0, tol, max_sweeps, track=True)[2]
    else:
        beta_std, sweeps, hist = st.solve(lam, gamma, beta0, tol, max_sweeps, track=return_path)
    beta, intercept = st.unscale(beta_std)
    model = McpModel(
        beta=beta,
        intercept=intercept,
        lam=float(lam),
        gamma=float(gamma),
        screened_columns=tuple(range(X.shape[1])),
        column_names=d.column_names if d else (),
        lags=d.lags if d else (),
        h=d.h if d else 1,
        k=d.k if d else 0,
        n_sweeps=sweeps,
    )
    if return_path:
        start = np.zeros(st.c.size) if beta0 is None else np.asarray(beta0, float)
        hist[0] = st.objective(start, lam, gamma)
        return model, hist
    return model


def lambda_path(lambda_max, n_lambda=100, ratio=1e-3):
    return lambda_max * np.logspace(0.0, np.log10(ratio), n_lambda)


def select_lambda_cv(design, gamma=DEFAULT_GAMMA, folds=5, z=None, n_lambda=100, ratio=1e-3):
    """Pick ``lambda`` from a log-spaced path by contiguous-block K-fold CV.

    The path runs from ``lambda_max`` (smallest value giving an all-zero fit
    on the full data) down to ``lambda_max * ratio``. Ties go to the larger
    ``lambda``.
    """
    X, zv, _ = _unpack(design, z)
    n = X.shape[0]
    if folds < 2 or n < folds:
        raise ParameterError(f"need 2 <= folds <= rows, got folds={folds}, rows={n}")
    lmax = _Standardized(X, zv).lambda_max
    if not lmax > 0:
        raise DegenerateSeriesError("degenerate design: no column correlates with the response")
    path = lambda_path(lmax, n_lambda, ratio)
    mse = np.zeros(path.size)
    for held in np.array_split(np.arange(n), folds):
        train = np.ones(n, dtype=bool)
        train[held] = False
        st = _Standardized(X[train], zv[train])
        beta = np.zeros(X.shape[1])
        for i, lam in enumerate(path):
            beta, _, _ = st.solve(lam, gamma, beta)
            b, b0 = st.unscale(beta)
            resid = zv[held] - b0 - X[held] @ b
            mse[i] += resid @ resid / n
    return float(path[int(np.argmin(mse))])


# -- forecasting ----------------------------------------------------------------------


def predict_log_return(model, recent, exog_recent=None, h=None, offset=1.0):
    """Predicted ``z_{T+h}`` where ``T`` is the last index of ``recent``."""
    h = model.h if h is None else h
    y, Z = _log_returns(recent, exog_recent, offset)
    T = y.size - 1
    value = model.intercept
    for b, (src, lag) in zip(model.beta, model.lags):
        idx = T + h - lag - WEEK
        if idx < 0:
            raise LengthError(f"recent window too short for lag {lag} at horizon {h}")
        if b != 0.0:
            value += b * Z[idx, src]
    return float(value)


def forecast_mcp(model, recent, exog_recent=None, h=None, earlier=None, offset=1.0):
    """Count-scale forecast ``y_{T+h} = (y_{T+h-7} + 1) exp(z_{T+h}) - 1``.

    For ``h > 7`` the base value lies in the future and is taken from
    ``earlier``, the forecasts for horizons ``1 .. h - 1``.
    """
    h = model.h if h is None else h
    y = np.asarray(getattr(recent, "values", recent), dtype=float).ravel()
    z_hat = predict_log_return(model, y, exog_recent, h, offset)
    base_idx = y.size - 1 + h - WEEK
    if base_idx < y.size:
        base = y[base_idx]
    else:
        if earlier is None or len(earlier) < base_idx - y.size + 1:
            raise InputError(f"horizon {h} needs the forecast for horizon {h - WEEK}")
        base = earlier[base_idx - y.size]
    return max((base + offset) * np.exp(z_hat) - offset, 0.0)


def _intercept_only(design):
    return McpModel(beta=np.zeros(design.n_columns), intercept=float(design.response.mean()),
                    lam=float("inf"), gamma=DEFAULT_GAMMA,
                    screened_columns=tuple(range(design.n_columns)),
                    column_names=design.column_names, lags=design.lags, h=design.h, k=design.k)


def fit_horizon(target, exog, h, k=14, n_screen=7, gamma=DEFAULT_GAMMA, folds=5,
                screen_target_lags=True, exog_names=None, offset=1.0):
    """Design, screening, CV and final fit for one horizon."""
    design = build_lag_design(target, exog, h, k, exog_names, offset)
    full_columns = design.column_names
    m = min(n_screen, design.n_columns)
    try:
        screened = sis_screen(design, m, screen_target_lags)
    except ParameterError:
        screened = design
    try:
        lam = select_lambda_cv(screened, gamma, min(folds, len(screened.response)))
    except DegenerateSeriesError:
        model = _intercept_only(screened)
    else:
        model = fit_mcp(screened, lam, gamma)
    kept = tuple(full_columns.index(name) for name in screened.column_names)
    return replace(model, screened_columns=kept)


class MCPRegressor(BaseEstimator, RegressorMixin):
    """Screen-then-penalize linear regressor on an arbitrary feature matrix.

    ``lam=None`` selects the penalty by contiguous K-fold CV;
    ``n_screen=None`` disables screening.
    """

    def __init__(self, lam=None, gamma=DEFAULT_GAMMA, n_screen=None, folds=5):
        self.lam = lam
        self.gamma = gamma
        self.n_screen = n_screen
        self.folds = folds

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        cols = np.arange(X.shape[1])
        if self.n_screen is not None and self.n_screen < X.shape[1]:
            corr = _abs_correlations(X, y)
            cols = np.sort(np.argsort(-corr, kind="stable")[: self.n_screen])
        Xs = X[:, cols]
        lam = self.lam
        if lam is None:
            lam = select_lambda_cv(Xs, self.gamma, self.folds, z=y)
        model = fit_mcp(Xs, lam, self.gamma, z=y)
        self.coef_ = np.zeros(X.shape[1])
        self.coef_[cols] = model.beta
        self.intercept_ = model.intercept
        self.lambda_ = lam
        self.support_ = cols
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X)
        return X @ self.coef_ + self.intercept_


class MCPForecaster(BaseEstimator):
    """One MCP model per horizon on weekly log-returns, forecasting counts.

    ``fit(y, X)`` takes raw daily counts; ``predict(h)`` returns forecasts
    for horizons ``1 .. h``. Future exogenous values are not needed since
    every regressor is lagged by at least ``h``.
    """

    def __init__(self, k=14, n_screen=7, gamma=DEFAULT_GAMMA, folds=5,
                 screen_target_lags=True, h_max=14, exog_names=None):
        self.k = k
        self.n_screen = n_screen
        self.gamma = gamma
        self.folds = folds
        self.screen_target_lags = screen_target_lags
        self.h_max = h_max
        self.exog_names = exog_names

    def fit(self, y, X=None):
        self.y_ = np.asarray(y, dtype=float)
        self.X_ = None if X is None else np.asarray(X, dtype=float)
        self.models_ = [
            fit_horizon(self.y_, self.X_, h, self.k, self.n_screen, self.gamma, self.folds,
                        self.screen_target_lags, self.exog_names)
            for h in range(1, self.h_max + 1)
        ]
        return self

    def predict(self, h, X=None):
        check_is_fitted(self, "models_")
        if h > len(self.models_):
            raise ParameterError(f"fitted for horizons up to {len(self.models_)}, asked {h}")
        out = []
        for model in self.models_[:h]:
            out.append(forecast_mcp(model, self.y_, self.X_, model.h, out))
        return np.array(out)

    def report(self):
        return "".join(m.report() + "\n" for m in self.models_)
