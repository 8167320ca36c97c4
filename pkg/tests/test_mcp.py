import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from exogcast import mcp
from exogcast.exceptions import (
    ConvergenceError,
    InputError,
    LengthError,
    ParameterError,
)
from exogcast.series import weekly_log_return
from oracles import mcp_exhaustive, mcp_objective


def standardized_problem(seed, n=20, p=6, signal=(1.5, -1.0)):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, p))
    X = (X - X.mean(axis=0)) / X.std(axis=0)
    z = X[:, : len(signal)] @ np.array(signal) + rng.normal(scale=0.5, size=n)
    return X, z - z.mean()


def test_penalty_values():
    assert mcp.mcp_penalty(0.0, 1.0) == 0.0
    assert mcp.mcp_penalty(1.0, 1.0, 3.0) == pytest.approx(1.0 - 1.0 / 6.0)
    assert mcp.mcp_penalty(10.0, 1.0, 3.0) == pytest.approx(1.5)
    # continuous at the knot |b| = gamma * lam
    assert mcp.mcp_penalty(3.0, 1.0, 3.0) == pytest.approx(1.5)


def test_penalty_rejects_gamma():
    with pytest.raises(ParameterError):
        mcp.mcp_penalty(1.0, 1.0, 1.0)


@settings(max_examples=100, deadline=None)
@given(st.floats(-50, 50), st.floats(0, 5), st.floats(1.01, 10))
def test_penalty_bounded_and_symmetric(b, lam, gamma):
    p = mcp.mcp_penalty(b, lam, gamma)
    assert 0 <= p <= 0.5 * gamma * lam * lam + 1e-12
    assert p == mcp.mcp_penalty(-b, lam, gamma)


def test_single_column_firm_threshold():
    rng = np.random.default_rng(0)
    x = rng.normal(size=50)
    x = (x - x.mean()) / x.std()
    lam, gamma = 0.2, 3.0
    for scale in (0.1, 0.4, 1.5):
        z = scale * x + rng.normal(scale=0.3, size=50)
        z -= z.mean()
        u = x @ z / 50
        if abs(u) <= lam:
            expected = 0.0
        elif abs(u) <= gamma * lam:
            expected = np.sign(u) * (abs(u) - lam) / (1 - 1 / gamma)
        else:
            expected = u
        fit = mcp.fit_mcp(x[:, None], lam, gamma, z=z)
        assert fit.beta[0] == pytest.approx(expected, abs=1e-10)


@pytest.mark.parametrize("seed", range(8))
def test_cd_matches_exhaustive_minimum(seed):
    X, z = standardized_problem(seed)
    lam = 0.1 + 0.05 * seed
    fit = mcp.fit_mcp(X, lam, 3.0, z=z)
    best_val, best_beta = mcp_exhaustive(X, z, lam, 3.0)
    cd_val = mcp_objective(X, z, fit.beta, lam, 3.0)
    assert cd_val == pytest.approx(best_val, abs=1e-6)
    np.testing.assert_allclose(fit.beta, best_beta, atol=1e-4)


def test_lambda_above_max_gives_zero():
    X, z = standardized_problem(1)
    lmax = np.max(np.abs(X.T @ z / len(z)))
    fit = mcp.fit_mcp(X, lmax * 1.0001, 3.0, z=z)
    assert np.all(fit.beta == 0)
    assert fit.intercept == pytest.approx(z.mean())


def test_lambda_zero_is_ols():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(40, 3)) * [1.0, 3.0, 0.5] + [2.0, -1.0, 0.0]
    z = 1.0 + X @ [0.5, -0.2, 2.0] + rng.normal(scale=0.1, size=40)
    fit = mcp.fit_mcp(X, 0.0, 3.0, z=z)
    A = np.column_stack([np.ones(40), X])
    ols = np.linalg.lstsq(A, z, rcond=None)[0]
    np.testing.assert_allclose(fit.beta, ols[1:], atol=1e-6)
    assert fit.intercept == pytest.approx(ols[0], abs=1e-6)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.01, 0.8))
def test_sweeps_never_increase_objective(seed, lam):
    X, z = standardized_problem(seed, n=30, p=8)
    _, hist = mcp.fit_mcp(X, lam, 3.0, z=z, return_path=True)
    assert np.all(np.diff(hist) <= 1e-12 * max(1.0, abs(hist[0])))


def test_zero_variance_column_ignored():
    X, z = standardized_problem(2)
    X = np.column_stack([X, np.full(len(z), 4.0)])
    fit = mcp.fit_mcp(X, 0.1, z=z)
    assert fit.beta[-1] == 0.0


def test_convergence_error():
    X, z = standardized_problem(3)
    X[:, 1] = X[:, 0] + 1e-3 * X[:, 1]
    with pytest.raises(ConvergenceError) as info:
        mcp.fit_mcp(X, 0.0, z=z, max_sweeps=2)
    assert info.value.best_params is not None


def test_lag_design_layout():
    rng = np.random.default_rng(0)
    y = rng.integers(0, 50, size=60).astype(float)
    x = rng.integers(0, 50, size=60).astype(float)
    h, k = 3, 4
    d = mcp.build_lag_design(y, x[:, None], h=h, k=k, exog_names=["mob"])
    z, zx = weekly_log_return(y), weekly_log_return(x)
    assert d.matrix.shape == (60 - 7 - (h + k - 1), 2 * k)
    assert d.column_names[0] == "z[t-3]" and d.column_names[k] == "mob[t-3]"
    t = d.rows[5]
    assert d.response[5] == z[t - 7]
    for j, (src, lag) in enumerate(d.lags):
        series = z if src == 0 else zx
        assert d.matrix[5, j] == series[t - lag - 7]


def test_lag_design_too_short():
    with pytest.raises(LengthError):
        mcp.build_lag_design(np.ones(20), h=1, k=12)


def test_sis_keeps_top_columns_in_order():
    rng = np.random.default_rng(1)
    y = np.exp(rng.normal(size=200).cumsum() * 0.1) * 100
    d = mcp.build_lag_design(y, h=1, k=14)
    s = mcp.sis_screen(d, 7)
    assert s.n_columns == 7
    corr = [abs(np.corrcoef(d.matrix[:, j], d.response)[0, 1]) for j in range(14)]
    kept = [d.column_names.index(name) for name in s.column_names]
    assert kept == sorted(kept)
    assert min(corr[j] for j in kept) >= max(corr[j] for j in range(14) if j not in kept)


def test_sis_excludes_zero_variance_and_forces_target_lags():
    rng = np.random.default_rng(2)
    y = rng.integers(1, 80, size=80).astype(float)
    X = np.column_stack([rng.integers(1, 80, size=80), np.full(80, 5.0)]).astype(float)
    d = mcp.build_lag_design(y, X, h=1, k=3)
    s = mcp.sis_screen(d, 3)
    assert all(not name.startswith("x2") for name in s.column_names)
    s2 = mcp.sis_screen(d, 2, screen_target_lags=False)
    assert [n for n in s2.column_names if n.startswith("z")] == ["z[t-1]", "z[t-2]", "z[t-3]"]
    assert sum(n.startswith("x1") for n in s2.column_names) == 2


def test_sis_too_few_columns():
    d = mcp.build_lag_design(np.arange(1.0, 40.0), h=1, k=3)
    with pytest.raises(ParameterError):
        mcp.sis_screen(d, 5)


def test_cv_pure_noise_selects_sparse_model():
    rng = np.random.default_rng(12)
    X = rng.normal(size=(150, 7))
    z = rng.normal(size=150)
    lam = mcp.select_lambda_cv(X, z=z)
    fit = mcp.fit_mcp(X, lam, z=z)
    assert np.all(np.abs(fit.beta) < 0.2)


def test_cv_recovers_strong_signal():
    rng = np.random.default_rng(13)
    X = rng.normal(size=(200, 7))
    z = 2.0 * X[:, 2] + rng.normal(scale=0.3, size=200)
    lam = mcp.select_lambda_cv(X, z=z)
    fit = mcp.fit_mcp(X, lam, z=z)
    assert fit.beta[2] == pytest.approx(2.0, abs=0.1)
    assert np.count_nonzero(fit.beta) <= 3


def test_cv_rejects_bad_folds():
    X, z = standardized_problem(0)
    with pytest.raises(ParameterError):
        mcp.select_lambda_cv(X, folds=1, z=z)


def test_forecast_intercept_only_model():
    # zero predicted log-return repeats the value from one week earlier
    y = np.arange(1.0, 41.0)
    d = mcp.build_lag_design(y, h=1, k=3)
    model = mcp.McpModel(np.zeros(3), 0.0, 1.0, 3.0, (0, 1, 2), d.column_names, d.lags, 1, 3)
    assert mcp.forecast_mcp(model, y) == pytest.approx(y[-7])
    m9 = mcp.McpModel(np.zeros(3), 0.0, 1.0, 3.0, (0, 1, 2), d.column_names, d.lags, 9, 3)
    earlier = np.full(8, 5.0)
    assert mcp.forecast_mcp(m9, y, earlier=earlier) == pytest.approx(5.0)
    with pytest.raises(InputError):
        mcp.forecast_mcp(m9, y)


def test_forecast_uses_lagged_log_return():
    rng = np.random.default_rng(4)
    y = rng.integers(5, 50, size=40).astype(float)
    z = weekly_log_return(y)
    d = mcp.build_lag_design(y, h=2, k=2)
    model = mcp.McpModel(np.array([0.5, 0.0]), 0.1, 0.1, 3.0, (0, 1), d.column_names, d.lags, 2, 2)
    T = 39
    z_hat = 0.1 + 0.5 * z[T + 2 - 2 - 7]
    assert mcp.forecast_mcp(model, y) == pytest.approx((y[T + 2 - 7] + 1) * np.exp(z_hat) - 1)


def test_forecaster_recovers_weekly_pattern():
    t = np.arange(200)
    y = np.round(100 + 30 * np.sin(2 * np.pi * t / 7))
    est = mcp.MCPForecaster(k=7, n_screen=3)
    pred = est.fit(y).predict(14)
    truth = np.round(100 + 30 * np.sin(2 * np.pi * np.arange(200, 214) / 7))
    np.testing.assert_allclose(pred, truth, rtol=1e-6)
    assert "lambda" in est.report()


def test_forecaster_with_exog_runs():
    rng = np.random.default_rng(9)
    n = 150
    x = np.exp(np.cumsum(rng.normal(scale=0.05, size=n))) * 1000
    y = np.round(np.r_[np.full(3, 50.0), 0.05 * x[:-3]] + rng.poisson(3, size=n))
    est = mcp.MCPForecaster(k=14, n_screen=7)
    pred = est.fit(y, x[:, None]).predict(14)
    assert pred.shape == (14,) and np.all(np.isfinite(pred)) and np.all(pred >= 0)
    assert est.get_params()["gamma"] == 3.0


def test_regressor_sklearn_api():
    from sklearn.base import clone

    rng = np.random.default_rng(3)
    X = rng.normal(size=(120, 10))
    y = 3.0 * X[:, 4] - 2.0 * X[:, 7] + rng.normal(scale=0.2, size=120)
    reg = mcp.MCPRegressor(n_screen=5).fit(X, y)
    assert set(np.flatnonzero(reg.coef_)) >= {4, 7}
    assert reg.score(X, y) > 0.95
    assert clone(reg).get_params() == reg.get_params()


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.02, 1.0))
def test_multistart_never_worse_than_single_start(seed, frac):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(20, 6))
    X[:, 1] = X[:, 0] + 0.3 * X[:, 1]
    z = X[:, :3] @ rng.normal(size=3) + rng.normal(size=20)
    lam = frac * np.abs(((X - X.mean(0)) / X.std(0)).T @ (z - z.mean()) / 20).max()
    single = mcp.fit_mcp(X, lam, z=z, search="single")
    multi = mcp.fit_mcp(X, lam, z=z)
    # the penalty acts on the standardized scale
    sd = X.std(0)
    Xs, zc = (X - X.mean(0)) / sd, z - z.mean()
    assert mcp.mcp_objective(Xs, zc, multi.beta * sd, lam) <= \
        mcp.mcp_objective(Xs, zc, single.beta * sd, lam) + 1e-8
