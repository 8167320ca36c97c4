import numpy as np
import pytest

from exogcast import var
from exogcast.exceptions import CollinearityError, LengthError
from oracles import var_normal_equations


def simulate_var(lags, delta, T, seed, burn=200):
    rng = np.random.default_rng(seed)
    n = len(delta)
    y = np.zeros((T + burn, n))
    for t in range(len(lags), T + burn):
        y[t] = delta + sum(B @ y[t - i] for i, B in enumerate(lags, start=1)) + rng.normal(size=n)
    return y[burn:]


@pytest.mark.parametrize("seed", range(10))
def test_matches_normal_equations(seed):
    rng = np.random.default_rng(seed)
    n, q = int(rng.integers(1, 3)), int(rng.integers(1, 3))
    T = int(rng.integers(n * q + 8, 31))
    data = rng.normal(size=(T, n)).cumsum(axis=0) * 0.3 + rng.normal(size=(T, n))
    m = var.fit_var(data, q)
    delta, mats = var_normal_equations(data, q)
    np.testing.assert_allclose(m.delta, delta, atol=1e-8)
    for got, want in zip(m.lag_matrices, mats):
        np.testing.assert_allclose(got, want, atol=1e-8)


def test_univariate_matches_ar_ols():
    rng = np.random.default_rng(1)
    y = rng.normal(size=80).cumsum()
    m = var.fit_var(y[:, None], 2)
    A = np.column_stack([np.ones(78), y[1:-1], y[:-2]])
    coef = np.linalg.lstsq(A, y[2:], rcond=None)[0]
    assert m.delta[0] == pytest.approx(coef[0], abs=1e-10)
    assert m.lag_matrices[0][0, 0] == pytest.approx(coef[1], abs=1e-10)
    # oldest lag is stored first
    assert m.Phi[0][0, 0] == pytest.approx(coef[2], abs=1e-10)


def test_residuals_orthogonal_to_regressors():
    data = simulate_var([np.array([[0.5, 0.1], [0.0, 0.3]])], np.array([0.2, -0.1]), 300, 3)
    m = var.fit_var(data, 2)
    A = np.column_stack([np.ones(298), data[1:-1], data[:-2]])
    resid = data[2:] - m.delta - data[1:-1] @ m.lag_matrices[0].T - data[:-2] @ m.lag_matrices[1].T
    scaled = (A / np.linalg.norm(A, axis=0)).T @ (resid / np.linalg.norm(resid, axis=0))
    assert np.abs(scaled).max() < 1e-8
    assert np.all(np.linalg.eigvalsh(m.sigma) >= -1e-12)


def test_var1_recovery():
    data = simulate_var([0.5 * np.eye(2)], np.zeros(2), 1000, 4)
    m = var.fit_var(data, 1)
    np.testing.assert_allclose(m.lag_matrices[0], 0.5 * np.eye(2), atol=0.1)


def test_constant_panel_collinear():
    with pytest.raises(CollinearityError):
        var.fit_var(np.ones((30, 2)), 1)


def test_too_short():
    with pytest.raises(LengthError):
        var.fit_var(np.random.default_rng(0).normal(size=(5, 2)), 2)


def test_bic_recovers_order_two():
    lags = [np.array([[0.4, 0.1], [0.0, 0.3]]), np.array([[0.3, 0.0], [0.1, -0.3]])]
    data = simulate_var(lags, np.array([0.1, 0.0]), 2000, 11)
    assert var.select_order_bic(data, 8) == 2


def test_bic_white_noise_selects_one():
    data = np.random.default_rng(5).normal(size=(400, 3))
    assert var.select_order_bic(data, 6) == 1
    m = var.fit_var(data, 1)
    assert np.abs(m.lag_matrices[0]).max() < 0.2


def test_bic_single_candidate():
    assert var.select_order_bic(np.random.default_rng(0).normal(size=(20, 2)), 1) == 1


def test_forecast_intercept_only():
    m = var.VarModel(1, np.array([1.0, -2.0]), (np.zeros((2, 2)),), np.eye(2))
    for h in (1, 5, 14):
        np.testing.assert_array_equal(var.forecast_var(m, np.zeros((3, 2)), h), [1.0, -2.0])


def test_forecast_scalar_recursion():
    m = var.VarModel(1, np.zeros(1), (np.array([[0.5]]),), np.eye(1))
    for h in range(1, 8):
        assert var.forecast_var(m, [[1.0]], h)[0] == pytest.approx(0.5**h)


def test_forecast_permutation():
    data = simulate_var([np.array([[0.5, 0.2], [0.1, 0.3]])], np.array([1.0, 0.0]), 200, 6)
    a = var.forecast_var(var.fit_var(data, 2), data, 4)
    b = var.forecast_var(var.fit_var(data[:, ::-1], 2), data[:, ::-1], 4)
    np.testing.assert_allclose(a, b[::-1], atol=1e-10)


def test_forecast_converges_to_mean():
    B = np.array([[0.5, 0.2], [0.1, 0.3]])
    delta = np.array([1.0, 0.5])
    m = var.VarModel(1, delta, (B,), np.eye(2))
    mean = np.linalg.solve(np.eye(2) - B, delta)
    assert np.max(np.abs(np.linalg.eigvals(m.companion()))) < 1
    np.testing.assert_allclose(var.forecast_var(m, [[10.0, -10.0]], 200), mean, atol=1e-10)


def test_forecast_short_window():
    m = var.VarModel(3, np.zeros(1), tuple(np.zeros((1, 1)) for _ in range(3)), np.eye(1))
    with pytest.raises(LengthError):
        var.forecast_var(m, [[1.0], [2.0]], 1)


def test_forecaster_on_counts():
    rng = np.random.default_rng(2)
    t = np.arange(200)
    y = np.round(100 + 20 * np.sin(2 * np.pi * t / 7) + rng.normal(scale=3, size=200))
    X = np.column_stack([np.round(500 + 5 * t + rng.normal(size=200)), np.full(200, 3.0)])
    est = var.VARForecaster(q_max=10).fit(y, X)
    # the constant exogenous column is dropped
    assert est.model_.n_vars == 2
    pred = est.predict(14)
    assert pred.shape == (14,) and np.all(pred >= 0)
    assert np.mean(np.abs(pred - y[-14:])) < 40
