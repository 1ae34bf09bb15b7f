import math

import numpy as np
import pytest

from commodity_risk.arima import (
    ArimaFit,
    ArimaSpec,
    coefs_to_pacf,
    conditional_loglik,
    fit_arima,
    forecast_arima,
    one_step_predictions,
    pacf_to_coefs,
    psi_weights,
    residual_diagnostics,
    simulate_arima,
)
from commodity_risk.errors import ExogLengthMismatch, MissingFutureExog, TooShort
from commodity_risk.numkit import aic, normal_quantile


def manual_fit(ar, ma, series, d=1, sigma2=1.0, residuals=None):
    spec = ArimaSpec(len(ar), d, len(ma))
    return ArimaFit(
        spec=spec,
        ar=np.asarray(ar, float),
        ma=np.asarray(ma, float),
        intercept=None,
        reg_coef=None,
        sigma2=sigma2,
        loglik=0.0,
        aic=0.0,
        residuals=np.zeros(len(series) - d) if residuals is None else residuals,
        fitted=np.array([]),
        series=np.asarray(series, float),
    )


def test_white_noise_mean():
    y = 5.0 + np.random.default_rng(1).normal(size=2000)
    fit = fit_arima(y, ArimaSpec(0, 0, 0, include_intercept=True))
    se = math.sqrt(fit.sigma2 / y.size)
    assert abs(fit.intercept - y.mean()) <= 2 * se
    assert fit.ar.size == 0 and fit.ma.size == 0


def test_ar1_recovery():
    est = [fit_arima(simulate_arima([0.5], d=1, n=2000, seed=s), ArimaSpec(1, 1, 0)).ar[0] for s in range(20)]
    assert all(0.45 <= e <= 0.55 for e in est)


def test_arma_recovery():
    fit = fit_arima(simulate_arima([0.6], [-0.3], d=1, n=4000, seed=7), ArimaSpec(1, 1, 1))
    assert fit.ar[0] == pytest.approx(0.6, abs=0.1)
    assert fit.ma[0] == pytest.approx(-0.3, abs=0.1)


def test_aic_consistency():
    y = simulate_arima([0.3], d=1, n=500, seed=2)
    for spec in (ArimaSpec(1, 1, 0), ArimaSpec(2, 1, 1), ArimaSpec(0, 0, 2, include_intercept=True)):
        fit = fit_arima(y, spec)
        assert fit.aic == aic(fit.loglik, spec.n_params)


def test_param_count():
    assert ArimaSpec(1, 1, 0).n_params == 2
    assert ArimaSpec(2, 1, 1, exogenous=True).n_params == 5
    assert ArimaSpec(0, 0, 5, include_intercept=True, exogenous=True).n_params == 8


def test_h1_continuity():
    r = np.random.default_rng(3)
    x = 100 + np.cumsum(r.normal(size=400))
    y = 0.8 * x + simulate_arima([0.4], [0.2], d=1, n=400, seed=3)
    for spec in (ArimaSpec(2, 1, 1), ArimaSpec(1, 1, 0, exogenous=True), ArimaSpec(0, 0, 5, True, True)):
        exog = x if spec.exogenous else None
        fit = fit_arima(y, spec, exog)
        fx = [x[-1] + 0.7] if spec.exogenous else None
        fc = forecast_arima(fit, 1, fx)
        ext_y = np.r_[y, 12345.0]
        ext_x = np.r_[x, fx] if spec.exogenous else None
        pred = one_step_predictions(fit, ext_y, ext_x)[-1]
        assert fc.points[0] == pytest.approx(pred, abs=1e-8)


def test_zero_reg_coef_matches_plain():
    y = simulate_arima([0.4], d=1, n=300, seed=5)
    x = np.random.default_rng(5).normal(size=300)
    plain = conditional_loglik(y, ArimaSpec(1, 1, 0), ar=[0.4])
    frozen = conditional_loglik(y, ArimaSpec(1, 1, 0, exogenous=True), ar=[0.4], reg_coef=0.0, exog=x)
    assert frozen == pytest.approx(plain, abs=1e-6)


def test_random_walk_forecast():
    series = np.array([10.0, 11.0, 10.5, 12.0])
    fc = forecast_arima(manual_fit([], [], series, sigma2=4.0), 6)
    assert np.all(fc.points == 12.0)
    width = fc.upper - fc.points
    assert np.allclose(width, normal_quantile(0.95) * 2.0 * np.sqrt(np.arange(1, 7)), atol=1e-12)


def brute_force_points(ar, ma, series, resid, h):
    """Iterate the level equation y_t = y_{t-1} + w_t with the ARMA on w."""
    y = list(series)
    w = list(np.diff(series))
    e = list(resid)
    for _ in range(h):
        wt = sum(a * w[-1 - i] for i, a in enumerate(ar)) + sum(m * e[-1 - k] for k, m in enumerate(ma))
        w.append(wt)
        e.append(0.0)
        y.append(y[-1] + wt)
    return np.array(y[len(series) :])


@pytest.mark.parametrize(
    "ar,ma,series",
    [
        ([0.0894], [], [150.0, 150.4, 150.1, 151.0]),
        ([0.0894], [], [80.0, 79.0]),
        ([-0.6], [], [1.0, 3.0, 2.0, 5.0, 4.5]),
        ([0.6272, 0.0037], [-0.5445], [100.0, 100.5, 101.5, 101.0, 102.2]),
        ([0.9], [0.3], [10.0, 10.0, 10.2, 10.1]),
    ],
)
def test_forecast_against_state_recursion(ar, ma, series):
    resid = np.linspace(-0.3, 0.4, len(series) - 1)
    fit = manual_fit(ar, ma, series, residuals=resid)
    assert np.allclose(forecast_arima(fit, 8).points, brute_force_points(ar, ma, series, resid, 8), atol=1e-12)


def test_ar1_step_two_pattern():
    series = [150.0, 150.4, 151.0]
    phi = 0.0894
    pts = forecast_arima(manual_fit([phi], [], series), 2).points
    delta = 0.6
    assert pts[0] == pytest.approx(151.0 + phi * delta)
    assert pts[1] == pytest.approx(151.0 + (phi + phi**2) * delta)


def test_psi_weights_random_walk_and_ar():
    assert np.allclose(psi_weights([], [], 1, 5), 1.0)
    phi = 0.5
    expected = [(1 - phi ** (j + 1)) / (1 - phi) for j in range(6)]
    assert np.allclose(psi_weights([phi], [], 1, 6), expected)
    assert np.allclose(psi_weights([], [0.4], 0, 4), [1, 0.4, 0, 0])


def test_pacf_round_trip():
    r = np.array([0.5, -0.3, 0.8])
    assert np.allclose(coefs_to_pacf(pacf_to_coefs(r)), r, atol=1e-12)


@pytest.mark.parametrize("seed", range(10))
def test_roots_outside_unit_circle(seed):
    r = np.random.default_rng(seed)
    y = 100 + np.cumsum(r.standard_t(3, size=300))
    fit = fit_arima(y, ArimaSpec(2, 1, 1))
    assert np.all(np.abs(np.roots(np.r_[1.0, -fit.ar][::-1])) > 1)
    assert np.all(np.abs(np.roots(np.r_[1.0, fit.ma][::-1])) > 1)


def test_arimax_recovers_regression():
    r = np.random.default_rng(8)
    x = 100 + np.cumsum(r.normal(size=1000))
    y = 3.0 + 0.975 * x + simulate_arima([], [0.3, 0.2], d=0, n=1000, seed=8, start=0.0)
    fit = fit_arima(y, ArimaSpec(0, 0, 5, include_intercept=True, exogenous=True), x)
    assert fit.reg_coef == pytest.approx(0.975, abs=0.03)


def test_missing_future_exog():
    x = np.random.default_rng(0).normal(size=100)
    y = np.cumsum(x) + 50
    fit = fit_arima(y, ArimaSpec(1, 1, 0, exogenous=True), x)
    with pytest.raises(MissingFutureExog):
        forecast_arima(fit, 3)
    with pytest.raises(MissingFutureExog):
        forecast_arima(fit, 3, [1.0, 2.0])


def test_input_errors():
    with pytest.raises(TooShort):
        fit_arima(np.arange(12.0), ArimaSpec(1, 1, 1))
    with pytest.raises(ExogLengthMismatch):
        fit_arima(np.arange(50.0), ArimaSpec(1, 1, 0, exogenous=True), np.arange(49.0))


def test_diagnostics_size():
    passes = 0
    for s in range(200):
        fit = fit_arima(simulate_arima([0.5], d=1, n=500, seed=1000 + s), ArimaSpec(1, 1, 0))
        passes += residual_diagnostics(fit, 10)[1].p_value > 0.05
    assert 0.90 <= passes / 200 <= 0.99


def test_diagnostics_power():
    y = simulate_arima([0.9], d=0, n=1000, seed=4, start=0.0)
    fit = fit_arima(y, ArimaSpec(0, 0, 0, include_intercept=True))
    acf_res, lb = residual_diagnostics(fit, 10)
    assert lb.p_value < 0.01
    assert lb.dof == 10
    assert acf_res.correlations[1] > 0.8
