import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import kurtosis

from commodity_risk.errors import StationarityViolated, TooShort
from commodity_risk.garch import (
    GarchFit,
    GarchParams,
    fit_arma_garch,
    forecast_arma_garch,
    garch_filter,
    simulate_garch,
    variance_forecast,
)
from commodity_risk.numkit import normal_quantile

REFERENCE = GarchParams(omega=0.012223, alpha1=0.080113, beta1=0.903628, mu=0.053891, ar1=0.684777, ma1=-0.635453)


def fit_from(params: GarchParams, series, s2_last=1.0, e_last=0.0) -> GarchFit:
    series = np.asarray(series, float)
    resid = np.zeros(series.size)
    resid[-1] = e_last
    s2 = np.full(series.size, s2_last)
    return GarchFit(
        mu=params.mu,
        ar1=params.ar1,
        ma1=params.ma1,
        omega=params.omega,
        alpha1=params.alpha1,
        beta1=params.beta1,
        loglik=0.0,
        aic_total=0.0,
        aic_per_obs=0.0,
        sigma2_path=s2,
        residuals=resid,
        fitted=series - resid,
        series=series,
    )


def test_variance_limit_reference_params():
    limit = 0.012223 / (1 - 0.983741)
    assert limit == pytest.approx(0.7518, abs=1e-4)
    # a last variance near the stationary level, as in a fitted path
    fit = fit_from(REFERENCE, [0.1, -0.2, 0.05], s2_last=0.76, e_last=0.8)
    assert variance_forecast(fit, 500)[-1] == pytest.approx(limit, abs=1e-6)


def test_variance_gap_decays_geometrically():
    fit = fit_from(REFERENCE, [0.1, -0.2, 0.05], s2_last=3.0, e_last=1.5)
    s2 = variance_forecast(fit, 500)
    limit = fit.unconditional_variance
    assert s2[-1] - limit == pytest.approx(fit.persistence**499 * (s2[0] - limit), rel=1e-9)


def test_no_arch_no_garch_is_constant():
    fit = fit_from(GarchParams(0.4, 0.0, 0.0), [0.0, 1.0, -1.0], s2_last=2.0, e_last=3.0)
    assert np.all(variance_forecast(fit, 20) == 0.4)


@given(st.floats(0.01, 5.0), st.floats(0.0, 4.0), st.floats(0.0, 0.3), st.floats(0.0, 0.69))
def test_variance_forecast_monotone(s2_last, e_last, a, b):
    fit = fit_from(GarchParams(0.05, a, b), [0.0, 0.0], s2_last=s2_last, e_last=e_last)
    s2 = variance_forecast(fit, 60)
    steps = np.diff(s2)
    assert np.all(steps >= -1e-12) or np.all(steps <= 1e-12)
    target = fit.unconditional_variance
    assert abs(s2[-1] - target) <= abs(s2[0] - target) + 1e-12


def test_filter_recursion_by_hand():
    p = GarchParams(omega=0.1, alpha1=0.2, beta1=0.5, mu=0.05, ar1=0.3, ma1=-0.2)
    r = np.array([0.4, -0.1, 0.25, 0.0])
    ll, eps, s2 = garch_filter(r, p, s2_0=0.6)
    e_prev = dev_prev = 0.0
    v = 0.6
    manual_ll = 0.0
    for t, x in enumerate(r):
        if t:
            v = 0.1 + 0.2 * e_prev**2 + 0.5 * v
        e = x - 0.05 - 0.3 * dev_prev + 0.2 * e_prev
        assert eps[t] == pytest.approx(e, abs=1e-14)
        assert s2[t] == pytest.approx(v, abs=1e-14)
        manual_ll += -0.5 * (np.log(2 * np.pi * v) + e * e / v)
        e_prev, dev_prev = e, x - 0.05
    assert ll == pytest.approx(manual_ll, abs=1e-12)


def test_simulate_deterministic():
    a = simulate_garch(REFERENCE, 500, seed=7)
    assert np.array_equal(a, simulate_garch(REFERENCE, 500, seed=7))
    assert not np.array_equal(a, simulate_garch(REFERENCE, 500, seed=8))


def test_simulate_iid_when_degenerate():
    x = simulate_garch(GarchParams(0.25, 0.0, 0.0), 20_000, seed=1)
    assert np.var(x) == pytest.approx(0.25, rel=0.05)
    assert abs(kurtosis(x)) < 0.15


def test_simulate_heavy_tails():
    x = simulate_garch(GarchParams(0.012, 0.08, 0.90), 20_000, seed=2)
    assert kurtosis(x, fisher=False) > 3


def test_simulate_ergodic_variance():
    x = simulate_garch(GarchParams(0.012, 0.08, 0.90), 100_000, seed=3)
    assert np.var(x) == pytest.approx(0.012 / 0.02, rel=0.10)


def test_simulate_rejects_nonstationary():
    with pytest.raises(StationarityViolated):
        simulate_garch(GarchParams(0.01, 0.5, 0.55), 10, seed=0)


def test_homoskedastic_fit():
    x = np.random.default_rng(4).normal(scale=0.7, size=3000)
    fit = fit_arma_garch(x)
    assert fit.alpha1 < 0.03
    assert np.mean(fit.sigma2_path) == pytest.approx(np.var(x), rel=0.05)
    assert np.std(fit.sigma2_path) / np.mean(fit.sigma2_path) < 0.1


def test_recovery_smoke():
    for seed in range(3):
        x = simulate_garch(GarchParams(0.012, 0.08, 0.90), 5000, seed=100 + seed)
        fit = fit_arma_garch(x)
        assert fit.alpha1 == pytest.approx(0.08, abs=0.03)
        assert fit.beta1 == pytest.approx(0.90, abs=0.03)
        assert fit.omega == pytest.approx(0.012, rel=0.3)
        assert np.all(fit.sigma2_path > 0)
        assert fit.persistence < 1


def test_fit_beats_seed():
    x = simulate_garch(REFERENCE, 1500, seed=9)
    fit = fit_arma_garch(x)
    seed = GarchParams(0.1 * np.var(x), 0.09, 0.81, float(np.mean(x)), 0.1, 0.0)
    assert fit.loglik >= garch_filter(x, seed)[0]


def test_aic_labels():
    x = simulate_garch(REFERENCE, 400, seed=10)
    fit = fit_arma_garch(x)
    assert fit.aic_total == pytest.approx(12 - 2 * fit.loglik)
    assert fit.aic_per_obs == pytest.approx(fit.aic_total / 400)


def test_too_short():
    with pytest.raises(TooShort):
        fit_arma_garch(np.random.default_rng(0).normal(size=150))


def test_forecast_undifferences_from_last_price():
    p = GarchParams(omega=0.2, alpha1=0.0, beta1=0.0, mu=0.1, ar1=0.5, ma1=0.0)
    fit = fit_from(p, [0.0, 0.3], s2_last=0.2)
    fc = forecast_arma_garch(fit, 3, last_price=100.0)
    d1 = 0.1 + 0.5 * 0.2
    d2 = 0.1 + 0.5 * (d1 - 0.1)
    d3 = 0.1 + 0.5 * (d2 - 0.1)
    assert np.allclose(fc.points, 100 + np.cumsum([d1, d2, d3]), atol=1e-12)
    # with constant variance the price error is a sum of cumulated psi weights
    psi = np.array([1.0, 0.5, 0.25])
    cum = np.cumsum(psi)
    var = 0.2 * np.array([cum[0] ** 2, cum[1] ** 2 + cum[0] ** 2, cum[2] ** 2 + cum[1] ** 2 + cum[0] ** 2])
    assert np.allclose(fc.upper - fc.points, normal_quantile(0.95) * np.sqrt(var), atol=1e-12)


def test_closure_refit():
    fit = fit_arma_garch(simulate_garch(REFERENCE, 4000, seed=11))
    refit = fit_arma_garch(simulate_garch(fit.params, 4000, seed=12))
    assert refit.alpha1 == pytest.approx(fit.alpha1, abs=0.04)
    assert refit.beta1 == pytest.approx(fit.beta1, abs=0.04)
