"""ARIMA(p, d, q) and ARIMAX estimation, forecasting and residual checks.

The exogenous form is a regression with ARMA errors: after differencing both
the response and the regressor ``d`` times,

    w_t = diff(y)_t - c - b * diff(x)_t

follows a zero-mean ARMA(p, q). Parameters are estimated by conditional
Gaussian maximum likelihood (the first ``p`` differenced values are
conditioned on, pre-sample innovations are zero, and the innovation variance
is profiled out). Stationarity and invertibility are enforced by estimating
partial autocorrelations in (-1, 1) and mapping them to polynomial
coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba
import numpy as np

from .errors import ExogLengthMismatch, MissingFutureExog, NonConvergence, TooShort
from .numkit import AcfResult, LjungBoxResult, acf, aic, difference, ljung_box, minimize, undifference
from .risk import DEFAULT_INTERVAL, DEFAULT_VAR_LEVEL, Forecast, make_forecast

PACF_BOUND = 0.9999


@dataclass(frozen=True)
class ArimaSpec:
    p: int = 1
    d: int = 1
    q: int = 0
    include_intercept: bool = False
    exogenous: bool = False

    def __post_init__(self):
        if min(self.p, self.d, self.q) < 0:
            raise ValueError("orders must be non-negative")
        if self.d > 2:
            raise ValueError("differencing order above 2 is not supported")

    @property
    def n_params(self) -> int:
        return self.p + self.q + int(self.include_intercept) + int(self.exogenous) + 1

    @property
    def label(self) -> str:
        name = "ARIMAX" if self.exogenous else "ARIMA"
        return f"{name}({self.p},{self.d},{self.q})"


@dataclass(frozen=True)
class ArimaFit:
    spec: ArimaSpec
    ar: np.ndarray
    ma: np.ndarray
    intercept: float | None
    reg_coef: float | None
    sigma2: float
    loglik: float
    aic: float
    residuals: np.ndarray  # innovations on the differenced scale, first p are conditioned away
    fitted: np.ndarray  # one-step predictions on the original scale, NaN where undefined
    converged: bool = True
    series: np.ndarray = field(default=None, repr=False)
    exog: np.ndarray | None = field(default=None, repr=False)

    @property
    def standardized_residuals(self) -> np.ndarray:
        return self.residuals[self.spec.p :] / math.sqrt(self.sigma2)


def pacf_to_coefs(r) -> np.ndarray:
    """Map partial autocorrelations in (-1, 1) to stationary AR coefficients."""
    r = np.asarray(r, dtype=float)
    phi = np.zeros(0)
    for k, rk in enumerate(r):
        phi = np.concatenate((phi - rk * phi[::-1], [rk])) if k else np.array([rk])
    return phi


def coefs_to_pacf(phi) -> np.ndarray:
    """Inverse of :func:`pacf_to_coefs` (step-down Levinson recursion)."""
    a = np.asarray(phi, dtype=float).copy()
    r = np.zeros_like(a)
    for k in range(a.size - 1, -1, -1):
        rk = a[k]
        r[k] = rk
        if k:
            a = (a[:k] + rk * a[:k][::-1]) / (1.0 - rk * rk)
    return r


@numba.njit(cache=True, nogil=True)
def _arma_residuals(w, ar, ma, start, out):
    n = w.size
    p = ar.size
    q = ma.size
    for t in range(start):
        out[t] = 0.0
    sse = 0.0
    for t in range(start, n):
        e = w[t]
        for i in range(p):
            e -= ar[i] * w[t - i - 1]
        for j in range(q):
            if t - j - 1 >= 0:
                e -= ma[j] * out[t - j - 1]
        out[t] = e
        sse += e * e
    return sse


class _Design:
    """Differenced data and parameter bookkeeping for one fit."""

    def __init__(self, y, x, spec: ArimaSpec):
        self.spec = spec
        self.dy = difference(y, spec.d)
        self.dx = None if x is None else difference(x, spec.d)
        self.n_eff = self.dy.size - spec.p

    def unpack(self, theta):
        s = self.spec
        i = 0
        c = 0.0
        b = 0.0
        if s.include_intercept:
            c = theta[i]
            i += 1
        if s.exogenous:
            b = theta[i]
            i += 1
        ar = pacf_to_coefs(theta[i : i + s.p])
        ma = -pacf_to_coefs(theta[i + s.p : i + s.p + s.q])
        return c, b, ar, ma

    def w(self, c, b):
        w = self.dy - c
        if self.dx is not None and b != 0.0:
            w = w - b * self.dx
        return np.ascontiguousarray(w)

    def sse(self, theta) -> tuple[float, np.ndarray]:
        c, b, ar, ma = self.unpack(theta)
        res = np.empty(self.dy.size)
        sse = _arma_residuals(self.w(c, b), ar, ma, self.spec.p, res)
        return sse, res

    def loglik_from_sse(self, sse: float) -> float:
        n = self.n_eff
        sigma2 = sse / n
        return -0.5 * n * (math.log(2 * math.pi * sigma2) + 1.0)


def _check_inputs(series, spec: ArimaSpec, exog):
    y = np.asarray(series, dtype=float)
    if y.size <= spec.p + spec.d + spec.q + 10:
        raise TooShort(f"{spec.label} needs more than {spec.p + spec.d + spec.q + 10} observations")
    x = None
    if spec.exogenous:
        if exog is None:
            raise ExogLengthMismatch("exogenous spec requires an exogenous series")
        x = np.asarray(exog, dtype=float)
        if x.shape != y.shape:
            raise ExogLengthMismatch(f"exog length {x.size} != series length {y.size}")
    elif exog is not None:
        raise ExogLengthMismatch("exogenous series given for a non-exogenous spec")
    return y, x


def conditional_loglik(series, spec: ArimaSpec, ar=(), ma=(), intercept=None, reg_coef=None, exog=None) -> float:
    """Profiled conditional log-likelihood at given coefficients."""
    y, x = _check_inputs(series, spec, exog)
    design = _Design(y, x, spec)
    res = np.empty(design.dy.size)
    w = design.w(intercept or 0.0, reg_coef or 0.0)
    sse = _arma_residuals(w, np.asarray(ar, dtype=float), np.asarray(ma, dtype=float), spec.p, res)
    return design.loglik_from_sse(sse)


def _seed(design: _Design) -> np.ndarray:
    s = design.spec
    cols = []
    if s.include_intercept:
        cols.append(np.ones(design.dy.size))
    if s.exogenous:
        cols.append(design.dx)
    start = []
    if cols:
        X = np.column_stack(cols)
        start = list(np.linalg.lstsq(X, design.dy, rcond=None)[0])
    return np.array(start + [0.0] * (s.p + s.q), dtype=float)


def fit_arima(series, spec: ArimaSpec, exog=None) -> ArimaFit:
    y, x = _check_inputs(series, spec, exog)
    design = _Design(y, x, spec)
    n_reg = int(spec.include_intercept) + int(spec.exogenous)
    bounds = [(None, None)] * n_reg + [(-PACF_BOUND, PACF_BOUND)] * (spec.p + spec.q)
    seed = _seed(design)

    def objective(theta):
        sse, _ = design.sse(theta)
        return 0.5 * math.log(sse / design.n_eff) if sse > 0 else -1e6

    if n_reg + spec.p + spec.q == 0:
        theta = seed
        converged = True
    else:
        res = minimize(objective, seed, bounds=bounds)
        if not res.converged:
            retry = minimize(objective, seed * 1.1 + 0.01 * (seed == 0), bounds=bounds)
            if retry.f <= res.f or retry.converged:
                res = retry
            if not res.converged:
                raise NonConvergence(f"{spec.label} did not converge")
        theta = res.x
        converged = res.converged

    c, b, ar, ma = design.unpack(theta)
    sse, resid = design.sse(theta)
    loglik = design.loglik_from_sse(sse)
    _assert_roots(ar, ma, spec)
    fitted = np.full(y.size, np.nan)
    start = spec.d + spec.p
    fitted[start:] = y[start:] - resid[spec.p :]
    return ArimaFit(
        spec=spec,
        ar=ar,
        ma=ma,
        intercept=float(c) if spec.include_intercept else None,
        reg_coef=float(b) if spec.exogenous else None,
        sigma2=sse / design.n_eff,
        loglik=loglik,
        aic=aic(loglik, spec.n_params),
        residuals=resid,
        fitted=fitted,
        converged=converged,
        series=y,
        exog=x,
    )


def _assert_roots(ar, ma, spec):
    for name, poly in (("AR", np.r_[1.0, -ar]), ("MA", np.r_[1.0, ma])):
        if poly.size > 1 and np.any(np.abs(np.roots(poly[::-1])) <= 1.0):
            raise NonConvergence(f"{spec.label}: {name} polynomial has a root inside the unit circle")


def psi_weights(ar, ma, d: int, h: int) -> np.ndarray:
    """MA(infinity) weights of the integrated process, psi_0 .. psi_{h-1}."""
    phi = np.r_[1.0, -np.asarray(ar, dtype=float)]
    for _ in range(d):
        phi = np.convolve(phi, [1.0, -1.0])
    phi_star = -phi[1:]
    ma = np.asarray(ma, dtype=float)
    psi = np.zeros(h)
    psi[0] = 1.0
    for j in range(1, h):
        v = ma[j - 1] if j - 1 < ma.size else 0.0
        for i in range(1, min(j, phi_star.size) + 1):
            v += phi_star[i - 1] * psi[j - i]
        psi[j] = v
    return psi


def _regression_part(fit: ArimaFit, future_exog, h: int) -> np.ndarray:
    s = fit.spec
    mean = np.full(h, fit.intercept or 0.0)
    if s.exogenous:
        if future_exog is None:
            raise MissingFutureExog(f"{s.label} needs {h} future exogenous values")
        fx = np.asarray(future_exog, dtype=float)
        if fx.size != h:
            raise MissingFutureExog(f"expected {h} future exogenous values, got {fx.size}")
        tail = fit.exog[fit.exog.size - s.d :] if s.d else np.zeros(0)
        dx = difference(np.r_[tail, fx], s.d)
        mean = mean + fit.reg_coef * dx
    return mean


def forecast_arima(
    fit: ArimaFit,
    h: int,
    future_exog=None,
    level_pct: float = DEFAULT_INTERVAL,
    var_level: float = DEFAULT_VAR_LEVEL,
) -> Forecast:
    if h < 1:
        raise ValueError("horizon must be at least 1")
    s = fit.spec
    reg = _regression_part(fit, future_exog, h)
    dy = difference(fit.series, s.d)
    c = fit.intercept or 0.0
    w_hist = dy - c
    if s.exogenous:
        w_hist = w_hist - fit.reg_coef * difference(fit.exog, s.d)
    w = list(w_hist)
    e = list(fit.residuals)
    n = len(w)
    for j in range(h):
        t = n + j
        v = 0.0
        for i, a in enumerate(fit.ar):
            v += a * w[t - i - 1]
        for k, m in enumerate(fit.ma):
            if t - k - 1 < n:
                v += m * e[t - k - 1]
        w.append(v)
    dpred = np.asarray(w[n:]) + reg
    if s.d:
        points = undifference(dpred, fit.series[-s.d :])[s.d :]
    else:
        points = dpred
    psi = psi_weights(fit.ar, fit.ma, s.d, h)
    sd = np.sqrt(fit.sigma2 * np.cumsum(psi**2))
    return make_forecast(points, sd, level_pct, "normal", var_level=var_level)


def one_step_predictions(fit: ArimaFit, series, exog=None) -> np.ndarray:
    """In-sample one-step predictor with the fitted coefficients applied to ``series``."""
    s = fit.spec
    y, x = _check_inputs(series, s, exog)
    design = _Design(y, x, s)
    res = np.empty(design.dy.size)
    _arma_residuals(design.w(fit.intercept or 0.0, fit.reg_coef or 0.0), fit.ar, fit.ma, s.p, res)
    out = np.full(y.size, np.nan)
    start = s.d + s.p
    out[start:] = y[start:] - res[s.p :]
    return out


def residual_diagnostics(fit: ArimaFit, lags: int = 10) -> tuple[AcfResult, LjungBoxResult]:
    z = fit.standardized_residuals
    return acf(z, lags), ljung_box(z, lags, fit.spec.p + fit.spec.q)


def simulate_arima(ar=(), ma=(), d: int = 1, n: int = 1000, sigma: float = 1.0, seed=None, burn: int = 200, start: float = 100.0):
    """Gaussian ARIMA path; a differenced path is integrated from ``start``."""
    rng = np.random.default_rng(seed)
    ar = np.asarray(ar, dtype=float)
    ma = np.asarray(ma, dtype=float)
    m = n - d + burn
    eps = rng.normal(0.0, sigma, m)
    w = np.zeros(m)
    for t in range(m):
        v = eps[t]
        for i, a in enumerate(ar):
            if t - i - 1 >= 0:
                v += a * w[t - i - 1]
        for j, b in enumerate(ma):
            if t - j - 1 >= 0:
                v += b * eps[t - j - 1]
        w[t] = v
    w = w[burn:]
    if d == 0:
        return w + start
    return undifference(w, np.full(d, start))
