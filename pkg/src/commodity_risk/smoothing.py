"""Simple and Holt linear-trend exponential smoothing.

Smoothing weights are chosen to minimise the one-step-ahead sum of squared
errors. Initial states follow the usual textbook choice: level ``y[0]`` and,
for Holt, trend ``y[1] - y[0]``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .errors import TooShort
from .numkit import minimize
from .risk import DEFAULT_INTERVAL, DEFAULT_VAR_LEVEL, Forecast, make_forecast

ALPHA_BOUNDS = (1e-4, 1.0)


@dataclass(frozen=True)
class SesFit:
    alpha: float
    level: float
    sse_onestep: float
    residual_sd: float
    fitted: np.ndarray  # one-step predictions, fitted[0] is NaN


@dataclass(frozen=True)
class HoltFit:
    alpha: float
    beta: float
    level: float
    trend: float
    sse_onestep: float
    residual_sd: float
    fitted: np.ndarray


@numba.njit(cache=True, nogil=True)
def _ses_kernel(y, alpha, fitted):
    level = y[0]
    sse = 0.0
    fitted[0] = np.nan
    for t in range(1, y.size):
        fitted[t] = level
        e = y[t] - level
        sse += e * e
        level = alpha * y[t] + (1.0 - alpha) * level
    return level, sse


@numba.njit(cache=True, nogil=True)
def _holt_kernel(y, alpha, beta, trend0, fitted):
    level = y[0]
    trend = trend0
    sse = 0.0
    fitted[0] = np.nan
    for t in range(1, y.size):
        pred = level + trend
        fitted[t] = pred
        e = y[t] - pred
        if t >= 2:
            sse += e * e
        prev = level
        level = alpha * y[t] + (1.0 - alpha) * (level + trend)
        trend = beta * (level - prev) + (1.0 - beta) * trend
    return level, trend, sse


def ses_filter(series, alpha: float) -> tuple[float, np.ndarray, float]:
    """Run the SES recursion; returns ``(final_level, one_step_fitted, sse)``."""
    y = np.ascontiguousarray(series, dtype=float)
    fitted = np.empty_like(y)
    level, sse = _ses_kernel(y, float(alpha), fitted)
    return level, fitted, sse


def holt_filter(series, alpha: float, beta: float, initial_trend: float | None = None):
    """Run Holt's recursion; returns ``(level, trend, one_step_fitted, sse)``.

    The SSE skips the second observation, whose prediction equals it by
    construction of the default initial trend.
    """
    y = np.ascontiguousarray(series, dtype=float)
    if initial_trend is None:
        initial_trend = y[1] - y[0]
    fitted = np.empty_like(y)
    level, trend, sse = _holt_kernel(y, float(alpha), float(beta), float(initial_trend), fitted)
    return level, trend, fitted, sse


def fit_ses(series) -> SesFit:
    y = np.asarray(series, dtype=float)
    if y.size < 3:
        raise TooShort("simple exponential smoothing needs at least 3 observations")
    scale = max(float(np.var(y)), 1e-12) * y.size
    # the one-parameter SSE can be multimodal on short series: start from the best grid point
    grid = (0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 0.999)
    start = min(grid, key=lambda a: ses_filter(y, a)[2])
    res = minimize(lambda a: ses_filter(y, a[0])[2] / scale, [start], bounds=[ALPHA_BOUNDS])
    best = float(res.x[0])
    level, fitted, sse = ses_filter(y, best)
    return SesFit(
        alpha=float(best),
        level=float(level),
        sse_onestep=float(sse),
        residual_sd=float(np.sqrt(sse / (y.size - 1))),
        fitted=fitted,
    )


def _ses_like_forecast(level, trend, alpha, beta, residual_sd, h, level_pct, var_level) -> Forecast:
    if h < 1:
        raise ValueError("horizon must be at least 1")
    j = np.arange(1, h + 1)
    points = level + j * trend
    # forecast-error variance multipliers 1 + sum_{i<j} alpha^2 (1 + i beta)^2
    c2 = (alpha * (1.0 + np.arange(1, h) * beta)) ** 2
    mult = 1.0 + np.concatenate(([0.0], np.cumsum(c2)))
    return make_forecast(points, residual_sd * np.sqrt(mult), level_pct, "normal", var_level=var_level)


def forecast_ses(
    fit: SesFit, h: int, level_pct: float = DEFAULT_INTERVAL, var_level: float = DEFAULT_VAR_LEVEL
) -> Forecast:
    return _ses_like_forecast(fit.level, 0.0, fit.alpha, 0.0, fit.residual_sd, h, level_pct, var_level)


def fit_holt(series) -> HoltFit:
    y = np.asarray(series, dtype=float)
    if y.size < 4:
        raise TooShort("Holt smoothing needs at least 4 observations")
    scale = max(float(np.var(y)), 1e-12) * y.size

    def objective(p):
        return holt_filter(y, p[0], p[1])[3] / scale

    bounds = [ALPHA_BOUNDS, ALPHA_BOUNDS]
    best = None
    for start in ([0.5, 0.1], [0.9, 0.01], [0.2, 0.2]):
        res = minimize(objective, start, bounds=bounds)
        if best is None or res.f < best.f:
            best = res
    alpha, beta = (float(v) for v in best.x)
    level, trend, fitted, sse = holt_filter(y, alpha, beta)
    return HoltFit(
        alpha=alpha,
        beta=beta,
        level=float(level),
        trend=float(trend),
        sse_onestep=float(sse),
        residual_sd=float(np.sqrt(sse / (y.size - 2))),
        fitted=fitted,
    )


def forecast_holt(
    fit: HoltFit, h: int, level_pct: float = DEFAULT_INTERVAL, var_level: float = DEFAULT_VAR_LEVEL
) -> Forecast:
    return _ses_like_forecast(fit.level, fit.trend, fit.alpha, fit.beta, fit.residual_sd, h, level_pct, var_level)


__all__ = [
    "HoltFit",
    "SesFit",
    "fit_holt",
    "fit_ses",
    "forecast_holt",
    "forecast_ses",
    "holt_filter",
    "ses_filter",
]
