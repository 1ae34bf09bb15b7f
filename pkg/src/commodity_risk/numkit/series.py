"""Differencing, autocorrelation, portmanteau tests and simple error metrics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import (
    AnchorMismatch,
    DofNonPositive,
    LengthMismatch,
    TooShort,
    ZeroVariance,
)
from .distributions import chi_square_sf


@dataclass(frozen=True)
class AcfResult:
    lags: np.ndarray
    correlations: np.ndarray
    n: int

    @property
    def band(self) -> float:
        """Half-width of the approximate 95% white-noise band."""
        return 1.96 / np.sqrt(self.n)


@dataclass(frozen=True)
class LjungBoxResult:
    statistic: float
    dof: int
    p_value: float


def difference(series, d: int = 1) -> np.ndarray:
    x = np.asarray(series, dtype=float)
    if d < 0:
        raise ValueError("d must be non-negative")
    if x.size <= d:
        raise TooShort(f"need more than {d} observations, got {x.size}")
    return np.diff(x, n=d) if d else x.copy()


def undifference(diffs, anchors) -> np.ndarray:
    """Invert :func:`difference`.

    ``anchors`` are the ``d`` observations that precede the first difference,
    so ``undifference(difference(x, d), x[:d])`` rebuilds ``x``. Passing the
    last ``d`` observed values instead integrates a forecast of differences
    forward; drop the first ``d`` entries of the result in that case.
    """
    diffs = np.asarray(diffs, dtype=float)
    anchors = np.asarray(anchors, dtype=float).ravel()
    d = anchors.size
    if d == 0:
        return diffs.copy()
    if diffs.ndim != 1:
        raise AnchorMismatch("diffs must be one-dimensional")
    # heads[k] is the first value of the k-th order difference of the anchors
    heads = [np.diff(anchors, n=k)[0] for k in range(d)]
    level = diffs
    for k in range(d - 1, -1, -1):
        level = np.concatenate(([heads[k]], heads[k] + np.cumsum(level)))
    return level


def acf(series, max_lag: int) -> AcfResult:
    x = np.asarray(series, dtype=float)
    n = x.size
    if max_lag < 1:
        raise ValueError("max_lag must be positive")
    if n <= max_lag:
        raise TooShort(f"series of length {n} too short for lag {max_lag}")
    dev = x - x.mean()
    c0 = float(dev @ dev) / n
    if c0 <= 0.0 or not np.isfinite(c0):
        raise ZeroVariance("series has zero variance")
    r = np.empty(max_lag + 1)
    r[0] = 1.0
    for k in range(1, max_lag + 1):
        r[k] = float(dev[k:] @ dev[:-k]) / n / c0
    return AcfResult(lags=np.arange(max_lag + 1), correlations=r, n=n)


def ljung_box(residuals, lags: int, fitted_param_count: int = 0) -> LjungBoxResult:
    """Ljung-Box Q statistic with ``lags - fitted_param_count`` degrees of freedom."""
    dof = lags - fitted_param_count
    if dof <= 0:
        raise DofNonPositive(f"lags={lags} leaves no degrees of freedom after {fitted_param_count} parameters")
    x = np.asarray(residuals, dtype=float)
    n = x.size
    r = acf(x, lags).correlations[1:]
    q = n * (n + 2) * float(np.sum(r**2 / (n - np.arange(1, lags + 1))))
    return LjungBoxResult(statistic=q, dof=dof, p_value=chi_square_sf(q, dof))


def aic(loglik: float, k: int) -> float:
    return 2.0 * k - 2.0 * loglik


def forecast_errors(predicted, actual) -> tuple[float, float]:
    """Return ``(sse, msd)`` of a forecast against realised values."""
    p = np.asarray(predicted, dtype=float)
    a = np.asarray(actual, dtype=float)
    if p.shape != a.shape or p.ndim != 1 or p.size == 0:
        raise LengthMismatch(f"predicted {p.shape} vs actual {a.shape}")
    sse = float(np.sum((p - a) ** 2))
    return sse, sse / p.size
