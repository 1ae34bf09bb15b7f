"""ARMA(1,1) conditional mean with Gaussian GARCH(1,1) conditional variance.

Fitted to a once-differenced price series::

    r_t = mu + ar1 * (r_{t-1} - mu) + ma1 * e_{t-1} + e_t,   e_t ~ N(0, s2_t)
    s2_t = omega + alpha1 * e_{t-1}^2 + beta1 * s2_{t-1}

Pre-sample deviations and shocks are zero and the first conditional variance
is the sample variance of the input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba
import numpy as np

from .errors import NonConvergence, StationarityViolated, TooShort
from .numkit import aic, minimize
from .risk import DEFAULT_INTERVAL, DEFAULT_VAR_LEVEL, Forecast, make_forecast

N_PARAMS = 6
_LOG_2PI = math.log(2 * math.pi)


@dataclass(frozen=True)
class GarchParams:
    omega: float
    alpha1: float
    beta1: float
    mu: float = 0.0
    ar1: float = 0.0
    ma1: float = 0.0

    def check(self):
        if not self.omega > 0:
            raise StationarityViolated(f"omega must be positive, got {self.omega}")
        if self.alpha1 < 0 or self.beta1 < 0:
            raise StationarityViolated("alpha1 and beta1 must be non-negative")
        if self.alpha1 + self.beta1 >= 1:
            raise StationarityViolated(f"alpha1 + beta1 = {self.alpha1 + self.beta1:.6g} is not below 1")


@dataclass(frozen=True)
class GarchFit:
    mu: float
    ar1: float
    ma1: float
    omega: float
    alpha1: float
    beta1: float
    loglik: float
    aic_total: float
    aic_per_obs: float
    sigma2_path: np.ndarray
    residuals: np.ndarray
    fitted: np.ndarray  # one-step mean predictions on the differenced scale
    converged: bool = True
    series: np.ndarray = field(default=None, repr=False)

    @property
    def params(self) -> GarchParams:
        return GarchParams(self.omega, self.alpha1, self.beta1, self.mu, self.ar1, self.ma1)

    @property
    def persistence(self) -> float:
        return self.alpha1 + self.beta1

    @property
    def unconditional_variance(self) -> float:
        return self.omega / (1.0 - self.persistence)


@numba.njit(cache=True, nogil=True)
def _filter(r, mu, ar1, ma1, omega, alpha1, beta1, s2_0, eps, s2):
    n = r.size
    ll = 0.0
    dev_prev = 0.0
    e_prev = 0.0
    s2_prev = s2_0
    for t in range(n):
        if t == 0:
            v = s2_0
        else:
            v = omega + alpha1 * e_prev * e_prev + beta1 * s2_prev
        e = r[t] - mu - ar1 * dev_prev - ma1 * e_prev
        eps[t] = e
        s2[t] = v
        ll += -0.5 * (math.log(v) + e * e / v)
        dev_prev = r[t] - mu
        e_prev = e
        s2_prev = v
    return ll - 0.5 * n * 1.8378770664093453


def garch_filter(series, params: GarchParams, s2_0: float | None = None):
    """Return ``(loglik, residuals, sigma2_path)`` at the given parameters."""
    r = np.ascontiguousarray(series, dtype=float)
    if s2_0 is None:
        s2_0 = float(np.var(r))
    eps = np.empty_like(r)
    s2 = np.empty_like(r)
    ll = _filter(r, params.mu, params.ar1, params.ma1, params.omega, params.alpha1, params.beta1, s2_0, eps, s2)
    return ll, eps, s2


def _unpack(theta) -> GarchParams:
    # theta = (mu, ar1, ma1, omega, persistence, alpha share)
    mu, ar1, ma1, omega, pers, share = theta
    return GarchParams(omega=omega, alpha1=pers * share, beta1=pers * (1.0 - share), mu=mu, ar1=ar1, ma1=ma1)


_BOUNDS = [
    (None, None),
    (-0.9999, 0.9999),
    (-0.9999, 0.9999),
    (0.0, None),
    (0.0, 0.9999),
    (0.0, 1.0),
]


def fit_arma_garch(series) -> GarchFit:
    r = np.ascontiguousarray(series, dtype=float)
    n = r.size
    if n < 200:
        raise TooShort("ARMA-GARCH needs at least 200 observations")
    var = float(np.var(r))
    if var <= 0:
        raise TooShort("series has zero variance")

    def objective(theta):
        ll, _, _ = garch_filter(r, _unpack(theta), var)
        return -ll / n if math.isfinite(ll) else 1e10

    # variance-targeted seed: persistence 0.9 with 10% of it on the ARCH term
    seed = np.array([float(np.mean(r)), 0.1, 0.0, 0.1 * var, 0.9, 0.1])
    best = None
    for start in (seed, np.array([seed[0], 0.0, 0.0, 0.05 * var, 0.95, 0.08])):
        res = minimize(objective, start, bounds=_BOUNDS)
        if best is None or res.f < best.f:
            best = res
    if not np.isfinite(best.f) or best.f >= 1e10:
        raise NonConvergence("ARMA-GARCH likelihood could not be evaluated")
    params = _unpack(best.x)
    params.check()
    ll, eps, s2 = garch_filter(r, params, var)
    k_aic = aic(ll, N_PARAMS)
    return GarchFit(
        mu=params.mu,
        ar1=params.ar1,
        ma1=params.ma1,
        omega=params.omega,
        alpha1=params.alpha1,
        beta1=params.beta1,
        loglik=ll,
        aic_total=k_aic,
        aic_per_obs=k_aic / n,
        sigma2_path=s2,
        residuals=eps,
        fitted=r - eps,
        converged=best.converged,
        series=r,
    )


def variance_forecast(fit: GarchFit, h: int) -> np.ndarray:
    """sigma^2_{n+j} for j = 1..h."""
    s2_next = fit.omega + fit.alpha1 * fit.residuals[-1] ** 2 + fit.beta1 * fit.sigma2_path[-1]
    pers = fit.persistence
    j = np.arange(h)
    if pers == 0.0:
        return np.r_[s2_next, np.full(h - 1, fit.omega)]
    return fit.omega * (1.0 - pers**j) / (1.0 - pers) + pers**j * s2_next


def forecast_arma_garch(
    fit: GarchFit,
    h: int,
    last_price: float,
    level_pct: float = DEFAULT_INTERVAL,
    var_level: float = DEFAULT_VAR_LEVEL,
) -> Forecast:
    """Price forecast: mean recursion on differences, cumulated from ``last_price``."""
    if h < 1:
        raise ValueError("horizon must be at least 1")
    r = fit.series
    dpred = np.empty(h)
    dev = r[-1] - fit.mu
    e_last = fit.residuals[-1]
    for j in range(h):
        nxt = fit.ar1 * dev + (fit.ma1 * e_last if j == 0 else 0.0)
        dpred[j] = fit.mu + nxt
        dev = nxt
    points = last_price + np.cumsum(dpred)

    # price error at step j: sum_i e_{n+i} * Psi_{j-i}, Psi = cumulated ARMA psi weights
    psi = np.empty(h)
    psi[0] = 1.0
    for k in range(1, h):
        psi[k] = fit.ar1 ** (k - 1) * (fit.ar1 + fit.ma1)
    cum_psi = np.cumsum(psi)
    s2 = variance_forecast(fit, h)
    var = np.array([np.sum(s2[: j + 1] * cum_psi[j::-1] ** 2) for j in range(h)])
    return make_forecast(points, np.sqrt(var), level_pct, "normal", var_level=var_level)


def simulate_garch(params: GarchParams, n: int, seed=None, burn: int = 500) -> np.ndarray:
    params.check()
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(n + burn)
    out = np.empty(n + burn)
    s2 = params.omega / (1.0 - params.alpha1 - params.beta1)
    e_prev = 0.0
    dev_prev = 0.0
    for t in range(n + burn):
        if t:
            s2 = params.omega + params.alpha1 * e_prev**2 + params.beta1 * s2
        e = math.sqrt(s2) * z[t]
        dev = params.ar1 * dev_prev + params.ma1 * e_prev + e
        out[t] = params.mu + dev
        dev_prev = dev
        e_prev = e
    return out[burn:]
