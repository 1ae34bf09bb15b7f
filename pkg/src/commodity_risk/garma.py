"""Mean-link GARMA(p, q) with a Student-t response and one exogenous regressor.

With an identity link for the mean,

    mu_t = b0 + b1 x_t
           + sum_j phi_j   (y_{t-j} - b0 - b1 x_{t-j})
           + sum_j theta_j (y_{t-j} - mu_{t-j})

and ``y_t ~ t(mu_t, sigma, nu)`` with ``sigma`` and ``nu`` constant and
estimated on the log scale. For the first ``max(p, q)`` observations the mean
is the regression part alone; those points still enter the likelihood so fits
of different orders share the same sample.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numba
import numpy as np
from scipy import special

from .errors import HessianSingular, LengthMismatch, MissingFutureExog, NonConvergence, TooShort
from .numkit import aic, minimize, numerical_hessian
from .risk import DEFAULT_INTERVAL, DEFAULT_VAR_LEVEL, Forecast, make_forecast

NU_START = 10.0
PHI_START = 0.1


@dataclass(frozen=True)
class GarmaSpec:
    p: int = 2
    q: int = 1
    include_intercept: bool = False

    def __post_init__(self):
        if self.p < 0 or self.q < 0:
            raise ValueError("orders must be non-negative")

    @property
    def burn_in(self) -> int:
        return max(self.p, self.q)

    @property
    def n_params(self) -> int:
        # b1, phi, theta, sigma, nu (+ b0)
        return int(self.include_intercept) + 1 + self.p + self.q + 2

    @property
    def label(self) -> str:
        tail = "with intercept" if self.include_intercept else "without intercept"
        return f"GARMA c({self.p},{self.q}) {tail}"

    def param_names(self) -> list[str]:
        names = ["beta0"] if self.include_intercept else []
        names.append("beta1")
        names += [f"phi{j + 1}" for j in range(self.p)]
        names += [f"theta{j + 1}" for j in range(self.q)]
        return names + ["sigma", "nu"]


@dataclass(frozen=True)
class GarmaParams:
    beta1: float
    phi: tuple[float, ...] = ()
    theta: tuple[float, ...] = ()
    sigma: float = 1.0
    nu: float = 10.0
    beta0: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "phi", tuple(float(v) for v in self.phi))
        object.__setattr__(self, "theta", tuple(float(v) for v in self.theta))
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if not self.nu > 0:
            raise ValueError(f"nu must be positive, got {self.nu}")

    @property
    def spec(self) -> GarmaSpec:
        return GarmaSpec(len(self.phi), len(self.theta), self.beta0 is not None)


@dataclass(frozen=True)
class GarmaFit:
    spec: GarmaSpec
    beta0: float | None
    beta1: float
    phi: np.ndarray
    theta: np.ndarray
    sigma: float
    nu: float
    loglik: float
    aic: float
    mu_path: np.ndarray
    residuals: np.ndarray
    std_errors: dict[str, float] = field(default_factory=dict)
    p_values: dict[str, float] = field(default_factory=dict)
    hessian_singular: bool = False
    nonstationary: bool = False
    converged: bool = True
    y: np.ndarray = field(default=None, repr=False)
    x: np.ndarray = field(default=None, repr=False)

    @property
    def params(self) -> GarmaParams:
        return GarmaParams(self.beta1, tuple(self.phi), tuple(self.theta), self.sigma, self.nu, self.beta0)


@numba.njit(cache=True, nogil=True)
def _mu_kernel(y, x, b0, b1, phi, theta, out):
    n = y.size
    p = phi.size
    q = theta.size
    m = max(p, q)
    for t in range(n):
        mu = b0 + b1 * x[t]
        if t >= m:
            for j in range(1, p + 1):
                mu += phi[j - 1] * (y[t - j] - b0 - b1 * x[t - j])
            for j in range(1, q + 1):
                mu += theta[j - 1] * (y[t - j] - out[t - j])
        out[t] = mu


@numba.njit(cache=True, nogil=True)
def _t_loglik(y, mu, sigma, nu):
    const = math.lgamma((nu + 1.0) / 2.0) - math.lgamma(nu / 2.0) - 0.5 * math.log(nu * math.pi) - math.log(sigma)
    acc = 0.0
    for t in range(y.size):
        z = (y[t] - mu[t]) / sigma
        acc += math.log1p(z * z / nu)
    return y.size * const - 0.5 * (nu + 1.0) * acc


def _as_pair(y, x):
    y = np.ascontiguousarray(y, dtype=float)
    x = np.ascontiguousarray(x, dtype=float)
    if y.shape != x.shape or y.ndim != 1:
        raise LengthMismatch(f"y {y.shape} vs x {x.shape}")
    return y, x


def garma_mu_path(params: GarmaParams, y, x) -> np.ndarray:
    y, x = _as_pair(y, x)
    if y.size <= len(params.phi):
        raise TooShort(f"need more than {len(params.phi)} observations")
    out = np.empty_like(y)
    _mu_kernel(
        y, x, params.beta0 or 0.0, params.beta1,
        np.asarray(params.phi, dtype=float), np.asarray(params.theta, dtype=float), out,
    )
    return out


def garma_loglik(params: GarmaParams, y, x) -> float:
    y, x = _as_pair(y, x)
    mu = garma_mu_path(params, y, x)
    return float(_t_loglik(y, mu, params.sigma, params.nu))


class _Objective:
    def __init__(self, y, x, spec: GarmaSpec):
        self.y, self.x, self.spec = y, x, spec
        self.mu = np.empty_like(y)

    def split(self, theta):
        s = self.spec
        i = 0
        b0 = 0.0
        if s.include_intercept:
            b0 = theta[0]
            i = 1
        b1 = theta[i]
        phi = np.ascontiguousarray(theta[i + 1 : i + 1 + s.p])
        th = np.ascontiguousarray(theta[i + 1 + s.p : i + 1 + s.p + s.q])
        return b0, b1, phi, th, theta[-2], theta[-1]

    def loglik(self, theta) -> float:
        b0, b1, phi, th, sigma, nu = self.split(theta)
        _mu_kernel(self.y, self.x, b0, b1, phi, th, self.mu)
        return _t_loglik(self.y, self.mu, sigma, nu)

    def __call__(self, theta) -> float:
        ll = self.loglik(theta)
        return -ll / self.y.size if math.isfinite(ll) else 1e10


def _regression_start(y, x, spec: GarmaSpec) -> tuple[list[float], float]:
    cols = [np.ones_like(x), x] if spec.include_intercept else [x]
    X = np.column_stack(cols)
    coef = np.linalg.lstsq(X, y, rcond=None)[0]
    sd = float(np.std(y - X @ coef))
    return list(coef), max(sd, 1e-8)


def fit_garma(y, x, spec: GarmaSpec) -> GarmaFit:
    """Maximum-likelihood fit with Hessian-based standard errors."""
    y, x = _as_pair(y, x)
    if y.size < 50:
        raise TooShort("GARMA needs at least 50 observations")
    obj = _Objective(y, x, spec)
    reg, sd = _regression_start(y, x, spec)
    n_free = len(reg) + spec.p + spec.q
    bounds = [(None, None)] * n_free + [(0.0, None), (0.0, None)]

    starts = [np.array(reg + [PHI_START] * spec.p + [PHI_START] * spec.q + [sd, NU_START])]
    if spec.p:
        # near-unit-root start; price levels often sit close to phi_1 = 1
        alt = [0.9] + [0.0] * (spec.p - 1) + [0.0] * spec.q
        starts.append(np.array(reg + alt + [sd, NU_START]))
    best = None
    for start in starts:
        res = minimize(obj, start, bounds=bounds)
        if best is None or res.f < best.f:
            best = res
    if best.f >= 1e10:
        raise NonConvergence(f"{spec.label}: likelihood could not be evaluated")

    theta = best.x
    ll = float(obj.loglik(theta))
    b0, b1, phi, th, sigma, nu = obj.split(theta)
    params = GarmaParams(b1, tuple(phi), tuple(th), sigma, nu, b0 if spec.include_intercept else None)
    mu = garma_mu_path(params, y, x)

    se, pv, singular = _inference(obj, theta, spec)
    return GarmaFit(
        spec=spec,
        beta0=params.beta0,
        beta1=b1,
        phi=np.array(phi),
        theta=np.array(th),
        sigma=sigma,
        nu=nu,
        loglik=ll,
        aic=aic(ll, spec.n_params),
        mu_path=mu,
        residuals=y - mu,
        std_errors=se,
        p_values=pv,
        hessian_singular=singular,
        nonstationary=bool(np.sum(phi) >= 1.0),
        converged=best.converged,
        y=y,
        x=x,
    )


def _inference(obj: _Objective, theta, spec: GarmaSpec):
    names = spec.param_names()
    try:
        H = numerical_hessian(lambda t: -obj.loglik(t), theta)
        if not np.all(np.isfinite(H)):
            raise HessianSingular("non-finite Hessian")
        cov = np.linalg.inv(H)
        var = np.diag(cov)
        if np.any(var <= 0) or not np.all(np.isfinite(var)):
            raise HessianSingular("Hessian is not positive definite")
    except (np.linalg.LinAlgError, HessianSingular):
        nan = {k: math.nan for k in names}
        return nan, dict(nan), True
    se = np.sqrt(var)
    z = np.abs(theta / se)
    pv = special.erfc(z / math.sqrt(2.0))
    return dict(zip(names, map(float, se))), dict(zip(names, map(float, pv))), False


def forecast_garma(
    fit: GarmaFit,
    h: int,
    future_x,
    level_pct: float = DEFAULT_INTERVAL,
    var_level: float = DEFAULT_VAR_LEVEL,
) -> Forecast:
    """Iterate the mean recursion forward with unobserved lags set to their forecasts.

    Future innovations are zero, so the MA term only uses in-sample residuals.
    Bands are Student-t quantiles around each step's mean with constant scale.
    """
    if h < 1:
        raise ValueError("horizon must be at least 1")
    if future_x is None:
        raise MissingFutureExog(f"{fit.spec.label} needs {h} future exogenous values")
    fx = np.asarray(future_x, dtype=float)
    if fx.size != h:
        raise MissingFutureExog(f"expected {h} future exogenous values, got {fx.size}")
    b0 = fit.beta0 or 0.0
    y = list(fit.y)
    x = list(fit.x)
    resid = list(fit.residuals)
    n = len(y)
    points = np.empty(h)
    for j in range(h):
        t = n + j
        mu = b0 + fit.beta1 * fx[j]
        for k, ph in enumerate(fit.phi, start=1):
            mu += ph * (y[t - k] - b0 - fit.beta1 * x[t - k])
        for k, th in enumerate(fit.theta, start=1):
            mu += th * resid[t - k]
        points[j] = mu
        y.append(mu)
        x.append(fx[j])
        resid.append(0.0)
    return make_forecast(points, fit.sigma, level_pct, "student-t", df=fit.nu, var_level=var_level)


def simulate_garma(params: GarmaParams, x, seed=None) -> np.ndarray:
    """Draw ``y_t ~ t(mu_t, sigma, nu)`` along the mean recursion."""
    x = np.asarray(x, dtype=float)
    if params.nu <= 2:
        warnings.warn("nu <= 2: simulated series has infinite variance", stacklevel=2)
    rng = np.random.default_rng(seed)
    noise = params.sigma * rng.standard_t(params.nu, size=x.size)
    return _simulate_kernel(
        x, params.beta0 or 0.0, params.beta1,
        np.asarray(params.phi, dtype=float), np.asarray(params.theta, dtype=float), noise,
    )


@numba.njit(cache=True, nogil=True)
def _simulate_kernel(x, b0, b1, phi, theta, noise):
    n = x.size
    p = phi.size
    q = theta.size
    m = max(p, q)
    y = np.empty(n)
    mu = np.empty(n)
    for t in range(n):
        v = b0 + b1 * x[t]
        if t >= m:
            for j in range(1, p + 1):
                v += phi[j - 1] * (y[t - j] - b0 - b1 * x[t - j])
            for j in range(1, q + 1):
                v += theta[j - 1] * (y[t - j] - mu[t - j])
        mu[t] = v
        y[t] = v + noise[t]
    return y
