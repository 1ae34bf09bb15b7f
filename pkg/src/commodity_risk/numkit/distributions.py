"""Student-t, normal and chi-square distribution functions.

The Student-t CDF goes through the regularized incomplete beta function and
its quantile is found by bracketed root-finding on that CDF, so every value
can be checked against an independent oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import optimize, special

from ..errors import DomainError


@dataclass(frozen=True)
class TParams:
    """Location-scale Student-t parameters."""

    mu: float = 0.0
    sigma: float = 1.0
    nu: float = 5.0

    def __post_init__(self):
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise DomainError(f"sigma must be positive, got {self.sigma}")
        if not self.nu > 0:
            raise DomainError(f"nu must be positive, got {self.nu}")


def t_logpdf(x, p: TParams):
    z = (np.asarray(x, dtype=float) - p.mu) / p.sigma
    nu = p.nu
    const = (
        math.lgamma((nu + 1) / 2)
        - math.lgamma(nu / 2)
        - 0.5 * math.log(nu * math.pi)
        - math.log(p.sigma)
    )
    out = const - (nu + 1) / 2 * np.log1p(z * z / nu)
    return float(out) if np.ndim(out) == 0 else out


def _std_t_cdf(z, nu: float):
    z = np.asarray(z, dtype=float)
    z2 = z * z
    # Two algebraically equal forms; pick the one whose beta argument is far from 1.
    small = z2 < nu
    with np.errstate(divide="ignore", invalid="ignore"):
        tail = 0.5 * special.betainc(nu / 2, 0.5, nu / (nu + z2))
        centre = 0.5 * special.betainc(0.5, nu / 2, z2 / (nu + z2))
    upper = np.where(small, 0.5 - centre, tail)
    out = np.where(z >= 0, 1.0 - upper, upper)
    out = np.where(np.isinf(z), np.where(z > 0, 1.0, 0.0), out)
    return out


def t_cdf(x, p: TParams):
    out = _std_t_cdf((np.asarray(x, dtype=float) - p.mu) / p.sigma, p.nu)
    return float(out) if np.ndim(out) == 0 else out


@lru_cache(maxsize=4096)
def _std_t_quantile(q: float, nu: float) -> float:
    if q == 0.5:
        return 0.0
    # Bracket outward from the normal quantile; t tails are heavier so expand.
    lo, hi = -1.0, 1.0
    while float(_std_t_cdf(lo, nu)) > q:
        lo *= 2.0
    while float(_std_t_cdf(hi, nu)) < q:
        hi *= 2.0
    return optimize.brentq(
        lambda z: float(_std_t_cdf(z, nu)) - q, lo, hi, xtol=1e-14, rtol=1e-15, maxiter=500
    )


def t_quantile(q: float, p: TParams) -> float:
    if not 0.0 < q < 1.0:
        raise DomainError(f"quantile level must lie in (0, 1), got {q}")
    return p.mu + p.sigma * _std_t_quantile(float(q), float(p.nu))


def normal_cdf(x, mu: float = 0.0, sd: float = 1.0):
    out = special.ndtr((np.asarray(x, dtype=float) - mu) / sd)
    return float(out) if np.ndim(out) == 0 else out


def normal_quantile(q: float, mu: float = 0.0, sd: float = 1.0) -> float:
    if not 0.0 < q < 1.0:
        raise DomainError(f"quantile level must lie in (0, 1), got {q}")
    return mu + sd * float(special.ndtri(q))


def chi_square_sf(x: float, dof: int) -> float:
    if dof <= 0:
        raise DomainError(f"dof must be positive, got {dof}")
    if not x >= 0:
        raise DomainError(f"x must be non-negative, got {x}")
    if math.isinf(x):
        return 0.0
    return float(special.gammaincc(dof / 2.0, x / 2.0))
