"""Shared numerical substrate: series transforms, tests, distributions, optimiser."""

from .distributions import (
    TParams,
    chi_square_sf,
    normal_cdf,
    normal_quantile,
    t_cdf,
    t_logpdf,
    t_quantile,
)
from .optimize import OptimResult, central_gradient, minimize, numerical_hessian
from .series import (
    AcfResult,
    LjungBoxResult,
    acf,
    aic,
    difference,
    forecast_errors,
    ljung_box,
    undifference,
)

__all__ = [
    "AcfResult",
    "LjungBoxResult",
    "OptimResult",
    "TParams",
    "acf",
    "aic",
    "central_gradient",
    "chi_square_sf",
    "difference",
    "forecast_errors",
    "ljung_box",
    "minimize",
    "normal_cdf",
    "normal_quantile",
    "numerical_hessian",
    "t_cdf",
    "t_logpdf",
    "t_quantile",
    "undifference",
]
