"""Derivative-free minimisation with smooth box-constraint transforms.

Every estimator in the package maximises a likelihood of at most a handful
of parameters. ``minimize`` runs a Nelder-Mead simplex in an unconstrained
space, polishes with quasi-Newton steps on central-difference gradients, and
restarts the simplex once from the best point found. Bounds are mapped with
``lo + exp(u)`` / ``hi - exp(u)`` for half-lines and a logistic for intervals,
so the objective never sees an out-of-bounds point.
"""

from __future__ import annotations

import math
import warnings
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np
from scipy import optimize as _sp

from ..errors import MaxIterations, NonFiniteObjective

Bound = tuple[float | None, float | None]

# Past this magnitude every transform is saturated to double precision, so the
# objective goes flat in free space; a quadratic wall keeps the simplex out.
_FREE_CAP = 36.0


@dataclass(frozen=True)
class OptimResult:
    x: np.ndarray
    f: float
    converged: bool
    iterations: int
    n_evals: int


class BoxTransform:
    """Bijection between an open box and R^n."""

    def __init__(self, bounds: Sequence[Bound] | None, dim: int):
        if bounds is None:
            bounds = [(None, None)] * dim
        if len(bounds) != dim:
            raise ValueError(f"{len(bounds)} bounds for {dim} parameters")
        self.bounds = [(lo, hi) for lo, hi in bounds]

    def to_free(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        u = np.empty_like(x)
        for i, (lo, hi) in enumerate(self.bounds):
            xi = x[i]
            if lo is None and hi is None:
                u[i] = xi
            elif hi is None:
                u[i] = math.log(max(xi - lo, 1e-300))
            elif lo is None:
                u[i] = math.log(max(hi - xi, 1e-300))
            else:
                s = (xi - lo) / (hi - lo)
                s = min(max(s, 1e-12), 1 - 1e-12)
                u[i] = math.log(s / (1 - s))
        return u

    def to_bounded(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        x = np.empty_like(u)
        for i, (lo, hi) in enumerate(self.bounds):
            ui = u[i]
            if lo is None and hi is None:
                x[i] = ui
            elif hi is None:
                x[i] = lo + math.exp(min(ui, 700.0))
            elif lo is None:
                x[i] = hi - math.exp(min(ui, 700.0))
            else:
                x[i] = lo + (hi - lo) / (1.0 + math.exp(-max(min(ui, 700.0), -700.0)))
        return x


def central_gradient(f: Callable[[np.ndarray], float], u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    g = np.empty_like(u)
    for i in range(u.size):
        h = 1e-6 * max(1.0, abs(u[i]))
        up = u.copy()
        dn = u.copy()
        up[i] += h
        dn[i] -= h
        g[i] = (f(up) - f(dn)) / (2 * h)
    return g


def numerical_hessian(f: Callable[[np.ndarray], float], x: np.ndarray, rel_step: float = 1e-4) -> np.ndarray:
    """Central-difference Hessian of a scalar function."""
    x = np.asarray(x, dtype=float)
    k = x.size
    h = rel_step * np.maximum(1.0, np.abs(x))
    H = np.empty((k, k))
    f0 = f(x)
    for i in range(k):
        ei = np.zeros(k)
        ei[i] = h[i]
        H[i, i] = (f(x + ei) - 2 * f0 + f(x - ei)) / h[i] ** 2
        for j in range(i):
            ej = np.zeros(k)
            ej[j] = h[j]
            H[i, j] = H[j, i] = (
                f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)
            ) / (4 * h[i] * h[j])
    return H


class _Tracked:
    """Objective wrapper that remembers the best point ever evaluated."""

    def __init__(self, objective, transform: BoxTransform):
        self.objective = objective
        self.transform = transform
        self.best_f = math.inf
        self.best_u = None
        self.n_evals = 0

    def __call__(self, u) -> float:
        u = np.asarray(u, dtype=float)
        capped = np.clip(u, -_FREE_CAP, _FREE_CAP)
        free = [lo is None and hi is None for lo, hi in self.transform.bounds]
        capped[free] = u[free]
        x = self.transform.to_bounded(capped)
        val = float(self.objective(x))
        self.n_evals += 1
        if not math.isfinite(val):
            raise NonFiniteObjective(x)
        val += float(np.sum((u - capped) ** 2))
        if val < self.best_f:
            self.best_f = val
            self.best_u = capped
        return val


def _nelder_mead(fun, u0, tol, max_iter):
    return _sp.minimize(
        fun,
        u0,
        method="Nelder-Mead",
        options={"xatol": tol, "fatol": tol, "maxiter": max_iter, "maxfev": 4 * max_iter, "adaptive": u0.size > 3},
    )


def minimize(
    objective: Callable[[np.ndarray], float],
    x0,
    bounds: Sequence[Bound] | None = None,
    tol: float = 1e-8,
    max_iter: int = 5000,
    polish: bool = True,
    restarts: int = 1,
    raise_on_maxiter: bool = False,
) -> OptimResult:
    """Minimise ``objective`` starting from ``x0``.

    Returns the best point evaluated during the whole run, so no trial point
    ever beats the reported ``f``. ``converged`` reflects the final simplex
    run meeting both the diameter and the objective-spread tolerance.
    """
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    transform = BoxTransform(bounds, x0.size)
    tracked = _Tracked(objective, transform)
    u0 = transform.to_free(x0)
    tracked(u0)

    iterations = 0
    res = _nelder_mead(tracked, u0, tol, max_iter)
    iterations += int(res.nit)
    converged = bool(res.success)

    if polish:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            try:
                pol = _sp.minimize(
                    tracked,
                    tracked.best_u,
                    jac=lambda u: central_gradient(tracked, u),
                    method="BFGS",
                    options={"maxiter": 200, "gtol": 1e-7},
                )
                iterations += int(pol.nit)
            except NonFiniteObjective:
                # a line search stepped somewhere unusable; the tracked best is kept
                pass

    for _ in range(restarts):
        res = _nelder_mead(tracked, tracked.best_u, tol, max_iter)
        iterations += int(res.nit)
        converged = bool(res.success)

    if not converged and raise_on_maxiter:
        raise MaxIterations(f"no convergence after {iterations} iterations")
    return OptimResult(
        x=transform.to_bounded(tracked.best_u),
        f=tracked.best_f,
        converged=converged,
        iterations=iterations,
        n_evals=tracked.n_evals,
    )
