import math

import numpy as np
import pytest

from commodity_risk.errors import MaxIterations, NonFiniteObjective
from commodity_risk.numkit import minimize
from commodity_risk.numkit.optimize import BoxTransform, central_gradient


def rosenbrock(v):
    return (1 - v[0]) ** 2 + 100 * (v[1] - v[0] ** 2) ** 2


def test_quadratic():
    res = minimize(lambda v: (v[0] - 3) ** 2 + (v[1] + 1) ** 2, [0.0, 0.0])
    assert res.converged
    assert np.allclose(res.x, [3, -1], atol=1e-6)


def test_rosenbrock():
    res = minimize(rosenbrock, [-1.2, 1.0])
    assert np.allclose(res.x, [1, 1], atol=1e-4)


def test_nan_at_start():
    with pytest.raises(NonFiniteObjective):
        minimize(lambda v: math.nan, [0.0])


def test_bounds_respected():
    # floating point may land exactly on a bound, never beyond it
    seen = []

    def f(v):
        seen.append(v.copy())
        return (v[0] + 5) ** 2 + (v[1] - 7) ** 2 + (v[2] - 0.5) ** 2

    res = minimize(f, [1.0, 1.0, 0.2], bounds=[(0.0, None), (None, 2.0), (0.0, 1.0)])
    pts = np.array(seen)
    assert np.all(pts[:, 0] >= 0) and np.all(pts[:, 1] <= 2)
    assert np.all((pts[:, 2] >= 0) & (pts[:, 2] <= 1))
    assert res.x[2] == pytest.approx(0.5, abs=1e-6)
    assert res.x[0] < 1e-3 and res.x[1] > 2 - 1e-3


def test_reported_point_is_best_ever_seen():
    vals = []

    def f(v):
        out = rosenbrock(v) + 0.3 * math.sin(5 * v[0])
        vals.append(out)
        return out

    res = minimize(f, [-1.0, 2.0], tol=1e-8)
    assert res.f <= min(vals) + 1e-15
    if res.converged:
        assert min(vals) >= res.f - 1e-8


def test_maxiter():
    with pytest.raises(MaxIterations):
        minimize(rosenbrock, [-1.2, 1.0], max_iter=3, polish=False, restarts=0, raise_on_maxiter=True)


def test_transform_round_trip():
    t = BoxTransform([(None, None), (0.0, None), (None, 3.0), (-1.0, 1.0)], 4)
    x = np.array([-2.0, 0.4, 1.5, 0.3])
    assert np.allclose(t.to_bounded(t.to_free(x)), x, atol=1e-12)


def test_central_gradient():
    g = central_gradient(lambda v: v[0] ** 2 + 3 * v[1], np.array([2.0, -1.0]))
    assert np.allclose(g, [4.0, 3.0], atol=1e-6)
