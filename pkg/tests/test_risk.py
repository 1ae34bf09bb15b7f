import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from commodity_risk.errors import DomainError, LengthMismatch
from commodity_risk.garma import GarmaParams, garma_mu_path, simulate_garma
from commodity_risk.numkit import TParams, t_quantile
from commodity_risk.risk import (
    Forecast,
    RiskReport,
    StepDistribution,
    backtest_var,
    make_forecast,
    var_from_forecast,
)
from oracles import normal_quantile_bisect, t_quantile_bisect


def test_median_equals_point():
    steps = [StepDistribution("student-t", 150.0, 2.0, 5.0), StepDistribution("normal", -3.0, 0.5)]
    assert np.allclose(var_from_forecast(steps, 0.5), [150.0, -3.0], atol=1e-12)


def test_t_var():
    v = var_from_forecast([StepDistribution("student-t", 150.0, 1.0, 5.0)], 0.05)[0]
    assert v == pytest.approx(150.0 - 2.0150, abs=1e-3)
    assert v == pytest.approx(150.0 + t_quantile_bisect(0.05, 5), abs=1e-9)


def test_normal_var():
    v = var_from_forecast([StepDistribution("normal", 0.0, 1.0)], 0.05)[0]
    assert v == pytest.approx(-1.6449, abs=1e-4)
    assert v == pytest.approx(normal_quantile_bisect(0.05), abs=1e-9)


def test_bad_level():
    with pytest.raises(DomainError):
        var_from_forecast([StepDistribution("normal", 0.0, 1.0)], 1.0)


@given(
    st.lists(st.floats(-500, 500), min_size=1, max_size=10),
    st.floats(0.01, 10.0),
    st.sampled_from([("normal", None), ("student-t", 3.0), ("student-t", 30.0)]),
)
def test_forecast_invariants(points, scale, dist):
    kind, df = dist
    fc = make_forecast(points, scale, 0.90, kind, df, 0.05)
    assert np.all(fc.lower <= fc.points) and np.all(fc.points <= fc.upper)
    assert np.array_equal(fc.var_path, fc.lower)
    assert np.allclose(var_from_forecast(fc.step_distributions(), 0.05), fc.lower, atol=1e-9)


def test_var_level_separate_from_interval():
    fc = make_forecast([10.0], 1.0, 0.95, "normal", var_level=0.05)
    assert fc.var_path[0] == pytest.approx(10 - 1.6448536, abs=1e-6)
    assert fc.lower[0] == pytest.approx(10 - 1.9599640, abs=1e-6)


def test_forecast_round_trip():
    fc = make_forecast([1.0, 2.0], [0.3, 0.4], dist="student-t", df=7.5)
    assert Forecast.from_dict(fc.to_dict()) == fc


class TestBacktest:
    def test_all_below(self):
        r = backtest_var([1.0, 2.0, 3.0], [5.0, 5.0, 5.0])
        assert (r.violations, r.verdict) == (0, "pass")

    def test_equality_is_not_a_breach(self):
        r = backtest_var([4.0, 5.0], [4.0, 5.0])
        assert r.violations == 0

    def test_counts_and_dates(self):
        r = backtest_var([1.0, 6.0, 3.0, 9.0], [2.0, 5.0, 3.0, 8.0], dates=["a", "b", "c", "d"])
        assert r.violations == 2
        assert r.violating_dates == ["b", "d"]
        assert r.violating_steps == [1, 3]
        assert r.violation_rate == 0.5
        assert r.verdict == "fail"

    @pytest.mark.parametrize("k", [0, 1, 3, 8])
    def test_binomial_p_value(self, k):
        # two-sided: total mass of outcomes no more likely than the observed one
        pmf = [math.comb(16, i) * 0.05**i * 0.95 ** (16 - i) for i in range(17)]
        expected = min(1.0, sum(v for v in pmf if v <= pmf[k] * (1 + 1e-7)))
        actual = np.ones(16)
        var = np.where(np.arange(16) < k, 2.0, 0.0)
        assert backtest_var(var, actual).binomial_p_value == pytest.approx(expected, abs=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            backtest_var([1.0], [1.0, 2.0])
        with pytest.raises(LengthMismatch):
            backtest_var([], [])

    def test_json_round_trip(self):
        r = backtest_var([1.0, 6.0], [2.0, 5.0], dates=["2015-04-01", "2015-04-02"], model="ses")
        assert RiskReport.from_json(r.to_json()) == r

    @given(
        st.lists(st.tuples(st.floats(-10, 10), st.floats(0.1, 3)), min_size=1, max_size=40),
        st.floats(0.01, 0.49),
        st.floats(0.01, 0.49),
    )
    def test_lower_level_never_more_breaches(self, rows, a, b):
        lo, hi = sorted((a, b))
        actual = np.array([m for m, _ in rows])
        steps = [StepDistribution("student-t", 0.0, s, 4.0) for _, s in rows]
        v_lo = backtest_var(var_from_forecast(steps, lo), actual).violations
        v_hi = backtest_var(var_from_forecast(steps, hi), actual).violations
        assert v_lo <= v_hi

    @given(st.integers(1, 50), st.data())
    def test_rate_is_count_over_steps(self, n, data):
        v = np.array(data.draw(st.lists(st.floats(-5, 5), min_size=n, max_size=n)))
        a = np.array(data.draw(st.lists(st.floats(-5, 5), min_size=n, max_size=n)))
        r = backtest_var(v, a)
        assert r.violation_rate == r.violations / n


def test_one_step_coverage_on_t_garma():
    x = np.linspace(60, 150, 10_000)
    p = GarmaParams(beta1=1.0086, phi=(0.7512, 0.2013), theta=(0.1573,), sigma=1.0, nu=8.0)
    y = simulate_garma(p, x, seed=42)
    mu = garma_mu_path(p, y, x)
    var = mu + t_quantile(0.05, TParams(0.0, 1.0, 8.0))
    rate = backtest_var(var, y).violation_rate
    assert 0.035 <= rate <= 0.065
