"""Predictive intervals, value-at-risk paths and holdout violation backtests."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from .errors import DomainError, LengthMismatch
from .numkit import TParams, normal_quantile, t_quantile

DEFAULT_INTERVAL = 0.90
DEFAULT_VAR_LEVEL = 0.05


@dataclass(frozen=True)
class StepDistribution:
    """Predictive distribution of one forecast step."""

    kind: str  # "normal" or "student-t"
    loc: float
    scale: float
    df: float | None = None

    def quantile(self, q: float) -> float:
        if not 0.0 < q < 1.0:
            raise DomainError(f"quantile level must lie in (0, 1), got {q}")
        if self.kind == "normal":
            return normal_quantile(q, self.loc, self.scale)
        if self.kind == "student-t":
            return t_quantile(q, TParams(self.loc, self.scale, self.df))
        raise DomainError(f"unknown distribution {self.kind!r}")


@dataclass(frozen=True, eq=False)
class Forecast:
    horizon: int
    points: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    var_path: np.ndarray
    level_pct: float
    dist_tag: str
    scale: np.ndarray
    df: float | None = None
    var_level: float = DEFAULT_VAR_LEVEL

    def step_distributions(self) -> list[StepDistribution]:
        return [
            StepDistribution(self.dist_tag, float(m), float(s), self.df)
            for m, s in zip(self.points, self.scale)
        ]

    def to_dict(self) -> dict:
        return {
            "horizon": self.horizon,
            "points": self.points.tolist(),
            "lower": self.lower.tolist(),
            "upper": self.upper.tolist(),
            "var_path": self.var_path.tolist(),
            "level_pct": self.level_pct,
            "dist_tag": self.dist_tag,
            "scale": self.scale.tolist(),
            "df": self.df,
            "var_level": self.var_level,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Forecast":
        arr = {k: np.asarray(d[k], dtype=float) for k in ("points", "lower", "upper", "var_path", "scale")}
        return cls(
            horizon=int(d["horizon"]),
            level_pct=float(d["level_pct"]),
            dist_tag=d["dist_tag"],
            df=None if d.get("df") is None else float(d["df"]),
            var_level=float(d.get("var_level", DEFAULT_VAR_LEVEL)),
            **arr,
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, Forecast):
            return NotImplemented
        return self.to_dict() == other.to_dict()


def make_forecast(
    points,
    scale,
    level_pct: float = DEFAULT_INTERVAL,
    dist: str = "normal",
    df: float | None = None,
    var_level: float = DEFAULT_VAR_LEVEL,
) -> Forecast:
    """Build a forecast with central ``level_pct`` bands and a VaR path."""
    if not 0.0 < level_pct < 1.0:
        raise DomainError(f"interval level must lie in (0, 1), got {level_pct}")
    points = np.asarray(points, dtype=float)
    scale = np.broadcast_to(np.asarray(scale, dtype=float), points.shape).copy()
    tail = (1.0 - level_pct) / 2.0
    steps = [StepDistribution(dist, float(m), float(s), df) for m, s in zip(points, scale)]
    lower = var_from_forecast(steps, tail)
    upper = var_from_forecast(steps, 1.0 - tail)
    var_path = lower.copy() if np.isclose(var_level, tail, rtol=0, atol=1e-15) else var_from_forecast(steps, var_level)
    return Forecast(
        horizon=points.size,
        points=points,
        lower=lower,
        upper=upper,
        var_path=var_path,
        level_pct=level_pct,
        dist_tag=dist,
        scale=scale,
        df=df,
        var_level=var_level,
    )


def var_from_forecast(step_params, level: float = DEFAULT_VAR_LEVEL) -> np.ndarray:
    """Per-step ``level`` quantile of the predictive distributions."""
    if not 0.0 < level < 1.0:
        raise DomainError(f"VaR level must lie in (0, 1), got {level}")
    return np.array([s.quantile(level) for s in step_params], dtype=float)


@dataclass(frozen=True)
class RiskReport:
    n_steps: int
    violations: int
    violation_rate: float
    violating_dates: list[str] = field(default_factory=list)
    violating_steps: list[int] = field(default_factory=list)
    nominal_level: float = DEFAULT_VAR_LEVEL
    binomial_p_value: float = 1.0
    verdict: str = "pass"
    model: str | None = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RiskReport":
        return cls(**json.loads(text))


def backtest_var(
    var_path,
    actual,
    dates=None,
    nominal_level: float = DEFAULT_VAR_LEVEL,
    model: str | None = None,
) -> RiskReport:
    """Count strict breaches ``actual < var``.

    The verdict is ``pass`` only with zero breaches: a 16-step window cannot
    power a coverage test, so the binomial p-value is informational.
    """
    v = np.asarray(var_path, dtype=float)
    a = np.asarray(actual, dtype=float)
    if v.shape != a.shape or v.ndim != 1 or v.size == 0:
        raise LengthMismatch(f"var_path {v.shape} vs actual {a.shape}")
    hits = np.flatnonzero(a < v)
    n = int(v.size)
    k = int(hits.size)
    p_value = float(stats.binomtest(k, n, nominal_level).pvalue)
    if dates is None:
        bad_dates = []
    else:
        dates = list(dates)
        bad_dates = [str(dates[i]) for i in hits]
    return RiskReport(
        n_steps=n,
        violations=k,
        violation_rate=k / n,
        violating_dates=bad_dates,
        violating_steps=[int(i) for i in hits],
        nominal_level=nominal_level,
        binomial_p_value=p_value,
        verdict="pass" if k == 0 else "fail",
        model=model,
    )
