"""Model comparison harness: fit every configured model on the training window,
forecast the holdout in one shot, and rank by mean square deviation.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import arima, garch, garma, smoothing
from .errors import AllModelsFailed, CommodityRiskError, MissingExogenous, UnknownFormat
from .marketdata import SplitSeries
from .numkit import forecast_errors
from .risk import DEFAULT_INTERVAL, DEFAULT_VAR_LEVEL, Forecast, RiskReport, backtest_var

REPORT_SCHEMA = "commodity-risk/comparison/v1"
THREADS_ENV = "COMMODITY_RISK_THREADS"


@dataclass(frozen=True, order=True)
class ModelId:
    family: str
    label: str
    key: str = field(compare=False)

    def __str__(self) -> str:
        return self.label


def _garma_id(p, q, intercept):
    spec = garma.GarmaSpec(p, q, intercept)
    return ModelId("garma", spec.label, f"garma{p}{q}{'i' if intercept else ''}")


ALL_MODELS: tuple[ModelId, ...] = (
    ModelId("ses", "Simple exponential smoothing", "ses"),
    ModelId("holt", "Holt exponential smoothing", "holt"),
    ModelId("arima", "ARIMA(1,1,0)", "arima110"),
    ModelId("arima", "ARIMA(2,1,1)", "arima211"),
    ModelId("arimax", "ARIMAX(1,1,0)", "arimax110"),
    ModelId("arimax", "ARIMAX(2,1,1)", "arimax211"),
    ModelId("arimax", "ARIMAX(0,0,5)", "arimax005"),
    ModelId("garch", "GARCH(1,1)", "garch11"),
    _garma_id(1, 0, True),
    _garma_id(1, 0, False),
    _garma_id(2, 1, True),
    _garma_id(2, 1, False),
)
_ORDER = {m.key: i for i, m in enumerate(ALL_MODELS)}
_BY_KEY = {m.key: m for m in ALL_MODELS}
_BY_LABEL = {m.label: m for m in ALL_MODELS}

_ARIMA_SPECS = {
    "arima110": arima.ArimaSpec(1, 1, 0),
    "arima211": arima.ArimaSpec(2, 1, 1),
    "arimax110": arima.ArimaSpec(1, 1, 0, exogenous=True),
    "arimax211": arima.ArimaSpec(2, 1, 1, exogenous=True),
    "arimax005": arima.ArimaSpec(0, 0, 5, include_intercept=True, exogenous=True),
}


def model_by_key(key: str) -> ModelId:
    key = key.strip().lower()
    if key in _BY_KEY:
        return _BY_KEY[key]
    families = [m for m in ALL_MODELS if m.family == key]
    if len(families) == 1:
        return families[0]
    raise KeyError(f"unknown model {key!r}; choose from {', '.join(_BY_KEY)}")


def parse_model_list(text: str) -> list[ModelId]:
    """Comma-separated keys; a family name expands to all its configurations."""
    out: list[ModelId] = []
    for tok in (t.strip().lower() for t in text.split(",")):
        if not tok:
            continue
        if tok == "all":
            out.extend(ALL_MODELS)
        elif tok in _BY_KEY:
            out.append(_BY_KEY[tok])
        else:
            fam = [m for m in ALL_MODELS if m.family == tok]
            if not fam:
                raise KeyError(f"unknown model {tok!r}; choose from {', '.join(_BY_KEY)}")
            out.extend(fam)
    return list(dict.fromkeys(out))


def needs_exogenous(model: ModelId) -> bool:
    return model.family in ("arimax", "garma")


@dataclass(frozen=True)
class ComparisonConfig:
    interval: float = DEFAULT_INTERVAL
    var_level: float = DEFAULT_VAR_LEVEL
    threads: int | None = None


@dataclass(frozen=True, eq=False)
class ModelRun:
    """One fitted-and-forecast model, before scoring."""

    forecast: Forecast
    fitted: np.ndarray
    aic: float | None
    aic_per_obs: float | None
    params: dict
    fit: object = field(repr=False, default=None)


def fit_and_forecast(model: ModelId, y, x, h: int, future_x, config: ComparisonConfig) -> ModelRun:
    """Fit ``model`` on ``(y, x)`` and forecast ``h`` steps ahead."""
    y = np.asarray(y, dtype=float)
    lvl, vl = config.interval, config.var_level
    if model.family == "ses":
        f = smoothing.fit_ses(y)
        return ModelRun(smoothing.forecast_ses(f, h, lvl, vl), f.fitted, None, None,
                        {"alpha": f.alpha, "level": f.level}, f)
    if model.family == "holt":
        f = smoothing.fit_holt(y)
        return ModelRun(smoothing.forecast_holt(f, h, lvl, vl), f.fitted, None, None,
                        {"alpha": f.alpha, "beta": f.beta, "level": f.level, "trend": f.trend}, f)
    if model.family in ("arima", "arimax"):
        spec = _ARIMA_SPECS[model.key]
        f = arima.fit_arima(y, spec, x if spec.exogenous else None)
        fc = arima.forecast_arima(f, h, future_x if spec.exogenous else None, lvl, vl)
        params = {f"ar{i + 1}": float(v) for i, v in enumerate(f.ar)}
        params.update({f"ma{i + 1}": float(v) for i, v in enumerate(f.ma)})
        if f.intercept is not None:
            params["intercept"] = f.intercept
        if f.reg_coef is not None:
            params["reg_coef"] = f.reg_coef
        params["sigma2"] = f.sigma2
        return ModelRun(fc, f.fitted, f.aic, f.aic / y.size, params, f)
    if model.family == "garch":
        r = np.diff(y)
        f = garch.fit_arma_garch(r)
        fc = garch.forecast_arma_garch(f, h, float(y[-1]), lvl, vl)
        fitted = np.r_[np.nan, y[:-1] + f.fitted]
        params = {k: getattr(f, k) for k in ("mu", "ar1", "ma1", "omega", "alpha1", "beta1")}
        return ModelRun(fc, fitted, f.aic_total, f.aic_per_obs, params, f)
    if model.family == "garma":
        spec = garma.GarmaSpec(int(model.key[5]), int(model.key[6]), model.key.endswith("i"))
        f = garma.fit_garma(y, x, spec)
        fc = garma.forecast_garma(f, h, future_x, lvl, vl)
        vals = [f.beta0] if spec.include_intercept else []
        vals += [f.beta1, *f.phi, *f.theta, f.sigma, f.nu]
        params = dict(zip(spec.param_names(), map(float, vals)))
        return ModelRun(fc, f.mu_path, f.aic, f.aic / y.size, params, f)
    raise KeyError(f"unknown family {model.family!r}")


@dataclass(frozen=True, eq=False)
class ComparisonRow:
    model: ModelId
    msd: float | None
    sse: float | None
    aic: float | None
    aic_per_obs: float | None = None
    fit_wall_time: float | None = None
    error: str | None = None
    forecast: Forecast | None = None
    fitted: np.ndarray | None = None
    params: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.error is None

    def to_dict(self, timings: bool = False) -> dict:
        d = {
            "key": self.model.key,
            "family": self.model.family,
            "label": self.model.label,
            "msd": self.msd,
            "sse": self.sse,
            "aic": self.aic,
            "aic_per_obs": self.aic_per_obs,
            "error": self.error,
            "params": self.params,
            "forecast": None if self.forecast is None else self.forecast.to_dict(),
            "fitted": None if self.fitted is None else [None if math.isnan(v) else v for v in self.fitted.tolist()],
        }
        if timings:
            d["fit_wall_time"] = self.fit_wall_time
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ComparisonRow":
        key = d["key"]
        model = _BY_KEY.get(key) or ModelId(d["family"], d["label"], key)
        fitted = d.get("fitted")
        return cls(
            model=model,
            msd=d["msd"],
            sse=d["sse"],
            aic=d["aic"],
            aic_per_obs=d.get("aic_per_obs"),
            fit_wall_time=d.get("fit_wall_time"),
            error=d.get("error"),
            forecast=None if d.get("forecast") is None else Forecast.from_dict(d["forecast"]),
            fitted=None if fitted is None else np.array([np.nan if v is None else v for v in fitted], dtype=float),
            params=d.get("params") or {},
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, ComparisonRow):
            return NotImplemented
        return json.dumps(self.to_dict()) == json.dumps(other.to_dict())


@dataclass(frozen=True, eq=False)
class ComparisonTable:
    rows: tuple[ComparisonRow, ...]
    best: ModelId
    dates: tuple[str, ...] = ()
    actual: tuple[float, ...] = ()
    n_train: int = 0
    config: ComparisonConfig = field(default_factory=ComparisonConfig)

    @property
    def holdout_dates(self) -> tuple[str, ...]:
        return self.dates[self.n_train :]

    @property
    def holdout_actual(self) -> np.ndarray:
        return np.asarray(self.actual[self.n_train :], dtype=float)

    def row(self, model: ModelId | str) -> ComparisonRow:
        key = model.key if isinstance(model, ModelId) else model
        for r in self.rows:
            if r.model.key == key or r.model.label == key:
                return r
        raise KeyError(key)

    def to_dict(self, timings: bool = False) -> dict:
        return {
            "schema": REPORT_SCHEMA,
            "best": self.best.key,
            "best_label": self.best.label,
            "config": {"interval": self.config.interval, "var_level": self.config.var_level},
            "n_train": self.n_train,
            "dates": list(self.dates),
            "actual": list(self.actual),
            "rows": [r.to_dict(timings) for r in self.rows],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ComparisonTable":
        rows = tuple(ComparisonRow.from_dict(r) for r in d["rows"])
        best = next(r.model for r in rows if r.model.key == d["best"])
        cfg = d.get("config") or {}
        return cls(
            rows=rows,
            best=best,
            dates=tuple(d.get("dates", ())),
            actual=tuple(float(v) for v in d.get("actual", ())),
            n_train=int(d.get("n_train", 0)),
            config=ComparisonConfig(cfg.get("interval", DEFAULT_INTERVAL), cfg.get("var_level", DEFAULT_VAR_LEVEL)),
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, ComparisonTable):
            return NotImplemented
        return json.dumps(self.to_dict()) == json.dumps(other.to_dict())


def _thread_count(config: ComparisonConfig) -> int:
    if config.threads:
        return max(1, int(config.threads))
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return min(4, os.cpu_count() or 1)


def _run_one(model, y, x, h, fx, actual, config) -> ComparisonRow:
    t0 = time.perf_counter()
    try:
        run = fit_and_forecast(model, y, x, h, fx, config)
        if not np.all(np.isfinite(run.forecast.points)):
            raise CommodityRiskError("forecast is not finite")
    except (CommodityRiskError, ValueError, FloatingPointError, np.linalg.LinAlgError) as exc:
        return ComparisonRow(model, None, None, None, fit_wall_time=time.perf_counter() - t0,
                             error=f"{type(exc).__name__}: {exc}")
    wall = time.perf_counter() - t0
    sse, msd = forecast_errors(run.forecast.points, actual)
    return ComparisonRow(
        model=model,
        msd=msd,
        sse=sse,
        aic=run.aic,
        aic_per_obs=run.aic_per_obs,
        fit_wall_time=wall,
        forecast=run.forecast,
        fitted=np.asarray(run.fitted, dtype=float),
        params=run.params,
    )


def run_comparison(
    split: SplitSeries,
    models: Sequence[ModelId] | None = None,
    config: ComparisonConfig | None = None,
) -> ComparisonTable:
    """Fit each model on the training window and score its holdout forecast."""
    config = config or ComparisonConfig()
    models = list(dict.fromkeys(models or ALL_MODELS))
    if not models:
        raise ValueError("no models requested")
    if len(split.holdout) == 0:
        raise ValueError("holdout is empty")
    y = split.training.futures
    actual = split.holdout.futures
    h = len(split.holdout)
    x = fx = None
    if any(needs_exogenous(m) for m in models):
        if not (split.training.has_spot() and split.holdout.has_spot()):
            raise MissingExogenous("spot prices are required for ARIMAX and GARMA models")
        x = split.training.spot
        fx = split.holdout.spot

    ordered = sorted(models, key=lambda m: (_ORDER.get(m.key, len(_ORDER)), m.key))
    workers = min(_thread_count(config), len(ordered))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda m: _run_one(m, y, x, h, fx, actual, config), ordered))
    else:
        rows = [_run_one(m, y, x, h, fx, actual, config) for m in ordered]

    good = [r for r in rows if r.ok]
    if not good:
        raise AllModelsFailed("; ".join(f"{r.model.label}: {r.error}" for r in rows))
    best = min(good, key=lambda r: (r.msd, _ORDER.get(r.model.key, len(_ORDER)))).model
    full = split.training + split.holdout
    return ComparisonTable(
        rows=tuple(rows),
        best=best,
        dates=tuple(d.isoformat() for d in full.dates),
        actual=tuple(float(v) for v in full.futures),
        n_train=len(split.training),
        config=config,
    )


def risk_reports(table: ComparisonTable) -> list[RiskReport]:
    """VaR backtest of every successful row against the holdout prices."""
    out = []
    for r in table.rows:
        if r.ok:
            out.append(backtest_var(r.forecast.var_path, table.holdout_actual, table.holdout_dates,
                                    r.forecast.var_level, model=r.model.key))
    return out


# -- reports ---------------------------------------------------------------

def _num(v, digits: int) -> str:
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    return f"{v:.{digits}g}"


def emit_report(
    table: ComparisonTable,
    risk: Sequence[RiskReport] = (),
    format: str = "json",
    digits: int = 6,
    timings: bool = False,
) -> str:
    """Render a comparison as ``json``, a ``csv`` summary grid, or long ``plotdata`` rows.

    JSON keeps full float precision so it parses back to an equal table;
    ``digits`` controls the text formats only.
    """
    if not table.rows:
        raise ValueError("empty table")
    if format == "json":
        d = table.to_dict(timings)
        d["risk"] = [json.loads(r.to_json()) for r in risk]
        return json.dumps(d, indent=2, sort_keys=False, allow_nan=False) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if format == "csv":
        w.writerow(["model", "mean_square_deviation", "sse", "aic", "aic_per_obs", "best", "status"])
        for r in table.rows:
            no_aic = r.model.family in ("ses", "holt")
            w.writerow([
                r.model.label,
                _num(r.msd, digits),
                _num(r.sse, digits),
                "–" if no_aic else _num(r.aic, digits),
                "–" if no_aic else _num(r.aic_per_obs, digits),
                "*" if r.model == table.best else "",
                "ok" if r.ok else r.error,
            ])
        return buf.getvalue()
    if format == "plotdata":
        w.writerow(["model", "date", "segment", "actual", "fitted", "point", "lower", "upper", "var"])
        n = table.n_train
        for r in table.rows:
            if not r.ok:
                continue
            for i in range(n):
                w.writerow([r.model.key, table.dates[i], "train", _num(table.actual[i], digits),
                            _num(float(r.fitted[i]), digits), "", "", "", ""])
            fc = r.forecast
            for j in range(fc.horizon):
                w.writerow([r.model.key, table.dates[n + j], "holdout", _num(table.actual[n + j], digits), "",
                            _num(float(fc.points[j]), digits), _num(float(fc.lower[j]), digits),
                            _num(float(fc.upper[j]), digits), _num(float(fc.var_path[j]), digits)])
        return buf.getvalue()
    raise UnknownFormat(f"unknown report format {format!r}")


def parse_report(text: str) -> tuple[ComparisonTable, list[RiskReport]]:
    d = json.loads(text)
    if d.get("schema") != REPORT_SCHEMA:
        raise UnknownFormat(f"not a comparison report: schema {d.get('schema')!r}")
    risk = [RiskReport(**r) for r in d.get("risk", [])]
    return ComparisonTable.from_dict(d), risk
