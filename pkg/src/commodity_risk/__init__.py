"""Forecasting and value-at-risk models for commodity spot/futures price series."""

from .bench import ALL_MODELS, ComparisonTable, ModelId, emit_report, parse_report, run_comparison
from .marketdata import PriceSeries, SplitSeries, parse_price_csv, train_holdout_split
from .risk import Forecast, RiskReport, backtest_var, var_from_forecast

__version__ = "0.1.0"

__all__ = [
    "ALL_MODELS",
    "ComparisonTable",
    "Forecast",
    "ModelId",
    "PriceSeries",
    "RiskReport",
    "SplitSeries",
    "backtest_var",
    "emit_report",
    "parse_price_csv",
    "parse_report",
    "run_comparison",
    "train_holdout_split",
    "var_from_forecast",
]
