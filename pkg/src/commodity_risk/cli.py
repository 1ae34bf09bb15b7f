"""Command-line entry point.

Exit codes: 0 success, 1 usage, 2 data, 3 modelling.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import bench, garch, garma
from .arima import simulate_arima
from .errors import AllModelsFailed, DataError, ModelingError, StationarityViolated
from .marketdata import (
    CsvSchema,
    align_spot_futures,
    parse_contract_csv,
    parse_price_csv,
    series_from_arrays,
    splice_next_to_last_month,
    train_holdout_split,
    write_price_csv,
)
from .risk import DEFAULT_INTERVAL, DEFAULT_VAR_LEVEL, backtest_var

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_MODEL = 0, 1, 2, 3
FORMATS = ("json", "csv", "plotdata")
_EXT = {"json": "comparison.json", "csv": "comparison.csv", "plotdata": "plotdata.csv"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def rng_streams(seed: int, n: int) -> list[np.random.Generator]:
    """Independent counter-based generators split from one 64-bit seed."""
    children = np.random.SeedSequence(int(seed) & 0xFFFFFFFFFFFFFFFF).spawn(n)
    return [np.random.Generator(np.random.Philox(c)) for c in children]


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return v


def _unit_interval(text: str) -> float:
    v = float(text)
    if not 0.0 < v < 1.0:
        raise argparse.ArgumentTypeError(f"must lie strictly between 0 and 1, got {text}")
    return v


def _schema(text: str) -> CsvSchema:
    if not text:
        return CsvSchema()
    try:
        pairs = dict(item.split("=", 1) for item in text.split(",") if item)
        return CsvSchema.from_mapping(pairs)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _models(text: str):
    try:
        return bench.parse_model_list(text)
    except KeyError as exc:
        raise argparse.ArgumentTypeError(exc.args[0]) from None


def _formats(text: str) -> list[str]:
    out = [f.strip() for f in text.split(",") if f.strip()]
    bad = [f for f in out if f not in FORMATS]
    if bad or not out:
        raise argparse.ArgumentTypeError(f"formats must be among {', '.join(FORMATS)}")
    return out


def _read(path: str) -> str:
    p = Path(path)
    if not p.is_file():
        raise DataError(f"no such file: {path}")
    return p.read_text(encoding="utf-8")


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_split(args):
    series = parse_price_csv(_read(args.input), args.schema)
    return train_holdout_split(series, args.holdout)


def _config(args) -> bench.ComparisonConfig:
    return bench.ComparisonConfig(interval=args.interval, var_level=args.var_level)


# -- subcommands -----------------------------------------------------------

def cmd_ingest(args) -> int:
    if not args.contracts and not args.input:
        raise UsageError("ingest needs --contracts or --input")
    if args.contracts:
        futures = splice_next_to_last_month(parse_contract_csv(_read(args.contracts), args.schema))
    else:
        futures = parse_price_csv(_read(args.input), args.schema)
    series = futures
    if args.spot:
        series = align_spot_futures(futures, parse_price_csv(_read(args.spot), args.schema))
    path = _out_dir(args) / "series.csv"
    path.write_text(write_price_csv(series), encoding="utf-8")
    print(f"{len(series)} rows, {series.dates[0].isoformat()} to {series.dates[-1].isoformat()} -> {path}")
    return EXIT_OK


def _runs(args):
    split = _load_split(args)
    h = len(split.holdout)
    x = split.training.spot if split.training.has_spot() else None
    fx = split.holdout.spot if split.holdout.has_spot() else None
    if x is None and any(bench.needs_exogenous(m) for m in args.models):
        raise DataError("spot prices are required for ARIMAX and GARMA models")
    cfg = _config(args)
    out = []
    for m in args.models:
        try:
            out.append((m, bench.fit_and_forecast(m, split.training.futures, x, h, fx, cfg), None))
        except (ModelingError, ValueError, np.linalg.LinAlgError) as exc:
            print(f"warning: {m.label} failed: {exc}", file=sys.stderr)
            out.append((m, None, str(exc)))
    if all(run is None for _, run, _ in out):
        raise AllModelsFailed("every model failed")
    return split, out


def cmd_fit(args) -> int:
    split, runs = _runs(args)
    doc = {
        "n_train": len(split.training),
        "models": [
            {"key": m.key, "label": m.label, "error": err,
             "params": None if run is None else run.params,
             "aic": None if run is None else run.aic,
             "aic_per_obs": None if run is None else run.aic_per_obs}
            for m, run, err in runs
        ],
    }
    path = _out_dir(args) / "fits.json"
    path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    for m, run, _ in runs:
        if run is not None:
            print(f"{m.label}: " + ", ".join(f"{k}={v:.{args.digits}g}" for k, v in run.params.items()))
    return EXIT_OK


def cmd_forecast(args) -> int:
    split, runs = _runs(args)
    dates = [d.isoformat() for d in split.holdout.dates]
    lines = ["model,date,point,lower,upper,var"]
    for m, run, _ in runs:
        if run is None:
            continue
        fc = run.forecast
        for j in range(fc.horizon):
            vals = (fc.points[j], fc.lower[j], fc.upper[j], fc.var_path[j])
            lines.append(",".join([m.key, dates[j], *(f"{v:.{args.digits}g}" for v in vals)]))
    path = _out_dir(args) / "forecasts.csv"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"{len(lines) - 1} forecast rows -> {path}")
    return EXIT_OK


def cmd_backtest(args) -> int:
    split, runs = _runs(args)
    actual = split.holdout.futures
    dates = [d.isoformat() for d in split.holdout.dates]
    reports = []
    for m, run, _ in runs:
        if run is None:
            continue
        rep = backtest_var(run.forecast.var_path, actual, dates, args.var_level, model=m.key)
        reports.append(rep)
        print(f"{m.label}: {rep.violations}/{rep.n_steps} VaR breaches, {rep.verdict}")
    path = _out_dir(args) / "backtest.json"
    path.write_text("[" + ",\n".join(r.to_json() for r in reports) + "]\n", encoding="utf-8")
    return EXIT_OK


def cmd_compare(args) -> int:
    split = _load_split(args)
    table = bench.run_comparison(split, args.models, _config(args))
    risk = bench.risk_reports(table)
    out = _out_dir(args)
    for fmt in args.format:
        text = bench.emit_report(table, risk, fmt, digits=args.digits, timings=args.timings)
        (out / _EXT[fmt]).write_text(text, encoding="utf-8")
    for r in table.rows:
        if not r.ok:
            print(f"warning: {r.model.label} failed: {r.error}", file=sys.stderr)
    best = table.row(table.best)
    print(f"best: {table.best.label} (MSD {best.msd:.{args.digits}g})")
    return EXIT_OK


def cmd_simulate(args) -> int:
    noise_rng, exog_rng = rng_streams(args.seed, 2)
    n = args.n
    x = None
    if args.family == "garch":
        params = garch.GarchParams(args.omega, args.alpha, args.beta, args.mu, args.ar1, args.ma1)
        params.check()
        y = garch.simulate_garch(params, n, seed=noise_rng)
    elif args.family == "garma":
        phi = tuple(float(v) for v in args.phi.split(",") if v) if args.phi else ()
        theta = tuple(float(v) for v in args.theta.split(",") if v) if args.theta else ()
        if args.exog == "ramp":
            x = np.linspace(args.x_start, args.x_end, n)
        else:
            x = args.x_start + np.cumsum(exog_rng.normal(args.x_drift, args.x_sd, n))
        try:
            params = garma.GarmaParams(args.beta1, phi, theta, args.sigma, args.nu, args.beta0)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        y = garma.simulate_garma(params, x, seed=noise_rng)
    elif args.family == "arima":
        y = simulate_arima(ar=[args.phi_ar], d=1, n=n, seed=noise_rng, start=args.start)
    else:  # random walk
        y = args.start + np.cumsum(noise_rng.normal(0.0, args.sigma, n))
        x = args.start + np.cumsum(exog_rng.normal(0.0, args.sigma, n))

    if args.as_series:
        text = write_price_csv(series_from_arrays(y, x))
    else:
        cols = ["y"] if x is None else ["y", "x"]
        rows = [",".join(cols)]
        data = [y] if x is None else [y, x]
        rows += [",".join(repr(float(c[i])) for c in data) for i in range(n)]
        text = "\n".join(rows) + "\n"
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text, encoding="utf-8")
    print(f"{n} simulated rows -> {out}")
    return EXIT_OK


# -- parser ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = _Parser(prog="commodity-risk", description=__doc__, formatter_class=fmt)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, models=True):
        p.add_argument("--schema", type=_schema, default="", help="column mapping k=v,... (date, futures, spot, spot_funrural, dayfirst)")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--digits", type=_positive_int, default=6, help="significant digits in text output")
        if models:
            p.add_argument("--input", required=True, help="canonical series CSV (from ingest)")
            p.add_argument("--holdout", type=_positive_int, default=16, help="observations kept for forecast evaluation")
            p.add_argument("--models", type=_models, default="all", help="comma-separated model keys or families; 'all' for the twelve")
            p.add_argument("--var-level", type=_unit_interval, default=DEFAULT_VAR_LEVEL, help="VaR tail probability")
            p.add_argument("--interval", type=_unit_interval, default=DEFAULT_INTERVAL, help="central interval coverage")
            p.add_argument("--seed", type=int, default=0, help="seed for stochastic steps; the estimators themselves are deterministic")

    p = sub.add_parser("ingest", help="splice contracts and align with spot prices", formatter_class=fmt)
    common(p, models=False)
    p.add_argument("--contracts", help="contract CSV (date, futures, contract_id, expiry_month)")
    p.add_argument("--input", help="already-continuous futures CSV, used when --contracts is absent")
    p.add_argument("--spot", help="spot CSV (date, spot, spot_funrural)")
    p.set_defaults(func=cmd_ingest)

    for name, func, help_ in (
        ("fit", cmd_fit, "fit models on the training window"),
        ("forecast", cmd_forecast, "forecast the holdout window"),
        ("backtest", cmd_backtest, "backtest VaR over the holdout window"),
        ("compare", cmd_compare, "rank all models by holdout mean square deviation"),
    ):
        p = sub.add_parser(name, help=help_, formatter_class=fmt)
        common(p)
        if name == "compare":
            p.add_argument("--format", type=_formats, default=",".join(FORMATS), help="comma-separated report formats")
            p.add_argument("--timings", action="store_true", help="include per-model fit wall time in the JSON report")
        p.set_defaults(func=func)

    p = sub.add_parser("simulate", help="write a simulated series", formatter_class=fmt)
    p.add_argument("--family", choices=("garch", "garma", "arima", "rw"), default="garma", help="generating process")
    p.add_argument("--n", type=_positive_int, default=1994, help="number of observations")
    p.add_argument("--seed", type=int, default=0, help="64-bit seed for all random streams")
    p.add_argument("--out", default="simulated.csv", help="output file")
    p.add_argument("--as-series", action="store_true", help="write the canonical price-series format (y as futures, x as spot)")
    p.add_argument("--omega", type=float, default=0.012223, help="GARCH variance intercept")
    p.add_argument("--alpha", type=float, default=0.080113, help="GARCH ARCH coefficient")
    p.add_argument("--beta", type=float, default=0.903628, help="GARCH persistence coefficient")
    p.add_argument("--mu", type=float, default=0.0, help="GARCH mean intercept")
    p.add_argument("--ar1", type=float, default=0.0, help="GARCH mean AR coefficient")
    p.add_argument("--ma1", type=float, default=0.0, help="GARCH mean MA coefficient")
    p.add_argument("--beta0", type=float, default=None, help="GARMA intercept (omit for none)")
    p.add_argument("--beta1", type=float, default=1.0086, help="GARMA exogenous coefficient")
    p.add_argument("--phi", default="0.7512,0.2013", help="GARMA AR coefficients")
    p.add_argument("--theta", default="0.1573", help="GARMA MA coefficients")
    p.add_argument("--sigma", type=float, default=1.0, help="GARMA scale, or step sd for rw")
    p.add_argument("--nu", type=float, default=8.0, help="GARMA Student-t degrees of freedom")
    p.add_argument("--exog", choices=("ramp", "walk"), default="ramp", help="GARMA exogenous path shape")
    p.add_argument("--x-start", type=float, default=60.0, help="first exogenous value")
    p.add_argument("--x-end", type=float, default=150.0, help="last exogenous value of a ramp")
    p.add_argument("--x-drift", type=float, default=0.05, help="step drift of a walk")
    p.add_argument("--x-sd", type=float, default=1.0, help="step sd of a walk")
    p.add_argument("--phi-ar", type=float, default=0.5, help="ARIMA(1,1,0) coefficient")
    p.add_argument("--start", type=float, default=100.0, help="starting level for arima/rw paths")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except StationarityViolated as exc:
        print(f"error: StationarityViolated: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ModelingError, AllModelsFailed) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_MODEL


if __name__ == "__main__":
    sys.exit(main())
