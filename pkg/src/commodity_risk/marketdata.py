"""Price-series ingestion: CSV parsing, futures contract splicing, spot alignment
and train/holdout splitting.

A continuous futures series is built by keeping, for every contract, only the
observations dated in the calendar month just before its expiry month. That
avoids the convergence-to-spot of the final month and the jump that follows a
roll.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, replace
from datetime import date, datetime

import numpy as np

from .errors import (
    DuplicateDate,
    EmptyInput,
    EmptyIntersection,
    GapDetected,
    HoldoutTooLarge,
    MalformedRow,
    OverlapDetected,
)


@dataclass(frozen=True)
class PriceObservation:
    date: date
    futures_price: float | None = None
    spot_price: float | None = None
    spot_price_funrural: float | None = None

    def __post_init__(self):
        if self.date.weekday() >= 5:
            raise ValueError(f"{self.date} is not a business day")
        for name in ("futures_price", "spot_price", "spot_price_funrural"):
            v = getattr(self, name)
            if v is not None and not (v > 0 and np.isfinite(v)):
                raise ValueError(f"{name} must be positive, got {v}")


@dataclass(frozen=True)
class PriceSeries:
    observations: tuple[PriceObservation, ...]

    def __post_init__(self):
        object.__setattr__(self, "observations", tuple(self.observations))
        for prev, cur in zip(self.observations, self.observations[1:]):
            if cur.date == prev.date:
                raise DuplicateDate(cur.date)
            if cur.date < prev.date:
                raise ValueError("observations must be in increasing date order")

    def __len__(self) -> int:
        return len(self.observations)

    def __getitem__(self, idx):
        if isinstance(idx, slice):
            return PriceSeries(self.observations[idx])
        return self.observations[idx]

    def __add__(self, other: "PriceSeries") -> "PriceSeries":
        return PriceSeries(self.observations + other.observations)

    @property
    def dates(self) -> list[date]:
        return [o.date for o in self.observations]

    def _column(self, name: str) -> np.ndarray:
        vals = [getattr(o, name) for o in self.observations]
        return np.array([np.nan if v is None else v for v in vals], dtype=float)

    @property
    def futures(self) -> np.ndarray:
        return self._column("futures_price")

    @property
    def spot(self) -> np.ndarray:
        return self._column("spot_price")

    @property
    def spot_funrural(self) -> np.ndarray:
        return self._column("spot_price_funrural")

    def has_spot(self) -> bool:
        return len(self) > 0 and all(o.spot_price is not None for o in self.observations)


@dataclass(frozen=True)
class ContractSeries:
    contract_id: str
    expiry_month: tuple[int, int]  # (year, month)
    observations: tuple[tuple[date, float], ...]

    def __post_init__(self):
        obs = tuple(sorted(self.observations))
        object.__setattr__(self, "observations", obs)
        y, m = self.expiry_month
        for d, p in obs:
            if (d.year, d.month) > (y, m):
                raise ValueError(f"{self.contract_id}: {d} is after expiry month {y}-{m:02d}")
            if not p > 0:
                raise ValueError(f"{self.contract_id}: non-positive price {p} on {d}")


@dataclass(frozen=True)
class SplitSeries:
    training: PriceSeries
    holdout: PriceSeries


@dataclass(frozen=True)
class CsvSchema:
    """Maps logical fields to CSV column names. ``None`` disables a field."""

    date: str = "date"
    futures: str | None = "futures"
    spot: str | None = "spot"
    spot_funrural: str | None = "spot_funrural"
    contract_id: str = "contract_id"
    expiry_month: str = "expiry_month"
    dayfirst: bool = False

    @classmethod
    def from_mapping(cls, mapping: dict[str, str]) -> "CsvSchema":
        kw: dict = {}
        for k, v in mapping.items():
            if k == "dayfirst":
                kw[k] = str(v).lower() in ("1", "true", "yes")
            elif k in cls.__dataclass_fields__:
                kw[k] = v or None
            else:
                raise ValueError(f"unknown schema key {k!r}")
        return cls(**kw)


def _parse_date(text: str, dayfirst: bool) -> date:
    text = text.strip()
    if dayfirst:
        return datetime.strptime(text, "%d/%m/%Y").date()
    try:
        return date.fromisoformat(text)
    except ValueError:
        return datetime.strptime(text, "%d/%m/%Y").date()


def _parse_price(text: str | None) -> float | None:
    if text is None or text.strip() == "":
        return None
    v = float(text)
    if not (v > 0 and np.isfinite(v)):
        raise ValueError(f"price must be positive, got {text.strip()!r}")
    return v


def _rows(content: str):
    reader = csv.DictReader(io.StringIO(content))
    if reader.fieldnames is None:
        raise EmptyInput("no header row")
    reader.fieldnames = [f.strip() for f in reader.fieldnames]
    for row in reader:
        if not any((v or "").strip() for v in row.values() if isinstance(v, str)):
            continue
        yield reader.line_num, reader.fieldnames, row


def parse_price_csv(content: str, schema: CsvSchema | None = None) -> PriceSeries:
    """Parse a delimited price file into a date-sorted :class:`PriceSeries`."""
    schema = schema or CsvSchema()
    obs: list[PriceObservation] = []
    for line, header, row in _rows(content):
        if schema.date not in header:
            raise MalformedRow(1, f"missing date column {schema.date!r}")

        def col(name):
            return row.get(name) if name and name in header else None

        try:
            d = _parse_date(row[schema.date] or "", schema.dayfirst)
            obs.append(
                PriceObservation(
                    date=d,
                    futures_price=_parse_price(col(schema.futures)),
                    spot_price=_parse_price(col(schema.spot)),
                    spot_price_funrural=_parse_price(col(schema.spot_funrural)),
                )
            )
        except (ValueError, TypeError) as exc:
            raise MalformedRow(line, str(exc)) from None
    if not obs:
        raise EmptyInput("no valid rows")
    obs.sort(key=lambda o: o.date)
    for prev, cur in zip(obs, obs[1:]):
        if prev.date == cur.date:
            raise DuplicateDate(cur.date)
    return PriceSeries(tuple(obs))


def parse_contract_csv(content: str, schema: CsvSchema | None = None) -> list[ContractSeries]:
    """Parse a long-format contract file (date, futures, contract_id, expiry_month)."""
    schema = schema or CsvSchema()
    grouped: dict[tuple[str, tuple[int, int]], list[tuple[date, float]]] = {}
    for line, header, row in _rows(content):
        try:
            d = _parse_date(row[schema.date] or "", schema.dayfirst)
            price = _parse_price(row[schema.futures])
            if price is None:
                raise ValueError("missing futures price")
            cid = (row[schema.contract_id] or "").strip()
            if not cid:
                raise ValueError("missing contract id")
            ym = (row[schema.expiry_month] or "").strip()
            y, m = int(ym[:4]), int(ym[5:7])
            if len(ym) != 7 or ym[4] != "-" or not 1 <= m <= 12:
                raise ValueError(f"expiry month {ym!r} is not YYYY-MM")
            if d.weekday() >= 5:
                raise ValueError(f"{d} is not a business day")
            if (d.year, d.month) > (y, m):
                raise ValueError(f"{d} falls after expiry month {ym}")
        except (ValueError, TypeError, KeyError) as exc:
            raise MalformedRow(line, str(exc)) from None
        grouped.setdefault((cid, (y, m)), []).append((d, price))
    if not grouped:
        raise EmptyInput("no valid rows")
    out = []
    for (cid, ym), rows in grouped.items():
        dates = [d for d, _ in rows]
        if len(set(dates)) != len(dates):
            dup = next(d for d in dates if dates.count(d) > 1)
            raise DuplicateDate(dup)
        out.append(ContractSeries(cid, ym, tuple(rows)))
    return sorted(out, key=lambda c: (c.expiry_month, c.contract_id))


def _prev_month(ym: tuple[int, int]) -> tuple[int, int]:
    y, m = ym
    return (y - 1, 12) if m == 1 else (y, m - 1)


def _fmt_month(ym: tuple[int, int]) -> str:
    return f"{ym[0]}-{ym[1]:02d}"


def splice_next_to_last_month(contracts: list[ContractSeries]) -> PriceSeries:
    """Continuous futures series from each contract's next-to-last month."""
    if not contracts:
        raise EmptyInput("no contracts")
    segments: list[tuple[tuple[int, int], list[tuple[date, float]]]] = []
    for c in sorted(contracts, key=lambda c: (c.expiry_month, c.contract_id)):
        month = _prev_month(c.expiry_month)
        rows = [(d, p) for d, p in c.observations if (d.year, d.month) == month]
        if not rows:
            raise GapDetected(_fmt_month(month))
        segments.append((month, rows))

    seen: set[date] = set()
    for _, rows in segments:
        for d, _ in rows:
            if d in seen:
                raise OverlapDetected(d)
            seen.add(d)

    months = sorted({m for m, _ in segments})
    cur = months[0]
    while cur < months[-1]:
        nxt = (cur[0] + 1, 1) if cur[1] == 12 else (cur[0], cur[1] + 1)
        if nxt not in months:
            raise GapDetected(_fmt_month(nxt))
        cur = nxt

    obs = [PriceObservation(d, futures_price=p) for _, rows in segments for d, p in rows]
    obs.sort(key=lambda o: o.date)
    return PriceSeries(tuple(obs))


def _merge(a: PriceObservation, b: PriceObservation) -> PriceObservation:
    kw = {}
    for name in ("futures_price", "spot_price", "spot_price_funrural"):
        va, vb = getattr(a, name), getattr(b, name)
        kw[name] = va if va is not None else vb
    return replace(a, **kw)


def align_spot_futures(futures: PriceSeries, spot: PriceSeries) -> PriceSeries:
    """Inner join on date; each output row carries both price fields.

    Where both inputs carry the same field, the value from ``futures`` wins.
    """
    if not len(futures) or not len(spot):
        raise EmptyInput("both series must be non-empty")
    by_date = {o.date: o for o in spot.observations}
    joined = [_merge(o, by_date[o.date]) for o in futures.observations if o.date in by_date]
    if not joined:
        raise EmptyIntersection("futures and spot share no dates")
    return PriceSeries(tuple(joined))


def train_holdout_split(series: PriceSeries, holdout_len: int = 16) -> SplitSeries:
    if holdout_len < 1 or holdout_len >= len(series):
        raise HoldoutTooLarge(f"holdout of {holdout_len} invalid for series of length {len(series)}")
    cut = len(series) - holdout_len
    return SplitSeries(training=series[:cut], holdout=series[cut:])


def _fmt(v: float | None) -> str:
    return "" if v is None else repr(float(v))


def write_price_csv(series: PriceSeries) -> str:
    """Canonical on-disk form: ISO dates, full-precision prices."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["date", "futures", "spot", "spot_funrural"])
    for o in series.observations:
        w.writerow([o.date.isoformat(), _fmt(o.futures_price), _fmt(o.spot_price), _fmt(o.spot_price_funrural)])
    return buf.getvalue()


def series_from_arrays(futures, spot=None, start: date = date(2006, 12, 1)) -> PriceSeries:
    """Wrap numeric arrays as a business-day :class:`PriceSeries` (for simulations)."""
    futures = np.asarray(futures, dtype=float)
    spot = None if spot is None else np.asarray(spot, dtype=float)
    days = np.busday_offset(np.datetime64(start, "D"), np.arange(futures.size), roll="forward")
    obs = []
    for i, d in enumerate(days.astype(object)):
        obs.append(
            PriceObservation(
                date=d,
                futures_price=float(futures[i]),
                spot_price=None if spot is None else float(spot[i]),
            )
        )
    return PriceSeries(tuple(obs))
