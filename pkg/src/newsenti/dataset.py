"""Price loading, feature assembly, min-max scaling and sliding windows."""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .sentiment import SentimentSeries

log = logging.getLogger(__name__)

PRICE_COLUMNS = ("close", "open", "high", "low", "volume")

# feature variant -> sections whose sentiment columns are appended
VARIANTS: dict[str, tuple[str, ...] | None] = {
    "one_feature": None,
    "five_feature": (),
    "five_feature_senti_head": ("heading",),
    "five_feature_senti_syn": ("synopsis",),
    "five_feature_senti_art": ("full_text",),
    "five_feature_senti_head_syn": ("heading", "synopsis"),
}

_SECTION_TAG = {"heading": "head", "synopsis": "syn", "full_text": "art"}


class InsufficientData(ValueError):
    pass


@dataclass
class PriceSeries:
    ticker: str
    dates: list[date]
    # rows x (open, high, low, close, volume)
    ohlcv: np.ndarray

    def __len__(self) -> int:
        return len(self.dates)

    def column(self, name: str) -> np.ndarray:
        return self.ohlcv[:, ("open", "high", "low", "close", "volume").index(name)]

    def between(self, start: date | None, end: date | None) -> "PriceSeries":
        keep = [i for i, d in enumerate(self.dates)
                if (start is None or d >= start) and (end is None or d <= end)]
        return PriceSeries(self.ticker, [self.dates[i] for i in keep], self.ohlcv[keep])


@dataclass
class FeatureMatrix:
    ticker: str
    dates: list[date]
    columns: list[str]
    values: np.ndarray

    def to_csv(self, path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["date", *self.columns])
            for d, row in zip(self.dates, self.values):
                w.writerow([d.isoformat(), *(repr(float(x)) for x in row)])


@dataclass
class ScalerParams:
    columns: list[str]
    mins: np.ndarray
    maxs: np.ndarray

    def to_json(self) -> str:
        return json.dumps({c: {"min": float(lo), "max": float(hi)}
                           for c, lo, hi in zip(self.columns, self.mins, self.maxs)}, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ScalerParams":
        d = json.loads(text)
        cols = list(d)
        return cls(cols, np.array([d[c]["min"] for c in cols]), np.array([d[c]["max"] for c in cols]))

    def scale_value(self, column: str, value: float) -> float:
        j = self.columns.index(column)
        span = self.maxs[j] - self.mins[j]
        return 0.0 if span == 0 else (value - self.mins[j]) / span


@dataclass
class WindowedDataset:
    inputs: np.ndarray      # samples x lookback x features
    targets: np.ndarray     # samples, scaled next-day close
    split: int              # samples[:split] train, samples[split:] test
    target_dates: list[date] = field(default_factory=list)

    @property
    def n_samples(self) -> int:
        return len(self.targets)

    @property
    def train(self) -> tuple[np.ndarray, np.ndarray]:
        return self.inputs[:self.split], self.targets[:self.split]

    @property
    def test(self) -> tuple[np.ndarray, np.ndarray]:
        return self.inputs[self.split:], self.targets[self.split:]

    @property
    def is_test(self) -> np.ndarray:
        flags = np.zeros(self.n_samples, dtype=bool)
        flags[self.split:] = True
        return flags


def load_prices(path, ticker: str | None = None, min_rows: int = 45) -> PriceSeries:
    """Read a ``date,open,high,low,close,volume`` CSV.

    Rows that break ``low <= open, close <= high``, have non-positive prices,
    negative volume or a repeated date are dropped with a warning. Raises
    InsufficientData when fewer than ``min_rows`` rows survive (the default is
    lookback 10 + horizon 5 + holdout 30).
    """
    path = Path(path)
    ticker = ticker or path.stem
    rows: dict[date, tuple] = {}
    with path.open(encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        fields = {f.strip().lower(): f for f in reader.fieldnames or []}
        missing = [c for c in ("date", *PRICE_COLUMNS) if c not in fields]
        if missing:
            raise ValueError(f"{path}: missing columns {missing}")
        for rec in reader:
            where = f"{path}:{reader.line_num}"
            try:
                d = date.fromisoformat(rec[fields["date"]].strip()[:10])
                o, h, lo, c, v = (float(rec[fields[k]]) for k in ("open", "high", "low", "close", "volume"))
            except (ValueError, TypeError) as exc:
                log.warning("%s: unparseable row (%s), rejected", where, exc)
                continue
            if not all(np.isfinite([o, h, lo, c, v])) or min(o, h, lo, c) <= 0 or v < 0:
                log.warning("%s: non-positive or non-finite value, rejected", where)
                continue
            if not (lo <= min(o, c) and max(o, c) <= h):
                log.warning("%s: OHLC ordering violated (low=%s high=%s), rejected", where, lo, h)
                continue
            if d in rows:
                log.warning("%s: duplicate date %s, keeping first", where, d)
                continue
            rows[d] = (o, h, lo, c, v)
    dates = sorted(rows)
    if len(dates) < min_rows:
        raise InsufficientData(f"insufficient data: {path} has {len(dates)} valid rows, need {min_rows}")
    ohlcv = np.array([rows[d] for d in dates], dtype=np.float64).reshape(len(dates), 5)
    return PriceSeries(ticker, dates, ohlcv)


def variant_columns(variant: str) -> list[str]:
    if variant not in VARIANTS:
        raise ValueError(f"unknown feature variant {variant!r}; expected one of {list(VARIANTS)}")
    sections = VARIANTS[variant]
    if sections is None:
        return ["close"]
    return [*PRICE_COLUMNS, *(f"senti_{_SECTION_TAG[s]}" for s in sections)]


def required_sections(variant: str) -> tuple[str, ...]:
    variant_columns(variant)
    return VARIANTS[variant] or ()


def build_features(
    prices: PriceSeries,
    variant: str,
    sentiment: Mapping[str, SentimentSeries] | None = None,
) -> FeatureMatrix:
    """Assemble the per-variant matrix; ``sentiment`` maps section -> series."""
    columns = variant_columns(variant)
    cols = []
    for name in columns:
        if name in PRICE_COLUMNS:
            cols.append(prices.column(name))
    for sec in required_sections(variant):
        if not sentiment or sec not in sentiment:
            raise ValueError(f"variant {variant} needs a {sec} sentiment series")
        series = sentiment[sec]
        if series.ticker.upper() != prices.ticker.upper():
            raise ValueError(f"sentiment series for {series.ticker} joined to prices of {prices.ticker}")
        cols.append(np.array([series.value_on(d) for d in prices.dates], dtype=np.float64))
    return FeatureMatrix(prices.ticker, list(prices.dates), columns, np.column_stack(cols))


def fit_scaler(matrix: FeatureMatrix, train_rows: int) -> ScalerParams:
    """Per-column min/max over the first ``train_rows`` rows only."""
    if train_rows <= 0:
        raise ValueError("train_rows must be positive")
    head = matrix.values[:train_rows]
    return ScalerParams(list(matrix.columns), head.min(axis=0), head.max(axis=0))


def apply_scaler(values: np.ndarray, params: ScalerParams) -> np.ndarray:
    span = params.maxs - params.mins
    safe = np.where(span == 0, 1.0, span)
    out = (values - params.mins) / safe
    # constant training columns map to 0 everywhere
    return np.where(span == 0, 0.0, out)


def invert_scaler(scaled, params: ScalerParams, column: str = "close"):
    j = params.columns.index(column)
    span = params.maxs[j] - params.mins[j]
    return np.asarray(scaled, dtype=np.float64) * span + params.mins[j]


def window(scaled: np.ndarray, lookback: int = 10, holdout: int = 30,
           dates: Sequence[date] | None = None, target_column: int = 0) -> WindowedDataset:
    """Stride-1 windows; ``targets[i]`` is the target column right after window ``i``."""
    n = len(scaled)
    if n <= lookback + holdout:
        raise InsufficientData(f"insufficient data: {n} rows, need more than lookback {lookback} + holdout {holdout}")
    scaled = np.asarray(scaled, dtype=np.float64)
    samples = n - lookback
    # sliding_window_view gives (samples+1, features, lookback); drop the last window, it has no target
    views = np.lib.stride_tricks.sliding_window_view(scaled, lookback, axis=0)[:samples]
    inputs = np.ascontiguousarray(views.transpose(0, 2, 1))
    targets = scaled[lookback:, target_column].copy()
    tdates = list(dates[lookback:]) if dates is not None else []
    return WindowedDataset(inputs, targets, samples - holdout, tdates)


@dataclass
class PreparedData:
    matrix: FeatureMatrix
    scaler: ScalerParams
    windows: WindowedDataset
    scaled: np.ndarray


def prepare(matrix: FeatureMatrix, lookback: int = 10, holdout: int = 30) -> PreparedData:
    """Fit the scaler on rows reachable by training targets, scale, window."""
    n = len(matrix.values)
    if n <= lookback + holdout:
        raise InsufficientData(f"insufficient data: {n} rows for lookback {lookback} + holdout {holdout}")
    params = fit_scaler(matrix, n - holdout)
    scaled = apply_scaler(matrix.values, params)
    ds = window(scaled, lookback, holdout, matrix.dates)
    return PreparedData(matrix, params, ds, scaled)
