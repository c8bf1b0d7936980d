"""Synthetic markets with a planted news-sentiment effect.

Each ticker gets a business-day price path and a stream of articles built
from words of the bundled lexicons. The daily mean VADER heading score of
articles naming the ticker drives the next day's return::

    r[d + 1] = beta * s_head[d] + sigma * noise

so a model that sees the heading sentiment column can, in principle,
explain part of the move that a price-only model cannot.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from datetime import date, datetime, time, timedelta
from pathlib import Path

import numpy as np

from .lexicon import ValenceLexicon, load_bundled
from .sentiment import vader_compound

POSITIVE = ("gain", "strong", "boost", "improve", "success", "excellent")
NEGATIVE = ("loss", "decline", "weak", "fraud", "slump", "penalty", "lawsuit")
FILLER = ("shares", "company", "market", "quarter", "results", "board", "update",
          "investors", "trading", "analysts", "outlook", "session", "sector", "report")


@dataclass
class SyntheticTicker:
    symbol: str
    names: tuple[str, ...]


@dataclass
class SyntheticConfig:
    n_days: int = 900
    start: date = date(2019, 1, 1)
    beta: float = 0.02           # return per unit of daily heading score
    sigma: float = 0.004         # idiosyncratic daily return noise
    coverage: float = 0.5        # chance a business day carries news on the ticker
    max_articles: int = 2
    unrelated_per_day: int = 1   # articles about no tracked ticker
    weekend_articles: bool = True
    duplicate_rate: float = 0.05


DEFAULT_TICKERS = (
    SyntheticTicker("ACME", ("acme", "acme industries")),
    SyntheticTicker("GLOBEX", ("globex", "globex corp")),
    SyntheticTicker("INITECH", ("initech",)),
)


def business_days(start: date, n: int) -> list[date]:
    out = []
    d = start
    while len(out) < n:
        if d.weekday() < 5:
            out.append(d)
        d += timedelta(days=1)
    return out


def _words(rng, pool, k):
    return [pool[j] for j in rng.integers(0, len(pool), size=k)]


def _article(rng, name: str | None, when: datetime, art_id: str) -> dict:
    direction = rng.choice((-1, 1))
    k = int(rng.integers(1, 4))
    tone = _words(rng, POSITIVE if direction > 0 else NEGATIVE, k)
    subject = name.title() if name else "Markets"
    heading = " ".join([subject, *_words(rng, FILLER, 1), *tone])
    # synopsis echoes the tone half the time; full text mixes in opposing words
    syn_tone = tone if rng.random() < 0.5 else []
    synopsis = " ".join([*_words(rng, FILLER, 4), subject, *syn_tone, *_words(rng, FILLER, 3)])
    noise = _words(rng, POSITIVE + NEGATIVE, int(rng.integers(0, 3)))
    body = " ".join([subject, *_words(rng, FILLER, 8), *tone, *noise, *_words(rng, FILLER, 6)])
    return {
        "id": art_id,
        "published_at": when.isoformat(),
        "sector": "synthetic",
        "heading": heading,
        "synopsis": f"<p>{synopsis}</p>",
        "full_text": f"<div>{body}</div>",
    }


@dataclass
class SyntheticMarket:
    calendar: list[date]
    articles: list[dict]
    prices: dict[str, np.ndarray]          # symbol -> rows x (open, high, low, close, volume)
    heading_signal: dict[str, np.ndarray]  # symbol -> planted daily heading score
    tickers: tuple[SyntheticTicker, ...]


def generate(seed: int, config: SyntheticConfig | None = None,
             tickers=DEFAULT_TICKERS, vader: ValenceLexicon | None = None) -> SyntheticMarket:
    cfg = config or SyntheticConfig()
    vader = vader or load_bundled()["vader"]
    rng = np.random.default_rng(seed)
    cal = business_days(cfg.start, cfg.n_days)
    articles: list[dict] = []
    n = 0

    def add(rec):
        nonlocal n
        articles.append(rec)
        n += 1

    signals = {t.symbol: np.zeros(cfg.n_days) for t in tickers}
    for di, day in enumerate(cal):
        for t in tickers:
            if rng.random() >= cfg.coverage:
                continue
            heads = []
            for _ in range(int(rng.integers(1, cfg.max_articles + 1))):
                when = datetime.combine(day, time(int(rng.integers(6, 20)), int(rng.integers(0, 60))))
                name = t.names[int(rng.integers(0, len(t.names)))]
                rec = _article(rng, name, when, f"a{n:07d}")
                heads.append(vader_compound(rec["heading"], vader))
                add(rec)
                if rng.random() < cfg.duplicate_rate:
                    add({**rec, "id": f"a{n:07d}"})
            signals[t.symbol][di] = float(np.mean(heads))
        for _ in range(cfg.unrelated_per_day):
            when = datetime.combine(day, time(int(rng.integers(6, 20)), 0))
            add(_article(rng, None, when, f"a{n:07d}"))
        if cfg.weekend_articles and day.weekday() == 4:
            # Saturday news naming a ticker; falls off the business calendar
            t = tickers[int(rng.integers(0, len(tickers)))]
            when = datetime.combine(day + timedelta(days=1), time(10, 0))
            add(_article(rng, t.names[0], when, f"a{n:07d}"))

    prices = {}
    for t in tickers:
        s = signals[t.symbol]
        close = np.empty(cfg.n_days)
        close[0] = float(rng.uniform(50, 500))
        for d in range(1, cfg.n_days):
            close[d] = close[d - 1] * (1.0 + cfg.beta * s[d - 1] + cfg.sigma * rng.normal())
        prev = np.r_[close[0], close[:-1]]
        opn = prev * (1.0 + 0.002 * rng.normal(size=cfg.n_days))
        high = np.maximum(opn, close) * (1.0 + np.abs(0.003 * rng.normal(size=cfg.n_days)))
        low = np.minimum(opn, close) * (1.0 - np.abs(0.003 * rng.normal(size=cfg.n_days)))
        vol = np.round(rng.lognormal(12.0, 0.3, size=cfg.n_days))
        prices[t.symbol] = np.column_stack([opn, high, low, close, vol])
    return SyntheticMarket(cal, articles, prices, signals, tuple(tickers))


def write_workspace(market: SyntheticMarket, root) -> dict[str, Path]:
    """Write articles.jsonl, aliases.csv and prices/<SYMBOL>.csv under ``root``."""
    root = Path(root)
    (root / "prices").mkdir(parents=True, exist_ok=True)
    articles = root / "articles.jsonl"
    with articles.open("w", encoding="utf-8") as fh:
        for rec in market.articles:
            fh.write(json.dumps(rec) + "\n")
    aliases = root / "aliases.csv"
    with aliases.open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for t in market.tickers:
            w.writerow([t.symbol, *t.names])
    for sym, rows in market.prices.items():
        with (root / "prices" / f"{sym}.csv").open("w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["date", "open", "high", "low", "close", "volume"])
            for d, r in zip(market.calendar, rows):
                w.writerow([d.isoformat(), *(repr(float(x)) for x in r)])
    return {"articles": articles, "aliases": aliases, "prices": root / "prices"}
