"""Section scoring with the three lexicon formulas and daily aggregation."""

from __future__ import annotations

import csv
import math
import re
from bisect import bisect_left
from dataclasses import dataclass
from datetime import date, datetime, timedelta
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .corpus import SECTIONS, Article, TickerAliases, match_ticker
from .lexicon import LIBRARIES, CategoricalLexicon, ValenceLexicon

VADER_ALPHA = 15.0
POLARITY_EPS = 1e-6

_TOKEN_SPLIT = re.compile(r"[^0-9a-z]+")


@dataclass(frozen=True)
class SectionScore:
    article_id: str
    section: str
    library: str
    score: float


@dataclass
class SentimentSeries:
    """Daily averaged score for one ticker; absent business dates mean 0."""

    ticker: str
    section: str
    library: str
    values: dict[date, float]

    def value_on(self, day: date) -> float:
        return self.values.get(day, 0.0)

    def to_csv(self, path, calendar: Sequence[date]) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["date", "value"])
            for d in calendar:
                w.writerow([d.isoformat(), f"{self.value_on(d):.6f}"])

    @classmethod
    def from_csv(cls, path, ticker: str, section: str, library: str) -> "SentimentSeries":
        values = {}
        with Path(path).open(encoding="utf-8", newline="") as fh:
            for row in csv.DictReader(fh):
                v = float(row["value"])
                if v != 0.0:
                    values[date.fromisoformat(row["date"])] = v
        return cls(ticker, section, library, values)


def tokenize(text: str) -> list[str]:
    """Lowercase tokens split on every non-alphanumeric run."""
    return [t for t in _TOKEN_SPLIT.split(text.lower()) if t]


def vader_compound(text: str, lex: ValenceLexicon, alpha: float = VADER_ALPHA) -> float:
    """Summed valence squashed as ``v / sqrt(v**2 + alpha)``.

    Only the valence sum and the compound normalization are applied; VADER's
    negation, booster, capitalization and punctuation heuristics are not.
    """
    entries = lex.entries
    v = 0.0
    for tok in tokenize(text):
        val = entries.get(tok)
        if val is not None:
            v += val
    if v == 0.0:
        return 0.0
    return v / math.sqrt(v * v + alpha)


def polarity_counts(text: str, lex: CategoricalLexicon) -> tuple[int, int]:
    pos = neg = 0
    for tok in tokenize(text):
        if tok in lex.positive:
            pos += 1
        elif tok in lex.negative:
            neg += 1
    return pos, neg


def polarity_score(text: str, lex: CategoricalLexicon, eps: float = POLARITY_EPS) -> float:
    """``(pos - neg) / (pos + neg + eps)`` over word counts with multiplicity."""
    pos, neg = polarity_counts(text, lex)
    if pos == 0 and neg == 0:
        return 0.0
    return (pos - neg) / (pos + neg + eps)


def score_text(text: str, library: str, lex) -> float:
    if library == "vader":
        s = vader_compound(text, lex)
    elif library in ("hiv4", "lm"):
        s = polarity_score(text, lex)
    else:
        raise ValueError(f"unknown library {library!r}")
    return min(1.0, max(-1.0, s))


def score_corpus(
    articles: Iterable[Article],
    lexicons: Mapping[str, ValenceLexicon | CategoricalLexicon],
    sections: Sequence[str] = SECTIONS,
    libraries: Sequence[str] = LIBRARIES,
) -> list[SectionScore]:
    """One clamped score per (article, section, library), in that nesting order."""
    for lib in libraries:
        if lib not in lexicons:
            raise KeyError(f"no lexicon loaded for library {lib!r}")
    out = []
    for art in articles:
        for sec in sections:
            text = art.section(sec)
            for lib in libraries:
                out.append(SectionScore(art.id, sec, lib, score_text(text, lib, lexicons[lib])))
    return out


def write_scores(scores: Iterable[SectionScore], path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["article_id", "section", "library", "score"])
        for s in scores:
            w.writerow([s.article_id, s.section, s.library, f"{s.score:.6f}"])


def trading_day(published_at: datetime, calendar: Sequence[date], cutoff_hour: int | None = None) -> date | None:
    """Business date an article counts toward, or None if it falls off the calendar.

    Without a cutoff the publication date is used as is and non-business
    dates are dropped. With a cutoff, articles published at or after
    ``cutoff_hour`` roll to the next business date in ``calendar``.
    """
    day = published_at.date()
    if cutoff_hour is None:
        i = bisect_left(calendar, day)
        return day if i < len(calendar) and calendar[i] == day else None
    if published_at.hour >= cutoff_hour:
        day = day + timedelta(days=1)
    i = bisect_left(calendar, day)
    return calendar[i] if i < len(calendar) else None


def aggregate_daily(
    scores: Iterable[SectionScore],
    articles: Iterable[Article],
    ticker: TickerAliases,
    section: str,
    library: str,
    calendar: Sequence[date],
    cutoff_hour: int | None = None,
) -> SentimentSeries:
    """Mean score per business day over articles whose ``section`` mentions the ticker."""
    calendar = sorted(calendar)
    lookup = {
        s.article_id: s.score for s in scores
        if s.section == section and s.library == library
    }
    per_day: dict[date, list[float]] = {}
    for art in articles:
        if art.id not in lookup or not match_ticker(art, section, ticker):
            continue
        day = trading_day(art.published_at, calendar, cutoff_hour)
        if day is None:
            continue
        per_day.setdefault(day, []).append(lookup[art.id])
    # fsum is exactly rounded, so the mean does not depend on article order
    values = {day: math.fsum(v) / len(v) for day, v in sorted(per_day.items())}
    return SentimentSeries(ticker.symbol, section, library, values)
