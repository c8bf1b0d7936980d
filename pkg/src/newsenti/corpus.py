"""Article ingestion, cleaning, deduplication and ticker matching.

Article dumps are local files: JSON Lines (one record per line) or CSV with
the same field names. Each record needs at least ``heading`` and a parseable
``published_at``; missing ``synopsis``/``full_text``/``sector`` become empty
strings.
"""

from __future__ import annotations

import csv
import html
import json
import logging
import re
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Iterable, Iterator

log = logging.getLogger(__name__)

SECTIONS = ("heading", "synopsis", "full_text")

_TAG_RE = re.compile(r"<[^>]*>")
_WS_RE = re.compile(r"\s+")


@dataclass(frozen=True)
class Article:
    id: str
    published_at: datetime
    sector: str
    heading: str
    synopsis: str
    full_text: str

    def section(self, name: str) -> str:
        if name not in SECTIONS:
            raise ValueError(f"unknown section {name!r}; expected one of {SECTIONS}")
        return getattr(self, name)

    def to_record(self) -> dict:
        return {
            "id": self.id,
            "published_at": self.published_at.isoformat(),
            "sector": self.sector,
            "heading": self.heading,
            "synopsis": self.synopsis,
            "full_text": self.full_text,
        }


@dataclass(frozen=True)
class TickerAliases:
    ticker: str
    names: tuple[str, ...]

    def __post_init__(self):
        ticker = self.ticker.strip().lower()
        names = tuple(n.strip().lower() for n in self.names if n.strip())
        if not ticker:
            raise ValueError("ticker must be non-empty")
        if not names:
            raise ValueError(f"ticker {self.ticker!r} has no alias names")
        object.__setattr__(self, "ticker", ticker)
        object.__setattr__(self, "names", names)

    @property
    def symbol(self) -> str:
        return self.ticker.upper()


@dataclass
class IngestReport:
    """Counts collected while reading one article dump."""

    read: int = 0
    cleaned: int = 0
    deduped: int = 0
    skipped: int = 0
    warnings: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "read": self.read,
            "cleaned": self.cleaned,
            "deduped": self.deduped,
            "skipped": self.skipped,
        }


def clean_text(raw: str | None) -> str:
    """Strip tags, decode entities and collapse whitespace.

    Idempotent: entities are decoded until stable so that doubly escaped
    input ("&amp;amp;") cannot change on a second pass.
    """
    if not raw:
        return ""
    text = raw
    while True:
        stripped = html.unescape(_TAG_RE.sub(" ", text))
        if stripped == text:
            break
        text = stripped
    return _WS_RE.sub(" ", text).strip()


def parse_timestamp(value) -> datetime:
    if isinstance(value, datetime):
        return value
    if not isinstance(value, str) or not value.strip():
        raise ValueError(f"missing date: {value!r}")
    text = value.strip()
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    return datetime.fromisoformat(text)


def _records_jsonl(path: Path) -> Iterator[tuple[int, dict | None, str | None]]:
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                yield lineno, None, f"invalid JSON ({exc.msg})"
                continue
            if not isinstance(rec, dict):
                yield lineno, None, "record is not an object"
                continue
            yield lineno, rec, None


def _records_csv(path: Path) -> Iterator[tuple[int, dict | None, str | None]]:
    with path.open(encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        for rec in reader:
            # DictReader counts the header, so line_num is the physical line
            yield reader.line_num, rec, None


def _to_article(rec: dict, fallback_id: str) -> Article:
    published_at = parse_timestamp(rec.get("published_at"))
    heading = clean_text(rec.get("heading"))
    if not heading:
        raise ValueError("empty heading")
    art_id = str(rec.get("id") or "").strip() or fallback_id
    return Article(
        id=art_id,
        published_at=published_at,
        sector=clean_text(rec.get("sector")),
        heading=heading,
        synopsis=clean_text(rec.get("synopsis")),
        full_text=clean_text(rec.get("full_text")),
    )


def ingest_articles(path, format: str | None = None, report: IngestReport | None = None) -> list[Article]:
    """Read, clean and deduplicate an article dump.

    Records whose date does not parse (or whose heading is empty after
    cleaning) are skipped with a warning naming the line. Unreadable files
    raise ``OSError``. Returns articles sorted by publication time.
    """
    path = Path(path)
    if format is None:
        format = "csv" if path.suffix.lower() == ".csv" else "jsonl"
    if format == "jsonl":
        source = _records_jsonl(path)
    elif format == "csv":
        source = _records_csv(path)
    else:
        raise ValueError(f"unsupported article format {format!r}")
    if report is None:
        report = IngestReport()
    if not path.is_file():
        raise FileNotFoundError(f"article file not found: {path}")

    articles = []
    for lineno, rec, problem in source:
        report.read += 1
        if rec is not None:
            try:
                articles.append(_to_article(rec, fallback_id=f"{path.stem}:{lineno}"))
                continue
            except (ValueError, TypeError) as exc:
                problem = str(exc)
        msg = f"{path}:{lineno}: skipped record: {problem}"
        log.warning(msg)
        report.warnings.append(msg)
        report.skipped += 1

    report.cleaned = len(articles)
    # stable sort keeps file order among equal timestamps
    articles.sort(key=lambda a: _sort_key(a.published_at))
    articles = deduplicate(articles)
    report.deduped = len(articles)
    return articles


def _sort_key(ts: datetime):
    # naive and aware timestamps cannot be compared directly
    return ts.replace(tzinfo=None)


def dedup_key(article: Article) -> tuple[str, str]:
    return article.heading.lower(), article.published_at.date().isoformat()


def deduplicate(articles: Iterable[Article]) -> list[Article]:
    """Keep the first article for each (lowercased heading, date) key."""
    seen = set()
    out = []
    for art in articles:
        key = dedup_key(art)
        if key in seen:
            continue
        seen.add(key)
        out.append(art)
    return out


def write_articles(articles: Iterable[Article], path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for art in articles:
            fh.write(json.dumps(art.to_record(), ensure_ascii=False, sort_keys=True) + "\n")


def load_aliases(path) -> list[TickerAliases]:
    """Read an alias CSV: ``ticker,name1,...,nameK`` with variable width.

    A header row whose first cell is ``ticker`` is ignored.
    """
    out = []
    with Path(path).open(encoding="utf-8", newline="") as fh:
        for row in csv.reader(fh):
            cells = [c.strip() for c in row if c.strip()]
            if not cells or cells[0].startswith("#"):
                continue
            if cells[0].lower() == "ticker":
                continue
            out.append(TickerAliases(cells[0], tuple(cells[1:]) or (cells[0],)))
    return out


def _alias_pattern(aliases: TickerAliases) -> re.Pattern:
    terms = sorted({aliases.ticker, *aliases.names}, key=len, reverse=True)
    alt = "|".join(re.escape(t) for t in terms)
    # word boundary = neighbour is not alphanumeric (or text edge)
    return re.compile(rf"(?<![^\W_])(?:{alt})(?![^\W_])", re.IGNORECASE)


_PATTERN_CACHE: dict[TickerAliases, re.Pattern] = {}


def mentions(text: str, aliases: TickerAliases) -> bool:
    pat = _PATTERN_CACHE.get(aliases)
    if pat is None:
        pat = _PATTERN_CACHE[aliases] = _alias_pattern(aliases)
    return pat.search(text) is not None


def match_ticker(article: Article, section: str, aliases: TickerAliases) -> bool:
    """True iff the ticker or an alias appears as a whole word in ``section``."""
    return mentions(article.section(section), aliases)
