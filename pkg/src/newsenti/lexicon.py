"""Sentiment dictionaries: valence maps and positive/negative word sets."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from types import MappingProxyType
from typing import Mapping

log = logging.getLogger(__name__)

LIBRARIES = ("vader", "hiv4", "lm")


class LexiconError(ValueError):
    pass


@dataclass(frozen=True)
class ValenceLexicon:
    entries: Mapping[str, float]

    def __len__(self) -> int:
        return len(self.entries)

    def negated(self) -> "ValenceLexicon":
        return ValenceLexicon(MappingProxyType({w: -v for w, v in self.entries.items()}))


@dataclass(frozen=True)
class CategoricalLexicon:
    positive: frozenset[str]
    negative: frozenset[str]
    kind: str

    def __post_init__(self):
        if self.kind not in ("hiv4", "lm"):
            raise LexiconError(f"unknown categorical lexicon kind {self.kind!r}")
        if self.positive & self.negative:
            raise LexiconError("positive and negative word sets overlap")

    def __len__(self) -> int:
        return len(self.positive) + len(self.negative)

    def swapped(self) -> "CategoricalLexicon":
        return CategoricalLexicon(self.negative, self.positive, self.kind)


def _split_valence_line(line: str) -> tuple[str, str] | None:
    for delim in ("\t", ","):
        if delim in line:
            parts = [p.strip() for p in line.split(delim)]
            if len(parts) >= 2:
                return parts[0], parts[1]
    return None


def load_valence_lexicon(path) -> ValenceLexicon:
    """Parse a ``word<TAB|,>valence`` file.

    Extra columns (as in the distributed VADER lexicon, which carries the
    rater standard deviation and raw ratings) are ignored. A first line
    whose valence cell is not numeric and whose word is ``word`` is taken
    as a header.
    """
    path = Path(path)
    entries: dict[str, float] = {}
    with path.open(encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = _split_valence_line(line)
            if parts is None:
                log.warning("%s:%d: no tab or comma delimiter, skipped", path, lineno)
                continue
            word, value = parts
            try:
                valence = float(value)
            except ValueError:
                if lineno == 1 and word.lower() == "word":
                    continue
                log.warning("%s:%d: unparseable valence %r, skipped", path, lineno, value)
                continue
            if not math.isfinite(valence) or not word:
                log.warning("%s:%d: invalid entry, skipped", path, lineno)
                continue
            word = word.lower()
            if word in entries:
                log.warning("%s:%d: duplicate word %r, last entry wins", path, lineno, word)
            entries[word] = valence
    if not entries:
        raise LexiconError(f"valence lexicon {path} is empty")
    return ValenceLexicon(MappingProxyType(entries))


def _read_word_list(path: Path) -> set[str]:
    words = set()
    with path.open(encoding="utf-8") as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip().lower()
            if line:
                words.add(line)
    return words


def load_categorical_lexicon(path_pos, path_neg, kind: str) -> CategoricalLexicon:
    """Build positive/negative sets; words listed in both files are dropped."""
    pos = _read_word_list(Path(path_pos))
    neg = _read_word_list(Path(path_neg))
    conflicts = pos & neg
    if conflicts:
        log.warning("%d words in both positive and negative lists, dropped: %s",
                    len(conflicts), ", ".join(sorted(conflicts)[:10]))
        pos -= conflicts
        neg -= conflicts
    if not pos and not neg:
        raise LexiconError(f"{kind} lexicon has no words ({path_pos}, {path_neg})")
    return CategoricalLexicon(frozenset(pos), frozenset(neg), kind)


def bundled_path(name: str) -> Path:
    return Path(str(resources.files("newsenti") / "data" / name))


def load_bundled() -> dict[str, ValenceLexicon | CategoricalLexicon]:
    """The small test lexicons shipped with the package (not the real lists)."""
    return {
        "vader": load_valence_lexicon(bundled_path("vader_valence.tsv")),
        "hiv4": load_categorical_lexicon(bundled_path("hiv4_positive.txt"),
                                         bundled_path("hiv4_negative.txt"), "hiv4"),
        "lm": load_categorical_lexicon(bundled_path("lm_positive.txt"),
                                       bundled_path("lm_negative.txt"), "lm"),
    }
