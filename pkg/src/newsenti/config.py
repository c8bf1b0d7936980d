"""Pipeline configuration loaded from one YAML file."""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from datetime import date
from pathlib import Path

import yaml

from .experiment import RunSettings
from .lexicon import bundled_path
from .lstm import TrainConfig


class ConfigError(ValueError):
    pass


LEXICON_KEYS = ("vader", "hiv4_positive", "hiv4_negative", "lm_positive", "lm_negative")
_BUNDLED = {
    "vader": "vader_valence.tsv",
    "hiv4_positive": "hiv4_positive.txt",
    "hiv4_negative": "hiv4_negative.txt",
    "lm_positive": "lm_positive.txt",
    "lm_negative": "lm_negative.txt",
}


@dataclass
class PipelineConfig:
    articles: Path
    prices_dir: Path
    aliases: Path
    results_dir: Path
    lexicons: dict[str, Path]
    start: date | None = date(2019, 1, 1)
    end: date | None = date(2022, 8, 31)
    lookback: int = 10
    horizon: int = 5
    holdout: int = 30
    cutoff_hour: int | None = None
    seed: int = 0
    tickers: list[str] = field(default_factory=list)
    train: TrainConfig = field(default_factory=TrainConfig)

    def settings(self, seed: int | None = None) -> RunSettings:
        return RunSettings(self.lookback, self.horizon, self.holdout,
                           self.seed if seed is None else seed, self.cutoff_hour, self.train)

    def validate(self, need=("articles", "prices_dir", "aliases", "lexicons")) -> None:
        """Raise ConfigError before any long computation starts."""
        problems = []
        for name in need:
            if name == "lexicons":
                for key in LEXICON_KEYS:
                    p = self.lexicons.get(key)
                    if p is None or not p.is_file():
                        problems.append(f"lexicon file {key}: {p} does not exist")
                continue
            p = getattr(self, name)
            ok = p.is_dir() if name == "prices_dir" else p.is_file()
            if not ok:
                problems.append(f"{name}: {p} does not exist")
        if self.start and self.end and not self.start < self.end:
            problems.append(f"calendar start {self.start} is not before end {self.end}")
        for name in ("lookback", "horizon", "holdout"):
            if getattr(self, name) <= 0:
                problems.append(f"{name} must be positive")
        if self.cutoff_hour is not None and not 0 <= self.cutoff_hour <= 23:
            problems.append("cutoff_hour must lie in 0..23")
        if problems:
            raise ConfigError("; ".join(problems))


def _path(base: Path, value) -> Path:
    p = Path(str(value)).expanduser()
    return p if p.is_absolute() else base / p


def _date(value) -> date | None:
    if value is None or isinstance(value, date):
        return value
    return date.fromisoformat(str(value))


def load_config(path) -> PipelineConfig:
    path = Path(path)
    try:
        doc = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML in {path}: {exc}") from exc
    base = path.parent
    paths = doc.get("paths", {})
    try:
        lex_doc = paths.get("lexicons", "bundled")
        lexicons = {}
        for key in LEXICON_KEYS:
            value = lex_doc if isinstance(lex_doc, str) else lex_doc.get(key, "bundled")
            lexicons[key] = bundled_path(_BUNDLED[key]) if value == "bundled" else _path(base, value)
        cal = doc.get("calendar", {})
        known_train = {f.name for f in fields(TrainConfig)}
        train_doc = doc.get("train", {}) or {}
        unknown = set(train_doc) - known_train
        if unknown:
            raise ConfigError(f"unknown train options: {sorted(unknown)}")
        return PipelineConfig(
            articles=_path(base, paths["articles"]),
            prices_dir=_path(base, paths["prices_dir"]),
            aliases=_path(base, paths["aliases"]),
            results_dir=_path(base, paths.get("results_dir", "results")),
            lexicons=lexicons,
            start=_date(cal.get("start", "2019-01-01")),
            end=_date(cal.get("end", "2022-08-31")),
            lookback=int(doc.get("lookback", 10)),
            horizon=int(doc.get("horizon", 5)),
            holdout=int(doc.get("holdout", 30)),
            cutoff_hour=doc.get("cutoff_hour"),
            seed=int(doc.get("seed", 0)),
            tickers=[str(t).upper() for t in doc.get("tickers", []) or []],
            train=TrainConfig(**train_doc),
        )
    except KeyError as exc:
        raise ConfigError(f"{path}: missing required key paths.{exc.args[0]}") from exc
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{path}: {exc}") from exc
