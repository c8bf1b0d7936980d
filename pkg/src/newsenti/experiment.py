"""Variant sweep, holdout MAPE evaluation, result store and report tables."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import dataset, lstm
from .corpus import Article, TickerAliases
from .lexicon import LIBRARIES
from .sentiment import SentimentSeries, aggregate_daily, score_corpus

log = logging.getLogger(__name__)

SECTION_LABELS = {
    "five_feature_senti_art": "Full text",
    "five_feature_senti_head_syn": "Heading & Synopsis",
    "five_feature_senti_head": "Heading",
    "five_feature_senti_syn": "Synopsis",
}
LIBRARY_LABELS = {"hiv4": "HIV4", "vader": "VADER", "lm": "L&M"}


@dataclass(frozen=True)
class VariantSpec:
    feature_variant: str
    library: str | None = None

    def __post_init__(self):
        needs = bool(dataset.required_sections(self.feature_variant))
        if needs != (self.library is not None):
            raise ValueError(f"{self.feature_variant}: library must be given iff sentiment columns are used")
        if self.library is not None and self.library not in LIBRARIES:
            raise ValueError(f"unknown library {self.library!r}")

    @property
    def name(self) -> str:
        return self.feature_variant if self.library is None else f"{self.feature_variant}_{self.library}"

    @property
    def uses_sentiment(self) -> bool:
        return self.library is not None

    @classmethod
    def parse(cls, name: str) -> "VariantSpec":
        for lib in LIBRARIES:
            if name.endswith("_" + lib):
                return cls(name[:-len(lib) - 1], lib)
        return cls(name)


def all_variants() -> list[VariantSpec]:
    out = []
    for fv in dataset.VARIANTS:
        if dataset.required_sections(fv):
            out += [VariantSpec(fv, lib) for lib in LIBRARIES]
        else:
            out.append(VariantSpec(fv))
    return out


def select_variants(names: Iterable[str] | None) -> list[VariantSpec]:
    """Resolve names; a bare sentiment feature variant expands to all three libraries."""
    if not names:
        return all_variants()
    chosen = []
    for name in names:
        if name in dataset.VARIANTS and dataset.required_sections(name):
            chosen += [VariantSpec(name, lib) for lib in LIBRARIES]
        else:
            chosen.append(VariantSpec.parse(name))
    return list(dict.fromkeys(chosen))


def mape(actuals, forecasts) -> float:
    """Mean absolute percentage error in percent."""
    a = np.asarray(actuals, dtype=np.float64)
    f = np.asarray(forecasts, dtype=np.float64)
    if a.shape != f.shape or a.ndim != 1 or len(a) == 0:
        raise ValueError(f"need equal-length non-empty 1D inputs, got {a.shape} and {f.shape}")
    zero = np.flatnonzero(a == 0)
    if len(zero):
        raise ZeroDivisionError(f"actual value is 0 at index {zero[0]}; MAPE undefined")
    return float(100.0 / len(a) * np.sum(np.abs(a - f) / np.abs(a)))


@dataclass
class RunSettings:
    lookback: int = 10
    horizon: int = 5
    holdout: int = 30
    seed: int = 0
    cutoff_hour: int | None = None
    train: lstm.TrainConfig = field(default_factory=lstm.TrainConfig)

    def fingerprint(self) -> str:
        d = asdict(self)
        d["train"].pop("seed")
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()[:16]


@dataclass
class RunResult:
    ticker: str
    variant: str
    mape: float
    predictions: list[float]
    actuals: list[float]
    wall_time: float
    seed: int
    settings: str = ""
    loss_history: list[float] = field(default_factory=list)

    @property
    def spec(self) -> VariantSpec:
        return VariantSpec.parse(self.variant)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=1)

    @classmethod
    def from_json(cls, text: str) -> "RunResult":
        return cls(**json.loads(text))


def run_seed(ticker: str, variant: str, global_seed: int) -> int:
    digest = hashlib.sha256(f"{ticker}|{variant}|{global_seed}".encode()).digest()
    return int.from_bytes(digest[:4], "big")


def evaluate_holdout(model: lstm.LstmModel, prepared: dataset.PreparedData, horizon: int) -> tuple[list[float], list[float]]:
    """Forecast the holdout in consecutive blocks of ``horizon`` days.

    Each block starts from the observed window before it and is rolled
    forward by iterated one-step prediction.
    """
    X_test, y_test = prepared.windows.test
    preds: list[float] = []
    for start in range(0, len(y_test), horizon):
        steps = min(horizon, len(y_test) - start)
        preds += lstm.predict_horizon(model, X_test[start], prepared.scaler, steps)
    actuals = dataset.invert_scaler(y_test, prepared.scaler).tolist()
    return preds, actuals


def run_one(prices: dataset.PriceSeries, spec: VariantSpec, sentiment: Mapping[str, SentimentSeries] | None,
            settings: RunSettings) -> RunResult:
    t0 = time.perf_counter()
    seed = run_seed(prices.ticker, spec.name, settings.seed)
    matrix = dataset.build_features(prices, spec.feature_variant, sentiment)
    prepared = dataset.prepare(matrix, settings.lookback, settings.holdout)
    X, y = prepared.windows.train
    cfg = lstm.TrainConfig(**{**asdict(settings.train), "seed": seed})
    model, history = lstm.train(lstm.init_model(matrix.values.shape[1], seed), X, y, cfg)
    preds, actuals = evaluate_holdout(model, prepared, settings.horizon)
    score = mape(actuals, preds)
    if not math.isfinite(score):
        raise lstm.TrainingDiverged(f"non-finite MAPE for {prices.ticker}/{spec.name}")
    return RunResult(prices.ticker, spec.name, score, preds, actuals,
                     time.perf_counter() - t0, seed, settings.fingerprint(), history)


class ResultStore:
    """One JSON file per run at ``<root>/<ticker>/<variant>.json``."""

    def __init__(self, root):
        self.root = Path(root)

    def path(self, ticker: str, variant: str) -> Path:
        return self.root / ticker / f"{variant}.json"

    def save(self, result: RunResult) -> None:
        path = self.path(result.ticker, result.variant)
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".json.tmp")
        tmp.write_text(result.to_json(), encoding="utf-8")
        os.replace(tmp, path)

    def load(self, ticker: str, variant: str) -> RunResult | None:
        path = self.path(ticker, variant)
        if not path.is_file():
            return None
        try:
            return RunResult.from_json(path.read_text(encoding="utf-8"))
        except (json.JSONDecodeError, TypeError):
            log.warning("%s: unreadable result, will rerun", path)
            return None

    def all(self) -> list[RunResult]:
        out = []
        if not self.root.is_dir():
            return out
        for path in sorted(self.root.glob("*/*.json")):
            try:
                out.append(RunResult.from_json(path.read_text(encoding="utf-8")))
            except (json.JSONDecodeError, TypeError):
                log.warning("%s: unreadable result, ignored", path)
        return sorted(out, key=lambda r: (r.ticker, r.variant))


def ticker_sentiment(articles: Sequence[Article], scores, aliases: TickerAliases, calendar,
                     libraries: Iterable[str], sections: Iterable[str],
                     cutoff_hour: int | None = None) -> dict[tuple[str, str], SentimentSeries]:
    return {
        (sec, lib): aggregate_daily(scores, articles, aliases, sec, lib, calendar, cutoff_hour)
        for sec in sections for lib in libraries
    }


@dataclass
class RunFailure:
    ticker: str
    variant: str
    error: str


def run_all(
    tickers: Sequence[TickerAliases],
    articles: Sequence[Article],
    lexicons: Mapping,
    prices: Mapping[str, dataset.PriceSeries],
    settings: RunSettings,
    variants: Sequence[VariantSpec] | None = None,
    store: ResultStore | None = None,
    resume: bool = True,
    jobs: int = 1,
    progress=None,
) -> tuple[list[RunResult], list[RunFailure]]:
    """Train and score every ticker x variant.

    With a store, each finished run is committed atomically; ``resume`` reuses
    stored runs whose seed and settings match. Failed runs are recorded and
    skipped.
    """
    variants = list(variants or all_variants())
    libraries = sorted({v.library for v in variants if v.library})
    sections = sorted({s for v in variants for s in dataset.required_sections(v.feature_variant)})
    scores = score_corpus(articles, lexicons, sections, libraries) if libraries else []

    results: list[RunResult] = []
    failures: list[RunFailure] = []
    pending = []
    for alias in tickers:
        symbol = alias.symbol
        if symbol not in prices:
            failures += [RunFailure(symbol, v.name, "no price series") for v in variants]
            continue
        px = prices[symbol]
        senti = ticker_sentiment(articles, scores, alias, px.dates, libraries, sections, settings.cutoff_hour)
        for spec in variants:
            if store is not None and resume:
                prev = store.load(symbol, spec.name)
                if (prev is not None and prev.seed == run_seed(symbol, spec.name, settings.seed)
                        and prev.settings == settings.fingerprint()):
                    results.append(prev)
                    continue
            per_section = ({sec: senti[(sec, spec.library)] for sec in dataset.required_sections(spec.feature_variant)}
                           if spec.uses_sentiment else None)
            pending.append((px, spec, per_section))

    def finish(key, result=None, exc=None):
        if exc is not None:
            log.error("run %s/%s failed: %s", key[0], key[1], exc)
            failures.append(RunFailure(key[0], key[1], f"{type(exc).__name__}: {exc}"))
        else:
            if store is not None:
                store.save(result)
            results.append(result)
        if progress is not None:
            progress(len(results) + len(failures), key, result)

    if jobs <= 1:
        for px, spec, per_section in pending:
            try:
                res = run_one(px, spec, per_section, settings)
            except Exception as exc:  # a failed run never aborts the sweep
                finish((px.ticker, spec.name), exc=exc)
            else:
                finish((px.ticker, spec.name), res)
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futs = {pool.submit(run_one, px, spec, per_section, settings): (px.ticker, spec.name)
                    for px, spec, per_section in pending}
            for fut in as_completed(futs):
                try:
                    res = fut.result()
                except Exception as exc:
                    finish(futs[fut], exc=exc)
                else:
                    finish(futs[fut], res)

    results.sort(key=lambda r: (r.ticker, r.variant))
    failures.sort(key=lambda f: (f.ticker, f.variant))
    return results, failures


# -- report tables ---------------------------------------------------------

def _by_ticker(results: Iterable[RunResult]) -> dict[str, list[RunResult]]:
    out: dict[str, list[RunResult]] = {}
    for r in results:
        out.setdefault(r.ticker, []).append(r)
    return dict(sorted(out.items()))


def _best(runs: Iterable[RunResult]) -> RunResult:
    # ties resolve to the lexicographically smallest variant name
    return min(runs, key=lambda r: (r.mape, r.variant))


def table_best_variant(results: Iterable[RunResult]) -> list[tuple[str, str, float]]:
    """Per ticker: (ticker, best variant, its MAPE)."""
    return [(t, (b := _best(runs)).variant, b.mape) for t, runs in _by_ticker(results).items()]


@dataclass
class GroupRow:
    group: str
    winner_count: int
    average_mape: float          # mean MAPE of the group's winning runs
    average_mape_all_runs: float  # mean over every run in the group


def _group_table(results: list[RunResult], key, labels: Mapping[str, str]) -> list[GroupRow]:
    winners = [(t, v, m) for t, v, m in table_best_variant(results) if VariantSpec.parse(v).uses_sentiment]
    rows = []
    for group, label in labels.items():
        won = [m for _, v, m in winners if key(VariantSpec.parse(v)) == group]
        every = [r.mape for r in results if r.spec.uses_sentiment and key(r.spec) == group]
        rows.append(GroupRow(label, len(won),
                             float(np.mean(won)) if won else float("nan"),
                             float(np.mean(every)) if every else float("nan")))
    rows.sort(key=lambda r: (-r.winner_count, r.average_mape if r.winner_count else math.inf, r.group))
    return rows


def table_section_winners(results: Iterable[RunResult]) -> list[GroupRow]:
    """Tickers whose overall best run uses sentiment, tallied by article section."""
    return _group_table(list(results), lambda s: s.feature_variant, SECTION_LABELS)


def table_library_winners(results: Iterable[RunResult]) -> list[GroupRow]:
    """Tickers whose overall best run uses sentiment, tallied by lexicon."""
    return _group_table(list(results), lambda s: s.library, LIBRARY_LABELS)


def _fmt(x: float) -> str:
    return "nan" if math.isnan(x) else repr(float(x))


def _aligned(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    widths = [max(len(str(c)) for c in col) for col in zip(header, *rows)]
    lines = ["  ".join(str(c).ljust(w) for c, w in zip(r, widths)).rstrip() for r in [header, *rows]]
    return "\n".join(lines) + "\n"


def render_tables(results: Sequence[RunResult]) -> dict[str, str]:
    """File name -> contents for the three tables in CSV and plain text."""
    out = {}
    t1 = table_best_variant(results)
    header = ["stock", "best_variant", "mape"]
    out["table1_best_variant.csv"] = _csv(header, [(t, v, _fmt(m)) for t, v, m in t1])
    out["table1_best_variant.txt"] = _aligned(["Stock", "Best Variant", "MAPE"], [(t, v, f"{m:.4f}") for t, v, m in t1])
    note = ("# winners: tickers whose best run (table 1) uses sentiment; "
            "average_mape over those winners, average_mape_all_runs over every run in the group\n")
    for fname, title, rows in (("table2_section_winners", "Article section", table_section_winners(results)),
                               ("table3_library_winners", "Library", table_library_winners(results))):
        header = ["group", "winner_count", "average_mape", "average_mape_all_runs"]
        body = [(r.group, str(r.winner_count), _fmt(r.average_mape), _fmt(r.average_mape_all_runs)) for r in rows]
        out[f"{fname}.csv"] = _csv(header, body)
        out[f"{fname}.txt"] = _aligned(
            [title, "Stocks winner count", "Average MAPE", "Average MAPE (all runs)"],
            [(r.group, str(r.winner_count), f"{r.average_mape:.6f}", f"{r.average_mape_all_runs:.6f}") for r in rows],
        ) + note
    return out


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def write_tables(results: Sequence[RunResult], out_dir) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, text in render_tables(results).items():
        p = out_dir / name
        p.write_text(text, encoding="utf-8")
        paths.append(p)
    return paths
