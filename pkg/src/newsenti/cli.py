"""Command line: ``newsenti {ingest,score,run,report}``.

Exit codes: 0 success, 1 some runs failed, 2 fatal input or config error.
Progress goes to stderr; summaries are printed to stdout as JSON.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import corpus, dataset, experiment, lexicon, sentiment
from .config import ConfigError, PipelineConfig, load_config

log = logging.getLogger("newsenti")


class FatalError(Exception):
    pass


def _lexicons(cfg: PipelineConfig):
    lx = cfg.lexicons
    try:
        return {
            "vader": lexicon.load_valence_lexicon(lx["vader"]),
            "hiv4": lexicon.load_categorical_lexicon(lx["hiv4_positive"], lx["hiv4_negative"], "hiv4"),
            "lm": lexicon.load_categorical_lexicon(lx["lm_positive"], lx["lm_negative"], "lm"),
        }
    except (OSError, lexicon.LexiconError) as exc:
        raise FatalError(str(exc)) from exc


def _ingest(cfg: PipelineConfig) -> tuple[list[corpus.Article], corpus.IngestReport]:
    report = corpus.IngestReport()
    try:
        arts = corpus.ingest_articles(cfg.articles, report=report)
    except (OSError, ValueError) as exc:
        raise FatalError(f"cannot read articles {cfg.articles}: {exc}") from exc
    return arts, report


def _tickers(cfg: PipelineConfig, only: list[str] | None = None) -> list[corpus.TickerAliases]:
    aliases = corpus.load_aliases(cfg.aliases)
    wanted = [t.upper() for t in (only or cfg.tickers)]
    if wanted:
        by_symbol = {a.symbol: a for a in aliases}
        missing = [t for t in wanted if t not in by_symbol]
        if missing:
            raise FatalError(f"tickers not in alias file {cfg.aliases}: {missing}")
        return [by_symbol[t] for t in wanted]
    return aliases


def _prices(cfg: PipelineConfig, tickers) -> dict[str, dataset.PriceSeries]:
    out = {}
    min_rows = cfg.lookback + cfg.horizon + cfg.holdout
    for alias in tickers:
        path = cfg.prices_dir / f"{alias.symbol}.csv"
        if not path.is_file():
            raise FatalError(f"price file missing for {alias.symbol}: {path}")
        try:
            px = dataset.load_prices(path, alias.symbol, min_rows=1).between(cfg.start, cfg.end)
        except (OSError, ValueError) as exc:
            raise FatalError(str(exc)) from exc
        if len(px) < min_rows:
            raise FatalError(f"insufficient data: {path} has {len(px)} rows in "
                             f"{cfg.start}..{cfg.end}, need {min_rows}")
        out[alias.symbol] = px
    return out


def cmd_ingest(cfg: PipelineConfig, args) -> int:
    cfg.validate(need=("articles",))
    arts, report = _ingest(cfg)
    corpus.write_articles(arts, cfg.results_dir / "corpus" / "articles.jsonl")
    print(json.dumps(report.as_dict(), sort_keys=True))
    return 0


def cmd_score(cfg: PipelineConfig, args) -> int:
    cfg.validate()
    tickers = _tickers(cfg, args.tickers)
    prices = _prices(cfg, tickers)
    lexicons = _lexicons(cfg)
    arts, _ = _ingest(cfg)
    scores = sentiment.score_corpus(arts, lexicons)
    sentiment.write_scores(scores, cfg.results_dir / "scores.csv")
    n_files = 0
    for alias in tickers:
        cal = prices[alias.symbol].dates
        for sec in corpus.SECTIONS:
            for lib in lexicon.LIBRARIES:
                series = sentiment.aggregate_daily(scores, arts, alias, sec, lib, cal, cfg.cutoff_hour)
                series.to_csv(cfg.results_dir / "sentiment" / alias.symbol / f"{sec}_{lib}.csv", cal)
                n_files += 1
    log.info("wrote %d scores and %d series files", len(scores), n_files)
    print(json.dumps({"articles": len(arts), "scores": len(scores), "series_files": n_files}))
    return 0


def cmd_run(cfg: PipelineConfig, args) -> int:
    try:
        variants = experiment.select_variants(args.variants)
    except ValueError as exc:
        raise FatalError(str(exc)) from exc
    needs_text = any(v.uses_sentiment for v in variants)
    cfg.validate(need=("prices_dir", "aliases", *(("articles", "lexicons") if needs_text else ())))
    tickers = _tickers(cfg, args.tickers)
    prices = _prices(cfg, tickers)
    if needs_text:
        lexicons = _lexicons(cfg)
        arts, _ = _ingest(cfg)
    else:
        lexicons, arts = {}, []
    store = experiment.ResultStore(cfg.results_dir / "results")
    total = len(tickers) * len(variants)

    def progress(done, key, result):
        status = f"MAPE {result.mape:.4f}" if result is not None else "FAILED"
        print(f"[{done}/{total}] {key[0]} {key[1]}: {status}", file=sys.stderr, flush=True)

    results, failures = experiment.run_all(
        tickers, arts, lexicons, prices, cfg.settings(args.seed), variants,
        store=store, resume=args.resume, jobs=args.jobs, progress=progress,
    )
    _write_failures(cfg, failures)
    experiment.write_tables(store.all(), cfg.results_dir / "tables")
    print(json.dumps({"results": len(results), "failures": len(failures)}))
    return 1 if failures else 0


def _write_failures(cfg, failures) -> None:
    path = cfg.results_dir / "failures.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps([f.__dict__ for f in failures], indent=1) + "\n", encoding="utf-8")


def cmd_report(cfg: PipelineConfig, args) -> int:
    results = experiment.ResultStore(cfg.results_dir / "results").all()
    if not results:
        raise FatalError(f"no results under {cfg.results_dir / 'results'}")
    paths = experiment.write_tables(results, cfg.results_dir / "tables")
    print(json.dumps({"results": len(results), "tables": [str(p) for p in paths]}))
    return 0


COMMANDS = {"ingest": cmd_ingest, "score": cmd_score, "run": cmd_run, "report": cmd_report}


def build_parser() -> argparse.ArgumentParser:
    def global_flags(p, default):
        p.add_argument("--config", default=default, help="pipeline YAML config")
        p.add_argument("--seed", type=int, default=default, help="global seed (overrides config)")
        p.add_argument("--jobs", type=int, default=default, help="parallel training workers")
        p.add_argument("--resume", action="store_true", default=default, help="reuse persisted runs")
        p.add_argument("-v", "--verbose", action="store_true", default=default)

    parser = argparse.ArgumentParser(prog="newsenti", description=__doc__.splitlines()[0])
    global_flags(parser, None)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        # SUPPRESS keeps values given before the subcommand
        global_flags(sp, argparse.SUPPRESS)
        if name in ("score", "run"):
            sp.add_argument("--tickers", nargs="+", help="subset of ticker symbols")
        if name == "run":
            sp.add_argument("--variants", nargs="+", help="variant names, e.g. one_feature five_feature_senti_head_lm")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    args.jobs = args.jobs or os.cpu_count() or 1
    args.resume = bool(args.resume)
    for name in ("tickers", "variants"):
        if not hasattr(args, name):
            setattr(args, name, None)
    if not args.config:
        print("newsenti: error: --config is required", file=sys.stderr)
        return 2
    try:
        cfg = load_config(args.config)
        return COMMANDS[args.command](cfg, args)
    except (ConfigError, FatalError) as exc:
        print(f"newsenti: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
