"""Compare five_feature against five_feature_senti_head_vader on synthetic markets.

Returns in the synthetic market depend on the previous day's headline tone,
so the sentiment variant should forecast better. Prints one line per seed
and the medians.
"""

import argparse
import statistics
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

from newsenti import corpus, dataset, experiment, sentiment
from newsenti.experiment import RunSettings, VariantSpec
from newsenti.lexicon import load_bundled
from newsenti.lstm import TrainConfig
from newsenti.synthetic import SyntheticConfig, SyntheticTicker, generate, write_workspace


@dataclass
class LiftConfig:
    seeds: list[int] = field(default_factory=lambda: list(range(5)))
    days: int = 900
    beta: float = 0.02
    epochs: int = 100


def lift_for_seed(seed: int, cfg: LiftConfig, workdir: Path) -> tuple[float, float]:
    vader = load_bundled()["vader"]
    ticker = (SyntheticTicker("ACME", ("acme", "acme industries")),)
    market = generate(seed, SyntheticConfig(n_days=cfg.days, beta=cfg.beta), tickers=ticker, vader=vader)
    paths = write_workspace(market, workdir / f"seed{seed}")
    arts = corpus.ingest_articles(paths["articles"])
    alias = corpus.load_aliases(paths["aliases"])[0]
    prices = dataset.load_prices(paths["prices"] / "ACME.csv", "ACME")
    scores = sentiment.score_corpus(arts, {"vader": vader}, ["heading"], ["vader"])
    head = sentiment.aggregate_daily(scores, arts, alias, "heading", "vader", prices.dates)
    settings = RunSettings(seed=seed, train=TrainConfig(epochs=cfg.epochs))
    base = experiment.run_one(prices, VariantSpec("five_feature"), None, settings)
    senti = experiment.run_one(prices, VariantSpec("five_feature_senti_head", "vader"), {"heading": head}, settings)
    return base.mape, senti.mape


def main():
    ap = argparse.ArgumentParser(description="synthetic sentiment lift")
    ap.add_argument("--seeds", type=int, nargs="+", default=list(range(5)))
    ap.add_argument("--days", type=int, default=900)
    ap.add_argument("--beta", type=float, default=0.02)
    ap.add_argument("--epochs", type=int, default=100)
    args = ap.parse_args()
    cfg = LiftConfig(args.seeds, args.days, args.beta, args.epochs)
    pairs = []
    with tempfile.TemporaryDirectory() as tmp:
        for seed in cfg.seeds:
            base, senti = lift_for_seed(seed, cfg, Path(tmp))
            pairs.append((base, senti))
            print(f"seed {seed}: five_feature {base:.4f}  five_feature_senti_head_vader {senti:.4f}", flush=True)
    print(f"median: five_feature {statistics.median(p[0] for p in pairs):.4f}  "
          f"five_feature_senti_head_vader {statistics.median(p[1] for p in pairs):.4f}")


if __name__ == "__main__":
    main()
