"""Write a synthetic market (articles, aliases, prices) plus a config.yaml.

    python3 scripts/make_synthetic_workspace.py /tmp/demo --days 300 --seed 1
    newsenti run --config /tmp/demo/config.yaml
"""

import argparse
from dataclasses import dataclass
from pathlib import Path

import yaml

from newsenti.synthetic import SyntheticConfig, generate, write_workspace


@dataclass
class WorkspaceConfig:
    root: Path
    days: int = 300
    seed: int = 0
    epochs: int = 100


def build(cfg: WorkspaceConfig) -> Path:
    market = generate(cfg.seed, SyntheticConfig(n_days=cfg.days))
    write_workspace(market, cfg.root)
    doc = {
        "paths": {"articles": "articles.jsonl", "prices_dir": "prices", "aliases": "aliases.csv",
                  "results_dir": "out", "lexicons": "bundled"},
        "calendar": {"start": "2019-01-01", "end": "2030-12-31"},
        "seed": cfg.seed,
        "train": {"epochs": cfg.epochs},
    }
    path = cfg.root / "config.yaml"
    path.write_text(yaml.safe_dump(doc, sort_keys=False))
    return path


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("root", type=Path)
    ap.add_argument("--days", type=int, default=300)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--epochs", type=int, default=100)
    args = ap.parse_args()
    print(build(WorkspaceConfig(args.root, args.days, args.seed, args.epochs)))


if __name__ == "__main__":
    main()
