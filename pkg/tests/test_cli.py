import hashlib
import json

import pytest
import yaml

from newsenti.cli import main
from newsenti.synthetic import SyntheticConfig, generate, write_workspace


@pytest.fixture
def workspace(tmp_path):
    write_workspace(generate(3, SyntheticConfig(n_days=60)), tmp_path)
    cfg = {
        "paths": {"articles": "articles.jsonl", "prices_dir": "prices", "aliases": "aliases.csv",
                  "results_dir": "out", "lexicons": "bundled"},
        "calendar": {"start": "2019-01-01", "end": "2022-08-31"},
        "train": {"epochs": 2},
    }
    path = tmp_path / "config.yaml"
    path.write_text(yaml.safe_dump(cfg))
    return tmp_path, path


def digest(root):
    h = hashlib.sha256()
    for p in sorted(root.rglob("*")):
        if p.is_file():
            h.update(str(p.relative_to(root)).encode())
            h.update(p.read_bytes())
    return h.hexdigest()


def test_ingest_summary(workspace, capsys):
    root, cfg = workspace
    assert main(["ingest", "--config", str(cfg)]) == 0
    first = json.loads(capsys.readouterr().out)
    assert first["deduped"] <= first["cleaned"] <= first["read"]
    assert (root / "out" / "corpus" / "articles.jsonl").is_file()
    assert main(["--config", str(cfg), "ingest"]) == 0
    assert json.loads(capsys.readouterr().out) == first


def test_missing_articles_path(workspace, capsys):
    root, cfg = workspace
    (root / "articles.jsonl").unlink()
    assert main(["ingest", "--config", str(cfg)]) == 2
    assert "articles.jsonl" in capsys.readouterr().err


def test_bad_config_values(workspace, capsys):
    root, cfg = workspace
    doc = yaml.safe_load(cfg.read_text())
    doc["calendar"] = {"start": "2022-01-01", "end": "2021-01-01"}
    doc["lookback"] = 0
    cfg.write_text(yaml.safe_dump(doc))
    assert main(["run", "--config", str(cfg)]) == 2
    err = capsys.readouterr().err
    assert "start" in err and "lookback" in err


def test_score_files_and_stability(workspace, capsys):
    root, cfg = workspace
    assert main(["score", "--config", str(cfg)]) == 0
    files = sorted((root / "out" / "sentiment" / "ACME").glob("*.csv"))
    assert len(files) == 9
    first = digest(root / "out")
    assert main(["score", "--config", str(cfg)]) == 0
    assert digest(root / "out") == first


def test_score_empty_corpus(workspace):
    root, cfg = workspace
    (root / "articles.jsonl").write_text("")
    assert main(["score", "--config", str(cfg), "--tickers", "ACME"]) == 0
    for f in (root / "out" / "sentiment" / "ACME").glob("*.csv"):
        values = [line.split(",")[1] for line in f.read_text().splitlines()[1:]]
        assert set(values) == {"0.000000"}


def test_run_price_only_skips_scoring(workspace, capsys):
    root, cfg = workspace
    (root / "articles.jsonl").unlink()
    code = main(["run", "--config", str(cfg), "--tickers", "ACME", "--variants", "one_feature"])
    assert code == 0
    assert json.loads(capsys.readouterr().out) == {"results": 1, "failures": 0}


def test_full_run_resume_and_report(workspace, capsys):
    root, cfg = workspace
    assert main(["run", "--config", str(cfg), "--tickers", "ACME", "--jobs", "1"]) == 0
    tables = root / "out" / "tables"
    names = sorted(p.name for p in tables.iterdir())
    assert names == sorted(f"table{k}_{n}.{e}" for k, n in [(1, "best_variant"), (2, "section_winners"),
                                                             (3, "library_winners")] for e in ("csv", "txt"))
    assert len(list((root / "out" / "results" / "ACME").glob("*.json"))) == 14
    before = digest(tables)
    capsys.readouterr()
    assert main(["--resume", "run", "--config", str(cfg), "--tickers", "ACME"]) == 0
    assert "[" not in capsys.readouterr().err  # nothing retrained
    assert digest(tables) == before
    assert main(["report", "--config", str(cfg)]) == 0
    assert digest(tables) == before


def test_seed_flag_changes_runs(workspace, capsys):
    root, cfg = workspace
    main(["run", "--config", str(cfg), "--tickers", "ACME", "--variants", "one_feature"])
    a = json.loads((root / "out" / "results" / "ACME" / "one_feature.json").read_text())
    main(["run", "--config", str(cfg), "--seed", "9", "--tickers", "ACME", "--variants", "one_feature"])
    b = json.loads((root / "out" / "results" / "ACME" / "one_feature.json").read_text())
    assert a["seed"] != b["seed"]


def test_unknown_ticker_and_variant(workspace, capsys):
    root, cfg = workspace
    assert main(["run", "--config", str(cfg), "--tickers", "NOPE"]) == 2
    assert main(["run", "--config", str(cfg), "--variants", "six_feature"]) == 2


def test_partial_failure_exit_code(workspace, monkeypatch):
    root, cfg = workspace
    from newsenti import experiment
    real = experiment.run_one

    def flaky(prices, spec, sentiment, settings):
        if prices.ticker == "ACME":
            raise FloatingPointError("boom")
        return real(prices, spec, sentiment, settings)

    monkeypatch.setattr(experiment, "run_one", flaky)
    code = main(["run", "--config", str(cfg), "--jobs", "1", "--tickers", "ACME", "GLOBEX", "--variants", "one_feature"])
    assert code == 1
    failures = json.loads((root / "out" / "failures.json").read_text())
    assert [(f["ticker"], f["variant"]) for f in failures] == [("ACME", "one_feature")]
    assert (root / "out" / "results" / "GLOBEX" / "one_feature.json").is_file()


def test_insufficient_prices_is_fatal(workspace, capsys):
    root, cfg = workspace
    prices = root / "prices" / "ACME.csv"
    prices.write_text("\n".join(prices.read_text().splitlines()[:41]) + "\n")
    assert main(["run", "--config", str(cfg), "--tickers", "ACME", "--variants", "one_feature"]) == 2
    assert "insufficient data" in capsys.readouterr().err


def test_report_without_results(workspace):
    root, cfg = workspace
    assert main(["report", "--config", str(cfg)]) == 2
