import datetime as dt

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from newsenti.dataset import (
    FeatureMatrix, InsufficientData, PriceSeries, ScalerParams, apply_scaler, build_features,
    fit_scaler, invert_scaler, load_prices, prepare, variant_columns, window, VARIANTS,
)
from newsenti.sentiment import SentimentSeries


def business_dates(n, start=dt.date(2019, 1, 1)):
    out, d = [], start
    while len(out) < n:
        if d.weekday() < 5:
            out.append(d)
        d += dt.timedelta(days=1)
    return out


def write_prices(path, n, extra_rows=()):
    lines = ["date,open,high,low,close,volume"]
    for k, d in enumerate(business_dates(n)):
        c = 100 + k * 0.1
        lines.append(f"{d},{c - 0.5},{c + 1},{c - 1},{c},{1000 + k}")
    lines += list(extra_rows)
    path.write_text("\n".join(lines) + "\n")
    return path


def prices(n, ticker="ACME"):
    dates = business_dates(n)
    close = 100 + np.arange(n) * 0.1
    ohlcv = np.column_stack([close - 0.5, close + 1, close - 1, close, 1000 + np.arange(n)])
    return PriceSeries(ticker, dates, ohlcv)


class TestLoadPrices:
    def test_904_rows(self, tmp_path):
        ps = load_prices(write_prices(tmp_path / "ACME.csv", 904))
        assert len(ps) == 904 and ps.ticker == "ACME"
        assert ps.ohlcv.shape == (904, 5)

    def test_duplicate_date_keeps_first(self, tmp_path, caplog):
        path = write_prices(tmp_path / "A.csv", 50, ["2019-01-01,1,1,1,1,1"])
        ps = load_prices(path)
        assert len(ps) == 50 and ps.column("close")[0] == 100
        assert "duplicate" in caplog.text

    def test_low_above_high_rejected(self, tmp_path, caplog):
        path = write_prices(tmp_path / "A.csv", 50, ["2030-01-01,10,9,11,10,5"])
        ps = load_prices(path)
        assert len(ps) == 50 and dt.date(2030, 1, 1) not in ps.dates
        assert "OHLC" in caplog.text

    def test_sorted_by_date(self, tmp_path):
        path = tmp_path / "A.csv"
        rows = [f"{d},10,11,9,10,1" for d in reversed(business_dates(50))]
        path.write_text("date,open,high,low,close,volume\n" + "\n".join(rows))
        ps = load_prices(path)
        assert ps.dates == sorted(ps.dates)

    def test_insufficient(self, tmp_path):
        with pytest.raises(InsufficientData, match="insufficient data"):
            load_prices(write_prices(tmp_path / "A.csv", 44))

    def test_between(self):
        ps = prices(20).between(dt.date(2019, 1, 3), dt.date(2019, 1, 8))
        assert ps.dates == [dt.date(2019, 1, 3), dt.date(2019, 1, 4), dt.date(2019, 1, 7), dt.date(2019, 1, 8)]


class TestBuildFeatures:
    def _senti(self, ps, section, values):
        return SentimentSeries(ps.ticker, section, "vader", values)

    def test_column_counts(self):
        ps = prices(60)
        senti = {s: self._senti(ps, s, {}) for s in ("heading", "synopsis", "full_text")}
        counts = [build_features(ps, v, senti).values.shape[1] for v in VARIANTS]
        assert counts == [1, 5, 6, 6, 6, 7]

    def test_one_feature_is_close(self):
        ps = prices(60)
        fm = build_features(ps, "one_feature")
        assert fm.columns == ["close"]
        np.testing.assert_array_equal(fm.values[:, 0], ps.column("close"))

    def test_head_syn_order_and_zero_fill(self):
        ps = prices(60)
        d = ps.dates[3]
        senti = {"heading": self._senti(ps, "heading", {d: 0.4}),
                 "synopsis": self._senti(ps, "synopsis", {dt.date(1990, 1, 1): 0.9})}
        fm = build_features(ps, "five_feature_senti_head_syn", senti)
        assert fm.columns == ["close", "open", "high", "low", "volume", "senti_head", "senti_syn"]
        assert fm.values[3, 5] == 0.4
        assert np.count_nonzero(fm.values[:, 5]) == 1
        assert not fm.values[:, 6].any()

    def test_unknown_variant(self):
        with pytest.raises(ValueError):
            build_features(prices(60), "seven_feature")

    def test_missing_series(self):
        with pytest.raises(ValueError):
            build_features(prices(60), "five_feature_senti_art", {})

    def test_ticker_mismatch(self):
        ps = prices(60)
        with pytest.raises(ValueError):
            build_features(ps, "five_feature_senti_head", {"heading": SentimentSeries("X", "heading", "lm", {})})

    def test_debug_dump(self, tmp_path):
        fm = build_features(prices(3 + 45), "five_feature")
        fm.to_csv(tmp_path / "fm.csv")
        lines = (tmp_path / "fm.csv").read_text().splitlines()
        assert lines[0] == "date,close,open,high,low,volume"
        assert len(lines) == 49


def fm_of(values):
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    cols = ["close", *[f"c{k}" for k in range(1, values.shape[1])]]
    return FeatureMatrix("T", business_dates(len(values)), cols, values)


class TestScaler:
    def test_endpoints(self):
        fm = fm_of([10.0, 20.0, 30.0])
        params = fit_scaler(fm, 3)
        np.testing.assert_array_equal(apply_scaler(fm.values, params)[:, 0], [0, 0.5, 1])

    def test_test_rows_not_clamped(self):
        fm = fm_of([10.0, 20.0, 30.0, 40.0])
        params = fit_scaler(fm, 3)
        # (40 - 10) / (30 - 10)
        assert apply_scaler(fm.values, params)[3, 0] == 1.5

    def test_constant_column(self):
        fm = fm_of(np.column_stack([[1.0, 2.0, 3.0], [5.0, 5.0, 7.0]]))
        scaled = apply_scaler(fm.values, fit_scaler(fm, 2))
        np.testing.assert_array_equal(scaled[:, 1], [0, 0, 0])

    def test_empty_train(self):
        with pytest.raises(ValueError):
            fit_scaler(fm_of([1.0, 2.0]), 0)

    def test_json_round_trip(self):
        params = fit_scaler(fm_of(np.column_stack([[1.0, 2.0], [3.0, 9.0]])), 2)
        back = ScalerParams.from_json(params.to_json())
        assert back.columns == params.columns
        np.testing.assert_array_equal(back.mins, params.mins)
        np.testing.assert_array_equal(back.maxs, params.maxs)

    @given(arrays(np.float64, st.integers(3, 40), elements=st.floats(1, 1e5)), st.integers(1, 40))
    def test_round_trip(self, col, k):
        train = min(k, len(col))
        fm = fm_of(col)
        params = fit_scaler(fm, train)
        if params.maxs[0] == params.mins[0]:
            return
        back = invert_scaler(apply_scaler(fm.values, params)[:, 0], params)
        np.testing.assert_allclose(back, col, rtol=1e-9)

    @given(arrays(np.float64, 20, elements=st.floats(-1e3, 1e3)), arrays(np.float64, 5, elements=st.floats(-1e6, 1e6)))
    def test_fit_ignores_test_rows(self, train, test):
        a = fit_scaler(fm_of(np.r_[train, np.zeros(5)]), 20)
        b = fit_scaler(fm_of(np.r_[train, test]), 20)
        assert a.mins[0] == b.mins[0] and a.maxs[0] == b.maxs[0]


class TestWindow:
    def test_904_rows(self):
        ds = window(np.random.default_rng(0).random((904, 5)), lookback=10)
        assert ds.inputs.shape == (894, 10, 5)
        assert ds.targets.shape == (894,)
        assert ds.split == 864
        assert ds.is_test.sum() == 30 and ds.is_test[-30:].all()

    def test_eleven_rows_one_sample(self):
        data = np.arange(11.0)[:, None]
        ds = window(data, lookback=10, holdout=0)
        assert ds.n_samples == 1
        np.testing.assert_array_equal(ds.inputs[0, :, 0], np.arange(10.0))
        assert ds.targets[0] == 10.0

    def test_too_short_for_holdout(self):
        with pytest.raises(InsufficientData):
            window(np.zeros((40, 1)), lookback=10, holdout=30)

    @settings(deadline=None)
    @given(st.integers(1, 12), st.integers(0, 20), st.integers(1, 4))
    def test_windows_reconstruct_rows(self, lookback, extra, features):
        n = lookback + 1 + extra
        data = np.arange(n * features, dtype=float).reshape(n, features)
        ds = window(data, lookback, holdout=0)
        assert ds.n_samples == n - lookback
        for i in range(ds.n_samples):
            np.testing.assert_array_equal(ds.inputs[i], data[i:i + lookback])
            assert ds.targets[i] == data[i + lookback, 0]
        rebuilt = np.vstack([ds.inputs[0], ds.inputs[1:, -1]] if ds.n_samples > 1 else [ds.inputs[0]])
        np.testing.assert_array_equal(rebuilt, data[:n - 1])


def test_prepare_fits_on_training_rows_only():
    vals = np.r_[np.linspace(10, 20, 60), np.full(30, 1000.0)]
    p = prepare(fm_of(vals), lookback=10, holdout=30)
    assert p.scaler.maxs[0] == 20 and p.scaler.mins[0] == 10
    assert p.windows.split == 50
    assert p.windows.target_dates[0] == p.matrix.dates[10]
    np.testing.assert_allclose(invert_scaler(p.windows.targets, p.scaler), vals[10:])


def test_variant_columns_unknown():
    with pytest.raises(ValueError):
        variant_columns("nope")
