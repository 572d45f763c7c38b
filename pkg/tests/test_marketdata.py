import datetime as dt
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pitesg.marketdata import (MarketDataError, PriceSeries, align_and_backfill, load_csv, load_panel,
                               read_panel_csv, slice_before, weekdays, weekly_panel, write_csv)

D = dt.date


def _write(tmp_path, name, rows, header="date,close"):
    p = tmp_path / name
    p.write_text(header + "\n" + "\n".join(rows) + "\n")
    return p


def _series(start, levels):
    days = weekdays(start, start + dt.timedelta(days=3 * len(levels)))[: len(levels)]
    return PriceSeries(tuple(days), np.array(levels, dtype=float))


class TestLoadCsv:
    def test_two_rows(self, tmp_path):
        s = load_csv(_write(tmp_path, "a.csv", ["2020-01-02,100.0", "2020-01-03,101.0"]))
        assert len(s) == 2
        assert s.dates == (D(2020, 1, 2), D(2020, 1, 3))
        np.testing.assert_array_equal(s.levels, [100.0, 101.0])

    def test_sorted(self, tmp_path):
        s = load_csv(_write(tmp_path, "a.csv", ["2020-01-03,101.0", "2020-01-02,100.0"]))
        assert s.dates == (D(2020, 1, 2), D(2020, 1, 3))
        np.testing.assert_array_equal(s.levels, [100.0, 101.0])

    def test_negative_level(self, tmp_path):
        with pytest.raises(MarketDataError, match="positive"):
            load_csv(_write(tmp_path, "a.csv", ["2020-01-02,-5"]))

    def test_malformed_row_reports_row_number(self, tmp_path):
        with pytest.raises(MarketDataError, match="row 3"):
            load_csv(_write(tmp_path, "a.csv", ["2020-01-02,100", "2020-01-03,abc"]))

    def test_duplicate_date(self, tmp_path):
        with pytest.raises(MarketDataError, match="duplicate"):
            load_csv(_write(tmp_path, "a.csv", ["2020-01-02,100", "2020-01-02,101"]))

    def test_column_remap(self, tmp_path):
        s = load_csv(_write(tmp_path, "a.csv", ["2020-01-02,1,100.0"], header="Day,Open,Adj"), "day", "adj")
        assert s.levels[0] == 100.0

    def test_missing_column(self, tmp_path):
        with pytest.raises(MarketDataError, match="missing column"):
            load_csv(_write(tmp_path, "a.csv", ["2020-01-02,100"]), level_column="adj")

    def test_write_roundtrip(self, tmp_path):
        s = _series(D(2021, 3, 1), [10.0, 11.5, 9.25])
        write_csv(s, tmp_path / "s.csv")
        r = load_csv(tmp_path / "s.csv")
        assert r.dates == s.dates
        np.testing.assert_array_equal(r.levels, s.levels)


class TestAlign:
    def test_midweek_gap_is_backfilled(self):
        spx = PriceSeries((D(2020, 1, 6), D(2020, 1, 7), D(2020, 1, 9)), np.array([100.0, 102.0, 103.0]))
        vix = PriceSeries((D(2020, 1, 6), D(2020, 1, 7), D(2020, 1, 8), D(2020, 1, 9)),
                          np.array([20.0, 21.0, 22.0, 23.0]))
        p = align_and_backfill(spx, vix)
        assert p.dates == (D(2020, 1, 7), D(2020, 1, 8), D(2020, 1, 9))
        assert p.spx_level[1] == 102.0
        assert p.spx_log_return[1] == 0.0
        assert p.backfilled.tolist() == [False, True, False]
        # holiday keeps VIX flat as well
        assert p.vix_level[1] == 21.0
        assert p.spx_log_return[2] == pytest.approx(math.log(103.0 / 102.0), abs=1e-15)

    def test_constant_levels(self):
        s = _series(D(2020, 1, 6), [100.0, 100.0, 100.0])
        p = align_and_backfill(s, s)
        np.testing.assert_array_equal(p.spx_log_return, [0.0, 0.0])

    def test_one_percent_return(self):
        s = _series(D(2020, 1, 6), [100.0, 100.0 * math.exp(0.01)])
        p = align_and_backfill(s, s)
        assert abs(p.spx_log_return[0] - 0.01) < 1e-12

    def test_no_overlap(self):
        a = _series(D(2020, 1, 6), [1.0, 2.0])
        b = _series(D(2021, 1, 4), [1.0, 2.0])
        with pytest.raises(MarketDataError, match="overlap"):
            align_and_backfill(a, b)

    def test_weekends_excluded(self, market_panel):
        assert all(d.weekday() < 5 for d in market_panel.dates)
        gaps = {(b - a).days for a, b in zip(market_panel.dates, market_panel.dates[1:])}
        assert gaps <= {1, 3}

    def test_level_reconstruction(self, market_panel):
        p = market_panel
        cum = np.cumsum(p.spx_log_return)
        ok = ~p.backfilled
        recon = p.spx_level[0] * np.exp(cum - cum[0])
        np.testing.assert_allclose(recon[ok], p.spx_level[ok], rtol=1e-9)
        assert np.all(p.spx_log_return[p.backfilled] == 0.0)

    def test_deterministic(self, market_series):
        a = align_and_backfill(*market_series)
        b = align_and_backfill(*market_series)
        assert a.dates == b.dates
        assert a.spx_log_return.tobytes() == b.spx_log_return.tobytes()

    def test_panel_csv_roundtrip(self, market_panel, tmp_path):
        market_panel.to_csv(tmp_path / "p.csv")
        q = read_panel_csv(tmp_path / "p.csv")
        assert q.dates == market_panel.dates
        np.testing.assert_array_equal(q.spx_log_return, market_panel.spx_log_return)
        np.testing.assert_array_equal(q.vix_level, market_panel.vix_level)
        np.testing.assert_array_equal(q.backfilled, market_panel.backfilled)

    def test_load_panel(self, tmp_path, market_series):
        write_csv(market_series[0], tmp_path / "s.csv")
        write_csv(market_series[1], tmp_path / "v.csv")
        p = load_panel(tmp_path / "s.csv", tmp_path / "v.csv")
        assert len(p) == len(align_and_backfill(*market_series))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0.5, 2.0), min_size=3, max_size=40), st.data())
def test_property_returns_telescoping(ratios, data):
    levels = 100.0 * np.cumprod(ratios)
    days = weekdays(D(2019, 1, 7), D(2019, 12, 31))[: len(levels)]
    keep = data.draw(st.lists(st.booleans(), min_size=len(levels), max_size=len(levels)))
    keep[0] = True
    idx = [k for k in range(len(levels)) if keep[k]]
    spx = PriceSeries(tuple(days[k] for k in idx), levels[idx])
    vix = PriceSeries(tuple(days), np.full(len(days), 20.0))
    if len(idx) < 2 or spx.dates[-1] == spx.dates[0]:
        return
    p = align_and_backfill(spx, vix)
    total = float(np.sum(p.spx_log_return))
    assert total == pytest.approx(math.log(p.spx_level[-1] / levels[0]), abs=1e-9)
    assert np.all(p.spx_log_return[p.backfilled] == 0.0)


class TestWeekly:
    def _panel(self, n_days):
        days = weekdays(D(2020, 1, 6), D(2020, 3, 31))[: n_days + 1]
        levels = 100.0 + np.arange(len(days))
        s = PriceSeries(tuple(days), levels)
        v = PriceSeries(tuple(days), 15.0 + np.arange(len(days)))
        return align_and_backfill(s, v)

    def test_two_weeks_give_one(self):
        # the panel drops the first weekday, so 11 raw days leave 10 panel days (Tue..Mon)
        days = weekdays(D(2020, 1, 6), D(2020, 1, 17))
        s = PriceSeries(tuple([D(2020, 1, 3)] + days), np.arange(1.0, len(days) + 2))
        p = align_and_backfill(s, s)
        assert len(p) == 10
        w = weekly_panel(p)
        assert len(w) == 1
        assert w.week_start == (D(2020, 1, 13),)
        assert w.condition_date == (D(2020, 1, 10),)

    def test_three_weeks_give_two(self):
        days = weekdays(D(2020, 1, 6), D(2020, 1, 24))
        s = PriceSeries(tuple([D(2020, 1, 3)] + days), np.arange(1.0, len(days) + 2))
        w = weekly_panel(align_and_backfill(s, s))
        assert len(w) == 2
        assert w.returns.shape == (2, 5)

    def test_backfilled_friday_condition(self):
        days = [D(2020, 1, 3)] + weekdays(D(2020, 1, 6), D(2020, 1, 17))
        vix_days = [d for d in days if d != D(2020, 1, 10)]
        s = PriceSeries(tuple(days), np.linspace(100, 110, len(days)))
        v = PriceSeries(tuple(vix_days), np.array([10.0 + k for k in range(len(vix_days))]))
        p = align_and_backfill(s, v)
        w = weekly_panel(p)
        # Friday 10th is filled from Thursday 9th
        thursday = v.levels[list(vix_days).index(D(2020, 1, 9))]
        assert w.condition_vix[0] == thursday

    def test_too_short(self):
        days = [D(2020, 1, 3)] + weekdays(D(2020, 1, 6), D(2020, 1, 10))
        s = PriceSeries(tuple(days), np.arange(1.0, len(days) + 1))
        with pytest.raises(MarketDataError):
            weekly_panel(align_and_backfill(s, s))

    def test_real_panel_invariants(self, market_panel):
        w = weekly_panel(market_panel)
        pos = {d: k for k, d in enumerate(market_panel.dates)}
        for start, cdate, cv in zip(w.week_start, w.condition_date, w.condition_vix):
            assert start.weekday() == 0
            assert cdate == start - dt.timedelta(days=3)
            assert cv == market_panel.vix_level[pos[cdate]]


class TestSlice:
    def test_first_plus_one(self, market_panel):
        s = slice_before(market_panel, market_panel.dates[0] + dt.timedelta(days=1))
        assert len(s) == 1

    def test_last_plus_one(self, market_panel):
        s = slice_before(market_panel, market_panel.dates[-1] + dt.timedelta(days=1))
        assert len(s) == len(market_panel)

    def test_mid_range_counts_weekdays(self, market_panel):
        cut = D(2005, 6, 15)
        expected = len([d for d in weekdays(market_panel.dates[0], cut) if d < cut])
        assert len(slice_before(market_panel, cut)) == expected

    def test_before_first(self, market_panel):
        with pytest.raises(MarketDataError):
            slice_before(market_panel, market_panel.dates[0])
