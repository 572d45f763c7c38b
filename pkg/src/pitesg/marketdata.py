"""Ingestion and alignment of daily S&P500 and VIX closes.

Non-trading weekdays (holidays) are forward-filled so that every Monday to
Friday in the overlap appears exactly once. A filled day carries the previous
close for both indices, so its S&P500 log return is exactly zero.
"""
from __future__ import annotations

import csv
import datetime as dt
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class MarketDataError(ValueError):
    """Raised for malformed or inconsistent market data."""


@dataclass(frozen=True)
class PriceSeries:
    dates: tuple[dt.date, ...]
    levels: np.ndarray

    def __post_init__(self):
        if len(self.dates) != len(self.levels):
            raise MarketDataError("dates and levels differ in length")
        for a, b in zip(self.dates, self.dates[1:]):
            if not a < b:
                raise MarketDataError(f"dates not strictly increasing at {b}")
        if len(self.levels) and not np.all(self.levels > 0):
            raise MarketDataError("all levels must be positive")

    def __len__(self):
        return len(self.dates)


@dataclass(frozen=True)
class AlignedPanel:
    """Rectangular weekday panel of S&P500 levels/returns and VIX closes."""

    dates: tuple[dt.date, ...]
    spx_level: np.ndarray
    spx_log_return: np.ndarray
    vix_level: np.ndarray
    backfilled: np.ndarray

    def __len__(self):
        return len(self.dates)

    def index_before(self, cutoff: dt.date) -> int:
        """Number of rows dated strictly before ``cutoff``."""
        lo, hi = 0, len(self.dates)
        while lo < hi:
            mid = (lo + hi) // 2
            if self.dates[mid] < cutoff:
                lo = mid + 1
            else:
                hi = mid
        return lo

    def rows(self, start: int, stop: int) -> "AlignedPanel":
        return AlignedPanel(
            dates=self.dates[start:stop],
            spx_level=self.spx_level[start:stop],
            spx_log_return=self.spx_log_return[start:stop],
            vix_level=self.vix_level[start:stop],
            backfilled=self.backfilled[start:stop],
        )

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["date", "spx_log_return", "vix_level", "backfilled"])
            for d, r, v, f in zip(self.dates, self.spx_log_return, self.vix_level, self.backfilled):
                w.writerow([d.isoformat(), repr(float(r)), repr(float(v)), int(bool(f))])


@dataclass(frozen=True)
class WeeklyPanel:
    """Complete Monday-Friday weeks, each paired with the prior Friday's VIX."""

    week_start: tuple[dt.date, ...]
    returns: np.ndarray  # (n_weeks, 5)
    condition_vix: np.ndarray  # (n_weeks,)
    condition_date: tuple[dt.date, ...]

    def __len__(self):
        return len(self.week_start)


def _parse_date(text: str) -> dt.date:
    return dt.date.fromisoformat(text.strip()[:10])


def load_csv(path, date_column: str = "date", level_column: str = "close") -> PriceSeries:
    """Read a dated close series from CSV. Rows may be in any order."""
    path = Path(path)
    rows: list[tuple[dt.date, float]] = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise MarketDataError(f"{path}: empty file")
        lookup = {name.strip().lower(): name for name in reader.fieldnames}
        try:
            dcol = lookup[date_column.lower()]
            lcol = lookup[level_column.lower()]
        except KeyError as exc:
            raise MarketDataError(f"{path}: missing column {exc.args[0]!r}") from None
        for lineno, row in enumerate(reader, start=2):
            try:
                day = _parse_date(row[dcol])
                level = float(row[lcol])
            except (TypeError, ValueError) as exc:
                raise MarketDataError(f"{path}: cannot parse row {lineno}: {exc}") from None
            if not np.isfinite(level) or level <= 0:
                raise MarketDataError(f"{path}: row {lineno}: level must be positive, got {level}")
            rows.append((day, level))
    rows.sort(key=lambda r: r[0])
    for (a, _), (b, _) in zip(rows, rows[1:]):
        if a == b:
            raise MarketDataError(f"{path}: duplicate date {a.isoformat()}")
    return PriceSeries(tuple(r[0] for r in rows), np.array([r[1] for r in rows], dtype=float))


def write_csv(series: PriceSeries, path) -> None:
    """Write a ``date,close`` file readable by :func:`load_csv`."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["date", "close"])
        for d, v in zip(series.dates, series.levels):
            w.writerow([d.isoformat(), repr(float(v))])


def weekdays(start: dt.date, end: dt.date) -> list[dt.date]:
    """All Monday-Friday dates in the closed interval."""
    out = []
    day = start
    one = dt.timedelta(days=1)
    while day <= end:
        if day.weekday() < 5:
            out.append(day)
        day += one
    return out


def _fill_levels(series: PriceSeries, grid: list[dt.date]):
    """Last level at or before each grid date, and whether the date itself was quoted."""
    quoted = dict(zip(series.dates, series.levels))
    levels = np.empty(len(grid))
    present = np.zeros(len(grid), dtype=bool)
    # carry the latest quote at or before grid[0]
    idx = 0
    last = None
    for k, day in enumerate(grid):
        while idx < len(series.dates) and series.dates[idx] <= day:
            last = series.levels[idx]
            idx += 1
        if last is None:
            raise MarketDataError(f"no level available on or before {day.isoformat()} to fill from")
        levels[k] = last
        present[k] = day in quoted
    return levels, present


def align_and_backfill(spx: PriceSeries, vix: PriceSeries) -> AlignedPanel:
    """Align both series on the weekday grid of their common date range.

    A weekday missing from either series is a holiday: both levels carry the
    previous close and the S&P500 log return is 0. The first weekday only
    supplies the base level, so the panel starts on the second weekday.
    """
    if len(spx) == 0 or len(vix) == 0:
        raise MarketDataError("both series must be non-empty")
    start = max(spx.dates[0], vix.dates[0])
    end = min(spx.dates[-1], vix.dates[-1])
    if start > end:
        raise MarketDataError("SPX and VIX date ranges do not overlap")
    grid = weekdays(start, end)
    if len(grid) < 2:
        raise MarketDataError("overlap must contain at least two weekdays")
    spx_lv, spx_ok = _fill_levels(spx, grid)
    vix_lv, vix_ok = _fill_levels(vix, grid)
    filled = ~(spx_ok & vix_ok)
    # a holiday keeps both indices flat
    for k in range(1, len(grid)):
        if filled[k]:
            spx_lv[k] = spx_lv[k - 1]
            vix_lv[k] = vix_lv[k - 1]
    rets = np.log(spx_lv[1:] / spx_lv[:-1])
    rets[filled[1:]] = 0.0
    return AlignedPanel(
        dates=tuple(grid[1:]),
        spx_level=spx_lv[1:],
        spx_log_return=rets,
        vix_level=vix_lv[1:],
        backfilled=filled[1:].copy(),
    )


def weekly_panel(panel: AlignedPanel) -> WeeklyPanel:
    """Group the panel into ISO weeks conditioned on the preceding Friday's VIX."""
    pos = {d: k for k, d in enumerate(panel.dates)}
    starts, rets, conds, cdates = [], [], [], []
    seen = set()
    for d in panel.dates:
        monday = d - dt.timedelta(days=d.weekday())
        if monday in seen:
            continue
        seen.add(monday)
        days = [monday + dt.timedelta(days=i) for i in range(5)]
        if not all(x in pos for x in days):
            continue
        prev_friday = monday - dt.timedelta(days=3)
        if prev_friday not in pos:
            continue
        starts.append(monday)
        rets.append([panel.spx_log_return[pos[x]] for x in days])
        conds.append(panel.vix_level[pos[prev_friday]])
        cdates.append(prev_friday)
    if not starts:
        raise MarketDataError("need at least two complete weeks to form one conditioned week")
    return WeeklyPanel(
        week_start=tuple(starts),
        returns=np.array(rets, dtype=float),
        condition_vix=np.array(conds, dtype=float),
        condition_date=tuple(cdates),
    )


def slice_before(panel: AlignedPanel, cutoff: dt.date) -> AlignedPanel:
    """Rows dated strictly before ``cutoff``."""
    if not panel.dates or cutoff <= panel.dates[0]:
        raise MarketDataError(f"cutoff {cutoff} is not after the first panel date")
    return panel.rows(0, panel.index_before(cutoff))


def load_panel(spx_path, vix_path, date_column: str = "date", level_column: str = "close") -> AlignedPanel:
    spx = load_csv(spx_path, date_column, level_column)
    vix = load_csv(vix_path, date_column, level_column)
    return align_and_backfill(spx, vix)


def read_panel_csv(path) -> AlignedPanel:
    """Read a panel exported by :meth:`AlignedPanel.to_csv`.

    S&P500 levels are rebuilt from the returns with a base of 1.
    """
    dates, rets, vix, flags = [], [], [], []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.DictReader(fh), start=2):
            try:
                dates.append(_parse_date(row["date"]))
                rets.append(float(row["spx_log_return"]))
                vix.append(float(row["vix_level"]))
                flags.append(bool(int(row["backfilled"])))
            except (KeyError, ValueError) as exc:
                raise MarketDataError(f"{path}: cannot parse row {lineno}: {exc}") from None
    r = np.array(rets)
    return AlignedPanel(tuple(dates), np.exp(np.cumsum(r)), r, np.array(vix), np.array(flags))
