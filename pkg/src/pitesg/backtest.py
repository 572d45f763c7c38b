"""Stop-loss backtest driven by generator forecasts.

For each start Monday the generator is fitted on data strictly before it.
Every week a fresh five-day forecast, conditioned on the preceding Friday's
VIX, decides whether to hold the index (1) or stay in cash (0). The position
is entered at the start Monday's close, closed at the Friday before the
first failing week, and never re-entered.
"""
from __future__ import annotations

import csv
import datetime as dt
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from .generators import Generator, derived_seed
from .marketdata import AlignedPanel, slice_before

log = logging.getLogger(__name__)

CRISIS_WINDOW = (dt.date(2007, 1, 1), dt.date(2009, 12, 31))
CALM_WINDOWS = ((dt.date(2003, 1, 1), dt.date(2006, 12, 31)), (dt.date(2010, 1, 1), None))


class LookAheadError(AssertionError):
    """A forecast consumed information dated at or after its decision date."""


@dataclass(frozen=True)
class StrategyConfig:
    L: int = 260
    L_star: int = 260
    H: int = 5
    a_high_vol: float = 0.5
    a_low_vol: float = 3.0
    backtest_weeks: int = 13
    n_paths: int = 500
    seed: int = 0

    def __post_init__(self):
        if min(self.L, self.L_star, self.H, self.backtest_weeks, self.n_paths) < 1:
            raise ValueError("L, L_star, H, backtest_weeks and n_paths must be >= 1")
        if not self.a_high_vol < self.a_low_vol:
            raise ValueError("a_high_vol must be smaller than a_low_vol")


@dataclass(frozen=True)
class StartDatePlan:
    dates: tuple[dt.date, ...]
    seed: int = 0


def tightness(forecast_std: float, hist_std_Lstar: float, config: StrategyConfig = StrategyConfig()) -> float:
    """Loose stop (``a_high_vol``) when the forecast is at least as volatile as history."""
    if hist_std_Lstar < 0:
        raise ValueError("historical std must be non-negative")
    return config.a_high_vol if forecast_std >= hist_std_Lstar else config.a_low_vol


def allocation(forecast_mean: float, trailing_mean_L: float, trailing_std_L: float, a: float) -> int:
    if trailing_std_L < 0:
        raise ValueError("trailing std must be non-negative")
    return int(forecast_mean >= trailing_mean_L - a * trailing_std_L)


def max_drawdown(values) -> float:
    """Most negative ``(value - running peak) / running peak``; 0 for a rising series."""
    v = np.asarray(values, dtype=float).reshape(-1)
    if v.size == 0:
        raise ValueError("empty value series")
    if np.any(v <= 0):
        raise ValueError("portfolio values must be positive")
    peak = np.maximum.accumulate(v)
    return float(min(0.0, np.min((v - peak) / peak)))


def sharpe_ratio(mean: float, std: float) -> float:
    """Mean over standard deviation with a zero risk-free rate."""
    if std <= 0:
        raise ValueError("std must be positive")
    return float(mean / std)


# -- start dates ------------------------------------------------------------------


def eligible_starts(panel: AlignedPanel, config: StrategyConfig) -> list[dt.date]:
    """Mondays with ``L`` prior rows and every backtest Friday inside the panel."""
    need = max(config.L, config.L_star)
    last = panel.dates[-1]
    out = []
    for k, d in enumerate(panel.dates):
        if d.weekday() != 0 or k < need:
            continue
        final_friday = d + dt.timedelta(weeks=config.backtest_weeks - 1, days=4)
        if final_friday <= last:
            out.append(d)
    return out


def _in(d: dt.date, lo: dt.date, hi: dt.date | None) -> bool:
    return lo <= d and (hi is None or d <= hi)


def build_start_plan(panel: AlignedPanel, config: StrategyConfig, n_crisis: int = 100, n_calm: int = 100,
                     seed: int = 0, crisis=CRISIS_WINDOW, calm=CALM_WINDOWS) -> StartDatePlan:
    """Draw start Mondays without replacement from a crisis window and from calm windows.

    When a group has fewer eligible dates than requested, all of them are used.
    If neither window contains an eligible date, the draw falls back to all
    eligible dates.
    """
    elig = eligible_starts(panel, config)
    if not elig:
        raise ValueError("no eligible start dates: panel too short for the look-back and backtest length")
    rng = np.random.default_rng(seed)
    crisis_pool = [d for d in elig if _in(d, *crisis)]
    calm_pool = [d for d in elig if any(_in(d, lo, hi) for lo, hi in calm)]
    if not crisis_pool and not calm_pool:
        calm_pool = elig

    def draw(pool, k):
        if k <= 0 or not pool:
            return []
        if k >= len(pool):
            return list(pool)
        idx = rng.choice(len(pool), size=k, replace=False)
        return [pool[i] for i in sorted(idx)]

    picked = sorted(set(draw(crisis_pool, n_crisis)) | set(draw(calm_pool, n_calm)))
    return StartDatePlan(tuple(picked), seed)


# -- running ----------------------------------------------------------------------


@dataclass
class DateResult:
    start_date: dt.date
    pnl: float
    weeks_held: int
    entered: bool
    max_drawdown: float
    allocations: list
    buy_and_hold: float
    buy_and_hold_drawdown: float
    audit: list = field(default_factory=list)


def _finite_or_none(x):
    return x if np.isfinite(x) else None


@dataclass
class BacktestReport:
    results: list
    skipped: list
    mean: float
    std: float
    sharpe: float
    max_drawdown: float
    n_entered: int
    benchmark: dict

    def summary(self) -> dict:
        return {
            "mean": self.mean, "std": self.std, "sharpe": _finite_or_none(self.sharpe), "max_drawdown": self.max_drawdown,
            "n_entered": self.n_entered, "n_dates": len(self.results),
            "skipped": [d.isoformat() for d in self.skipped], "buy_and_hold": {k: _finite_or_none(v) for k, v in self.benchmark.items()},
        }

    def write(self, out_dir, prefix: str = "") -> list[str]:
        os.makedirs(out_dir, exist_ok=True)
        pnl_path = os.path.join(out_dir, prefix + "backtest_pnl.csv")
        with open(pnl_path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["start_date", "pnl", "weeks_held", "max_drawdown", "buy_and_hold", "allocations"])
            for r in self.results:
                w.writerow([r.start_date.isoformat(), repr(r.pnl), r.weeks_held, repr(r.max_drawdown),
                            repr(r.buy_and_hold), "".join(map(str, r.allocations))])
        summary_path = os.path.join(out_dir, prefix + "backtest_summary.json")
        with open(summary_path, "w") as fh:
            json.dump(self.summary(), fh, indent=2, sort_keys=True)
            fh.write("\n")
        return [pnl_path, summary_path]


def _stats(pnls, drawdowns) -> tuple[float, float, float, float]:
    p = np.asarray(pnls, dtype=float)
    mean = float(p.mean()) if p.size else 0.0
    std = float(p.std(ddof=1)) if p.size > 1 else 0.0
    sharpe = mean / std if std > 0 else float("nan")
    mdd = float(min(drawdowns)) if len(drawdowns) else 0.0
    return mean, std, sharpe, mdd


def run_single(factory: Callable[[int], Generator], panel: AlignedPanel, start: dt.date,
               config: StrategyConfig) -> DateResult:
    """Backtest one start Monday; raises :class:`LookAheadError` on any leak."""
    seed = derived_seed(config.seed, start.toordinal())
    train = slice_before(panel, start)
    gen = factory(seed)
    gen.fit(train)
    audit = [("training_end", gen.training_end)]
    if gen.training_end is None or not gen.training_end < start:
        raise LookAheadError(f"training data reaches {gen.training_end} for decision date {start}")
    k0 = panel.index_before(start)
    if panel.dates[k0] != start:
        raise ValueError(f"start {start} is not a panel date")
    held = 0
    allocations = []
    for w in range(config.backtest_weeks):
        monday = start + dt.timedelta(weeks=w)
        history = slice_before(panel, monday)
        if not history.dates[-1] < monday:
            raise LookAheadError(f"conditioning date {history.dates[-1]} not before {monday}")
        audit.append(("condition", history.dates[-1]))
        rets = history.spx_log_return
        trailing = rets[-config.L:]
        hist_std = float(np.std(rets[-config.L_star:], ddof=1))
        scen = gen.forecast(history, config.H, config.n_paths, derived_seed(seed, w + 1))
        fmean = float(scen.returns.mean())
        fstd = float(scen.returns.std(ddof=1))
        a = tightness(fstd, hist_std, config)
        s = allocation(fmean, float(trailing.mean()), float(np.std(trailing, ddof=1)), a)
        if s == 0:
            break
        held += 1
        allocations.append(1)
    allocations += [0] * (config.backtest_weeks - len(allocations))
    # returns from the day after the entry close to the exit (or final) Friday
    n_days = 5 * config.backtest_weeks - 1
    window = panel.spx_log_return[k0 + 1:k0 + 1 + n_days]
    held_days = max(0, 5 * held - 1)
    path = window[:held_days]
    value = np.exp(np.concatenate([[0.0], np.cumsum(path)]))
    bh_value = np.exp(np.concatenate([[0.0], np.cumsum(window)]))
    return DateResult(start, float(path.sum()), held, held > 0, max_drawdown(value), allocations,
                      float(window.sum()), max_drawdown(bh_value), audit)


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("PIT_ESG_THREADS", "1")))
    except ValueError:
        return 1


def run_backtest(factory: Callable[[int], Generator], panel: AlignedPanel, plan: StartDatePlan,
                 config: StrategyConfig = StrategyConfig()) -> BacktestReport:
    """Run every start date of ``plan``; ``factory(seed)`` builds an unfitted generator."""
    need = max(config.L, config.L_star)
    todo, skipped = [], []
    for d in plan.dates:
        if panel.index_before(d) < need:
            log.warning("skipping %s: fewer than %d prior observations", d, need)
            skipped.append(d)
        else:
            todo.append(d)
    n_threads = min(_threads(), max(1, len(todo)))
    if n_threads > 1:
        with ThreadPoolExecutor(n_threads) as ex:
            results = list(ex.map(lambda d: run_single(factory, panel, d, config), todo))
    else:
        results = [run_single(factory, panel, d, config) for d in todo]
    mean, std, sharpe, mdd = _stats([r.pnl for r in results], [r.max_drawdown for r in results])
    bm, bs, bsh, bmdd = _stats([r.buy_and_hold for r in results], [r.buy_and_hold_drawdown for r in results])
    bench = {"mean": bm, "std": bs, "sharpe": bsh, "max_drawdown": bmdd, "n_entered": len(results)}
    return BacktestReport(results, skipped, mean, std, sharpe, mdd, sum(r.entered for r in results), bench)


def config_dict(config: StrategyConfig) -> dict:
    return asdict(config)
