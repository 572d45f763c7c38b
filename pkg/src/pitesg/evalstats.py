"""Summary statistics, autocorrelation and QQ pairs for generated paths.

Per-path statistics are averaged across paths and reported with one
standard deviation across paths as dispersion, next to the realized series.
"""
from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sps

from . import kernels
from .scenarios import RNG_ALGORITHM, ScenarioSet

STAT_NAMES = ("mean", "std", "pct01", "pct99", "iqr", "skewness", "kurtosis")


class EvalError(ValueError):
    pass


def summary_stats(series) -> dict:
    """Statistics of one series.

    Sample std uses ``n-1``; percentiles interpolate linearly; skewness is the
    adjusted Fisher-Pearson coefficient and ``kurtosis`` is excess kurtosis,
    both bias-corrected when ``n >= 4``. ``kurtosis_pearson`` adds 3.
    A zero-variance series reports 0 skewness and kurtosis with
    ``degenerate=True``.
    """
    x = np.asarray(series, dtype=float).reshape(-1)
    if x.size < 2:
        raise EvalError("need at least two observations")
    p01, p25, p75, p99 = np.percentile(x, [1, 25, 75, 99])
    sd = float(np.std(x, ddof=1))
    degenerate = bool(np.ptp(x) == 0)
    if degenerate:
        skew = kurt = 0.0
    else:
        unbiased = x.size >= 4
        skew = float(sps.skew(x, bias=not unbiased) if x.size >= 3 else 0.0)
        kurt = float(sps.kurtosis(x, fisher=True, bias=not unbiased))
    return {
        "mean": float(np.mean(x)),
        "std": sd,
        "pct01": float(p01),
        "pct99": float(p99),
        "iqr": float(p75 - p25),
        "skewness": skew,
        "kurtosis": kurt,
        "kurtosis_pearson": kurt + 3.0,
        "degenerate": degenerate,
    }


def acf(series, max_lag: int) -> np.ndarray:
    """Sample autocorrelation at lags ``0..max_lag`` (overall-mean centring)."""
    x = np.asarray(series, dtype=float).reshape(-1)
    if max_lag < 0 or x.size <= max_lag:
        raise EvalError(f"series of length {x.size} too short for max_lag {max_lag}")
    return np.asarray(kernels.acf(x, max_lag))


def qq_pairs(sample_a, sample_b, n_quantiles: int) -> np.ndarray:
    """Matched quantiles at probabilities ``(i - 0.5) / n_quantiles``; shape ``(n, 2)``."""
    a = np.asarray(sample_a, dtype=float).reshape(-1)
    b = np.asarray(sample_b, dtype=float).reshape(-1)
    if n_quantiles < 1 or a.size < n_quantiles or b.size < n_quantiles:
        raise EvalError("both samples need at least n_quantiles observations")
    probs = (np.arange(1, n_quantiles + 1) - 0.5) / n_quantiles
    return np.column_stack([np.quantile(a, probs), np.quantile(b, probs)])


@dataclass
class StatsReport:
    average: dict
    dispersion: dict
    realized: dict | None = None
    n_paths: int = 0
    n_degenerate: int = 0

    def rows(self):
        for name in STAT_NAMES + ("kurtosis_pearson",):
            yield name, self.average[name], self.dispersion[name], (self.realized or {}).get(name)


@dataclass
class AcfCurve:
    lags: np.ndarray
    values: np.ndarray
    squared: np.ndarray
    realized: np.ndarray | None = None
    realized_squared: np.ndarray | None = None


@dataclass
class ScenarioReport:
    stats: StatsReport
    acf: AcfCurve
    qq: np.ndarray
    header: dict = field(default_factory=dict)


def aggregate_stats(paths) -> StatsReport:
    """Average and across-path standard deviation of per-path statistics."""
    paths = np.atleast_2d(np.asarray(paths, dtype=float))
    per = [summary_stats(p) for p in paths]
    avg, disp = {}, {}
    for name in STAT_NAMES + ("kurtosis_pearson",):
        vals = np.array([s[name] for s in per])
        avg[name] = float(np.mean(vals))
        disp[name] = float(np.std(vals, ddof=1)) if vals.size > 1 else 0.0
    return StatsReport(avg, disp, None, len(per), sum(s["degenerate"] for s in per))


def average_acf(paths, max_lag: int) -> tuple[np.ndarray, np.ndarray]:
    """Mean ACF over paths, for the series and for its square (lags 1..max_lag)."""
    paths = np.atleast_2d(np.asarray(paths, dtype=float))
    a = np.mean([acf(p, max_lag)[1:] for p in paths], axis=0)
    s = np.mean([acf(p * p, max_lag)[1:] for p in paths], axis=0)
    return a, s


def scenario_report(scen: ScenarioSet, realized, n_quantiles: int = 100, max_lag: int | None = None) -> ScenarioReport:
    realized = np.asarray(realized, dtype=float).reshape(-1)
    if realized.size != scen.horizon:
        raise EvalError(f"realized length {realized.size} != scenario horizon {scen.horizon}")
    if max_lag is None:
        max_lag = min(30, scen.horizon - 1)
    st = aggregate_stats(scen.returns)
    st.realized = summary_stats(realized)
    a, s = average_acf(scen.returns, max_lag)
    ra = acf(realized, max_lag)[1:]
    rs = acf(realized * realized, max_lag)[1:]
    curve = AcfCurve(np.arange(1, max_lag + 1), a, s, ra, rs)
    q = min(n_quantiles, realized.size)
    qq = qq_pairs(realized, scen.returns.ravel(), q)
    header = {"generator": scen.generator, "seed": scen.seed, "rng": RNG_ALGORITHM}
    return ScenarioReport(st, curve, qq, header)


def _fmt(x) -> str:
    if x is None:
        return ""
    return repr(float(x))


def _header_line(header: dict) -> str:
    return "# " + " ".join(f"{k}={header[k]}" for k in sorted(header)) + "\n"


def write_report(report: ScenarioReport, out_dir, prefix: str = "") -> list[str]:
    """Write ``stats.csv``, ``acf.csv``, ``acf_squared.csv`` and ``qq.csv``."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    head = _header_line(report.header)

    def open_csv(name):
        path = os.path.join(out_dir, prefix + name)
        paths.append(path)
        fh = open(path, "w", newline="")
        fh.write(head)
        return fh, csv.writer(fh, lineterminator="\n")

    fh, w = open_csv("stats.csv")
    with fh:
        w.writerow(["statistic", "average", "dispersion", "realized"])
        for name, a, d, r in report.stats.rows():
            w.writerow([name, _fmt(a), _fmt(d), _fmt(r)])
        w.writerow(["n_paths", report.stats.n_paths, "", ""])
        w.writerow(["n_degenerate", report.stats.n_degenerate, "", ""])
    for name, gen, real in (("acf.csv", report.acf.values, report.acf.realized),
                            ("acf_squared.csv", report.acf.squared, report.acf.realized_squared)):
        fh, w = open_csv(name)
        with fh:
            w.writerow(["lag", "generated", "realized"])
            for lag, g, r in zip(report.acf.lags, gen, real if real is not None else [None] * len(gen)):
                w.writerow([int(lag), _fmt(g), _fmt(r)])
    fh, w = open_csv("qq.csv")
    with fh:
        w.writerow(["probability", "realized", "generated"])
        n = report.qq.shape[0]
        for i, (a, b) in enumerate(report.qq):
            w.writerow([_fmt((i + 0.5) / n), _fmt(a), _fmt(b)])
    return paths
