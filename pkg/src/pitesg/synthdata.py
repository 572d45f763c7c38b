"""Toy datasets: a Gaussian mixture and a GARCH(1,1) path with Gaussian shocks."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels

RNG_ALGORITHM = "numpy.PCG64"


@dataclass(frozen=True)
class MixtureSpec:
    """Components are ``(weight, mean, standard deviation)`` triples."""

    components: tuple[tuple[float, float, float], ...]
    seed: int = 0

    def __post_init__(self):
        if not self.components:
            raise ValueError("mixture needs at least one component")
        weights = np.array([c[0] for c in self.components], dtype=float)
        if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-12:
            raise ValueError("mixture weights must be non-negative and sum to 1")
        if any(c[2] <= 0 for c in self.components):
            raise ValueError("component spreads must be positive")

    def mean(self) -> float:
        return float(sum(w * m for w, m, _ in self.components))

    def variance(self) -> float:
        second = sum(w * (s * s + m * m) for w, m, s in self.components)
        return float(second - self.mean() ** 2)

    def cdf(self, x):
        from scipy.stats import norm

        x = np.asarray(x, dtype=float)
        return sum(w * norm.cdf(x, loc=m, scale=s) for w, m, s in self.components)


TOY_MIXTURE = MixtureSpec(((0.5, 0.0, 1.0), (0.5, 5.0, 2.0)))


@dataclass(frozen=True)
class GarchSimSpec:
    omega: float
    alpha: float
    beta: float
    n_steps: int
    seed: int = 0

    def __post_init__(self):
        if self.omega <= 0 or self.alpha < 0 or self.beta < 0:
            raise ValueError("omega must be positive, alpha and beta non-negative")
        if self.alpha + self.beta >= 1:
            raise ValueError("alpha + beta must be < 1 for stationarity")
        if self.n_steps < 1:
            raise ValueError("n_steps must be >= 1")


def sample_mixture(spec: MixtureSpec, n: int) -> np.ndarray:
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(spec.seed)
    weights = np.array([c[0] for c in spec.components])
    means = np.array([c[1] for c in spec.components])
    stds = np.array([c[2] for c in spec.components])
    which = rng.choice(len(weights), size=n, p=weights)
    return means[which] + stds[which] * rng.standard_normal(n)


def simulate_garch_path(spec: GarchSimSpec) -> tuple[np.ndarray, np.ndarray]:
    """Simulate ``(returns, sigma2)`` starting from zero shock and zero variance.

    The first step therefore has variance exactly ``omega``. No burn-in is
    discarded.
    """
    rng = np.random.default_rng(spec.seed)
    w = rng.standard_normal((1, spec.n_steps))
    ret, var = kernels.garch_simulate(w, 0.0, spec.omega, spec.alpha, spec.beta, spec.omega)
    return ret[0], var[0]


def synthetic_market(start, end, seed: int = 0, holiday_rate: float = 0.02):
    """Stand-in S&P500/VIX close series for demos and end-to-end tests.

    Log VIX follows a mean-reverting AR(1) around 20 and each day's return is
    Gaussian with the variance implied by the previous day's VIX. A random
    ``holiday_rate`` share of weekdays is removed from both series, plus a few
    from only one of them.

    Returns ``(spx, vix)`` as :class:`~pitesg.marketdata.PriceSeries`.
    """
    from .marketdata import PriceSeries, weekdays

    rng = np.random.default_rng(seed)
    days = weekdays(start, end)
    n = len(days)
    log_vix = np.empty(n)
    log_vix[0] = np.log(20.0)
    for t in range(1, n):
        log_vix[t] = np.log(20.0) + 0.98 * (log_vix[t - 1] - np.log(20.0)) + 0.07 * rng.standard_normal()
    vix = np.exp(log_vix)
    daily_sd = vix / 100.0 / np.sqrt(252.0)
    rets = np.zeros(n)
    rets[1:] = 0.0002 + daily_sd[:-1] * rng.standard_normal(n - 1)
    spx = 1000.0 * np.exp(np.cumsum(rets))
    drop_both = rng.random(n) < holiday_rate
    drop_spx = rng.random(n) < holiday_rate / 4
    drop_vix = rng.random(n) < holiday_rate / 4
    drop_both[0] = drop_spx[0] = drop_vix[0] = False
    keep_spx = ~(drop_both | drop_spx)
    keep_vix = ~(drop_both | drop_vix)
    d = np.array(days, dtype=object)
    return (
        PriceSeries(tuple(d[keep_spx]), spx[keep_spx]),
        PriceSeries(tuple(d[keep_vix]), vix[keep_vix]),
    )
