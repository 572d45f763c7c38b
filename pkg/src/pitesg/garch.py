"""GARCH(1,1) with Student-t(4) shocks, a risk-neutral VIX reconstruction and joint MLE.

Physical dynamics::

    x_t = mu + eps_t,  eps_t = w_t * sigma_t,
    sigma2_t = omega + alpha0 * eps_{t-1}^2 + beta0 * sigma2_{t-1}

Risk-neutral variance used for the VIX runs on the standardized shocks::

    sigmaQ2_t = omega_q + alpha0_q * w_{t-1}^2 + beta0_q * sigmaQ2_{t-1}

and the model VIX is ``100 * sqrt((sbar*(1-gamma) + gamma*sigmaQ2_{t+1}) * tau)``.
The gap ``d_t`` between observed and model VIX follows a Gaussian AR(1).
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, replace

import numpy as np

from . import kernels
from .marketdata import AlignedPanel
from .optim import OptimConfig, minimize
from .scenarios import ScenarioSet

TAU = 252
T_HORIZON = 22
NU = 4
T4_SCALE = math.sqrt((NU - 2) / NU)
MIN_OBS = 260

DISTS = {"t4": kernels.DIST_T4, "normal": kernels.DIST_NORMAL}


class GarchInfeasible(ValueError):
    """Parameters violate positivity or stationarity constraints."""


class GarchError(RuntimeError):
    pass


@dataclass(frozen=True)
class GarchParams:
    omega: float
    alpha0: float
    beta0: float
    omega_q: float
    alpha0_q: float
    beta0_q: float
    mu: float = 0.0
    rho: float = 0.0
    Sigma: float = 1.0
    tau: int = TAU
    T_horizon: int = T_HORIZON

    def __post_init__(self):
        for name in ("omega", "alpha0", "beta0", "omega_q", "alpha0_q", "beta0_q", "mu", "rho", "Sigma"):
            object.__setattr__(self, name, float(getattr(self, name)))

    def check_physical(self) -> None:
        if not (self.omega > 0 and self.alpha0 >= 0 and self.beta0 >= 0):
            raise GarchInfeasible("omega > 0, alpha0 >= 0, beta0 >= 0 required")
        if not self.alpha0 + self.beta0 < 1:
            raise GarchInfeasible(f"alpha0 + beta0 = {self.alpha0 + self.beta0} is not < 1")

    def check_risk_neutral(self) -> None:
        if not (self.omega_q > 0 and self.alpha0_q > 0 and 0 < self.beta0_q < 1):
            raise GarchInfeasible("risk-neutral parameters must be positive with beta0_q < 1")
        if not self.alpha0_q + self.beta0_q < 1:
            raise GarchInfeasible("alpha0_q + beta0_q must be < 1")

    def check_vix_ar(self) -> None:
        if not abs(self.rho) < 1:
            raise GarchInfeasible(f"|rho| = {abs(self.rho)} is not < 1")
        if not self.Sigma > 0:
            raise GarchInfeasible("Sigma must be positive")

    @property
    def persistence(self) -> float:
        return self.alpha0 + self.beta0

    @property
    def unconditional_variance(self) -> float:
        return self.omega / (1.0 - self.persistence)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "GarchParams":
        return cls(**{k: d[k] for k in cls.__dataclass_fields__ if k in d})


@dataclass(frozen=True)
class GarchState:
    """Filter output at time t: the next physical variance and the last squared shock.

    ``sigma2_q_next`` is the risk-neutral variance for t+1; when it is omitted
    the VIX reconstruction falls back to ``sigma2_next``.
    """

    sigma2_next: float
    last_w2: float = 0.0
    sigma2_q_next: float | None = None

    def __post_init__(self):
        if not self.sigma2_next > 0:
            raise ValueError("sigma2_next must be positive")


# -- filtering -----------------------------------------------------------------


def _residuals(params: GarchParams, returns) -> np.ndarray:
    return np.asarray(returns, dtype=float) - params.mu


def _init_variance(resid: np.ndarray, sigma2_init) -> float:
    if sigma2_init is not None:
        return float(sigma2_init)
    v = float(np.mean(resid * resid)) if resid.size else 0.0
    return v if v > 0 else 1e-12


def filter_variance(params: GarchParams, returns, sigma2_init=None) -> np.ndarray:
    """Physical conditional variances ``sigma2_1 .. sigma2_{n+1}``.

    The recursion starts at the mean squared residual unless ``sigma2_init``
    is given.
    """
    resid = _residuals(params, returns)
    return kernels.garch_filter(resid, params.omega, params.alpha0, params.beta0,
                                _init_variance(resid, sigma2_init))


def risk_neutral_unconditional(params: GarchParams) -> float:
    return (params.omega_q + params.alpha0_q) / (1.0 - params.beta0_q)


def filter_risk_neutral(params: GarchParams, returns, sigma2_init=None):
    """Return ``(sigma2, w, sigma2_q)`` with lengths ``n+1, n, n+1``.

    The risk-neutral recursion starts at its unconditional variance.
    """
    resid = _residuals(params, returns)
    s2 = kernels.garch_filter(resid, params.omega, params.alpha0, params.beta0,
                              _init_variance(resid, sigma2_init))
    w = resid / np.sqrt(s2[:-1])
    s2q = kernels.garch_filter(w, params.omega_q, params.alpha0_q, params.beta0_q,
                               risk_neutral_unconditional(params))
    return s2, w, s2q


def final_state(params: GarchParams, returns, sigma2_init=None) -> GarchState:
    s2, w, s2q = filter_risk_neutral(params, returns, sigma2_init)
    last_w2 = float(w[-1] ** 2) if w.size else 0.0
    return GarchState(float(s2[-1]), last_w2, float(s2q[-1]))


# -- likelihoods ---------------------------------------------------------------


def loglik_returns(params: GarchParams, returns, dist: str = "t4", sigma2_init=None) -> float:
    """Sum of conditional log densities of the returns.

    ``dist="t4"`` uses the unit-variance Student-t with 4 degrees of freedom,
    ``dist="normal"`` the Gaussian. Raises :class:`GarchInfeasible` outside
    the stationary region.
    """
    params.check_physical()
    resid = _residuals(params, returns)
    total, _ = kernels.garch_loglik(resid, params.omega, params.alpha0, params.beta0,
                                    _init_variance(resid, sigma2_init), DISTS[dist])
    return float(total)


def loglik_returns_t4(params: GarchParams, returns, sigma2_init=None) -> float:
    return loglik_returns(params, returns, "t4", sigma2_init)


def loglik_returns_normal(params: GarchParams, returns, sigma2_init=None) -> float:
    return loglik_returns(params, returns, "normal", sigma2_init)


def loglik_returns_terms(params: GarchParams, returns, dist: str = "t4", sigma2_init=None) -> np.ndarray:
    """Per-observation log densities (vectorised, for diagnostics)."""
    params.check_physical()
    resid = _residuals(params, returns)
    s2 = filter_variance(params, returns, sigma2_init)[:-1]
    e2 = resid * resid
    if dist == "normal":
        return -0.5 * (kernels.LOG_2PI + np.log(s2) + e2 / s2)
    return kernels.T4_CONST - 0.5 * np.log(2 * np.pi * s2) - 2.5 * np.log1p(e2 / (2 * s2))


def _gamma(params: GarchParams) -> float:
    b = params.beta0_q
    T = params.T_horizon
    if not 0 <= b < 1:
        raise GarchInfeasible("beta0_q must lie in [0, 1) for the VIX term structure")
    return (1.0 - b ** T) / (T * (1.0 - b))


def vix_from_variance(params: GarchParams, sigma2_q_next) -> np.ndarray:
    """Model VIX for an array of next-day risk-neutral variances."""
    g = _gamma(params)
    sbar = risk_neutral_unconditional(params)
    inner = (sbar * (1.0 - g) + g * np.asarray(sigma2_q_next, dtype=float)) * params.tau
    return 100.0 * np.sqrt(inner)


def vix_model(params: GarchParams, state: GarchState) -> float:
    s2 = state.sigma2_q_next if state.sigma2_q_next is not None else state.sigma2_next
    return float(vix_from_variance(params, s2))


def model_vix_series(params: GarchParams, returns, sigma2_init=None) -> np.ndarray:
    """Model VIX on each date, using the variance for the following day."""
    _, _, s2q = filter_risk_neutral(params, returns, sigma2_init)
    return vix_from_variance(params, s2q[1:])


def loglik_vix(params: GarchParams, observed_vix, model_vix, form: str = "exact") -> float:
    """Gaussian AR(1) log-likelihood of ``d_t = observed - model``.

    ``form="exact"`` is the standard exact likelihood: ``d_1`` has the
    stationary variance ``Sigma`` and innovations have ``Sigma*(1-rho^2)``.
    ``form="printed"`` keeps the same normalising constants but drops
    ``Sigma`` from both quadratic terms; the two agree at ``Sigma = 1``.
    """
    params.check_vix_ar()
    obs = np.asarray(observed_vix, dtype=float)
    mod = np.asarray(model_vix, dtype=float)
    if obs.shape != mod.shape:
        raise ValueError("observed and model VIX series differ in length")
    d = obs - mod
    if form == "exact":
        return float(kernels.ar1_loglik(d, params.rho, params.Sigma))
    if form != "printed":
        raise ValueError(f"unknown form {form!r}")
    n = d.size
    rho, S = params.rho, params.Sigma
    iv = S * (1 - rho * rho)
    quad = d[0] ** 2 + np.sum((d[1:] - rho * d[:-1]) ** 2) / (1 - rho * rho)
    return float(-0.5 * n * (kernels.LOG_2PI + math.log(iv)) + 0.5 * (math.log(iv) - math.log(S)) - 0.5 * quad)


def loglik_joint(params: GarchParams, returns, observed_vix, dist: str = "t4",
                 sigma2_init=None, vix_form: str = "exact") -> float:
    params.check_physical()
    params.check_risk_neutral()
    ll_r = loglik_returns(params, returns, dist, sigma2_init)
    mv = model_vix_series(params, returns, sigma2_init)
    return ll_r + loglik_vix(params, observed_vix, mv, vix_form)


# -- fitting -------------------------------------------------------------------

_RESTART_BOX_PHYS = [(0.001, 0.3), (0.01, 0.3), (0.5, 0.98)]
_RESTART_BOX_Q = [(0.001, 0.2), (0.001, 0.2), (0.5, 0.98)]
_RESTART_BOX_AR = [(0.0, 0.99), (0.2, 5.0)]


def _check_length(n: int) -> None:
    if n < MIN_OBS:
        raise GarchError(f"need at least {MIN_OBS} observations to fit, got {n}")


def fit_returns(returns, config: OptimConfig = OptimConfig(), dist: str = "t4",
                return_result: bool = False):
    """Fit the physical parameters from returns alone (no VIX term).

    The risk-neutral parameters of the result copy the physical ones.
    """
    x = np.asarray(returns, dtype=float)
    _check_length(x.size)
    mu = float(x.mean())
    v = float(x.var())
    resid = x - mu
    code = DISTS[dist]

    def unpack(theta):
        om, a, b = theta
        return GarchParams(om * v, a, b, om * v, a, b, mu=mu)

    def objective(theta):
        om, a, b = theta
        if not (om > 0 and a >= 0 and b >= 0 and a + b < 1):
            return config.penalty_value
        total, _ = kernels.garch_loglik(resid, om * v, a, b, v, code)
        return -total

    res = minimize(objective, [0.05, 0.1, 0.85], config, bounds=_RESTART_BOX_PHYS)
    params = unpack(res.x)
    return (params, res) if return_result else params


def fit_joint(panel: AlignedPanel, config: OptimConfig = OptimConfig(), risk_neutral: str = "free",
              dist: str = "t4", vix_form: str = "exact", return_result: bool = False):
    """Maximise return plus VIX log-likelihood over all parameters.

    ``risk_neutral="free"`` estimates separate risk-neutral parameters;
    ``"tied"`` sets them equal to the physical ones. ``mu`` is the sample
    mean and stays fixed. Internally the variance intercepts are scaled by
    the sample return variance and by the VIX-implied daily variance so the
    simplex works on comparable magnitudes.
    """
    if risk_neutral not in ("free", "tied"):
        raise ValueError("risk_neutral must be 'free' or 'tied'")
    x = np.asarray(panel.spx_log_return, dtype=float)
    obs = np.asarray(panel.vix_level, dtype=float)
    _check_length(x.size)
    mu = float(x.mean())
    resid = x - mu
    v = float(np.mean(resid * resid))
    s_q = float(np.mean((obs / 100.0) ** 2 / TAU))
    code = DISTS[dist]
    pen = config.penalty_value

    def build(theta, sigma_scale):
        if risk_neutral == "free":
            om, a, b, oq, aq, bq, rho, sg = theta
            return GarchParams(om * v, a, b, oq * s_q, aq * s_q, bq, mu, rho, sg * sigma_scale)
        om, a, b, rho, sg = theta
        return GarchParams(om * v, a, b, om * v, a, b, mu, rho, sg * sigma_scale)

    def feasible(p: GarchParams) -> bool:
        try:
            p.check_physical()
            p.check_risk_neutral()
            p.check_vix_ar()
        except GarchInfeasible:
            return False
        return True

    def objective_with(sigma_scale):
        def objective(theta):
            p = build(theta, sigma_scale)
            if not feasible(p):
                return pen
            total, _ = kernels.garch_loglik(resid, p.omega, p.alpha0, p.beta0, v, code)
            s2 = kernels.garch_filter(resid, p.omega, p.alpha0, p.beta0, v)
            w = resid / np.sqrt(s2[:-1])
            s2q = kernels.garch_filter(w, p.omega_q, p.alpha0_q, p.beta0_q, risk_neutral_unconditional(p))
            d = obs - vix_from_variance(p, s2q[1:])
            if vix_form == "exact":
                ll_v = kernels.ar1_loglik(d, p.rho, p.Sigma)
            else:
                ll_v = loglik_vix(p, obs, obs - d, vix_form)
            return -(total + ll_v)
        return objective

    if risk_neutral == "free":
        theta0 = [0.05, 0.1, 0.85, 0.05, 0.05, 0.9, 0.9, 1.0]
        box = _RESTART_BOX_PHYS + _RESTART_BOX_Q + _RESTART_BOX_AR
    else:
        theta0 = [0.05, 0.1, 0.85, 0.9, 1.0]
        box = _RESTART_BOX_PHYS + _RESTART_BOX_AR
    # Sigma is scaled by the variance of the VIX gap at the starting point
    p0 = build(theta0, 1.0)
    s2 = kernels.garch_filter(resid, p0.omega, p0.alpha0, p0.beta0, v)
    w = resid / np.sqrt(s2[:-1])
    s2q = kernels.garch_filter(w, p0.omega_q, p0.alpha0_q, p0.beta0_q, risk_neutral_unconditional(p0))
    d0 = obs - vix_from_variance(p0, s2q[1:])
    sigma_scale = float(np.var(d0)) if np.var(d0) > 0 else 1.0

    res = minimize(objective_with(sigma_scale), theta0, config, bounds=box)
    if res.fun >= pen:
        raise GarchError("no feasible parameter vector found")
    params = build(res.x, sigma_scale)
    return (params, res) if return_result else params


# -- forecasting and simulation ------------------------------------------------


def forecast_variance(params: GarchParams, state: GarchState, k: int) -> float:
    """Expected variance k days ahead given ``sigma2_{t+1}``.

    ``omega * sum_{i=0}^{k-2} p^i + p^(k-1) * sigma2_{t+1}`` with
    ``p = alpha0 + beta0``; k=1 returns ``sigma2_{t+1}``.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    p = params.persistence
    if k == 1:
        return float(state.sigma2_next)
    geom = (1.0 - p ** (k - 1)) / (1.0 - p) if p != 1 else float(k - 1)
    return float(params.omega * geom + p ** (k - 1) * state.sigma2_next)


def draw_shocks(rng: np.random.Generator, shape, dist: str = "t4") -> np.ndarray:
    """Unit-variance shocks."""
    if dist == "normal":
        return rng.standard_normal(shape)
    return rng.standard_t(NU, size=shape) * T4_SCALE


def simulate_paths(params: GarchParams, state: GarchState, horizon: int, n_paths: int,
                   seed: int, dist: str = "t4") -> ScenarioSet:
    """Iterate the physical recursion from ``state`` with i.i.d. unit-variance shocks."""
    if horizon < 1 or n_paths < 1:
        raise ValueError("horizon and n_paths must be >= 1")
    rng = np.random.default_rng(seed)
    w = draw_shocks(rng, (n_paths, horizon), dist)
    ret, _ = kernels.garch_simulate(w, params.mu, params.omega, params.alpha0, params.beta0,
                                    state.sigma2_next)
    return ScenarioSet(ret, generator="garch", seed=seed)


# -- checkpoint ----------------------------------------------------------------


def save_params(params: GarchParams, path, extra: dict | None = None) -> None:
    doc = {"model": "garch", "params": params.to_dict()}
    if extra:
        doc.update(extra)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_params(path) -> GarchParams:
    with open(path) as fh:
        doc = json.load(fh)
    return GarchParams.from_dict(doc["params"])


def with_q_tied(params: GarchParams) -> GarchParams:
    return replace(params, omega_q=params.omega, alpha0_q=params.alpha0, beta0_q=params.beta0)
