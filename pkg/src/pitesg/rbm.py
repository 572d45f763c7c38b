"""Bernoulli restricted Boltzmann machine.

Energy ``E(v, h) = -b.v - c.h - v.W.h`` with ``W`` of shape ``(m, n)``.
Training is k-step contrastive divergence; conditional generation clamps a
block of visible units (the VIX bits) after every visible update.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from . import kernels
from .marketdata import WeeklyPanel
from .scenarios import ScenarioSet
from .transforms import (
    N_BITS,
    VIX_CODEC,
    BinaryCodec,
    binarize,
    debinarize,
    discretize_vix,
)


class RbmError(ValueError):
    pass


@dataclass
class RbmParams:
    W: np.ndarray
    b: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        self.W = np.ascontiguousarray(self.W, dtype=float)
        self.b = np.ascontiguousarray(self.b, dtype=float).reshape(-1)
        self.c = np.ascontiguousarray(self.c, dtype=float).reshape(-1)
        if self.W.shape != (self.b.size, self.c.size):
            raise RbmError(f"W shape {self.W.shape} does not match biases ({self.b.size}, {self.c.size})")
        if not (np.all(np.isfinite(self.W)) and np.all(np.isfinite(self.b)) and np.all(np.isfinite(self.c))):
            raise RbmError("non-finite parameters")

    @property
    def m(self) -> int:
        return self.b.size

    @property
    def n(self) -> int:
        return self.c.size

    @classmethod
    def zeros(cls, m: int, n: int) -> "RbmParams":
        return cls(np.zeros((m, n)), np.zeros(m), np.zeros(n))

    @classmethod
    def init(cls, m: int, n: int, seed: int = 0, scale: float = 0.01) -> "RbmParams":
        """Small Gaussian weights, zero biases."""
        rng = np.random.default_rng(seed)
        return cls(scale * rng.standard_normal((m, n)), np.zeros(m), np.zeros(n))

    def copy(self) -> "RbmParams":
        return RbmParams(self.W.copy(), self.b.copy(), self.c.copy())

    def to_dict(self) -> dict:
        return {"m": self.m, "n": self.n, "W": self.W.ravel().tolist(), "b": self.b.tolist(), "c": self.c.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "RbmParams":
        m, n = int(d["m"]), int(d["n"])
        return cls(np.array(d["W"], dtype=float).reshape(m, n), np.array(d["b"]), np.array(d["c"]))


@dataclass(frozen=True)
class CdConfig:
    k: int = 5
    learning_rate: float = 1e-4
    epochs: int = 50_000
    batch_size: int = 50
    gibbs_steps_sampling: int = 800
    seed: int = 0
    optimizer: str = "adam"

    def __post_init__(self):
        if self.k < 1 or self.gibbs_steps_sampling < 1:
            raise RbmError("k and gibbs_steps_sampling must be >= 1")
        if self.batch_size < 1 or self.epochs < 0:
            raise RbmError("batch_size must be >= 1 and epochs >= 0")
        if self.optimizer not in ("adam", "sgd"):
            raise RbmError("optimizer must be 'adam' or 'sgd'")


def _binary(x, width: int, what: str) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != width:
        raise RbmError(f"{what} has {x.shape[-1]} units, expected {width}")
    if np.any((x != 0) & (x != 1)):
        raise RbmError(f"{what} must be binary")
    return x


def sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(x, dtype=float)))


def energy(params: RbmParams, v, h) -> float | np.ndarray:
    v = _binary(v, params.m, "v")
    h = _binary(h, params.n, "h")
    return -(v @ params.b) - (h @ params.c) - np.sum((v @ params.W) * h, axis=-1)


def cond_prob_hidden(params: RbmParams, v) -> np.ndarray:
    v = _binary(v, params.m, "v")
    return sigmoid(params.c + v @ params.W)


def cond_prob_visible(params: RbmParams, h) -> np.ndarray:
    h = _binary(h, params.n, "h")
    return sigmoid(params.b + h @ params.W.T)


def free_energy(params: RbmParams, v) -> float | np.ndarray:
    """``-log sum_h exp(-E(v, h))``."""
    v = _binary(v, params.m, "v")
    return -(v @ params.b) - np.sum(np.logaddexp(0.0, params.c + v @ params.W), axis=-1)


def _bernoulli(rng: np.random.Generator, p: np.ndarray) -> np.ndarray:
    return (rng.random(p.shape) < p).astype(float)


# -- exact quantities for small machines ----------------------------------------


def all_states(width: int) -> np.ndarray:
    return np.array(list(itertools.product((0.0, 1.0), repeat=width)))


def log_partition(params: RbmParams) -> float:
    """Exact ``log Z`` by enumerating the visible layer (up to 20 visible units)."""
    if params.m > 20:
        raise RbmError("exact partition function limited to 20 visible units")
    from scipy.special import logsumexp

    return float(logsumexp(-free_energy(params, all_states(params.m))))


def exact_loglik(params: RbmParams, data) -> float:
    """Mean exact log-likelihood of binary rows."""
    return float(np.mean(-free_energy(params, data)) - log_partition(params))


def joint_distribution(params: RbmParams) -> np.ndarray:
    """Probabilities of all ``(v, h)`` configurations, ``v`` major, big-endian order."""
    vs = all_states(params.m)
    hs = all_states(params.n)
    e = -(vs @ params.b)[:, None] - (hs @ params.c)[None, :] - vs @ params.W @ hs.T
    logp = -e
    logp -= logp.max()
    p = np.exp(logp)
    return (p / p.sum()).ravel()


def visible_distribution(params: RbmParams) -> np.ndarray:
    logp = -free_energy(params, all_states(params.m))
    p = np.exp(logp - logp.max())
    return p / p.sum()


# -- training -------------------------------------------------------------------


@dataclass
class CdLog:
    epoch: list = field(default_factory=list)
    reconstruction_error: list = field(default_factory=list)

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("epoch,reconstruction_error\n")
            for e, r in zip(self.epoch, self.reconstruction_error):
                fh.write(f"{e},{r!r}\n")


def cd_gradients(params: RbmParams, v0: np.ndarray, k: int, rng: np.random.Generator):
    """Contrastive-divergence estimates of the log-likelihood gradient.

    The chain uses sampled binary states; the statistics use hidden
    probabilities. Returns ``(dW, db, dc, v_k)`` averaged over rows.
    """
    ph0 = sigmoid(params.c + v0 @ params.W)
    h = _bernoulli(rng, ph0)
    vk = v0
    for step in range(k):
        vk = _bernoulli(rng, sigmoid(params.b + h @ params.W.T))
        phk = sigmoid(params.c + vk @ params.W)
        if step < k - 1:
            h = _bernoulli(rng, phk)
    B = v0.shape[0]
    dW = (v0.T @ ph0 - vk.T @ phk) / B
    db = (v0 - vk).mean(axis=0)
    dc = (ph0 - phk).mean(axis=0)
    return dW, db, dc, vk


def cd_k_train(params: RbmParams, data, config: CdConfig, log_every: int = 0,
               callback=None) -> tuple[RbmParams, CdLog]:
    """Train a copy of ``params`` by CD-k; one epoch is one pass over ``data`` in mini-batches.

    ``callback(epoch, params)`` runs after each epoch when given.
    """
    data = _binary(data, params.m, "data")
    if data.ndim != 2 or data.shape[0] == 0:
        raise RbmError("training data is empty")
    p = params.copy()
    rng = np.random.default_rng(config.seed)
    N = data.shape[0]
    arrays = [p.W, p.b, p.c]
    ms = [np.zeros_like(a) for a in arrays]
    vs = [np.zeros_like(a) for a in arrays]
    step = 0
    log = CdLog()
    lr = config.learning_rate
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(N) if config.batch_size < N else np.arange(N)
        err = 0.0
        for start in range(0, N, config.batch_size):
            v0 = data[order[start:start + config.batch_size]]
            dW, db, dc, vk = cd_gradients(p, v0, config.k, rng)
            if log_every:
                err += float(np.sum((v0 - vk) ** 2))
            if lr == 0:
                continue
            if config.optimizer == "sgd":
                p.W += lr * dW
                p.b += lr * db
                p.c += lr * dc
            else:
                step += 1
                kernels.numpy_impl.adam_update(arrays, [-dW, -db, -dc], ms, vs, lr, 0.9, 0.999, 1e-8, step)
        if log_every and (epoch % log_every == 0 or epoch == config.epochs):
            log.epoch.append(epoch)
            log.reconstruction_error.append(err / N)
        if callback is not None:
            callback(epoch, p)
    if not (np.all(np.isfinite(p.W)) and np.all(np.isfinite(p.b)) and np.all(np.isfinite(p.c))):
        raise RbmError("training diverged to non-finite parameters")
    return p, log


# -- sampling -------------------------------------------------------------------


def gibbs_chain(params: RbmParams, v: np.ndarray, steps: int, rng: np.random.Generator,
                clamp_index=None, clamp_values=None) -> np.ndarray:
    """Run ``steps`` block-Gibbs alternations (h then v) from visible states ``v``.

    If ``clamp_index`` is given, those visible units are reset to
    ``clamp_values`` after every visible update.
    """
    v = np.array(v, dtype=float)
    if clamp_index is not None:
        v[:, clamp_index] = clamp_values
    for _ in range(steps):
        h = _bernoulli(rng, sigmoid(params.c + v @ params.W))
        v = _bernoulli(rng, sigmoid(params.b + h @ params.W.T))
        if clamp_index is not None:
            v[:, clamp_index] = clamp_values
    return v


def sample(params: RbmParams, n_samples: int, steps: int, seed: int) -> np.ndarray:
    """Unconditional samples: independent chains from uniform random visible noise."""
    rng = np.random.default_rng(seed)
    v0 = (rng.random((n_samples, params.m)) < 0.5).astype(float)
    return gibbs_chain(params, v0, steps, rng)


def sample_conditional(params: RbmParams, condition_bits, n_samples: int, config: CdConfig,
                       seed: int | None = None, clamp_index=None) -> np.ndarray:
    """Chains started from random noise with the condition units clamped.

    ``clamp_index`` defaults to the last ``len(condition_bits)`` visible units.
    """
    bits = np.asarray(condition_bits, dtype=float).reshape(-1)
    if np.any((bits != 0) & (bits != 1)):
        raise RbmError("condition bits must be binary")
    if clamp_index is None:
        clamp_index = np.arange(params.m - bits.size, params.m)
    rng = np.random.default_rng(config.seed if seed is None else seed)
    v0 = (rng.random((n_samples, params.m)) < 0.5).astype(float)
    return gibbs_chain(params, v0, config.gibbs_steps_sampling, rng, clamp_index, bits)


# -- weekly generator -------------------------------------------------------------


def vix_bits(vix: float) -> np.ndarray:
    """Discretised VIX encoded on the fixed [10, 40] codec."""
    return binarize(VIX_CODEC, float(discretize_vix(vix)))


@dataclass
class RbmWeeklyModel:
    """RBM over five daily returns (16 bits each) followed by 16 VIX bits."""

    params: RbmParams
    codec: BinaryCodec
    days: int = 5
    config: CdConfig = field(default_factory=CdConfig)

    @property
    def return_units(self) -> int:
        return self.days * N_BITS

    def encode(self, returns, cond_vix) -> np.ndarray:
        r = np.asarray(returns, dtype=float)
        rb = binarize(self.codec, r).reshape(r.shape[0], -1)
        vb = np.array([vix_bits(v) for v in np.asarray(cond_vix, dtype=float)])
        return np.hstack([rb, vb]).astype(float)

    def decode_returns(self, visible) -> np.ndarray:
        v = np.asarray(visible)[:, : self.return_units].astype(np.int64)
        return debinarize(self.codec, v.reshape(v.shape[0], self.days, N_BITS))

    @classmethod
    def fit(cls, panel: WeeklyPanel, config: CdConfig, n_hidden: int = 32, epsilon: float | None = None,
            log_every: int = 0):
        days = panel.returns.shape[1]
        codec = BinaryCodec.fit(panel.returns, epsilon)
        m = days * N_BITS + N_BITS
        model = cls(RbmParams.init(m, n_hidden, config.seed), codec, days, config)
        data = model.encode(panel.returns, panel.condition_vix)
        model.params, log = cd_k_train(model.params, data, config, log_every=log_every)
        return model, log

    def generate(self, condition_vix: float, n_weeks: int, seed: int) -> ScenarioSet:
        vis = sample_conditional(self.params, vix_bits(condition_vix), n_weeks, self.config, seed,
                                 clamp_index=np.arange(self.return_units, self.params.m))
        return ScenarioSet(self.decode_returns(vis), condition_vix=float(condition_vix), generator="rbm", seed=seed)

    def to_dict(self) -> dict:
        return {
            "model": "rbm",
            "days": self.days,
            "params": self.params.to_dict(),
            "codec": self.codec.to_dict(),
            "vix_codec": VIX_CODEC.to_dict(),
            "config": asdict(self.config),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RbmWeeklyModel":
        return cls(RbmParams.from_dict(d["params"]), BinaryCodec.from_dict(d["codec"]), int(d["days"]),
                   CdConfig(**d["config"]))

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "RbmWeeklyModel":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))
