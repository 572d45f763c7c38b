"""Conditional variational autoencoder over weekly return vectors.

The encoder maps ``[x, c]`` to ``(mu, log sigma)`` of a diagonal Gaussian
posterior; the decoder maps ``[z, c]`` to a reconstruction in ``[0, 1]``.
With ``cond_dim=0`` the same class is a plain VAE.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .marketdata import WeeklyPanel
from .nn import AdamState, DenseNet, adam_step
from .scenarios import ScenarioSet
from .transforms import VIX_SCALER, MinMaxScaler, TransformError, discretize_vix, scale, unscale


class TrainingDiverged(RuntimeError):
    pass


@dataclass
class LatentSample:
    z: np.ndarray
    mu: np.ndarray
    sigma: np.ndarray
    epsilon: np.ndarray


@dataclass
class TrainLog:
    epoch_loss: list = field(default_factory=list)
    epoch_reconstruction: list = field(default_factory=list)
    epoch_kl: list = field(default_factory=list)

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("epoch,loss,reconstruction,kl\n")
            for k, (a, b, c) in enumerate(zip(self.epoch_loss, self.epoch_reconstruction, self.epoch_kl)):
                fh.write(f"{k + 1},{a!r},{b!r},{c!r}\n")


def kl_gaussian(mu, sigma) -> float:
    """KL divergence of ``N(mu, diag sigma^2)`` from the standard normal."""
    mu = np.asarray(mu, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    if np.any(sigma <= 0):
        raise ValueError("sigma must be positive")
    return float(0.5 * np.sum(mu * mu + sigma * sigma - 2.0 * np.log(sigma) - 1.0))


class CvaeModel:
    def __init__(self, encoder: DenseNet, decoder: DenseNet, latent_dim: int, cond_dim: int,
                 kl_weight: float = 1e-3, scaler: MinMaxScaler | None = None, seed: int = 0):
        x_dim = decoder.n_out
        if encoder.n_in != x_dim + cond_dim:
            raise ValueError(f"encoder input {encoder.n_in} != data {x_dim} + condition {cond_dim}")
        if encoder.n_out != 2 * latent_dim:
            raise ValueError("encoder output must hold mu and log sigma for every latent dimension")
        if decoder.n_in != latent_dim + cond_dim:
            raise ValueError(f"decoder input {decoder.n_in} != latent {latent_dim} + condition {cond_dim}")
        if decoder.activations[-1] != "sigmoid":
            raise ValueError("decoder output activation must be sigmoid")
        if kl_weight < 0:
            raise ValueError("kl_weight must be non-negative")
        self.encoder = encoder
        self.decoder = decoder
        self.latent_dim = latent_dim
        self.cond_dim = cond_dim
        self.kl_weight = float(kl_weight)
        self.scaler = scaler
        self.seed = seed

    @classmethod
    def init(cls, x_dim: int = 5, cond_dim: int = 1, latent_dim: int = 2, enc_hidden=(30,),
             dec_hidden=(30,), kl_weight: float = 1e-3, scaler: MinMaxScaler | None = None,
             seed: int = 0, hidden_activation: str = "leaky_relu") -> "CvaeModel":
        enc_sizes = [x_dim + cond_dim, *enc_hidden, 2 * latent_dim]
        dec_sizes = [latent_dim + cond_dim, *dec_hidden, x_dim]
        enc = DenseNet.init(enc_sizes, [hidden_activation] * len(enc_hidden) + ["identity"], seed=seed)
        dec = DenseNet.init(dec_sizes, [hidden_activation] * len(dec_hidden) + ["sigmoid"], seed=seed + 1)
        return cls(enc, dec, latent_dim, cond_dim, kl_weight, scaler, seed)

    @property
    def x_dim(self) -> int:
        return self.decoder.n_out

    def params(self) -> list[np.ndarray]:
        return self.encoder.params() + self.decoder.params()

    def touch(self) -> None:
        self.encoder.touch()
        self.decoder.touch()

    def to_dict(self) -> dict:
        return {
            "model": "cvae",
            "latent_dim": self.latent_dim,
            "cond_dim": self.cond_dim,
            "kl_weight": self.kl_weight,
            "seed": self.seed,
            "scaler": self.scaler.to_dict() if self.scaler else None,
            "condition_scaler": VIX_SCALER.to_dict(),
            "encoder": self.encoder.to_dict(),
            "decoder": self.decoder.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CvaeModel":
        sc = MinMaxScaler.from_dict(d["scaler"]) if d.get("scaler") else None
        return cls(DenseNet.from_dict(d["encoder"]), DenseNet.from_dict(d["decoder"]), int(d["latent_dim"]),
                   int(d["cond_dim"]), float(d["kl_weight"]), sc, d.get("seed", 0))

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "CvaeModel":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def _rows(a, width: int) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if width == 0:
        return a.reshape(-1, 0) if a.size == 0 else a.reshape(a.shape[0] if a.ndim == 2 else 1, 0)
    return a.reshape(-1, width)


def _prepare(model: CvaeModel, x, c):
    x2 = _rows(x, model.x_dim)
    if np.any(x2 < 0) or np.any(x2 > 1):
        raise TransformError("inputs must be scaled to [0, 1]")
    if model.cond_dim:
        c2 = _rows(c, model.cond_dim)
        if c2.shape[0] == 1 and x2.shape[0] > 1:
            c2 = np.repeat(c2, x2.shape[0], axis=0)
    else:
        c2 = np.zeros((x2.shape[0], 0))
    if c2.shape[0] != x2.shape[0]:
        raise ValueError("one condition row per data row required")
    return x2, c2


def _forward(model: CvaeModel, x2, c2, eps2):
    enc_out, enc_tape = model.encoder.forward(np.hstack([x2, c2]))
    L = model.latent_dim
    mu, log_sigma = enc_out[:, :L], enc_out[:, L:]
    sigma = np.exp(log_sigma)
    z = mu + sigma * eps2
    x_hat, dec_tape = model.decoder.forward(np.hstack([z, c2]))
    recon = np.mean((x_hat - x2) ** 2, axis=1)
    kl = 0.5 * np.sum(mu * mu + sigma * sigma - 2.0 * log_sigma - 1.0, axis=1)
    return mu, sigma, z, x_hat, recon, kl, enc_tape, dec_tape


def elbo_loss(model: CvaeModel, x, c=None, epsilon=None, rng: np.random.Generator | None = None):
    """Negative ELBO with one latent draw: ``MSE + kl_weight * KL``.

    ``x`` is one scaled vector or a batch of rows; the loss is averaged over
    rows. ``epsilon`` fixes the standard-normal draw; otherwise it comes from
    ``rng``. Returns ``(loss, {"reconstruction": ..., "kl": ...})``.
    """
    x2, c2 = _prepare(model, x, c)
    eps2 = _draw_eps(model, x2.shape[0], epsilon, rng)
    _, _, _, _, recon, kl, _, _ = _forward(model, x2, c2, eps2)
    r, k = float(recon.mean()), float(kl.mean())
    return r + model.kl_weight * k, {"reconstruction": r, "kl": k}


def _draw_eps(model, n, epsilon, rng):
    if epsilon is not None:
        return np.asarray(epsilon, dtype=float).reshape(n, model.latent_dim)
    if rng is None:
        raise ValueError("pass either epsilon or rng")
    return rng.standard_normal((n, model.latent_dim))


def latent_sample(model: CvaeModel, x, c=None, epsilon=None, rng=None) -> LatentSample:
    x2, c2 = _prepare(model, x, c)
    eps2 = _draw_eps(model, x2.shape[0], epsilon, rng)
    mu, sigma, z, *_ = _forward(model, x2, c2, eps2)
    return LatentSample(z, mu, sigma, eps2)


def elbo_grad(model: CvaeModel, x, c=None, epsilon=None, rng=None):
    """Loss, parts and exact gradients in :meth:`CvaeModel.params` order."""
    x2, c2 = _prepare(model, x, c)
    B = x2.shape[0]
    eps2 = _draw_eps(model, B, epsilon, rng)
    mu, sigma, z, x_hat, recon, kl, enc_tape, dec_tape = _forward(model, x2, c2, eps2)
    beta = model.kl_weight
    g_xhat = 2.0 * (x_hat - x2) / (model.x_dim * B)
    dec_grads, g_in = model.decoder.backward(dec_tape, g_xhat)
    g_z = g_in[:, : model.latent_dim]
    g_mu = g_z + beta * mu / B
    g_logsig = g_z * sigma * eps2 + beta * (sigma * sigma - 1.0) / B
    enc_grads, _ = model.encoder.backward(enc_tape, np.hstack([g_mu, g_logsig]))
    r, k = float(recon.mean()), float(kl.mean())
    return r + beta * k, {"reconstruction": r, "kl": k}, enc_grads + dec_grads


def train(model: CvaeModel, x, c=None, epochs: int = 1, learning_rate: float = 5e-4, seed: int = 0,
          batch_size: int = 1, shuffle: bool = True, adam: AdamState | None = None) -> TrainLog:
    """Adam on the negative ELBO. One epoch is one pass over the rows in mini-batches."""
    x2, c2 = _prepare(model, x, c)
    n = x2.shape[0]
    if n == 0:
        raise ValueError("no training rows")
    rng = np.random.default_rng(seed)
    params = model.params()
    adam = adam or AdamState.for_params(params, learning_rate)
    log = TrainLog()
    for epoch in range(epochs):
        order = rng.permutation(n) if shuffle else np.arange(n)
        tot = rec = klt = 0.0
        for start in range(0, n, batch_size):
            idx = order[start:start + batch_size]
            loss, parts, grads = elbo_grad(model, x2[idx], c2[idx], rng=rng)
            if not np.isfinite(loss):
                raise TrainingDiverged(f"non-finite loss in epoch {epoch + 1}")
            if learning_rate != 0:
                adam_step(adam, params, grads)
                model.touch()
            w = len(idx)
            tot += loss * w
            rec += parts["reconstruction"] * w
            klt += parts["kl"] * w
        log.epoch_loss.append(tot / n)
        log.epoch_reconstruction.append(rec / n)
        log.epoch_kl.append(klt / n)
    return log


def decode_prior(model: CvaeModel, c_scaled, n: int, rng: np.random.Generator) -> np.ndarray:
    """Decode ``n`` prior draws under one scaled condition row; output in [0, 1]."""
    z = rng.standard_normal((n, model.latent_dim))
    c = np.repeat(_rows(c_scaled, model.cond_dim), n, axis=0) if model.cond_dim else np.zeros((n, 0))
    return model.decoder(np.hstack([z, c]))


def condition_value(vix: float) -> float:
    """Decoder input for a raw VIX level: discretise, then scale with the fixed VIX scaler."""
    return float(scale(VIX_SCALER, discretize_vix(vix)))


def weekly_training_data(panel: WeeklyPanel, scaler: MinMaxScaler):
    x = scale(scaler, panel.returns)
    c = scale(VIX_SCALER, discretize_vix(panel.condition_vix)).reshape(-1, 1)
    return x, c


def train_weekly(panel: WeeklyPanel, epochs: int, learning_rate: float = 5e-4, seed: int = 0,
                 kl_weight: float = 1e-3, latent_dim: int = 2, enc_hidden=(30,), dec_hidden=(30,),
                 margin: float = 0.01, batch_size: int = 1):
    """Build and train a model on complete weeks; returns ``(model, log)``."""
    if len(panel) == 0:
        raise ValueError("weekly panel is empty")
    scaler = MinMaxScaler.fit(panel.returns, margin)
    model = CvaeModel.init(panel.returns.shape[1], 1, latent_dim, enc_hidden, dec_hidden, kl_weight, scaler, seed)
    x, c = weekly_training_data(panel, scaler)
    log = train(model, x, c, epochs, learning_rate, seed, batch_size)
    return model, log


def generate(model: CvaeModel, condition_vix: float, n_weeks: int, seed: int) -> ScenarioSet:
    """``n_weeks`` rows of generated weekly returns in return units."""
    if model.scaler is None:
        raise ValueError("model has no return scaler")
    rng = np.random.default_rng(seed)
    y = decode_prior(model, condition_value(condition_vix), n_weeks, rng)
    return ScenarioSet(unscale(model.scaler, y), condition_vix=float(condition_vix), generator="cvae", seed=seed)
