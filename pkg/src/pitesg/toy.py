"""Validation protocols on synthetic data with known ground truth.

``run_mixture``: bootstrap, RBM and VAE fitted to draws from a Gaussian
mixture, each sampled several times and compared with the true sampler.

``run_garch``: GARCH, RBM and CVAE fitted to one simulated GARCH(1,1)
path with Gaussian shocks; each generates several series of the same length.
"""
from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field

import numpy as np

from . import cvae, evalstats, fhs, garch, rbm, synthdata
from .generators import derived_seed
from .optim import OptimConfig
from .transforms import N_BITS, BinaryCodec, MinMaxScaler, binarize, debinarize, scale, unscale


@dataclass(frozen=True)
class MixtureToyConfig:
    n_samples: int = 10_000
    repetitions: int = 5
    seed: int = 0
    rbm_hidden: int = 10
    rbm_epochs: int = 50_000
    rbm_learning_rate: float = 1e-3
    rbm_k: int = 1
    rbm_gibbs_steps: int = 1000
    vae_epochs: int = 50_000
    vae_learning_rate: float = 5e-3
    vae_kl_weight: float = 1e-3
    vae_batch_size: int = 10_000
    models: tuple = ("bootstrap", "rbm", "vae")


@dataclass(frozen=True)
class GarchToyConfig:
    omega: float = 0.7
    alpha: float = 0.4
    beta: float = 0.3
    n_steps: int = 5000
    n_series: int = 20
    seed: int = 0
    rbm_hidden: int = 16
    rbm_epochs: int = 2000
    rbm_learning_rate: float = 1e-3
    rbm_k: int = 1
    rbm_batch_size: int = 500
    rbm_gibbs_steps: int = 1000
    cvae_epochs: int = 2000
    cvae_learning_rate: float = 5e-3
    cvae_kl_weight: float = 3e-3
    cvae_batch_size: int = 500
    max_lag: int = 30
    models: tuple = ("garch", "rbm", "cvae")


@dataclass
class ToyResult:
    truth: np.ndarray
    samples: dict = field(default_factory=dict)  # model -> (repetitions, n) array
    reference: np.ndarray | None = None  # independent draws from the true sampler
    fitted: object = None

    def stats_table(self):
        """Per model: average and dispersion of per-repetition statistics, plus truth."""
        return {name: evalstats.aggregate_stats(s) for name, s in self.samples.items()}, evalstats.summary_stats(self.truth)


# -- mixture ----------------------------------------------------------------------


def train_mixture_rbm(x, cfg: MixtureToyConfig):
    codec = BinaryCodec.fit(x)
    data = binarize(codec, x).astype(float)
    cd = rbm.CdConfig(k=cfg.rbm_k, learning_rate=cfg.rbm_learning_rate, epochs=cfg.rbm_epochs,
                      batch_size=len(x), gibbs_steps_sampling=cfg.rbm_gibbs_steps, seed=cfg.seed)
    params, _ = rbm.cd_k_train(rbm.RbmParams.init(N_BITS, cfg.rbm_hidden, cfg.seed), data, cd)
    return params, codec


def train_mixture_vae(x, cfg: MixtureToyConfig):
    sc = MinMaxScaler.fit(x, 0.01)
    model = cvae.CvaeModel.init(1, 0, 1, (30, 15), (15, 30), cfg.vae_kl_weight, sc, cfg.seed)
    cvae.train(model, scale(sc, x).reshape(-1, 1), None, cfg.vae_epochs, cfg.vae_learning_rate, cfg.seed,
               batch_size=cfg.vae_batch_size)
    return model


def run_mixture(cfg: MixtureToyConfig = MixtureToyConfig(), spec: synthdata.MixtureSpec = synthdata.TOY_MIXTURE):
    spec = synthdata.MixtureSpec(spec.components, cfg.seed)
    x = synthdata.sample_mixture(spec, cfg.n_samples)
    res = ToyResult(x)
    reps = range(cfg.repetitions)
    if "bootstrap" in cfg.models:
        res.samples["bootstrap"] = np.array([fhs.bootstrap_sample(x, cfg.n_samples, derived_seed(cfg.seed, 1, r))
                                             for r in reps])
    if "rbm" in cfg.models:
        params, codec = train_mixture_rbm(x, cfg)
        res.samples["rbm"] = np.array([
            debinarize(codec, rbm.sample(params, cfg.n_samples, cfg.rbm_gibbs_steps,
                                         derived_seed(cfg.seed, 2, r)).astype(np.int64))
            for r in reps])
    if "vae" in cfg.models:
        model = train_mixture_vae(x, cfg)
        res.samples["vae"] = np.array([
            unscale(model.scaler, cvae.decode_prior(model, np.zeros((1, 0)), cfg.n_samples,
                                                   np.random.default_rng(derived_seed(cfg.seed, 3, r)))[:, 0])
            for r in reps])
    # fresh draws from the true sampler for the QQ comparison
    res.reference = synthdata.sample_mixture(synthdata.MixtureSpec(spec.components, derived_seed(cfg.seed, 9)),
                                                cfg.n_samples)
    return res


# -- synthetic GARCH --------------------------------------------------------------


def _pairs(x):
    """Rows ``(x_t, x_{t-1})`` for t >= 1."""
    return np.column_stack([x[1:], x[:-1]])


def generate_rbm_series(params, codec, x0: float, n_steps: int, n_series: int, gibbs_steps: int, seed: int):
    """Sequential sampling: clamp the previous-day bits, read the next-day bits."""
    rng = np.random.default_rng(seed)
    out = np.empty((n_series, n_steps))
    prev = np.repeat(binarize(codec, x0)[None, :].astype(float), n_series, axis=0)
    idx = np.arange(N_BITS, 2 * N_BITS)
    for t in range(n_steps):
        v0 = (rng.random((n_series, 2 * N_BITS)) < 0.5).astype(float)
        v = rbm.gibbs_chain(params, v0, gibbs_steps, rng, idx, prev)
        out[:, t] = debinarize(codec, v[:, :N_BITS].astype(np.int64))
        prev = v[:, :N_BITS].copy()
    return out


def generate_cvae_series(model, x0: float, n_steps: int, n_series: int, seed: int):
    rng = np.random.default_rng(seed)
    out = np.empty((n_series, n_steps))
    prev = np.full((n_series, 1), float(scale(model.scaler, x0)))
    for t in range(n_steps):
        z = rng.standard_normal((n_series, model.latent_dim))
        y = model.decoder(np.hstack([z, prev]))
        out[:, t] = unscale(model.scaler, y[:, 0])
        prev = y[:, :1]
    return out


def run_garch(cfg: GarchToyConfig = GarchToyConfig(), optim: OptimConfig = OptimConfig()):
    spec = synthdata.GarchSimSpec(cfg.omega, cfg.alpha, cfg.beta, cfg.n_steps, cfg.seed)
    x, _ = synthdata.simulate_garch_path(spec)
    res = ToyResult(x)
    if "garch" in cfg.models:
        params, fit = garch.fit_returns(x, optim, dist="normal", return_result=True)
        res.fitted = params
        st = garch.GarchState(params.omega)
        paths = []
        for r in range(cfg.n_series):
            rng = np.random.default_rng(derived_seed(cfg.seed, 1, r))
            w = rng.standard_normal((1, cfg.n_steps))
            ret, _ = garch.kernels.garch_simulate(w, params.mu, params.omega, params.alpha0, params.beta0,
                                                  st.sigma2_next)
            paths.append(ret[0])
        res.samples["garch"] = np.array(paths)
    if "rbm" in cfg.models:
        codec = BinaryCodec.fit(x)
        data = binarize(codec, _pairs(x)).reshape(len(x) - 1, 2 * N_BITS).astype(float)
        cd = rbm.CdConfig(k=cfg.rbm_k, learning_rate=cfg.rbm_learning_rate, epochs=cfg.rbm_epochs,
                          batch_size=cfg.rbm_batch_size, gibbs_steps_sampling=cfg.rbm_gibbs_steps, seed=cfg.seed)
        params, _ = rbm.cd_k_train(rbm.RbmParams.init(2 * N_BITS, cfg.rbm_hidden, cfg.seed), data, cd)
        res.samples["rbm"] = generate_rbm_series(params, codec, x[0], cfg.n_steps, cfg.n_series,
                                                 cfg.rbm_gibbs_steps, derived_seed(cfg.seed, 2))
    if "cvae" in cfg.models:
        sc = MinMaxScaler.fit(x, 0.01)
        model = cvae.CvaeModel.init(1, 1, 1, (20,), (20,), cfg.cvae_kl_weight, sc, cfg.seed)
        p = scale(sc, _pairs(x))
        cvae.train(model, p[:, :1], p[:, 1:], cfg.cvae_epochs, cfg.cvae_learning_rate, cfg.seed,
                   batch_size=cfg.cvae_batch_size)
        res.samples["cvae"] = generate_cvae_series(model, x[0], cfg.n_steps, cfg.n_series, derived_seed(cfg.seed, 3))
    return res


# -- output -----------------------------------------------------------------------


def write_toy(res: ToyResult, out_dir, header: str, max_lag: int = 30, n_quantiles: int = 100,
              reference=None) -> list[str]:
    """Write ``stats.csv``, ``acf.csv``, ``acf_squared.csv`` and ``qq.csv`` in long format.

    ``reference`` is the sample the QQ pairs compare against (the truth
    series when omitted).
    """
    os.makedirs(out_dir, exist_ok=True)
    table, truth = res.stats_table()
    if reference is None:
        reference = res.reference if res.reference is not None else res.truth
    ref = reference
    files = []

    def writer(name):
        path = os.path.join(out_dir, name)
        files.append(path)
        fh = open(path, "w", newline="")
        fh.write(header + "\n")
        return fh, csv.writer(fh, lineterminator="\n")

    fh, w = writer("stats.csv")
    with fh:
        w.writerow(["statistic", "truth"] + [f"{m}_{c}" for m in table for c in ("average", "dispersion")])
        for name in evalstats.STAT_NAMES + ("kurtosis_pearson",):
            row = [name, repr(truth[name])]
            for m in table:
                row += [repr(table[m].average[name]), repr(table[m].dispersion[name])]
            w.writerow(row)
    lag_max = min(max_lag, len(res.truth) - 1)
    for fname, f in (("acf.csv", lambda a: a), ("acf_squared.csv", lambda a: a * a)):
        fh, w = writer(fname)
        with fh:
            w.writerow(["lag", "truth"] + list(res.samples))
            t = evalstats.acf(f(res.truth), lag_max)[1:]
            curves = [np.mean([evalstats.acf(f(s), lag_max)[1:] for s in res.samples[m]], axis=0) for m in res.samples]
            for k in range(lag_max):
                w.writerow([k + 1, repr(float(t[k]))] + [repr(float(c[k])) for c in curves])
    fh, w = writer("qq.csv")
    with fh:
        w.writerow(["model", "probability", "reference", "generated"])
        for m, s in res.samples.items():
            pairs = evalstats.qq_pairs(ref, s.ravel(), n_quantiles)
            for i, (a, b) in enumerate(pairs):
                w.writerow([m, repr((i + 0.5) / n_quantiles), repr(float(a)), repr(float(b))])
    return files
