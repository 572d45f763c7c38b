"""Small dense feed-forward networks with exact reverse-mode gradients and Adam."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import kernels

ACTIVATIONS = {
    "identity": kernels.ACT_IDENTITY,
    "leaky_relu": kernels.ACT_LEAKY_RELU,
    "sigmoid": kernels.ACT_SIGMOID,
}


# batches at least this large go through the NumPy kernels, which use BLAS
BLAS_BATCH = 32


class StaleTapeError(RuntimeError):
    """The network changed after the forward pass that produced the tape."""


def leaky_relu(x):
    x = np.asarray(x, dtype=float)
    return np.where(x > 0, x, kernels.LEAKY_SLOPE * x)


def sigmoid(x):
    return 1.0 / (1.0 + np.exp(-np.asarray(x, dtype=float)))


@dataclass
class Tape:
    outs: list
    pres: list
    version: int
    batched: bool
    impl: object = None


class DenseNet:
    """Stack of affine layers, each followed by an elementwise activation.

    Weight matrices are stored as ``(fan_out, fan_in)``.
    """

    def __init__(self, weights, biases, activations, seed: int | None = None):
        if not (len(weights) == len(biases) == len(activations)) or not weights:
            raise ValueError("need matching, non-empty weight, bias and activation lists")
        self.weights = [np.ascontiguousarray(w, dtype=float) for w in weights]
        self.biases = [np.ascontiguousarray(b, dtype=float).reshape(-1) for b in biases]
        for name in activations:
            if name not in ACTIVATIONS:
                raise ValueError(f"unknown activation {name!r}")
        self.activations = list(activations)
        self.seed = seed
        self.version = 0
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.ndim != 2 or b.shape[0] != w.shape[0]:
                raise ValueError(f"layer {k}: bias length must equal weight rows")
            if k and w.shape[1] != self.weights[k - 1].shape[0]:
                raise ValueError(f"layer {k}: input size {w.shape[1]} != previous output {self.weights[k - 1].shape[0]}")
            if not np.all(np.isfinite(w)):
                raise ValueError(f"layer {k}: non-finite weights")

    @classmethod
    def init(cls, sizes, activations, seed: int = 0) -> "DenseNet":
        """Glorot-uniform weights, zero biases."""
        if len(sizes) - 1 != len(activations):
            raise ValueError("need one activation per layer")
        rng = np.random.default_rng(seed)
        ws, bs = [], []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            lim = np.sqrt(6.0 / (fan_in + fan_out))
            ws.append(rng.uniform(-lim, lim, size=(fan_out, fan_in)))
            bs.append(np.zeros(fan_out))
        return cls(ws, bs, activations, seed)

    @property
    def sizes(self) -> list[int]:
        return [self.weights[0].shape[1]] + [w.shape[0] for w in self.weights]

    @property
    def n_in(self) -> int:
        return self.weights[0].shape[1]

    @property
    def n_out(self) -> int:
        return self.weights[-1].shape[0]

    def params(self) -> list[np.ndarray]:
        """Parameter arrays in the order W0, b0, W1, b1, ... (live references)."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out += [w, b]
        return out

    def touch(self) -> None:
        """Record an in-place parameter update."""
        self.version += 1

    def copy(self) -> "DenseNet":
        return DenseNet([w.copy() for w in self.weights], [b.copy() for b in self.biases],
                        self.activations, self.seed)

    def _codes(self):
        return [ACTIVATIONS[a] for a in self.activations]

    def forward(self, x):
        """Return ``(output, tape)``; ``x`` is one vector or a batch of rows."""
        x = np.asarray(x, dtype=float)
        batched = x.ndim == 2
        x2 = x if batched else x.reshape(1, -1)
        if x2.shape[1] != self.n_in:
            raise ValueError(f"input has {x2.shape[1]} features, network expects {self.n_in}")
        impl = kernels.numpy_impl if x2.shape[0] >= BLAS_BATCH else kernels
        outs, pres = impl.dense_forward(self.weights, self.biases, self._codes(), x2)
        out = outs[-1] if batched else outs[-1][0]
        return out, Tape(outs, pres, self.version, batched, impl)

    def __call__(self, x):
        return self.forward(x)[0]

    def backward(self, tape: Tape, output_gradient):
        """Return ``(grads, input_gradient)``; ``grads`` follows :meth:`params` order."""
        if tape.version != self.version:
            raise StaleTapeError("parameters changed since the forward pass")
        g = np.asarray(output_gradient, dtype=float)
        g2 = g if tape.batched else g.reshape(1, -1)
        if g2.shape != tape.outs[-1].shape:
            raise ValueError("output gradient shape does not match the forward output")
        dws, dbs, gin = tape.impl.dense_backward(self.weights, self._codes(), tape.outs, tape.pres, g2)
        grads = []
        for dw, db in zip(dws, dbs):
            grads += [dw, db]
        return grads, (gin if tape.batched else gin[0])

    def to_dict(self) -> dict:
        return {
            "sizes": self.sizes,
            "activations": self.activations,
            "seed": self.seed,
            "weights": [w.ravel().tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DenseNet":
        sizes = d["sizes"]
        ws = [np.array(w, dtype=float).reshape(o, i) for w, i, o in zip(d["weights"], sizes[:-1], sizes[1:])]
        return cls(ws, [np.array(b, dtype=float) for b in d["biases"]], d["activations"], d.get("seed"))

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def load(cls, path) -> "DenseNet":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class AdamState:
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps_hat: float = 1e-8
    step_count: int = 0
    first_moment: list = field(default_factory=list)
    second_moment: list = field(default_factory=list)

    @classmethod
    def for_params(cls, params, learning_rate: float = 1e-3, **kw) -> "AdamState":
        return cls(
            learning_rate=learning_rate,
            first_moment=[np.zeros_like(p) for p in params],
            second_moment=[np.zeros_like(p) for p in params],
            **kw,
        )

    def to_dict(self) -> dict:
        return {
            "learning_rate": self.learning_rate, "beta1": self.beta1, "beta2": self.beta2,
            "eps_hat": self.eps_hat, "step_count": self.step_count,
        }


def adam_step(state: AdamState, params, grads) -> None:
    """Apply one bias-corrected Adam update to ``params`` in place."""
    if len(params) != len(grads) or len(params) != len(state.first_moment):
        raise ValueError("params, grads and moments must have the same length")
    for p, g, m in zip(params, grads, state.first_moment):
        if p.shape != np.shape(g) or p.shape != m.shape:
            raise ValueError(f"shape mismatch: param {p.shape}, grad {np.shape(g)}, moment {m.shape}")
    state.step_count += 1
    kernels.adam_update(params, grads, state.first_moment, state.second_moment, state.learning_rate,
                        state.beta1, state.beta2, state.eps_hat, state.step_count)
