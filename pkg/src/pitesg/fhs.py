"""VIX-filtered historical simulation and the plain bootstrap."""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .marketdata import AlignedPanel
from .scenarios import ScenarioSet
from .transforms import vix_filter


def bootstrap_sample(pool, n: int, seed: int) -> np.ndarray:
    """``n`` uniform draws with replacement from ``pool``."""
    pool = np.asarray(pool, dtype=float).reshape(-1)
    if pool.size == 0:
        raise ValueError("bootstrap pool is empty")
    rng = np.random.default_rng(seed)
    return pool[rng.integers(0, pool.size, size=n)]


@dataclass(frozen=True)
class FhsModel:
    """Historical returns paired with the VIX close of the same day."""

    returns: np.ndarray
    vix: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.returns, dtype=float).reshape(-1)
        v = np.asarray(self.vix, dtype=float).reshape(-1)
        if r.size == 0:
            raise ValueError("filtered pool is empty")
        if r.shape != v.shape:
            raise ValueError("returns and vix differ in length")
        if np.any(v <= 0):
            raise ValueError("all VIX levels must be positive")
        object.__setattr__(self, "returns", r)
        object.__setattr__(self, "vix", v)

    @classmethod
    def fit(cls, panel: AlignedPanel) -> "FhsModel":
        return cls(panel.spx_log_return.copy(), panel.vix_level.copy())

    def __len__(self):
        return self.returns.size

    def support(self, vix_target: float) -> np.ndarray:
        """All values a generated return can take for this target."""
        return vix_filter(self.returns, self.vix, vix_target)

    def to_dict(self) -> dict:
        return {"model": "fhs", "returns": self.returns.tolist(), "vix": self.vix.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "FhsModel":
        return cls(np.array(d["returns"], dtype=float), np.array(d["vix"], dtype=float))

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "FhsModel":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def generate(model: FhsModel, vix_target: float, horizon: int, n_paths: int, seed: int) -> ScenarioSet:
    """i.i.d. draws of pool days, each return rescaled by ``vix_target / vix`` of its day."""
    if vix_target <= 0:
        raise ValueError("vix_target must be positive")
    if horizon < 1 or n_paths < 1:
        raise ValueError("horizon and n_paths must be >= 1")
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, len(model), size=(n_paths, horizon))
    out = vix_filter(model.returns[idx], model.vix[idx], vix_target)
    return ScenarioSet(out, condition_vix=float(vix_target), generator="fhs", seed=seed)
