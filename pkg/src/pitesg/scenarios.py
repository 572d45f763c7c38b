"""Container for generated return paths and its CSV form."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

RNG_ALGORITHM = "numpy.PCG64"


@dataclass
class ScenarioSet:
    """``returns`` has shape ``(n_paths, horizon)`` in daily log-return units."""

    returns: np.ndarray
    condition_vix: float | None = None
    generator: str = ""
    seed: int | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.returns = np.asarray(self.returns, dtype=float)
        if self.returns.ndim != 2 or self.returns.shape[0] < 1 or self.returns.shape[1] < 1:
            raise ValueError(f"returns must be a non-empty 2-d array, got shape {self.returns.shape}")

    @property
    def n_paths(self) -> int:
        return self.returns.shape[0]

    @property
    def horizon(self) -> int:
        return self.returns.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.returns.shape

    def header(self) -> str:
        parts = [f"generator={self.generator}", f"seed={self.seed}", f"rng={RNG_ALGORITHM}"]
        if self.condition_vix is not None:
            parts.append(f"condition_vix={self.condition_vix!r}")
        for k in sorted(self.meta):
            parts.append(f"{k}={self.meta[k]}")
        return "# " + " ".join(parts)

    def to_csv(self, path) -> None:
        """Long format, one row per ``(path_id, day)``; days count from 1."""
        with open(path, "w", newline="") as fh:
            fh.write(self.header() + "\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["path_id", "day", "return"])
            for p in range(self.n_paths):
                for d in range(self.horizon):
                    w.writerow([p, d + 1, repr(float(self.returns[p, d]))])

    @classmethod
    def from_csv(cls, path) -> "ScenarioSet":
        info: dict = {}
        rows = []
        with open(path, newline="") as fh:
            first = fh.readline()
            if first.startswith("#"):
                for tok in first[1:].split():
                    key, _, val = tok.partition("=")
                    info[key] = val
            else:
                fh.seek(0)
            for row in csv.DictReader(fh):
                rows.append((int(row["path_id"]), int(row["day"]), float(row["return"])))
        if not rows:
            raise ValueError(f"{path}: no scenario rows")
        n_paths = max(r[0] for r in rows) + 1
        horizon = max(r[1] for r in rows)
        out = np.full((n_paths, horizon), np.nan)
        for p, d, r in rows:
            out[p, d - 1] = r
        if np.isnan(out).any():
            raise ValueError(f"{path}: incomplete scenario grid")
        seed = info.pop("seed", "None")
        cond = info.pop("condition_vix", None)
        info.pop("rng", None)
        gen = info.pop("generator", "")
        return cls(
            out,
            condition_vix=float(cond) if cond is not None else None,
            generator=gen,
            seed=None if seed == "None" else int(seed),
            meta=info,
        )
