"""Reversible data transforms used by the generators.

- 16-bit fixed-point binary codec for RBM visible units
- VIX ratio filtering for historical simulation
- VIX discretisation to the integer range [10, 40]
- min-max scaling to [0, 1] for the CVAE
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

N_BITS = 16
N_LEVELS = (1 << N_BITS) - 1  # 65535
VIX_FLOOR = 10
VIX_CAP = 40

_POWERS = (1 << np.arange(N_BITS - 1, -1, -1)).astype(np.int64)


class TransformError(ValueError):
    pass


@dataclass(frozen=True)
class BinaryCodec:
    """Affine map of ``[x_min, x_max]`` onto the integers ``0..65535``.

    ``x_min``/``x_max`` are the stored bounds, already widened by
    ``epsilon`` when the codec was built with :meth:`fit`.
    """

    x_min: float
    x_max: float
    epsilon: float = 0.0

    def __post_init__(self):
        if not self.x_min < self.x_max:
            raise TransformError("codec requires x_min < x_max")
        if self.epsilon < 0:
            raise TransformError("epsilon must be non-negative")

    @classmethod
    def fit(cls, data, epsilon: float | None = None) -> "BinaryCodec":
        data = np.asarray(data, dtype=float)
        lo, hi = float(data.min()), float(data.max())
        if epsilon is None:
            epsilon = 1e-6 * (hi - lo) if hi > lo else 1e-6
        if hi - lo + 2 * epsilon <= 0:
            raise TransformError("cannot fit a codec to constant data with zero margin")
        return cls(lo - epsilon, hi + epsilon, float(epsilon))

    @property
    def step(self) -> float:
        return (self.x_max - self.x_min) / N_LEVELS

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "BinaryCodec":
        return cls(float(d["x_min"]), float(d["x_max"]), float(d.get("epsilon", 0.0)))


VIX_CODEC = BinaryCodec(float(VIX_FLOOR), float(VIX_CAP), 0.0)


def _decode_int(codec: BinaryCodec, k):
    return codec.x_min + k * (codec.x_max - codec.x_min) / N_LEVELS


def quantize(codec: BinaryCodec, x) -> np.ndarray:
    """Largest grid index whose decoded value does not exceed ``x`` (floor semantics)."""
    x = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(x)) or np.any(x < codec.x_min) or np.any(x > codec.x_max):
        raise TransformError(f"value outside codec range [{codec.x_min}, {codec.x_max}]")
    k = np.floor(N_LEVELS * (x - codec.x_min) / (codec.x_max - codec.x_min)).astype(np.int64)
    k = np.clip(k, 0, N_LEVELS)
    # repair one-ulp misses of the affine map so grid points round-trip exactly
    up = (k < N_LEVELS) & (_decode_int(codec, np.minimum(k + 1, N_LEVELS)) <= x)
    k = k + up
    down = (k > 0) & (_decode_int(codec, k) > x)
    return k - down


def int_to_bits(k) -> np.ndarray:
    k = np.asarray(k, dtype=np.int64)
    return ((k[..., None] & _POWERS) != 0).astype(np.uint8)


def bits_to_int(bits) -> np.ndarray:
    bits = np.asarray(bits)
    if bits.shape[-1] != N_BITS:
        raise TransformError(f"expected {N_BITS} binary digits, got {bits.shape[-1]}")
    if np.any((bits != 0) & (bits != 1)):
        raise TransformError("binary digits must be 0 or 1")
    return (bits.astype(np.int64) * _POWERS).sum(axis=-1)


def binarize(codec: BinaryCodec, x) -> np.ndarray:
    """Big-endian 16-bit representation; shape ``x.shape + (16,)``."""
    return int_to_bits(quantize(codec, x))


def debinarize(codec: BinaryCodec, bits) -> np.ndarray:
    return _decode_int(codec, bits_to_int(bits))


def vix_filter(returns, vix, vix_target: float) -> np.ndarray:
    """Rescale each return by ``vix_target / vix`` of its own day."""
    returns = np.asarray(returns, dtype=float)
    vix = np.asarray(vix, dtype=float)
    if np.any(vix <= 0) or vix_target <= 0:
        raise TransformError("VIX levels must be positive")
    return vix_target * returns / vix


def discretize_vix(v):
    """Round down to an integer and clamp to [10, 40]."""
    arr = np.asarray(v, dtype=float)
    if np.any(arr <= 0):
        raise TransformError("VIX must be positive")
    out = np.clip(np.floor(arr), VIX_FLOOR, VIX_CAP).astype(np.int64)
    return int(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class MinMaxScaler:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise TransformError("scaler requires lo < hi")

    @classmethod
    def fit(cls, data, margin: float = 0.01) -> "MinMaxScaler":
        """Bounds of ``data`` widened by ``margin`` times its range on each side."""
        data = np.asarray(data, dtype=float)
        lo, hi = float(data.min()), float(data.max())
        pad = margin * (hi - lo) if hi > lo else 1e-6
        return cls(lo - pad, hi + pad)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "MinMaxScaler":
        return cls(float(d["lo"]), float(d["hi"]))


VIX_SCALER = MinMaxScaler(float(VIX_FLOOR), float(VIX_CAP))


def scale(scaler: MinMaxScaler, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if np.any(x < scaler.lo) or np.any(x > scaler.hi):
        raise TransformError(f"value outside scaler range [{scaler.lo}, {scaler.hi}]")
    return (x - scaler.lo) / (scaler.hi - scaler.lo)


def unscale(scaler: MinMaxScaler, y) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if np.any(y < 0) or np.any(y > 1):
        raise TransformError("scaled value outside [0, 1]")
    return scaler.lo + y * (scaler.hi - scaler.lo)
