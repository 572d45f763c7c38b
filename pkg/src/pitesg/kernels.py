"""Backend selection for the numerical kernels.

The compiled extension is used when it imports; otherwise the NumPy
fallback is used. Setting ``PIT_ESG_PURE_PYTHON=1`` forces the fallback.
"""
from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("PIT_ESG_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

numpy_impl = _kernels_py

garch_filter = _impl.garch_filter
garch_loglik = _impl.garch_loglik
ar1_loglik = _impl.ar1_loglik
garch_simulate = _impl.garch_simulate
dense_forward = _impl.dense_forward
dense_backward = _impl.dense_backward
adam_update = _impl.adam_update
acf = _impl.acf

ACT_IDENTITY = _kernels_py.ACT_IDENTITY
ACT_LEAKY_RELU = _kernels_py.ACT_LEAKY_RELU
ACT_SIGMOID = _kernels_py.ACT_SIGMOID
LEAKY_SLOPE = _kernels_py.LEAKY_SLOPE
DIST_NORMAL = _kernels_py.DIST_NORMAL
DIST_T4 = _kernels_py.DIST_T4
LOG_2PI = _kernels_py.LOG_2PI
T4_CONST = _kernels_py.T4_CONST

__all__ = [
    "BACKEND",
    "garch_filter",
    "garch_loglik",
    "ar1_loglik",
    "garch_simulate",
    "dense_forward",
    "dense_backward",
    "adam_update",
    "acf",
]
