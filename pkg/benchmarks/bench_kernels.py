"""Time each numerical kernel under the compiled and the NumPy backends.

Usage: python benchmarks/bench_kernels.py [--repeat N]
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from pitesg import _kernels_py

try:
    from pitesg import _kernels as _kernels_c
except ImportError:
    _kernels_c = None


def cases(rng):
    r = rng.standard_normal(5000) * 0.01
    w = rng.standard_normal((500, 65))
    d = rng.standard_normal(3000)
    sizes = [(6, 30), (30, 4)]
    weights = [rng.standard_normal((o, i)) * 0.3 for i, o in sizes]
    biases = [np.zeros(o) for _, o in sizes]
    acts = [1, 0]
    x1 = rng.standard_normal((1, 6))
    x64 = rng.standard_normal((64, 6))
    params = [rng.standard_normal((30, 6)) for _ in range(4)]
    grads = [rng.standard_normal((30, 6)) for _ in range(4)]
    ms = [np.zeros((30, 6)) for _ in range(4)]
    vs = [np.zeros((30, 6)) for _ in range(4)]
    series = rng.standard_normal(2000)

    def fwd_bwd(k, x):
        outs, pres = k.dense_forward(weights, biases, acts, x)
        return k.dense_backward(weights, acts, outs, pres, np.ones((x.shape[0], 4)))

    return {
        "garch_filter n=5000": lambda k: k.garch_filter(r, 1e-6, 0.08, 0.9, 1e-4),
        "garch_loglik t4 n=5000": lambda k: k.garch_loglik(r, 1e-6, 0.08, 0.9, 1e-4, 1),
        "ar1_loglik n=3000": lambda k: k.ar1_loglik(d, 0.9, 1.0),
        "garch_simulate 500x65": lambda k: k.garch_simulate(w, 0.0, 1e-6, 0.08, 0.9, 1e-4),
        "dense fwd+bwd 6-30-4 batch 1": lambda k: fwd_bwd(k, x1),
        "dense fwd+bwd 6-30-4 batch 64": lambda k: fwd_bwd(k, x64),
        "adam_update 4x(30x6)": lambda k: k.adam_update(params, grads, ms, vs, 1e-3, 0.9, 0.999, 1e-8, 1),
        "acf n=2000 lags=30": lambda k: k.acf(series, 30),
    }


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=200)
    args = ap.parse_args(argv)
    backends = [("numpy", _kernels_py)] + ([("cython", _kernels_c)] if _kernels_c else [])
    print(f"{'kernel':34s}" + "".join(f"{name + ' us':>14s}" for name, _ in backends) + f"{'speedup':>10s}")
    for label, fn in cases(np.random.default_rng(0)).items():
        times = [min(timeit.repeat(lambda: fn(k), number=args.repeat, repeat=3)) / args.repeat * 1e6
                 for _, k in backends]
        speed = f"{times[0] / times[1]:9.1f}x" if len(times) == 2 else ""
        print(f"{label:34s}" + "".join(f"{t:14.1f}" for t in times) + f"{speed:>10s}")
    if _kernels_c is None:
        print("compiled extension not built; only the NumPy backend was timed")


if __name__ == "__main__":
    main()
