"""Derivative-free Nelder-Mead minimisation with penalty constraints and restarts.

Constraint handling follows the penalty convention: the objective returns
``config.penalty_value`` (or anything non-finite) outside the feasible set,
and the simplex simply moves away from such points.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

REFLECT = 1.0
EXPAND = 2.0
CONTRACT = 0.5
SHRINK = 0.5


class OptimizationError(RuntimeError):
    pass


@dataclass(frozen=True)
class OptimConfig:
    max_iter: int = 5000
    tol_f: float = 1e-8
    tol_x: float = 1e-8
    restarts: int = 5
    penalty_value: float = 1e12
    seed: int = 0
    initial_step: float = 0.05
    polish: int = 10

    def __post_init__(self):
        if self.tol_f <= 0 or self.tol_x <= 0:
            raise ValueError("tolerances must be positive")
        if self.polish < 0:
            raise ValueError("polish must be >= 0")
        if self.max_iter < 1 or self.restarts < 1:
            raise ValueError("max_iter and restarts must be >= 1")


@dataclass
class SimplexState:
    vertices: np.ndarray  # (n + 1, n)
    values: np.ndarray  # (n + 1,)
    iteration: int = 0

    def order(self) -> None:
        idx = np.argsort(self.values, kind="stable")
        self.vertices = self.vertices[idx]
        self.values = self.values[idx]


@dataclass
class OptimResult:
    x: np.ndarray
    fun: float
    converged: bool
    n_iter: int
    n_eval: int
    restart: int
    trace: list = field(default_factory=list)

    def write_trace(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["restart", "iteration", "best_value", "incumbent"])
            w.writerows(self.trace)


def _initial_simplex(x0: np.ndarray, step: float) -> np.ndarray:
    n = x0.size
    verts = np.tile(x0, (n + 1, 1))
    for i in range(n):
        verts[i + 1, i] = x0[i] * (1 + step) if x0[i] != 0 else 0.00025
    return verts


def _nelder_mead(f, x0, config: OptimConfig, restart: int, trace: list):
    verts = _initial_simplex(x0, config.initial_step)
    state = SimplexState(verts, np.array([f(v) for v in verts]))
    n_eval = len(verts)
    n = x0.size
    converged = False
    while state.iteration < config.max_iter:
        state.order()
        trace.append((restart, state.iteration, float(state.values[0])))
        spread_f = np.max(np.abs(state.values[1:] - state.values[0]))
        spread_x = np.max(np.abs(state.vertices[1:] - state.vertices[0]))
        if spread_f <= config.tol_f and spread_x <= config.tol_x:
            converged = True
            break
        state.iteration += 1
        centroid = state.vertices[:-1].mean(axis=0)
        worst = state.vertices[-1]
        xr = centroid + REFLECT * (centroid - worst)
        fr = f(xr)
        n_eval += 1
        if fr < state.values[0]:
            xe = centroid + EXPAND * (xr - centroid)
            fe = f(xe)
            n_eval += 1
            if fe < fr:
                state.vertices[-1], state.values[-1] = xe, fe
            else:
                state.vertices[-1], state.values[-1] = xr, fr
            continue
        if fr < state.values[-2]:
            state.vertices[-1], state.values[-1] = xr, fr
            continue
        if fr < state.values[-1]:
            xc = centroid + CONTRACT * (xr - centroid)
        else:
            xc = centroid + CONTRACT * (worst - centroid)
        fc = f(xc)
        n_eval += 1
        if fc < min(fr, state.values[-1]):
            state.vertices[-1], state.values[-1] = xc, fc
            continue
        best = state.vertices[0]
        for i in range(1, n + 1):
            state.vertices[i] = best + SHRINK * (state.vertices[i] - best)
            state.values[i] = f(state.vertices[i])
        n_eval += n
    state.order()
    return state.vertices[0].copy(), float(state.values[0]), converged, state.iteration, n_eval


def minimize(
    objective: Callable[[np.ndarray], float],
    init: Sequence[float],
    config: OptimConfig = OptimConfig(),
    bounds: Sequence[tuple[float, float]] | None = None,
) -> OptimResult:
    """Minimise ``objective`` with ``config.restarts`` Nelder-Mead runs.

    The first run starts at ``init``. Later runs start from points drawn
    uniformly in ``bounds`` when given, otherwise from the incumbent best
    point (a restart with a fresh simplex). Ties between restarts go to the
    lower restart index. Up to ``config.polish`` further runs then restart
    from the best point until one fails to improve it by ``tol_f``.
    """
    x0 = np.asarray(init, dtype=float).ravel()
    if bounds is not None and len(bounds) != x0.size:
        raise ValueError("bounds must have one (low, high) pair per parameter")
    rng = np.random.default_rng(config.seed)
    penalty = config.penalty_value

    def f(x):
        val = float(objective(x))
        return val if np.isfinite(val) else penalty

    trace: list = []
    best: OptimResult | None = None
    any_finite_start = False
    for r in range(config.restarts):
        if r == 0:
            start = x0
        elif bounds is not None:
            lo = np.array([b[0] for b in bounds], dtype=float)
            hi = np.array([b[1] for b in bounds], dtype=float)
            start = lo + (hi - lo) * rng.random(x0.size)
        else:
            start = best.x if best is not None else x0
        raw = float(objective(start))
        if not np.isfinite(raw):
            continue
        any_finite_start = True
        x, val, conv, it, ne = _nelder_mead(f, start.copy(), config, r, trace)
        if best is None or val < best.fun:
            best = OptimResult(x, val, conv, it, ne, r)
    if not any_finite_start or best is None:
        raise OptimizationError("objective is non-finite at the start of every restart")
    # a collapsed simplex can stall short of the minimum; rebuild it around the incumbent
    for k in range(config.polish):
        x, val, conv, it, ne = _nelder_mead(f, best.x.copy(), config, config.restarts + k, trace)
        improved = val < best.fun - config.tol_f
        if val < best.fun:
            best = OptimResult(x, val, conv, it, ne, best.restart)
        if not improved:
            break
    incumbent = np.inf
    for k, (r, it, v) in enumerate(trace):
        incumbent = min(incumbent, v)
        trace[k] = (r, it, v, incumbent)
    best.trace = trace
    return best
