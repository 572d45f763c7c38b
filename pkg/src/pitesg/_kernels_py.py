"""Pure-Python/NumPy implementations of the numerical kernels.

Every function here has a twin with the same signature in ``_kernels.pyx``.
``pitesg.kernels`` picks the compiled one when it imports cleanly.
"""
from __future__ import annotations

import math

import numpy as np

LOG_2PI = math.log(2.0 * math.pi)
# log Gamma(5/2) - log Gamma(2), the t(4) normalising constant
T4_CONST = math.lgamma(2.5) - math.lgamma(2.0)

ACT_IDENTITY = 0
ACT_LEAKY_RELU = 1
ACT_SIGMOID = 2
LEAKY_SLOPE = 0.01

DIST_NORMAL = 0
DIST_T4 = 1


def garch_filter(resid, omega, alpha, beta, sigma2_init):
    resid = np.asarray(resid, dtype=np.float64)
    n = resid.shape[0]
    out = np.empty(n + 1)
    s2 = float(sigma2_init)
    out[0] = s2
    for t in range(n):
        s2 = omega + alpha * resid[t] * resid[t] + beta * s2
        out[t + 1] = s2
    return out


def garch_loglik(resid, omega, alpha, beta, sigma2_init, dist):
    """Return ``(sum of log-densities, sigma2 for the next step)``."""
    resid = np.asarray(resid, dtype=np.float64)
    s2 = garch_filter(resid, omega, alpha, beta, sigma2_init)
    cur = s2[:-1]
    e2 = resid * resid
    if dist == DIST_NORMAL:
        terms = -0.5 * (LOG_2PI + np.log(cur) + e2 / cur)
    else:
        terms = T4_CONST - 0.5 * np.log(cur * 2.0 * math.pi) - 2.5 * np.log1p(e2 / (2.0 * cur))
    return float(terms.sum()), float(s2[-1])


def ar1_loglik(d, rho, Sigma):
    d = np.asarray(d, dtype=np.float64)
    n = d.shape[0]
    if n == 0:
        return 0.0
    one_m_r2 = 1.0 - rho * rho
    innov_var = Sigma * one_m_r2
    total = -0.5 * (LOG_2PI + math.log(Sigma) + d[0] * d[0] / Sigma)
    if n > 1:
        u = d[1:] - rho * d[:-1]
        total += float(-0.5 * ((n - 1) * (LOG_2PI + math.log(innov_var)) + np.dot(u, u) / innov_var))
    return float(total)


def garch_simulate(w, mu, omega, alpha, beta, sigma2_first):
    """Iterate the variance recursion along each row of standardised draws ``w``."""
    w = np.asarray(w, dtype=np.float64)
    n_paths, horizon = w.shape
    ret = np.empty_like(w)
    var = np.empty_like(w)
    s2 = np.full(n_paths, float(sigma2_first))
    for t in range(horizon):
        eps = w[:, t] * np.sqrt(s2)
        ret[:, t] = mu + eps
        var[:, t] = s2
        s2 = omega + alpha * eps * eps + beta * s2
    return ret, var


def _activate(z, act):
    if act == ACT_IDENTITY:
        return z.copy()
    if act == ACT_LEAKY_RELU:
        return np.where(z > 0.0, z, LEAKY_SLOPE * z)
    return 1.0 / (1.0 + np.exp(-z))


def dense_forward(weights, biases, acts, x):
    """Forward pass over a 2-D batch. Returns (activations, preactivations)."""
    a = np.ascontiguousarray(x, dtype=np.float64)
    outs = [a]
    pres = []
    for W, b, act in zip(weights, biases, acts):
        z = a @ W.T + b
        a = _activate(z, act)
        pres.append(z)
        outs.append(a)
    return outs, pres


def dense_backward(weights, acts, outs, pres, gout):
    """Reverse pass; returns (weight grads, bias grads, input grad)."""
    g = np.asarray(gout, dtype=np.float64)
    n_layers = len(weights)
    dWs = [None] * n_layers
    dbs = [None] * n_layers
    for k in range(n_layers - 1, -1, -1):
        act = acts[k]
        if act == ACT_LEAKY_RELU:
            dz = g * np.where(pres[k] > 0.0, 1.0, LEAKY_SLOPE)
        elif act == ACT_SIGMOID:
            a = outs[k + 1]
            dz = g * a * (1.0 - a)
        else:
            dz = g
        dWs[k] = dz.T @ outs[k]
        dbs[k] = dz.sum(axis=0)
        g = dz @ weights[k]
    return dWs, dbs, g


def adam_update(params, grads, ms, vs, lr, beta1, beta2, eps, t):
    """In-place Adam step number ``t`` (1-based) with bias correction."""
    c1 = 1.0 - beta1 ** t
    c2 = 1.0 - beta2 ** t
    for p, g, m, v in zip(params, grads, ms, vs):
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * g * g
        p -= lr * (m / c1) / (np.sqrt(v / c2) + eps)


def acf(x, max_lag):
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[0]
    xc = x - x.mean()
    denom = float(np.dot(xc, xc))
    out = np.zeros(max_lag + 1)
    out[0] = 1.0
    if denom <= 0.0:
        return out
    for k in range(1, max_lag + 1):
        out[k] = float(np.dot(xc[: n - k], xc[k:])) / denom
    return out
