# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the kernels in ``_kernels_py``.

Signatures and return conventions match the NumPy versions exactly.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, log1p, sqrt, lgamma, M_PI

cnp.import_array()

cdef enum:
    ACT_IDENTITY = 0
    ACT_LEAKY_RELU = 1
    ACT_SIGMOID = 2
    DIST_NORMAL = 0

cdef double LEAKY_SLOPE = 0.01


def garch_filter(resid, double omega, double alpha, double beta, double sigma2_init):
    cdef const double[::1] r = np.ascontiguousarray(resid, dtype=np.float64)
    cdef Py_ssize_t n = r.shape[0], t
    out = np.empty(n + 1)
    cdef double[::1] o = out
    cdef double s2 = sigma2_init
    o[0] = s2
    for t in range(n):
        s2 = omega + alpha * r[t] * r[t] + beta * s2
        o[t + 1] = s2
    return out


def garch_loglik(resid, double omega, double alpha, double beta, double sigma2_init, int dist):
    cdef const double[::1] r = np.ascontiguousarray(resid, dtype=np.float64)
    cdef Py_ssize_t n = r.shape[0], t
    cdef double s2 = sigma2_init, e2, total = 0.0
    cdef double log2pi = log(2.0 * M_PI)
    cdef double tconst = lgamma(2.5) - lgamma(2.0)
    for t in range(n):
        e2 = r[t] * r[t]
        if dist == DIST_NORMAL:
            total += -0.5 * (log2pi + log(s2) + e2 / s2)
        else:
            total += tconst - 0.5 * log(s2 * 2.0 * M_PI) - 2.5 * log1p(e2 / (2.0 * s2))
        s2 = omega + alpha * e2 + beta * s2
    return total, s2


def ar1_loglik(d, double rho, double Sigma):
    cdef const double[::1] x = np.ascontiguousarray(d, dtype=np.float64)
    cdef Py_ssize_t n = x.shape[0], t
    if n == 0:
        return 0.0
    cdef double log2pi = log(2.0 * M_PI)
    cdef double innov_var = Sigma * (1.0 - rho * rho)
    cdef double total = -0.5 * (log2pi + log(Sigma) + x[0] * x[0] / Sigma)
    cdef double u, ss = 0.0
    for t in range(1, n):
        u = x[t] - rho * x[t - 1]
        ss += u * u
    if n > 1:
        total += -0.5 * ((n - 1) * (log2pi + log(innov_var)) + ss / innov_var)
    return total


def garch_simulate(w, double mu, double omega, double alpha, double beta, double sigma2_first):
    cdef const double[:, ::1] z = np.ascontiguousarray(w, dtype=np.float64)
    cdef Py_ssize_t p = z.shape[0], h = z.shape[1], i, t
    ret = np.empty((p, h))
    var = np.empty((p, h))
    cdef double[:, ::1] rv = ret
    cdef double[:, ::1] vv = var
    cdef double s2, eps
    for i in range(p):
        s2 = sigma2_first
        for t in range(h):
            eps = z[i, t] * sqrt(s2)
            rv[i, t] = mu + eps
            vv[i, t] = s2
            s2 = omega + alpha * eps * eps + beta * s2
    return ret, var


cdef inline double _act(double z, int act) nogil:
    if act == ACT_LEAKY_RELU:
        return z if z > 0.0 else LEAKY_SLOPE * z
    if act == ACT_SIGMOID:
        return 1.0 / (1.0 + exp(-z))
    return z


def dense_forward(list weights, list biases, acts, x):
    a_arr = np.ascontiguousarray(x, dtype=np.float64)
    outs = [a_arr]
    pres = []
    cdef Py_ssize_t k, r, i, j, B, n_in, n_out
    cdef const double[:, ::1] a
    cdef const double[:, ::1] W
    cdef const double[::1] b
    cdef double[:, ::1] z
    cdef double[:, ::1] o
    cdef double s
    cdef int act
    for k in range(len(weights)):
        a = outs[k]
        W = weights[k]
        b = biases[k]
        act = acts[k]
        B = a.shape[0]
        n_in = a.shape[1]
        n_out = W.shape[0]
        z_arr = np.empty((B, n_out))
        o_arr = np.empty((B, n_out))
        z = z_arr
        o = o_arr
        for r in range(B):
            for j in range(n_out):
                s = b[j]
                for i in range(n_in):
                    s += W[j, i] * a[r, i]
                z[r, j] = s
                o[r, j] = _act(s, act)
        pres.append(z_arr)
        outs.append(o_arr)
    return outs, pres


def dense_backward(list weights, acts, list outs, list pres, gout):
    cdef Py_ssize_t n_layers = len(weights), k, r, i, j, B, n_in, n_out
    dWs = [None] * n_layers
    dbs = [None] * n_layers
    g_arr = np.ascontiguousarray(gout, dtype=np.float64)
    cdef const double[:, ::1] g
    cdef const double[:, ::1] W
    cdef const double[:, ::1] a_in
    cdef const double[:, ::1] a_out
    cdef const double[:, ::1] z
    cdef double[:, ::1] dz
    cdef double[:, ::1] dW
    cdef double[::1] db
    cdef double[:, ::1] gp
    cdef double d, s
    cdef int act
    for k in range(n_layers - 1, -1, -1):
        g = g_arr
        W = weights[k]
        a_in = outs[k]
        a_out = outs[k + 1]
        z = pres[k]
        act = acts[k]
        B = g.shape[0]
        n_out = W.shape[0]
        n_in = W.shape[1]
        dz_arr = np.empty((B, n_out))
        dz = dz_arr
        for r in range(B):
            for j in range(n_out):
                d = g[r, j]
                if act == ACT_LEAKY_RELU:
                    if z[r, j] <= 0.0:
                        d = d * LEAKY_SLOPE
                elif act == ACT_SIGMOID:
                    d = d * a_out[r, j] * (1.0 - a_out[r, j])
                dz[r, j] = d
        dW_arr = np.zeros((n_out, n_in))
        db_arr = np.zeros(n_out)
        gp_arr = np.zeros((B, n_in))
        dW = dW_arr
        db = db_arr
        gp = gp_arr
        for r in range(B):
            for j in range(n_out):
                d = dz[r, j]
                db[j] += d
                for i in range(n_in):
                    dW[j, i] += d * a_in[r, i]
                    gp[r, i] += d * W[j, i]
        dWs[k] = dW_arr
        dbs[k] = db_arr
        g_arr = gp_arr
    return dWs, dbs, g_arr


def adam_update(list params, list grads, list ms, list vs, double lr, double beta1,
                double beta2, double eps, long t):
    cdef double c1 = 1.0 - beta1 ** t
    cdef double c2 = 1.0 - beta2 ** t
    cdef double[::1] p
    cdef const double[::1] g
    cdef double[::1] m
    cdef double[::1] v
    cdef Py_ssize_t k, i
    for k in range(len(params)):
        p = params[k].reshape(-1)
        g = np.ascontiguousarray(grads[k], dtype=np.float64).reshape(-1)
        m = ms[k].reshape(-1)
        v = vs[k].reshape(-1)
        for i in range(p.shape[0]):
            m[i] = beta1 * m[i] + (1.0 - beta1) * g[i]
            v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i]
            p[i] -= lr * (m[i] / c1) / (sqrt(v[i] / c2) + eps)


def acf(x, Py_ssize_t max_lag):
    cdef const double[::1] v = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = v.shape[0], k, t
    cdef double mean = 0.0, denom = 0.0, s
    out = np.zeros(max_lag + 1)
    cdef double[::1] o = out
    o[0] = 1.0
    for t in range(n):
        mean += v[t]
    mean /= n
    for t in range(n):
        denom += (v[t] - mean) * (v[t] - mean)
    if denom <= 0.0:
        return out
    for k in range(1, max_lag + 1):
        s = 0.0
        for t in range(n - k):
            s += (v[t] - mean) * (v[t + k] - mean)
        o[k] = s / denom
    return out
