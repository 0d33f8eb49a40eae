"""numba-compiled versions of the hot kernels (see ``_kernels_numpy``)."""
import os

import numpy as np
from numba import config, njit, prange

if "NUMBA_THREADING_LAYER" not in os.environ:
    # the default order probes TBB first, which warns on older system TBB builds
    try:
        from numba.np.ufunc import omppool  # noqa: F401

        config.THREADING_LAYER = "omp"
    except ImportError:
        config.THREADING_LAYER = "workqueue"

_opts = dict(cache=True, nogil=True, fastmath=False)


@njit(**_opts)
def _lp(v, p):
    n = v.shape[0]
    if np.isinf(p):
        m = 0.0
        for i in range(n):
            a = abs(v[i])
            if a > m:
                m = a
        return m
    s = 0.0
    if p == 1.0:
        for i in range(n):
            s += abs(v[i])
        return s
    if p == 2.0:
        for i in range(n):
            s += v[i] * v[i]
        return np.sqrt(s)
    for i in range(n):
        s += abs(v[i]) ** p
    return s ** (1.0 / p)


@njit(**_opts)
def _lp_diff(a, b, p):
    # same reductions as _lp, without a temporary for a - b
    n = a.shape[0]
    s = 0.0
    if np.isinf(p):
        for i in range(n):
            d = abs(a[i] - b[i])
            if d > s:
                s = d
        return s
    if p == 1.0:
        for i in range(n):
            s += abs(a[i] - b[i])
        return s
    if p == 2.0:
        for i in range(n):
            d = a[i] - b[i]
            s += d * d
        return np.sqrt(s)
    for i in range(n):
        s += abs(a[i] - b[i]) ** p
    return s ** (1.0 / p)


@njit(**_opts)
def row_norms(D, p):
    out = np.empty(D.shape[0])
    for i in range(D.shape[0]):
        out[i] = _lp(D[i], p)
    return out


@njit(parallel=True, **_opts)
def pair_terms_single(X, TX, I, J, p):
    m = I.shape[0]
    dxy = np.empty(m)
    dtt = np.empty(m)
    dxt = np.empty(m)
    for k in prange(m):
        i = I[k]
        j = J[k]
        dxy[k] = _lp_diff(X[i], X[j], p)
        dtt[k] = _lp_diff(TX[i], TX[j], p)
        dxt[k] = _lp_diff(X[i], TX[j], p)
    return dxy, dtt, dxt


@njit(parallel=True, **_opts)
def pair_terms_interval(x, lo, hi, I, J):
    m = I.shape[0]
    dxy = np.empty(m)
    haus = np.empty(m)
    dxt = np.empty(m)
    for k in prange(m):
        i = I[k]
        j = J[k]
        dxy[k] = abs(x[i] - x[j])
        haus[k] = max(abs(lo[i] - lo[j]), abs(hi[i] - hi[j]))
        dxt[k] = max(max(lo[j] - x[i], x[i] - hi[j]), 0.0)
    return dxy, haus, dxt


@njit(parallel=True, **_opts)
def _row_min_dist(A, B, p):
    out = np.empty(A.shape[0])
    for i in prange(A.shape[0]):
        best = np.inf
        for j in range(B.shape[0]):
            d = _lp_diff(A[i], B[j], p)
            if d < best:
                best = d
        out[i] = best
    return out


@njit(**_opts)
def directed_hausdorff(A, B, p):
    return _row_min_dist(A, B, p).max()


@njit(parallel=True, **_opts)
def tail_max_distance(C, tail, p):
    out = np.empty(C.shape[0])
    for i in prange(C.shape[0]):
        worst = 0.0
        for j in range(tail.shape[0]):
            d = _lp_diff(tail[j], C[i], p)
            if d > worst:
                worst = d
        out[i] = worst
    return out
