"""Pure-numpy reference versions of the hot kernels.

Every function here has a loop-based twin in ``_kernels_numba`` with the
same signature and the same outputs up to rounding.
"""
import numpy as np


def row_norms(D, p):
    """l_p norm of every row of a 2-d array."""
    D = np.abs(D)
    if np.isinf(p):
        return D.max(axis=1) if D.shape[1] else np.zeros(D.shape[0])
    if p == 1.0:
        return D.sum(axis=1)
    if p == 2.0:
        return np.sqrt((D * D).sum(axis=1))
    return (D ** p).sum(axis=1) ** (1.0 / p)


def pair_terms_single(X, TX, I, J, p):
    """Per-pair distances for a single-valued map.

    Returns ``(|x_i - x_j|, |Tx_i - Tx_j|, |x_i - Tx_j|)``.
    """
    dxy = row_norms(X[I] - X[J], p)
    dtt = row_norms(TX[I] - TX[J], p)
    dxt = row_norms(X[I] - TX[J], p)
    return dxy, dtt, dxt


def pair_terms_interval(x, lo, hi, I, J):
    """Per-pair distances for an interval-valued map on the real line.

    Returns ``(|x_i - x_j|, H(Tx_i, Tx_j), dist(x_i, Tx_j))``.
    """
    dxy = np.abs(x[I] - x[J])
    haus = np.maximum(np.abs(lo[I] - lo[J]), np.abs(hi[I] - hi[J]))
    xi = x[I]
    dxt = np.maximum(np.maximum(lo[J] - xi, xi - hi[J]), 0.0)
    return dxy, haus, dxt


def directed_hausdorff(A, B, p):
    """max over rows a of A of min over rows b of B of |a - b|_p."""
    out = 0.0
    # chunked to keep the (chunk, len(B), d) temporary small
    step = max(1, 2_000_000 // max(1, B.shape[0] * B.shape[1]))
    for s in range(0, A.shape[0], step):
        blk = A[s:s + step]
        diff = (blk[:, None, :] - B[None, :, :]).reshape(-1, A.shape[1])
        d = row_norms(diff, p).reshape(blk.shape[0], B.shape[0])
        out = max(out, float(d.min(axis=1).max()))
    return out


def tail_max_distance(C, tail, p):
    """For each candidate row c of C, max over rows x of ``tail`` of |x - c|_p."""
    out = np.empty(C.shape[0])
    step = max(1, 2_000_000 // max(1, tail.shape[0] * tail.shape[1]))
    for s in range(0, C.shape[0], step):
        blk = C[s:s + step]
        diff = (blk[:, None, :] - tail[None, :, :]).reshape(-1, C.shape[1])
        d = row_norms(diff, p).reshape(blk.shape[0], tail.shape[0])
        out[s:s + step] = d.max(axis=1)
    return out
