"""Backend switch for the hot kernels.

The numba versions are used unless ``COMMONFIX_DISABLE_NUMBA`` is set to a
truthy value (or numba cannot be imported); the pure-numpy versions are the
fallback and the reference.  All public wrappers coerce their inputs to
contiguous float64 / int64 arrays so both backends see identical data.
"""
import os

import numpy as np

from . import _kernels_numpy

_DISABLED = os.environ.get("COMMONFIX_DISABLE_NUMBA", "").strip().lower() not in ("", "0", "false", "no")

if _DISABLED:
    _numba_impl = None
else:
    try:
        from . import _kernels_numba as _numba_impl
    except ImportError:  # pragma: no cover - numba is a declared dependency
        _numba_impl = None

BACKEND = "numpy" if _numba_impl is None else "numba"
_impl = _kernels_numpy if _numba_impl is None else _numba_impl


def backends():
    """Available kernel modules keyed by name (used by the parity tests and the benchmark)."""
    out = {"numpy": _kernels_numpy}
    if _numba_impl is not None:
        out["numba"] = _numba_impl
    return out


def set_threads(n):
    """Limit the numba thread pool; a no-op for the numpy backend."""
    if _numba_impl is None or n is None:
        return
    import numba

    numba.set_num_threads(max(1, min(int(n), numba.config.NUMBA_NUM_THREADS)))


def _f(a, ndim):
    a = np.ascontiguousarray(a, dtype=np.float64)
    if a.ndim != ndim:
        raise ValueError(f"expected a {ndim}-d array, got shape {a.shape}")
    return a


def _i(a):
    return np.ascontiguousarray(a, dtype=np.int64)


def row_norms(D, p):
    return _impl.row_norms(_f(D, 2), float(p))


def pair_terms_single(X, TX, I, J, p):
    return _impl.pair_terms_single(_f(X, 2), _f(TX, 2), _i(I), _i(J), float(p))


def pair_terms_interval(x, lo, hi, I, J):
    return _impl.pair_terms_interval(_f(x, 1), _f(lo, 1), _f(hi, 1), _i(I), _i(J))


def directed_hausdorff(A, B, p):
    A, B = _f(A, 2), _f(B, 2)
    if A.shape[0] == 0 or B.shape[0] == 0:
        raise ValueError("directed Hausdorff distance of an empty set")
    return float(_impl.directed_hausdorff(A, B, float(p)))


def tail_max_distance(C, tail, p):
    return _impl.tail_max_distance(_f(C, 2), _f(tail, 2), float(p))
