"""Kernel dispatch between the numba and numpy implementations.

The numba path is used when numba imports and ``EXTREMAL_GEOM_DISABLE_NUMBA``
is unset (or ``0``). Inputs holding Python integers (``dtype=object``) always
go through numpy, since numba only sees machine integers.
"""

import os

import numpy as np

from . import _kernels_numpy as numpy_impl

try:
    from . import _kernels_numba as numba_impl
except ImportError:  # numba missing
    numba_impl = None

_FLAG = os.environ.get("EXTREMAL_GEOM_DISABLE_NUMBA", "").strip().lower()
USE_NUMBA = numba_impl is not None and _FLAG in ("", "0", "false", "no")

# headroom so sums of a few products never wrap
INT64_SAFE = 2**62


def backend():
    return "numba" if USE_NUMBA else "numpy"


def set_threads(n):
    """Cap kernel worker threads (no-op on the numpy path)."""
    if USE_NUMBA and n:
        import numba

        numba.set_num_threads(max(1, min(int(n), numba.config.NUMBA_NUM_THREADS)))


def fits_int64(*values, factor=1):
    """True when ``factor * max|value|`` stays below the int64 headroom."""
    top = 0
    for v in values:
        if isinstance(v, np.ndarray):
            if v.size == 0:
                continue
            v = max(abs(int(v.max())), abs(int(v.min())))
        top = max(top, abs(int(v)))
    return top * factor < INT64_SAFE


def _impl(*arrays):
    if USE_NUMBA and all(a.dtype != object for a in arrays):
        return numba_impl
    return numpy_impl


def _sorted_pairs(pairs):
    if len(pairs) == 0:
        return np.empty((0, 2), dtype=np.int64)
    return pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))]


def coplanar_pairs(bases_a, bases_b, u, v):
    u = np.asarray(u, dtype=bases_a.dtype)
    v = np.asarray(v, dtype=bases_a.dtype)
    return _sorted_pairs(_impl(bases_a, bases_b).coplanar_pairs(bases_a, bases_b, u, v))


def triangles_csr(indptr, indices):
    indptr = np.ascontiguousarray(indptr, dtype=np.int64)
    indices = np.ascontiguousarray(indices, dtype=np.int64)
    return _impl(indices).triangles_csr(indptr, indices)


def delaunay_brute(coords):
    coords = np.ascontiguousarray(coords)
    return _sorted_pairs(_impl(coords).delaunay_brute(coords))


def delaunay_sweep(coords):
    coords = np.ascontiguousarray(coords)
    return _sorted_pairs(_impl(coords).delaunay_sweep(coords))


def separation_violation(lo, hi, left, right):
    left = np.ascontiguousarray(left, dtype=np.int64)
    right = np.ascontiguousarray(right, dtype=np.int64)
    a, b = _impl(lo, hi).separation_violation(lo, hi, left, right)
    return int(a), int(b)


def block_law_violation(lo, exps, powers, tminus):
    exps = np.ascontiguousarray(exps, dtype=np.int64)
    tminus = np.ascontiguousarray(tminus, dtype=np.int64)
    a, b = _impl(lo, powers).block_law_violation(lo, exps, powers, tminus)
    return int(a), int(b)


def representative_scan(vecs, p, bound, eps_num, eps_den):
    vecs = np.ascontiguousarray(vecs, dtype=np.int64)
    impl = numba_impl if USE_NUMBA else numpy_impl
    return impl.representative_scan(vecs, int(p), int(bound), int(eps_num), int(eps_den))
