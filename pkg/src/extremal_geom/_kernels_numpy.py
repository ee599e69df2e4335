"""Pure-numpy versions of the hot loops.

Every function here has a twin in ``_kernels_numba`` with the same signature
and the same output (including ordering), so the two can be swapped freely.
These versions also accept ``dtype=object`` arrays, which is how callers keep
exactness once coordinates no longer fit in int64.
"""

import numpy as np

_EMPTY_PAIRS = np.empty((0, 2), dtype=np.int64)


def _as_pairs(rows, cols):
    if len(rows) == 0:
        return _EMPTY_PAIRS.copy()
    return np.stack([np.asarray(rows, dtype=np.int64), np.asarray(cols, dtype=np.int64)], axis=1)


def coplanar_pairs(bases_a, bases_b, u, v):
    """Pairs (i, j) with det3(bases_b[j] - bases_a[i], u, v) == 0."""
    # cofactor expansion of the determinant along the first row
    cof = np.array(
        [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]],
        dtype=bases_a.dtype,
    )
    rows, cols = [], []
    for i in range(bases_a.shape[0]):
        diff = bases_b - bases_a[i]
        det = diff[:, 0] * cof[0] + diff[:, 1] * cof[1] + diff[:, 2] * cof[2]
        hit = np.nonzero(det == 0)[0]
        if hit.size:
            rows.append(np.full(hit.size, i, dtype=np.int64))
            cols.append(hit.astype(np.int64))
    if not rows:
        return _EMPTY_PAIRS.copy()
    return np.stack([np.concatenate(rows), np.concatenate(cols)], axis=1)


def triangles_csr(indptr, indices):
    """All triangles u < v < w of a graph in CSR form with sorted rows."""
    out = []
    n = len(indptr) - 1
    for u in range(n):
        nu = indices[indptr[u]:indptr[u + 1]]
        nu = nu[nu > u]
        for v in nu:
            nv = indices[indptr[v]:indptr[v + 1]]
            common = np.intersect1d(nu[nu > v], nv[nv > v], assume_unique=True)
            for w in common:
                out.append((u, v, w))
    if not out:
        return np.empty((0, 3), dtype=np.int64)
    return np.asarray(out, dtype=np.int64)


def delaunay_brute(coords):
    """Edges {i, j} whose closed bounding box holds no third point."""
    n = coords.shape[0]
    rows, cols = [], []
    for i in range(n):
        for j in range(i + 1, n):
            lo = np.minimum(coords[i], coords[j])
            hi = np.maximum(coords[i], coords[j])
            inside = np.all((coords >= lo) & (coords <= hi), axis=1)
            # i and j themselves are always inside
            if np.count_nonzero(inside) == 2:
                rows.append(i)
                cols.append(j)
    return _as_pairs(rows, cols)


def delaunay_sweep(coords):
    """Same edge set as ``delaunay_brute``, by a sweep along axis 0.

    For a fixed left endpoint i the candidate j are visited in increasing
    axis-0 order. A passed point k blocks j iff it lies in the same orthant
    as j around i (axes 1..d-1) and is no farther than j on every such axis,
    so only the Pareto-minimal passed points per orthant are kept.
    """
    n, d = coords.shape
    order = np.argsort(coords[:, 0], kind="stable")
    rest = coords[order][:, 1:]
    rows, cols = [], []
    for a in range(n):
        stairs = {}
        for b in range(a + 1, n):
            delta = rest[b] - rest[a]
            orth = tuple(delta > 0)
            dist = np.abs(delta)
            stair = stairs.get(orth)
            if stair is not None and np.any(np.all(stair <= dist, axis=1)):
                continue
            i, j = order[a], order[b]
            rows.append(min(i, j))
            cols.append(max(i, j))
            if stair is None:
                stairs[orth] = dist[None, :]
            else:
                keep = ~np.all(stair >= dist, axis=1)
                stairs[orth] = np.vstack([stair[keep], dist[None, :]])
    pairs = _as_pairs(rows, cols)
    if len(pairs):
        pairs = pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))]
    return pairs


def separation_violation(lo, hi, left, right):
    """First pair of vertex-disjoint edges whose spanned boxes meet, or (-1, -1)."""
    e = lo.shape[0]
    for a in range(e - 1):
        rest = slice(a + 1, e)
        disjoint = (left[rest] != left[a]) & (right[rest] != right[a])
        meet = np.all(np.maximum(lo[rest], lo[a]) <= np.minimum(hi[rest], hi[a]), axis=1)
        hit = np.nonzero(disjoint & meet)[0]
        if hit.size:
            return a, a + 1 + int(hit[0])
    return -1, -1


def block_law_violation(lo, exps, powers, tminus):
    """First pair of blocks whose nonempty intersection fits in no lower block.

    ``lo`` holds lower corners, ``exps`` exponent vectors, ``powers[e] = s**e``
    and ``tminus`` the exponent vectors summing to k - 1.
    """
    nb = lo.shape[0]
    side = powers[exps]
    hi = lo + side
    tpow = powers[tminus]
    for a in range(nb - 1):
        L = np.maximum(lo[a + 1:], lo[a])
        H = np.minimum(hi[a + 1:], hi[a])
        nonempty = np.all(L < H, axis=1)
        idx = np.nonzero(nonempty)[0]
        if idx.size == 0:
            continue
        Ls = L[idx][:, None, :]
        Hs = H[idx][:, None, :] - 1
        fits = np.all(Ls // tpow[None] == Hs // tpow[None], axis=2)
        bad = np.nonzero(~np.any(fits, axis=1))[0]
        if bad.size:
            return a, a + 1 + int(idx[bad[0]])
    return -1, -1


def representative_scan(vecs, p, bound, eps_num, eps_den, chunk=256):
    """Scan all nonzero scalings of each vector mod p.

    Returns (lam, maxabs, bad): the smallest lambda minimizing the largest
    centered coordinate, that minimum, and whether some scaling lands in the
    box [-bound, bound]^3 with a coordinate of absolute value at most
    eps_num/eps_den * bound.
    """
    m = vecs.shape[0]
    lam_out = np.zeros(m, dtype=np.int64)
    max_out = np.zeros(m, dtype=np.int64)
    bad_out = np.zeros(m, dtype=np.bool_)
    lams = np.arange(1, p, dtype=np.int64)
    half = p // 2
    for start in range(0, m, chunk):
        block = vecs[start:start + chunk]
        r = (lams[:, None, None] * block[None, :, :]) % p
        c = np.abs(np.where(r > half, r - p, r))
        mx = c.max(axis=2)
        mn = c.min(axis=2)
        best = np.argmin(mx, axis=0)
        lam_out[start:start + chunk] = best + 1
        max_out[start:start + chunk] = mx[best, np.arange(block.shape[0])]
        bad_out[start:start + chunk] = np.any((mx <= bound) & (mn * eps_den <= eps_num * bound), axis=0)
    return lam_out, max_out, bad_out
