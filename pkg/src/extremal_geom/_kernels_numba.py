"""numba-compiled versions of the hot loops (int64 inputs only).

Signatures and outputs mirror ``_kernels_numpy``. Variable-length outputs use
a count pass followed by a fill pass.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def _det_zero(bi, bj, c0, c1, c2):
    return (bj[0] - bi[0]) * c0 + (bj[1] - bi[1]) * c1 + (bj[2] - bi[2]) * c2 == 0


@njit(cache=True)
def coplanar_pairs(bases_a, bases_b, u, v):
    c0 = u[1] * v[2] - u[2] * v[1]
    c1 = u[2] * v[0] - u[0] * v[2]
    c2 = u[0] * v[1] - u[1] * v[0]
    na, nb = bases_a.shape[0], bases_b.shape[0]
    count = 0
    for i in range(na):
        for j in range(nb):
            if _det_zero(bases_a[i], bases_b[j], c0, c1, c2):
                count += 1
    out = np.empty((count, 2), dtype=np.int64)
    k = 0
    for i in range(na):
        for j in range(nb):
            if _det_zero(bases_a[i], bases_b[j], c0, c1, c2):
                out[k, 0] = i
                out[k, 1] = j
                k += 1
    return out


@njit(cache=True)
def _tri_pass(indptr, indices, out, fill):
    n = indptr.shape[0] - 1
    count = 0
    for u in range(n):
        for a in range(indptr[u], indptr[u + 1]):
            v = indices[a]
            if v <= u:
                continue
            # merge the tails of N(u) and N(v) above v
            p = a + 1
            q = indptr[v]
            qe = indptr[v + 1]
            pe = indptr[u + 1]
            while q < qe and indices[q] <= v:
                q += 1
            while p < pe and q < qe:
                x = indices[p]
                y = indices[q]
                if x == y:
                    if fill:
                        out[count, 0] = u
                        out[count, 1] = v
                        out[count, 2] = x
                    count += 1
                    p += 1
                    q += 1
                elif x < y:
                    p += 1
                else:
                    q += 1
    return count


@njit(cache=True)
def triangles_csr(indptr, indices):
    dummy = np.empty((0, 3), dtype=np.int64)
    count = _tri_pass(indptr, indices, dummy, False)
    out = np.empty((count, 3), dtype=np.int64)
    _tri_pass(indptr, indices, out, True)
    return out


@njit(cache=True)
def _empty_box(coords, i, j):
    n, d = coords.shape
    for k in range(n):
        if k == i or k == j:
            continue
        inside = True
        for a in range(d):
            lo = min(coords[i, a], coords[j, a])
            hi = max(coords[i, a], coords[j, a])
            if coords[k, a] < lo or coords[k, a] > hi:
                inside = False
                break
        if inside:
            return False
    return True


@njit(cache=True)
def delaunay_brute(coords):
    n = coords.shape[0]
    flags = np.zeros((n, n), dtype=np.bool_)
    count = 0
    for i in range(n):
        for j in range(i + 1, n):
            if _empty_box(coords, i, j):
                flags[i, j] = True
                count += 1
    out = np.empty((count, 2), dtype=np.int64)
    k = 0
    for i in range(n):
        for j in range(i + 1, n):
            if flags[i, j]:
                out[k, 0] = i
                out[k, 1] = j
                k += 1
    return out


@njit(cache=True)
def delaunay_sweep(coords):
    n, d = coords.shape
    order = np.argsort(coords[:, 0], kind="mergesort")
    dd = d - 1
    n_orth = 1 << dd
    stair = np.empty((n_orth, n, max(dd, 1)), dtype=np.int64)
    sizes = np.zeros(n_orth, dtype=np.int64)
    dist = np.empty(max(dd, 1), dtype=np.int64)
    flags = np.zeros((n, n), dtype=np.bool_)
    count = 0
    for a in range(n):
        sizes[:] = 0
        pa = order[a]
        for b in range(a + 1, n):
            pb = order[b]
            orth = 0
            for ax in range(dd):
                delta = coords[pb, ax + 1] - coords[pa, ax + 1]
                if delta > 0:
                    orth |= 1 << ax
                dist[ax] = abs(delta)
            blocked = False
            for s in range(sizes[orth]):
                dom = True
                for ax in range(dd):
                    if stair[orth, s, ax] > dist[ax]:
                        dom = False
                        break
                if dom:
                    blocked = True
                    break
            if blocked:
                continue
            i = min(pa, pb)
            j = max(pa, pb)
            flags[i, j] = True
            count += 1
            # drop stair points dominated by the new one, then append it
            w = 0
            for s in range(sizes[orth]):
                geq = True
                for ax in range(dd):
                    if stair[orth, s, ax] < dist[ax]:
                        geq = False
                        break
                if not geq:
                    for ax in range(dd):
                        stair[orth, w, ax] = stair[orth, s, ax]
                    w += 1
            for ax in range(dd):
                stair[orth, w, ax] = dist[ax]
            sizes[orth] = w + 1
    out = np.empty((count, 2), dtype=np.int64)
    k = 0
    for i in range(n):
        for j in range(i + 1, n):
            if flags[i, j]:
                out[k, 0] = i
                out[k, 1] = j
                k += 1
    return out


@njit(cache=True)
def separation_violation(lo, hi, left, right):
    e, dim = lo.shape
    for a in range(e - 1):
        for b in range(a + 1, e):
            if left[a] == left[b] or right[a] == right[b]:
                continue
            meet = True
            for c in range(dim):
                if max(lo[a, c], lo[b, c]) > min(hi[a, c], hi[b, c]):
                    meet = False
                    break
            if meet:
                return a, b
    return -1, -1


@njit(cache=True)
def block_law_violation(lo, exps, powers, tminus):
    nb, d = lo.shape
    nt = tminus.shape[0]
    L = np.empty(d, dtype=np.int64)
    H = np.empty(d, dtype=np.int64)
    for a in range(nb - 1):
        for b in range(a + 1, nb):
            empty = False
            for c in range(d):
                L[c] = max(lo[a, c], lo[b, c])
                H[c] = min(lo[a, c] + powers[exps[a, c]], lo[b, c] + powers[exps[b, c]])
                if L[c] >= H[c]:
                    empty = True
                    break
            if empty:
                continue
            found = False
            for t in range(nt):
                fits = True
                for c in range(d):
                    w = powers[tminus[t, c]]
                    if L[c] // w != (H[c] - 1) // w:
                        fits = False
                        break
                if fits:
                    found = True
                    break
            if not found:
                return a, b
    return -1, -1


@njit(cache=True)
def representative_scan(vecs, p, bound, eps_num, eps_den):
    m = vecs.shape[0]
    lam_out = np.zeros(m, dtype=np.int64)
    max_out = np.zeros(m, dtype=np.int64)
    bad_out = np.zeros(m, dtype=np.bool_)
    half = p // 2
    for i in range(m):
        best = -1
        best_lam = 0
        bad = False
        for lam in range(1, p):
            mx = 0
            mn = p
            for c in range(3):
                r = (lam * vecs[i, c]) % p
                if r > half:
                    r -= p
                r = abs(r)
                if r > mx:
                    mx = r
                if r < mn:
                    mn = r
            if best < 0 or mx < best:
                best = mx
                best_lam = lam
            if mx <= bound and mn * eps_den <= eps_num * bound:
                bad = True
        lam_out[i] = best_lam
        max_out[i] = best
        bad_out[i] = bad
    return lam_out, max_out, bad_out
