"""Time the numba kernels against the numpy fallback on desk-size inputs.

Run with ``python benchmarks/bench_kernels.py [--repeat R] [--quick]``. Each
kernel is warmed up once (so JIT compilation is excluded), its two outputs are
compared, and the best of R wall-clock timings is reported.
"""

import argparse
import time

import numpy as np

from extremal_geom import kernels
from extremal_geom.blocks import FULL, BlockFamily, BoxParams, enumerate_compositions
from extremal_geom.graphs import Graph


def best_time(fn, args, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def same(a, b):
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    a, b = np.asarray(a), np.asarray(b)
    if a.ndim == 2 and a.shape[1] in (2, 3) and a.dtype != bool:
        a = a[np.lexsort(a.T[::-1])]
        b = b[np.lexsort(b.T[::-1])]
    return np.array_equal(a, b)


def cases(scale):
    rng = np.random.default_rng(0)
    n_lines = 1500 * scale
    bases_a = rng.integers(-40, 40, size=(n_lines, 3)).astype(np.int64)
    bases_b = rng.integers(-40, 40, size=(n_lines, 3)).astype(np.int64)
    yield "coplanar_pairs", (bases_a, bases_b, np.array([1, 1, 2]), np.array([3, 2, 1]))

    n = 400 * scale
    g = Graph(n, [(u, v) for u, v in rng.integers(0, n, size=(12 * n, 2)) if u != v])
    yield "triangles_csr", g.csr()

    pts = 150 * scale
    coords = np.stack([rng.permutation(pts) for _ in range(3)], axis=1).astype(np.int64)
    yield "delaunay_brute", (coords,)
    yield "delaunay_sweep", (coords,)

    e = 1000 * scale
    lo = rng.integers(0, 10**6, size=(e, 6)).astype(np.int64)
    hi = lo + rng.integers(0, 1000, size=(e, 6))
    left = np.arange(e, dtype=np.int64)
    yield "separation_violation", (lo, hi, left, left.copy())

    params = BoxParams(d=3, k=2, s=3 + scale)
    full = BlockFamily(FULL, params)
    lows, exps = [], []
    for ti, t in enumerate(full.exponents):
        grids = np.meshgrid(*(np.arange(r, dtype=np.int64) for r in full.radices[ti]), indexing="ij")
        pos = np.stack([gr.reshape(-1) for gr in grids], axis=1)
        lows.append(pos * np.array([params.s**x for x in t], dtype=np.int64))
        exps.append(np.tile(np.array(t, dtype=np.int64), (len(pos), 1)))
    powers = np.array([params.s**x for x in range(params.k + 1)], dtype=np.int64)
    tminus = np.array(enumerate_compositions(params.k - 1, params.d), dtype=np.int64)
    yield "block_law_violation", (np.ascontiguousarray(np.concatenate(lows)), np.concatenate(exps), powers, tminus)

    p = 2003
    vecs = rng.integers(1, p, size=(300 * scale, 3)).astype(np.int64)
    yield "representative_scan", (vecs, p, 600, 1, 200)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--quick", action="store_true", help="smaller inputs")
    args = ap.parse_args()
    if kernels.numba_impl is None:
        raise SystemExit("numba is not installed; nothing to compare")

    print(f"{'kernel':<22}{'numpy s':>10}{'numba s':>10}{'speedup':>9}  agree")
    for name, inputs in cases(1 if args.quick else 2):
        np_fn = getattr(kernels.numpy_impl, name)
        nb_fn = getattr(kernels.numba_impl, name)
        agree = same(np_fn(*inputs), nb_fn(*inputs))  # also warms up the JIT
        t_np = best_time(np_fn, inputs, args.repeat)
        t_nb = best_time(nb_fn, inputs, args.repeat)
        print(f"{name:<22}{t_np:>10.4f}{t_nb:>10.4f}{t_np / max(t_nb, 1e-9):>8.1f}x  {agree}")


if __name__ == "__main__":
    main()
