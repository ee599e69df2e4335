"""Anisotropic base-s blocks, K_{2,2}-free point/box incidences and the
2d-dimensional separation embedding.

A t-block with base s is the half-open box prod_i [s^t_i p_i, s^t_i (p_i + 1)).
The full family holds every block of volume m = s^k inside [0, m]^d
(sum t = k); the lower family holds blocks with sum t = k - 1.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import ceil, comb

import numpy as np

from . import kernels
from .errors import ParameterError, RetriesExhausted
from .geom import DyadicPoint, PointSet
from .graphs import BipartiteIncidence

log = logging.getLogger(__name__)

FULL = "full"
MINUS = "minus"


@dataclass(frozen=True)
class BoxParams:
    d: int
    k: int
    s: int
    oversample: Fraction = Fraction(2)
    seed: int = 0
    bits: int = 53

    def __post_init__(self):
        object.__setattr__(self, "oversample", Fraction(self.oversample))
        if self.d < 2:
            raise ParameterError(f"d must be at least 2, got {self.d}")
        if self.k < 1:
            raise ParameterError(f"k must be at least 1, got {self.k}")
        if self.s < 2:
            raise ParameterError(f"s must be at least 2, got {self.s}")
        if self.oversample < 1:
            raise ParameterError("oversample must be at least 1")
        if self.bits < 0:
            raise ParameterError("bits must be nonnegative")
        if self.m >= 2**62:
            raise ParameterError(f"m = s^k = {self.m} is too large")

    @property
    def m(self):
        return self.s**self.k

    @property
    def n_full(self):
        """|T_k| * m^{d-1}: the number of boxes in the full family."""
        return comb(self.k + self.d - 1, self.d - 1) * self.m ** (self.d - 1)

    def nominal_params(self):
        """The coupled values s = 100 k^{2d}, m = s^k, n for this (d, k)."""
        s = 100 * self.k ** (2 * self.d)
        m = s**self.k
        return {"s": s, "m_digits": len(str(m)), "n_digits": len(str(m ** (self.d - 1) * comb(self.k + self.d - 1, self.d - 1)))}


@dataclass(frozen=True, order=True)
class Block:
    t: tuple
    p: tuple
    s: int

    def lower(self):
        return tuple(self.s**ti * pi for ti, pi in zip(self.t, self.p))

    def upper(self):
        """Exclusive upper corner."""
        return tuple(self.s**ti * (pi + 1) for ti, pi in zip(self.t, self.p))

    def contains(self, x):
        scale = 2**x.bits
        return all(lo * scale <= c < hi * scale for lo, hi, c in zip(self.lower(), self.upper(), x.num))

    def to_json(self):
        return {"t": list(self.t), "p": list(self.p), "s": self.s}


def enumerate_compositions(l, d):
    """All t in N^d with sum l, in lexicographic order."""
    if l < 0 or d < 1:
        raise ParameterError("need l >= 0 and d >= 1")
    if d == 1:
        return [(l,)]
    return [(first,) + rest for first in range(l + 1) for rest in enumerate_compositions(l - first, d - 1)]


def block_of_point(x, t, s):
    scale = 2**x.bits
    return Block(tuple(t), tuple(c // (s**ti * scale) for c, ti in zip(x.num, t)), s)


class BlockFamily:
    def __init__(self, kind, params):
        if kind not in (FULL, MINUS):
            raise ParameterError(f"unknown family kind {kind!r}")
        if kind == MINUS and params.k < 1:
            raise ParameterError("the lower family needs k >= 1")
        self.kind = kind
        self.params = params
        level = params.k if kind == FULL else params.k - 1
        self.exponents = enumerate_compositions(level, params.d)
        self.radices = [tuple(params.s ** (params.k - ti) for ti in t) for t in self.exponents]
        sizes = [int(np.prod(r, dtype=object)) for r in self.radices]
        self.offsets = [0]
        for sz in sizes:
            self.offsets.append(self.offsets[-1] + sz)

    def __len__(self):
        return self.offsets[-1]

    def index(self, ti, p):
        idx = 0
        for pi, rad in zip(p, self.radices[ti]):
            idx = idx * rad + int(pi)
        return self.offsets[ti] + idx

    def block(self, idx):
        ti = int(np.searchsorted(self.offsets, idx, side="right")) - 1
        rem = idx - self.offsets[ti]
        p = []
        for rad in reversed(self.radices[ti]):
            p.append(rem % rad)
            rem //= rad
        return Block(self.exponents[ti], tuple(reversed(p)), self.params.s)

    def __iter__(self):
        for ti, t in enumerate(self.exponents):
            for p in product(*(range(r) for r in self.radices[ti])):
                yield Block(t, p, self.params.s)

    def positions(self, points, ti):
        """(n, d) block positions of ``points`` for exponent ``exponents[ti]``."""
        scale = 2**points.bits
        divs = [self.params.s**e * scale for e in self.exponents[ti]]
        out = np.empty(points.num.shape, dtype=np.int64)
        for a, dv in enumerate(divs):
            out[:, a] = points.num[:, a] // dv
        return out

    def block_indices(self, points):
        """(n, |T|) family indices of the block holding each point, per exponent."""
        out = np.empty((len(points), len(self.exponents)), dtype=np.int64)
        for ti in range(len(self.exponents)):
            pos = self.positions(points, ti)
            idx = np.zeros(len(points), dtype=np.int64)
            for a, rad in enumerate(self.radices[ti]):
                idx = idx * rad + pos[:, a]
            out[:, ti] = self.offsets[ti] + idx
        return out

    def occupancy(self, points):
        """Dict block index -> sorted list of point indices (nonempty blocks only)."""
        idx = self.block_indices(points)
        if idx.size == 0:
            return {}
        blocks = idx.reshape(-1)
        owners = np.repeat(np.arange(len(points), dtype=np.int64), idx.shape[1])
        order = np.lexsort((owners, blocks))
        blocks, owners = blocks[order], owners[order]
        starts = np.flatnonzero(np.r_[True, blocks[1:] != blocks[:-1]])
        return {int(blocks[a]): g.tolist() for a, g in zip(starts, np.split(owners, starts[1:]))}


@dataclass
class CleanPointSet:
    points: PointSet
    params: BoxParams
    stats: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.points)


def _draw_numerators(rng, shape, m, bits):
    top = m << bits
    if top < 2**62:
        return rng.integers(0, top, size=shape, dtype=np.int64)
    ip = rng.integers(0, m, size=shape, dtype=np.int64).astype(object)
    frac = np.zeros(shape, dtype=object)
    done = 0
    while done < bits:
        w = min(30, bits - done)
        frac = frac * (1 << w) + rng.integers(0, 1 << w, size=shape, dtype=np.int64).astype(object)
        done += w
    return ip * (1 << bits) + frac


def _resolve_collisions(num, rng, m, bits, max_rounds=1000):
    for a in range(num.shape[1]):
        for _ in range(max_rounds):
            col = [int(c) for c in num[:, a]]
            seen, dup = set(), []
            for i, c in enumerate(col):
                if c in seen:
                    dup.append(i)
                seen.add(c)
            if not dup:
                break
            num[dup, a] = _draw_numerators(rng, (len(dup),), m, bits)
        else:
            raise RetriesExhausted(f"could not separate coordinates on axis {a}")
    return num


def _pairs_in_same_block(points, family):
    """Number of pairs sharing a block of ``family`` and the points in such pairs."""
    n_pairs = 0
    crowded = set()
    for members in family.occupancy(points).values():
        if len(members) >= 2:
            crowded.update(members)
            n_pairs += comb(len(members), 2)
    return n_pairs, crowded


def triple_count(points, family):
    """Number of (block, point triple) incidences: sum over blocks of C(n_B, 3)."""
    return sum(comb(len(v), 3) for v in family.occupancy(points).values())


def lower_block_violations(points, params):
    minus = BlockFamily(MINUS, params)
    return [(minus.block(b), v) for b, v in sorted(minus.occupancy(points).items()) if len(v) >= 2]


def _delete_pairs_attempt(params, n, oversample, rng):
    m, bits = params.m, params.bits
    q = ceil(oversample * n) * 2
    num = _resolve_collisions(_draw_numerators(rng, (q, params.d), m, bits), rng, m, bits)
    sample = PointSet(num, bits, m)
    n_bad, crowded = _pairs_in_same_block(sample, BlockFamily(MINUS, params))
    survivors = [i for i in range(q) if i not in crowded]
    return sample, survivors, n_bad


def _sequential_fill(params, n, rng, max_draws):
    """Random sequential rejection: keep a draw only if its lower blocks are free."""
    m, bits, d, s = params.m, params.bits, params.d, params.s
    tminus = enumerate_compositions(params.k - 1, d)
    scale = 2**bits
    divs = [[s**e * scale for e in t] for t in tminus]
    occupied = [set() for _ in tminus]
    seen_axis = [set() for _ in range(d)]
    kept = []
    draws = 0
    batch = max(64, n)
    while len(kept) < n and draws < max_draws:
        num = _draw_numerators(rng, (batch, d), m, bits)
        for row in num:
            draws += 1
            row = [int(c) for c in row]
            if any(c in seen_axis[a] for a, c in enumerate(row)):
                continue
            keys = [tuple(c // dv for c, dv in zip(row, dvs)) for dvs in divs]
            if any(key in occ for key, occ in zip(keys, occupied)):
                continue
            for key, occ in zip(keys, occupied):
                occ.add(key)
            for a, c in enumerate(row):
                seen_axis[a].add(c)
            kept.append(row)
            if len(kept) == n or draws >= max_draws:
                break
    return kept, draws


def sample_clean_points(params, n, strategy="auto", max_retries=5, max_draws=None):
    """Uniform dyadic points in [0, m)^d with at most one point per lower block.

    ``delete-pairs`` samples 2*ceil(oversample*n) points, drops both members of
    every pair sharing a lower block and retries with doubled oversampling.
    ``sequential`` draws points one at a time and rejects those that would
    share a lower block. ``auto`` tries delete-pairs first.
    """
    if n < 1:
        raise ParameterError("n must be positive")
    if strategy not in ("auto", "delete-pairs", "sequential"):
        raise ParameterError(f"unknown strategy {strategy!r}")
    rng = np.random.default_rng(np.random.SeedSequence(params.seed))
    full = BlockFamily(FULL, params)
    stats = {"target": n, "attempts": []}
    if strategy in ("auto", "delete-pairs"):
        oversample = params.oversample
        for attempt in range(max_retries + 1):
            sample, survivors, n_bad = _delete_pairs_attempt(params, n, oversample, rng)
            stats["attempts"].append(
                {"oversample": str(oversample), "sampled": len(sample), "bad_pairs": n_bad, "survivors": len(survivors)}
            )
            if len(survivors) >= n:
                pts = sample.subset(survivors[:n]).lexsorted()
                stats.update(
                    strategy="delete-pairs",
                    sampled=len(sample),
                    bad_pairs=n_bad,
                    triples_sample=triple_count(sample, full),
                    triples=triple_count(pts, full),
                )
                return CleanPointSet(pts, params, stats)
            if strategy == "auto" and attempt and len(survivors) <= stats["attempts"][-2]["survivors"]:
                # past the optimum: more oversampling only crowds the blocks
                break
            oversample *= 2
        if strategy == "delete-pairs":
            raise RetriesExhausted(
                f"delete-pairs cleaning kept at most {max(a['survivors'] for a in stats['attempts'])} "
                f"of {n} points after {max_retries} retries"
            )
        log.info("delete-pairs cleaning fell short of %d points; switching to sequential fill", n)
    if max_draws is None:
        max_draws = 200 * n + 10_000
    kept, draws = _sequential_fill(params, n, rng, max_draws)
    if len(kept) < n:
        raise RetriesExhausted(f"sequential fill placed {len(kept)} of {n} points in {draws} draws")
    pts = PointSet.from_rows(kept, params.bits, params.m, d=params.d).lexsorted()
    stats.update(strategy="sequential", sampled=draws, bad_pairs=0, triples=triple_count(pts, full))
    return CleanPointSet(pts, params, stats)


def incidence_graph(points, family):
    if family.kind != FULL:
        raise ParameterError("incidence graphs use the full family")
    idx = family.block_indices(points)
    left = np.repeat(np.arange(len(points), dtype=np.int64), idx.shape[1])
    edges = np.stack([left, idx.reshape(-1)], axis=1)
    return BipartiteIncidence(len(points), len(family), edges)


def degree_histogram(incidence):
    deg = incidence.left_degrees()
    values, counts = np.unique(deg, return_counts=True)
    return {int(v): int(c) for v, c in zip(values, counts)}


def degree_histogram_csv(hist):
    lines = ["degree,count"] + [f"{d},{c}" for d, c in sorted(hist.items())]
    return "\n".join(lines) + "\n"


def van_der_corput(t, scale=1):
    """The 2^t points (0.x1..xt, 0.xt..x1), optionally scaled, as dyadic points."""
    if t < 1:
        raise ParameterError("t must be at least 1")
    pts = []
    for x in range(2**t):
        rev = int(format(x, f"0{t}b")[::-1], 2)
        pts.append(DyadicPoint((x * scale, rev * scale), t))
    return pts


def dyadic_net_violations(points, t):
    """Canonical dyadic rectangles of area 2^-t not holding exactly one point.

    Points must lie in [0,1)^2 with denominator 2^t. Returns (i, a, b, count)
    for the rectangle [a/2^i, (a+1)/2^i) x [b/2^(t-i), (b+1)/2^(t-i)).
    """
    xs = np.array([p.num[0] for p in points], dtype=np.int64)
    ys = np.array([p.num[1] for p in points], dtype=np.int64)
    if any(p.bits != t for p in points):
        raise ParameterError("points must have denominator 2^t")
    bad = []
    for i in range(t + 1):
        a = xs >> (t - i)
        b = ys >> i
        counts = np.bincount(a * 2 ** (t - i) + b, minlength=2**t)
        for cell in np.nonzero(counts != 1)[0]:
            bad.append((i, int(cell) // 2 ** (t - i), int(cell) % 2 ** (t - i), int(counts[cell])))
    return bad


@dataclass
class SeparationEmbedding:
    """Images in 2d-space, in units of 2^-bits.

    Points map to (x, -x). A half-open block [a, b) maps to (b', -a) with
    b' = b - 2^-bits, the last grid value inside it, so membership of grid
    points is exactly the coordinatewise order.
    """

    point_phi: np.ndarray
    box_phi: np.ndarray
    box_ids: np.ndarray
    bits: int

    def box_row(self, box):
        return int(np.searchsorted(self.box_ids, box))


def _as_grid_array(rows):
    top = max((abs(int(c)) for r in rows for c in r), default=0)
    return np.array(rows, dtype=np.int64 if top < 2**62 else object).reshape(len(rows), -1)


def separation_embedding(points, family, box_ids=None):
    d = points.d
    scale = 2**points.bits
    phi_p = [[int(c) for c in row] + [-int(c) for c in row] for row in points.num]
    if box_ids is None:
        box_ids = range(len(family))
    box_ids = np.array(sorted(int(b) for b in box_ids), dtype=np.int64)
    phi_b = []
    for b in box_ids:
        blk = family.block(int(b))
        lo, hi = blk.lower(), blk.upper()
        phi_b.append([h * scale - 1 for h in hi] + [-l * scale for l in lo])
    return SeparationEmbedding(_as_grid_array(phi_p), _as_grid_array(phi_b).reshape(len(box_ids), 2 * d), box_ids, points.bits)


def embedding_order_violations(points, family, emb, limit=10):
    """Point/box pairs where exact membership disagrees with phi(p) <= phi(B)."""
    members = family.block_indices(points)
    bad = []
    for bi, b in enumerate(emb.box_ids):
        below = np.all(emb.point_phi <= emb.box_phi[bi], axis=1)
        inside = np.any(members == b, axis=1)
        for i in np.nonzero(below != inside)[0]:
            bad.append((int(i), int(b)))
            if len(bad) >= limit:
                return bad
    return bad


def verify_separation(emb, incidence):
    """True, or the first pair of disjoint incidence edges with meeting boxes."""
    edges = incidence.edges
    rows = np.array([emb.box_row(b) for b in edges[:, 1]], dtype=np.int64)
    lo = emb.point_phi[edges[:, 0]]
    hi = emb.box_phi[rows]
    if lo.dtype != object and hi.dtype != object:
        lo = np.ascontiguousarray(lo, dtype=np.int64)
        hi = np.ascontiguousarray(hi, dtype=np.int64)
    else:
        lo, hi = lo.astype(object), hi.astype(object)
    a, b = kernels.separation_violation(lo, hi, edges[:, 0], edges[:, 1])
    if a < 0:
        return True
    return tuple(int(x) for x in edges[a]), tuple(int(x) for x in edges[b])


def block_law_violation(params):
    """First pair of full-family blocks whose intersection escapes every lower block."""
    full = BlockFamily(FULL, params)
    s, k = params.s, params.k
    lo, exps = [], []
    for ti, t in enumerate(full.exponents):
        grids = np.meshgrid(*(np.arange(r, dtype=np.int64) for r in full.radices[ti]), indexing="ij")
        pos = np.stack([g.reshape(-1) for g in grids], axis=1)
        lo.append(pos * np.array([s**e for e in t], dtype=np.int64))
        exps.append(np.tile(np.array(t, dtype=np.int64), (len(pos), 1)))
    lo = np.ascontiguousarray(np.concatenate(lo))
    exps = np.concatenate(exps)
    powers = np.array([s**e for e in range(k + 1)], dtype=np.int64)
    tminus = np.array(enumerate_compositions(k - 1, params.d), dtype=np.int64)
    a, b = kernels.block_law_violation(lo, exps, powers, tminus)
    if a < 0:
        return None
    return full.block(a), full.block(b)
