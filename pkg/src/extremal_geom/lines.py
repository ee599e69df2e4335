"""Line families over a direction set and their intersection graphs.

A line family holds every line whose direction belongs to the direction set
and which passes through at least ``r`` points of the grid {1..k}^3. Sampling
the family and deleting one vertex per triangle yields a triangle-free
intersection graph of lines.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import numpy as np

from . import kernels
from .errors import InfeasibleConstants, ParameterError
from .geom import IntVec3, Line3, intersection_point, lines_intersect, point_on_line, primitive
from .graphs import Graph, enumerate_triangles
from .vectors import DirectionSet, VectorParams, build_direction_set

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Constants:
    """Constants of the size, plane, triangle and independent-set counts.

    Defaults are derived from epsilon; each one may be overridden to explore
    desk-scale feasibility.
    """

    epsilon: Fraction = Fraction(1, 200)
    c_l: Fraction | None = None
    c_h: Fraction | None = None
    c_t: Fraction | None = None
    c_j: Fraction | None = None
    c_s: Fraction = Fraction(1, 64)

    def __post_init__(self):
        eps = Fraction(self.epsilon)
        object.__setattr__(self, "epsilon", eps)
        if self.c_l is None:
            object.__setattr__(self, "c_l", eps / 8)
        if self.c_h is None:
            object.__setattr__(self, "c_h", 16 / eps)
        if self.c_t is None:
            object.__setattr__(self, "c_t", Fraction(self.c_h) ** 3)
        if self.c_j is None:
            object.__setattr__(self, "c_j", Fraction(self.c_h))
        for name in ("c_l", "c_h", "c_t", "c_j", "c_s"):
            object.__setattr__(self, name, Fraction(getattr(self, name)))


@dataclass(frozen=True)
class LineParams:
    k: int
    r: int
    directions: DirectionSet
    sample_prob: Fraction = Fraction(1, 10)
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "sample_prob", Fraction(self.sample_prob))
        if self.r < 2:
            raise ParameterError(f"r must be at least 2, got {self.r}")
        if self.k < 1:
            raise ParameterError(f"k must be positive, got {self.k}")
        if not 0 < self.sample_prob < 1:
            raise ParameterError(f"sample probability must lie in (0, 1), got {self.sample_prob}")

    def scale_report(self):
        """How far (k, r, N) is from the coupling k = 2*N*r; reported only."""
        N = self.directions.params.N
        return {"k": self.k, "r": self.r, "N": N, "m": str(Fraction(self.k, self.r)), "coupled": self.k == 2 * N * self.r}


@dataclass
class LineFamily:
    lines: list
    params: LineParams
    types: list = field(default_factory=list)
    counts: list = field(default_factory=list)

    def __len__(self):
        return len(self.lines)

    def type_groups(self):
        groups = {}
        for i, t in enumerate(self.types):
            groups.setdefault(t, []).append(i)
        return groups

    def to_json(self):
        return [{"base": list(l.base), "dir": list(l.dir), "points": c} for l, c in zip(self.lines, self.counts)]


@dataclass
class PlaneFamily:
    """For each direction pair (i, j), planes keyed by offset <n, x>.

    ``planes[(i, j)][c]`` is ``(X, Y)``: indices of the type-i and type-j
    lines lying in the plane with normal ``normals[(i, j)]`` and offset c.
    """

    normals: dict
    planes: dict

    def sizes(self):
        return {key: len(v) for key, v in self.planes.items()}

    def __len__(self):
        return sum(len(v) for v in self.planes.values())

    def bipartite_blocks(self):
        for key, planes in self.planes.items():
            for offset, (xs, ys) in planes.items():
                yield key, offset, xs, ys


@dataclass
class CleanedGraph:
    graph: Graph
    vertices: list
    removed: list
    stats: dict


def build_line_family(params):
    """All canonical lines with a direction in S and at least r points of {1..k}^3."""
    k, r = params.k, params.r
    grid = np.stack(np.meshgrid(*(np.arange(1, k + 1, dtype=np.int64),) * 3, indexing="ij"), axis=-1).reshape(-1, 3)
    found = []
    for ti, v in enumerate(params.directions.elements):
        d = np.array(v, dtype=np.int64)
        t = grid[:, 0] // d[0]
        bases = np.unique(grid - t[:, None] * d[None, :], axis=0)
        for b in bases:
            line = Line3(IntVec3(*(int(x) for x in b)), IntVec3(*v))
            c = line.grid_count(k)
            if c >= r:
                found.append((line, ti, c))
    found.sort(key=lambda item: item[0])
    fam = LineFamily([f[0] for f in found], params, [f[1] for f in found], [f[2] for f in found])
    log.info("line family: %d lines over %d directions", len(fam), len(params.directions))
    return fam


def _bases(family, idx):
    return np.array([list(family.lines[i].base) for i in idx], dtype=np.int64).reshape(-1, 3)


def intersection_graph(family):
    """Pairwise exact intersection tests, bucketed by direction type."""
    n = len(family)
    g = Graph(n, labels=family.lines)
    groups = family.type_groups()
    dirs = family.params.directions.elements
    keys = sorted(groups)
    for a, b in combinations(keys, 2):
        ia, ib = groups[a], groups[b]
        ba, bb = _bases(family, ia), _bases(family, ib)
        u, v = dirs[a], dirs[b]
        top = max(int(np.abs(ba).max()), int(np.abs(bb).max()), max(u), max(v))
        if kernels.fits_int64(top, factor=12 * top * top):
            pairs = kernels.coplanar_pairs(ba, bb, np.array(u), np.array(v))
        else:
            pairs = kernels.coplanar_pairs(ba.astype(object), bb.astype(object), np.array(u, dtype=object), np.array(v, dtype=object))
        for i, j in pairs:
            g.add_edge(ia[int(i)], ib[int(j)])
    # same-type lines are parallel; distinct canonical lines never meet
    return g


def intersection_graph_bruteforce(family):
    """Reference O(n^2) loop over lines_intersect (small families only)."""
    n = len(family)
    g = Graph(n, labels=family.lines)
    for i in range(n):
        for j in range(i + 1, n):
            if lines_intersect(family.lines[i], family.lines[j]):
                g.add_edge(i, j)
    return g


def build_plane_families(family):
    dirs = family.params.directions.elements
    groups = family.type_groups()
    normals, planes = {}, {}
    for a, b in combinations(range(len(dirs)), 2):
        nrm = primitive(IntVec3(*dirs[a]).cross(dirs[b]))
        normals[(a, b)] = nrm
        xs, ys = {}, {}
        for i in groups.get(a, []):
            xs.setdefault(nrm.dot(family.lines[i].base), []).append(i)
        for j in groups.get(b, []):
            ys.setdefault(nrm.dot(family.lines[j].base), []).append(j)
        planes[(a, b)] = {c: (xs[c], ys[c]) for c in sorted(xs.keys() & ys.keys())}
    return PlaneFamily(normals, planes)


def plane_bound(k, r, epsilon=Fraction(1, 200)):
    """(16/epsilon) * k^3 / r^2."""
    return Fraction(16) / Fraction(epsilon) * Fraction(k**3, r * r)


def edge_partition_check(graph, planes):
    """Compare E(G) with the union of the complete bipartite plane blocks.

    Returns (missing, extra, repeated): edges of G covered by no block, block
    pairs that are not edges of G, and edges covered more than once.
    """
    covered = {}
    for _, _, xs, ys in planes.bipartite_blocks():
        for x in xs:
            for y in ys:
                e = (min(x, y), max(x, y))
                covered[e] = covered.get(e, 0) + 1
    edges = graph.edge_set()
    missing = edges - covered.keys()
    extra = covered.keys() - edges
    repeated = {e for e, c in covered.items() if c > 1}
    return missing, extra, repeated


def nonconcurrent_triangles(family, triangles, limit=None):
    """Triangles whose three lines do not share a common point."""
    bad = []
    for tri in triangles:
        l1, l2, l3 = (family.lines[i] for i in tri)
        if len({family.types[i] for i in tri}) < 3:
            raise ParameterError(f"triangle {tri} has two lines of the same type; not from an intersection graph")
        if not lines_intersect(l1, l2) or not point_on_line(intersection_point(l1, l2), l3):
            bad.append(tri)
            if limit is not None and len(bad) >= limit:
                break
    return bad


def verify_triangle_concurrency(family, triangles):
    bad = nonconcurrent_triangles(family, triangles, limit=1)
    if bad:
        log.error("non-concurrent triangle %s", bad[0])
    return not bad


def bernoulli_mask(n, prob, seed):
    """Exact Bernoulli(prob) draws for a rational prob."""
    prob = Fraction(prob)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    return rng.integers(0, prob.denominator, size=n) < prob.numerator


def clean_triangles(graph, vertices):
    """Delete the smallest surviving vertex of each triangle, in lex order.

    Returns (kept, removed, triangle_count) where indices refer to ``graph``.
    """
    h = graph.induced(vertices)
    triangles = enumerate_triangles(h)
    alive = np.ones(h.n, dtype=bool)
    removed = []
    for tri in triangles:
        if all(alive[list(tri)]):
            alive[tri[0]] = False
            removed.append(vertices[tri[0]])
    kept = [v for i, v in enumerate(vertices) if alive[i]]
    return kept, removed, len(triangles)


def sparsify_and_clean(family, graph, sample_prob, seed):
    sample_prob = Fraction(sample_prob)
    if not 0 < sample_prob < 1:
        raise ParameterError(f"sample probability must lie in (0, 1), got {sample_prob}")
    mask = bernoulli_mask(len(family), sample_prob, seed)
    sampled = [int(i) for i in np.nonzero(mask)[0]]
    kept, removed, n_tri = clean_triangles(graph, sampled)
    h_prime = graph.induced(kept)
    k, r = family.params.k, family.params.r
    stats = {
        "lines": len(family),
        "vertices_H": len(sampled),
        "triangles_H": n_tri,
        "removed": len(removed),
        "vertices_H_prime": len(kept),
        "edges_H_prime": h_prime.num_edges,
        "alpha_target": str(2 * sample_prob * Fraction(k**3, r)),
    }
    return CleanedGraph(h_prime, kept, removed, stats)


def _int_root_floor(num, den, p, q):
    """Largest integer x >= 0 with x^q <= (num/den)^p (num, den > 0)."""
    target = Fraction(num, den) ** p
    lo, hi = 0, 1
    while Fraction(hi) ** q <= target:
        hi *= 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if Fraction(mid) ** q <= target:
            lo = mid
        else:
            hi = mid
    return lo


def nominal_r(k, c0=1.0):
    return c0 * k ** (15 / 16)


def probability_window(S_size, k, r, constants):
    """(lower, upper^2) of the admissible sampling-probability window.

    lower = 6 c_j |S|^2 / r; upper = sqrt(c_l) r^{5/2} / (4 sqrt(c_t) |S| k^3)
    is kept squared so every comparison stays rational.
    """
    lower = 6 * constants.c_j * S_size**2 / Fraction(r)
    upper_sq = constants.c_l * Fraction(r) ** 5 / (16 * constants.c_t * S_size**2 * Fraction(k) ** 6)
    return lower, upper_sq


def in_window(prob, lower, upper_sq):
    prob = Fraction(prob)
    return lower < prob and prob * prob < upper_sq


def theorem_1_1_parameters(n, c0=1, c1=None, c2=1, constants=None, seed=0, max_retries=20):
    """Instance parameters for a target of n lines, or InfeasibleConstants.

    k is the largest integer with c2 * k^{45/32} <= n, r the largest integer
    with r <= c0 * k^{15/16}, N = floor(k / r / 2). The sampling probability is
    c1 * k^{-3/4} when c1 is given, else a rational point inside the window.
    """
    constants = constants or Constants()
    c0, c2 = Fraction(c0), Fraction(c2)
    if n <= 0:
        raise ParameterError("n must be positive")
    ratio = Fraction(n) / c2
    k = _int_root_floor(ratio.numerator, ratio.denominator, 32, 45)
    if k < 2:
        raise InfeasibleConstants(f"n={n} gives k={k} < 2")
    c0_16 = c0**16
    r = _int_root_floor((c0_16 * k**15).numerator, (c0_16 * k**15).denominator, 1, 16)
    if r < 2 or r >= k:
        raise InfeasibleConstants(f"k={k} gives r={r}, need 2 <= r < k")
    N = k // r // 2
    if N < 2:
        raise InfeasibleConstants(f"k={k}, r={r} gives N={N} < 2")
    directions = build_direction_set(VectorParams(N=N, epsilon=constants.epsilon, seed=seed, max_retries=max_retries))
    lower, upper_sq = probability_window(len(directions), k, r, constants)
    if not (lower < 1 and lower * lower < upper_sq):
        raise InfeasibleConstants(
            f"empty window for k={k}, r={r}, |S|={len(directions)}: lower={float(lower):.3g}, "
            f"upper={float(upper_sq) ** 0.5:.3g}"
        )
    if c1 is not None:
        prob = Fraction(c1) * Fraction(k ** (-0.75)).limit_denominator(10**12)
    else:
        upper = Fraction(float(upper_sq) ** 0.5).limit_denominator(10**12)
        prob = (lower + min(upper, Fraction(1))) / 2
    if not (prob < 1 and in_window(prob, lower, upper_sq)):
        raise InfeasibleConstants(f"probability {prob} falls outside ({float(lower):.3g}, upper)")
    return LineParams(k=k, r=r, directions=directions, sample_prob=prob, seed=seed)
