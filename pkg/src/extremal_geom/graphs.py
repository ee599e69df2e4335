"""Graph kernels shared by the line, box and Delaunay pipelines.

Vertices are dense integers ``0..n-1``; optional labels live in a side list.
"""

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import BudgetExceeded, ParameterError


class Graph:
    def __init__(self, n, edges=(), labels=None):
        self.n = int(n)
        self.adj = [set() for _ in range(self.n)]
        self.labels = labels
        for u, v in edges:
            self.add_edge(int(u), int(v))

    @classmethod
    def from_edge_array(cls, n, pairs, labels=None):
        g = cls(n, labels=labels)
        for u, v in np.asarray(pairs, dtype=np.int64).reshape(-1, 2):
            g.add_edge(int(u), int(v))
        return g

    def add_edge(self, u, v):
        if u == v:
            raise ParameterError(f"self-loop at {u}")
        self.adj[u].add(v)
        self.adj[v].add(u)

    def has_edge(self, u, v):
        return v in self.adj[u]

    def degree(self, v):
        return len(self.adj[v])

    def max_degree(self):
        return max((len(a) for a in self.adj), default=0)

    @property
    def num_edges(self):
        return sum(len(a) for a in self.adj) // 2

    def edges(self):
        """Edges as a sorted (E, 2) int64 array with u < v."""
        out = [(u, v) for u in range(self.n) for v in sorted(self.adj[u]) if u < v]
        return np.array(out, dtype=np.int64).reshape(-1, 2)

    def edge_set(self):
        return {(u, v) for u in range(self.n) for v in self.adj[u] if u < v}

    def csr(self):
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        indptr[1:] = np.cumsum([len(a) for a in self.adj])
        indices = np.fromiter((v for a in self.adj for v in sorted(a)), dtype=np.int64, count=int(indptr[-1]))
        return indptr, indices

    def induced(self, vertices):
        """Subgraph on ``vertices`` (relabelled in the given order)."""
        vertices = [int(v) for v in vertices]
        pos = {v: i for i, v in enumerate(vertices)}
        labels = [self.labels[v] for v in vertices] if self.labels is not None else vertices
        h = Graph(len(vertices), labels=labels)
        for v in vertices:
            for w in self.adj[v]:
                if w in pos and pos[v] < pos[w]:
                    h.add_edge(pos[v], pos[w])
        return h

    def is_independent(self, vertices):
        vs = set(vertices)
        return all(not (self.adj[v] & vs) for v in vs)

    def is_maximal_independent(self, vertices):
        vs = set(vertices)
        if not self.is_independent(vs):
            return False
        return all(v in vs or self.adj[v] & vs for v in range(self.n))

    def masks(self):
        return [sum(1 << w for w in a) for a in self.adj]


@dataclass
class BipartiteIncidence:
    """Points on the left, boxes on the right, edges (point, box)."""

    n_left: int
    n_right: int
    edges: np.ndarray
    right_labels: list = field(default=None, repr=False)

    def left_degrees(self):
        return np.bincount(self.edges[:, 0], minlength=self.n_left)

    def right_members(self):
        members = {}
        for p, b in self.edges:
            members.setdefault(int(b), []).append(int(p))
        return members


def enumerate_triangles(g):
    """Every triangle (u < v < w) exactly once, in lexicographic order."""
    indptr, indices = g.csr()
    tri = kernels.triangles_csr(indptr, indices)
    if len(tri):
        tri = tri[np.lexsort((tri[:, 2], tri[:, 1], tri[:, 0]))]
    return [tuple(int(x) for x in t) for t in tri]


def _bits(mask):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _clique_cover_size(cand, nbr):
    count = 0
    while cand:
        low = cand & -cand
        v = low.bit_length() - 1
        cand ^= low
        common = cand & nbr[v]
        while common:
            w_low = common & -common
            w = w_low.bit_length() - 1
            cand ^= w_low
            common &= nbr[w]
        count += 1
    return count


def _greedy_mis(cand, nbr):
    chosen = 0
    while cand:
        best, best_deg = None, None
        for v in _bits(cand):
            d = (nbr[v] & cand).bit_count()
            if best_deg is None or d < best_deg:
                best, best_deg = v, d
        chosen |= 1 << best
        cand &= ~((1 << best) | nbr[best])
    return chosen


class _OutOfBudget(Exception):
    pass


def exact_mis(g, budget=1_000_000):
    """Maximum independent set by branch and bound.

    Branches on a maximum-degree vertex, applies the degree-0/1 reductions and
    prunes with a greedy clique-cover bound. Returns ``(size, witness)``;
    raises BudgetExceeded (carrying the incumbent) past ``budget`` nodes.
    """
    nbr = g.masks()
    full = (1 << g.n) - 1
    incumbent = _greedy_mis(full, nbr)
    state = {"best": incumbent, "size": incumbent.bit_count(), "nodes": 0}

    def search(cand, chosen):
        state["nodes"] += 1
        if state["nodes"] > budget:
            raise _OutOfBudget
        changed = True
        while changed and cand:
            changed = False
            for v in _bits(cand):
                if not (cand >> v) & 1:
                    continue
                nv = nbr[v] & cand
                if nv & (nv - 1) == 0:  # degree 0 or 1
                    chosen |= 1 << v
                    cand &= ~((1 << v) | nv)
                    changed = True
        size = chosen.bit_count()
        if not cand:
            if size > state["size"]:
                state["best"], state["size"] = chosen, size
            return
        if size + _clique_cover_size(cand, nbr) <= state["size"]:
            return
        pivot, pivot_deg = None, -1
        for v in _bits(cand):
            d = (nbr[v] & cand).bit_count()
            if d > pivot_deg:
                pivot, pivot_deg = v, d
        bit = 1 << pivot
        search(cand & ~(bit | nbr[pivot]), chosen | bit)
        search(cand & ~bit, chosen)

    try:
        search(full, 0)
    except _OutOfBudget:
        witness = sorted(_bits(state["best"]))
        raise BudgetExceeded(
            f"exact MIS exceeded {budget} nodes (best so far {state['size']})", state["size"], witness
        ) from None
    witness = sorted(_bits(state["best"]))
    assert g.is_independent(witness)
    return state["size"], witness


def clique_cover_bound(g):
    """Upper bound on the independence number from a greedy clique cover."""
    return _clique_cover_size((1 << g.n) - 1, g.masks())


def greedy_colors(g, order=None):
    """First-fit coloring along ``order``; returns the color of each vertex."""
    if order is None:
        order = range(g.n)
    order = list(order)
    if sorted(order) != list(range(g.n)):
        raise ParameterError("order must be a permutation of the vertices")
    colors = [-1] * g.n
    for v in order:
        used = {colors[w] for w in g.adj[v]}
        c = 0
        while c in used:
            c += 1
        colors[v] = c
    return colors


def greedy_coloring(g, order=None):
    """Number of colors used by first-fit coloring along ``order``."""
    colors = greedy_colors(g, order)
    return max(colors) + 1 if colors else 0


def random_maximal_independent_set(g, seed):
    rng = np.random.default_rng(seed)
    chosen = set()
    blocked = set()
    for v in rng.permutation(g.n):
        v = int(v)
        if v not in blocked:
            chosen.add(v)
            blocked.add(v)
            blocked |= g.adj[v]
    assert g.is_maximal_independent(chosen)
    return chosen


def find_k22(b):
    """Two points lying in two common boxes, as (p, p', B, B'), or None."""
    seen = {}
    for box, pts in sorted(b.right_members().items()):
        pts = sorted(set(pts))
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                key = (pts[i], pts[j])
                if key in seen:
                    return pts[i], pts[j], seen[key], box
                seen[key] = box
    return None


def write_edgelist(g, fh):
    for u, v in g.edges():
        fh.write(f"{u} {v}\n")


def read_edgelist(fh, n=None):
    pairs = []
    for line in fh:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        u, v = line.split()
        pairs.append((int(u), int(v)))
    if n is None:
        n = 1 + max((max(p) for p in pairs), default=-1)
    return Graph(n, pairs)
