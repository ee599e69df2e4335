"""Graph containers driven by maximum-degree deletion.

Given an independent set I, the run repeatedly looks at the first vertex of
maximum degree in the current graph. Vertices outside I are deleted; vertices
in I join the fingerprint S and are deleted together with their neighbours.
Once at most ``theta`` vertices remain, the survivors form f(S) and the
container is S | f(S).
"""

import hashlib
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import CapExceeded, ParameterError


@dataclass
class ContainerRun:
    graph: object
    theta: int
    z: int | None = None

    def __post_init__(self):
        if self.theta < 1:
            raise ParameterError("theta must be at least 1")
        self._degrees = np.array([len(a) for a in self.graph.adj], dtype=np.int64)
        self._nbrs = [np.fromiter(sorted(a), dtype=np.int64, count=len(a)) for a in self.graph.adj]

    def start(self):
        return np.ones(self.graph.n, dtype=bool), self._degrees.copy()

    def pick(self, alive, deg):
        return int(np.argmax(np.where(alive, deg, -1)))

    def remove(self, alive, deg, v):
        alive[v] = False
        nb = self._nbrs[v]
        deg[nb[alive[nb]]] -= 1

    def remove_closed(self, alive, deg, v):
        nb = self._nbrs[v]
        gone = nb[alive[nb]]
        self.remove(alive, deg, v)
        for w in gone:
            self.remove(alive, deg, int(w))
        return len(gone) + 1


def fingerprint_cap(q_size, theta, t_k, m_pow):
    """Largest fingerprint size the degree bound allows.

    Every fingerprint step shrinks the graph by more than a factor
    1 - t_k / (2 m^{d-1}) while more than theta vertices remain, so the
    fingerprint has at most the largest z with (1-q)^(z-1) * |Q| > theta.
    """
    if q_size <= theta:
        return 0
    q = Fraction(t_k, 2 * m_pow)
    if q >= 1:
        return 1
    z, size = 1, Fraction(q_size)
    while size * (1 - q) > theta:
        size *= 1 - q
        z += 1
    return z


def container_of(run, independent):
    """Trace the algorithm for one independent set; returns (S, container)."""
    members = set(int(v) for v in independent)
    g = run.graph
    for v in members:
        if g.adj[v] & members:
            raise ParameterError("container_of needs an independent set")
    alive, deg = run.start()
    count = g.n
    fingerprint = []
    while count > run.theta:
        v = run.pick(alive, deg)
        if v in members:
            fingerprint.append(v)
            count -= run.remove_closed(alive, deg, v)
        else:
            run.remove(alive, deg, v)
            count -= 1
    completion = set(np.nonzero(alive)[0].tolist())
    return tuple(sorted(fingerprint)), frozenset(completion | set(fingerprint))


def _state_key(alive, fingerprint):
    h = hashlib.blake2b(np.packbits(alive).tobytes(), digest_size=16)
    h.update(np.asarray(fingerprint, dtype=np.int64).tobytes())
    return h.digest()


class ContainerCollection:
    """Containers stored as packed vertex masks, each with one fingerprint."""

    def __init__(self, n):
        self.n = n
        self._fp = {}

    def _pack(self, vertices):
        mask = np.zeros(self.n, dtype=bool)
        mask[list(vertices)] = True
        return np.packbits(mask).tobytes()

    def _unpack(self, key):
        bits = np.unpackbits(np.frombuffer(key, dtype=np.uint8), count=self.n)
        return frozenset(np.nonzero(bits)[0].tolist())

    def add(self, mask, fingerprint):
        self._fp.setdefault(np.packbits(mask).tobytes(), fingerprint)

    def __len__(self):
        return len(self._fp)

    def __contains__(self, vertices):
        return self._pack(vertices) in self._fp

    def __iter__(self):
        for key in self._fp:
            yield self._unpack(key)

    def items(self):
        for key, fp in self._fp.items():
            yield self._unpack(key), fp

    def fingerprint(self, vertices):
        return self._fp[self._pack(vertices)]

    def sizes(self):
        return [int(np.unpackbits(np.frombuffer(k, dtype=np.uint8), count=self.n).sum()) for k in self._fp]

    def max_overlap(self, vertices):
        """max |C & vertices| over the stored containers."""
        mask = np.frombuffer(self._pack(vertices), dtype=np.uint8)
        best = 0
        for key in self._fp:
            both = np.bitwise_and(np.frombuffer(key, dtype=np.uint8), mask)
            best = max(best, int(np.unpackbits(both).sum()))
        return best

    def fingerprint_sizes(self):
        return [len(fp) for fp in self._fp.values()]


def enumerate_containers(run, node_cap=10**6):
    """Every container reachable by branching v in I / v not in I at each step.

    Returns a ContainerCollection. Raises CapExceeded (with the partial
    collection) once more than ``node_cap`` states have been expanded.
    """
    alive, deg = run.start()
    stack = [(alive, deg, (), run.graph.n)]
    seen = set()
    found = ContainerCollection(run.graph.n)
    nodes = 0
    while stack:
        alive, deg, fp, count = stack.pop()
        key = _state_key(alive, fp)
        if key in seen:
            continue
        seen.add(key)
        nodes += 1
        if nodes > node_cap:
            raise CapExceeded(f"container enumeration exceeded {node_cap} nodes", found)
        if count <= run.theta:
            mask = alive.copy()
            mask[list(fp)] = True
            found.add(mask, tuple(sorted(fp)))
            continue
        v = run.pick(alive, deg)
        a2, d2 = alive.copy(), deg.copy()
        removed = run.remove_closed(a2, d2, v)
        stack.append((a2, d2, fp + (v,), count - removed))
        run.remove(alive, deg, v)
        stack.append((alive, deg, fp, count - 1))
    return found
