"""Block graphs, box-Delaunay graphs and the sparse-sample pipeline.

Two points of P are adjacent in the block graph G_P when some block of the
full family holds both. If every block holds at most two points of P, each
such edge is also an edge of the Delaunay graph of P with respect to boxes,
so the independence number of the Delaunay graph is at most that of G_P.
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

import numpy as np

from . import kernels
from .blocks import FULL, BlockFamily, BoxParams, sample_clean_points, triple_count
from .containers import ContainerRun, container_of, enumerate_containers, fingerprint_cap
from .errors import BudgetExceeded, CapExceeded, ParameterError, RetriesExhausted, SubgraphViolation
from .graphs import Graph, clique_cover_bound, exact_mis, random_maximal_independent_set

log = logging.getLogger(__name__)


def build_block_graph(points, family):
    """G_P: an edge for every pair of points sharing a block of ``family``."""
    g = Graph(len(points))
    for members in family.occupancy(points).values():
        for i in range(len(members)):
            for j in range(i + 1, len(members)):
                if not g.has_edge(members[i], members[j]):
                    g.add_edge(members[i], members[j])
    return g


def block_edge_audit(points, family):
    """Attribute each block-graph edge to its first witnessing block.

    Returns a dict with the attribution, the number of edges seen in more
    than one block, and the comparison of |E| with sum_B C(n_B, 2).
    """
    witnesses = {}
    pair_total = 0
    for b, members in sorted(family.occupancy(points).items()):
        pair_total += comb(len(members), 2)
        for i in range(len(members)):
            for j in range(i + 1, len(members)):
                witnesses.setdefault((members[i], members[j]), []).append(b)
    multi = {e: w for e, w in witnesses.items() if len(w) > 1}
    return {
        "attribution": {e: w[0] for e, w in witnesses.items()},
        "edges": len(witnesses),
        "block_pair_total": pair_total,
        "multiply_witnessed": len(multi),
        "unique": pair_total == len(witnesses),
    }


def supersaturation_degree(g, subset):
    sub = set(int(v) for v in subset)
    if not sub <= set(range(g.n)):
        raise ParameterError("subset must be a set of vertices of g")
    return max((len(g.adj[v] & sub) for v in sub), default=0)


def supersaturation_threshold(size, m_pow, t_k):
    """(|C| / m^{d-1}) * |T_k| / 2."""
    return Fraction(size, m_pow) * t_k / 2


def delaunay_graph(points, method="sweep"):
    """Delaunay graph with respect to axis-parallel boxes (closed bounding boxes)."""
    if points.has_axis_collisions():
        raise ParameterError("delaunay_graph needs pairwise distinct coordinates on every axis")
    ranks = points.ranks()
    if method == "sweep":
        pairs = kernels.delaunay_sweep(ranks)
    elif method == "brute":
        pairs = kernels.delaunay_brute(ranks)
    else:
        raise ParameterError(f"unknown method {method!r}")
    return Graph.from_edge_array(len(points), pairs)


def theorem_bound_nominal(n, d):
    """n (log log n)^{(d+3)/2} / (log n)^{(d-1)/2} with unit constant."""
    if n < 3:
        return None
    ln = math.log(n)
    return n * math.log(ln) ** ((d + 3) / 2) / ln ** ((d - 1) / 2)


def largest_n(q_size, divisor, t_k):
    """Largest integer n with n * divisor * |T_k|^{3/2} <= |Q|, exactly."""
    divisor = Fraction(divisor)
    n = int(q_size / (float(divisor) * t_k**1.5)) + 2
    while n > 0 and (n * divisor) ** 2 * t_k**3 > q_size**2:
        n -= 1
    return n


@dataclass(frozen=True)
class DelaunayParams:
    base: BoxParams
    divisor: Fraction = Fraction(4)
    sample_prob: Fraction | None = None
    q_size: int | None = None
    q_fill: Fraction = Fraction(3, 4)
    theta: int | None = None
    z: int | None = None
    node_cap: int = 50_000
    mis_budget: int = 200_000
    strategy: str = "auto"
    max_retries: int = 10
    enumerate: bool = True

    def __post_init__(self):
        object.__setattr__(self, "divisor", Fraction(self.divisor))
        object.__setattr__(self, "q_fill", Fraction(self.q_fill))
        if self.sample_prob is not None:
            object.__setattr__(self, "sample_prob", Fraction(self.sample_prob))
            if not 0 < self.sample_prob < 1:
                raise ParameterError("sample probability must lie in (0, 1)")
        if self.divisor <= 0:
            raise ParameterError("divisor must be positive")
        if not 0 < self.q_fill <= 1:
            raise ParameterError("q_fill must lie in (0, 1]")

    @property
    def t_k(self):
        b = self.base
        return comb(b.k + b.d - 1, b.d - 1)

    @property
    def m_pow(self):
        return self.base.m ** (self.base.d - 1)

    @property
    def n_nominal(self):
        """|T_k| m^{d-1}: the size of Q when s, k are coupled to the target."""
        return self.t_k * self.m_pow

    def resolved_q_size(self):
        if self.q_size is not None:
            return self.q_size
        capacity = self.base.s * self.m_pow
        return min(self.n_nominal, int(self.q_fill * capacity))

    def resolved_theta(self):
        return self.theta if self.theta is not None else 2 * self.m_pow


@dataclass
class PipelineResult:
    Q: object
    P: object
    G_Q: Graph
    G_P: Graph
    D: Graph
    p_index: list
    report: dict = field(default_factory=dict)


def _alpha(g, budget):
    try:
        size, witness = exact_mis(g, budget=budget)
        return {"value": size, "exact": True}
    except BudgetExceeded as exc:
        return {"value": None, "exact": False, "lower": exc.best_size, "upper": clique_cover_bound(g)}


def remove_block_triples(points, family):
    """Drop the first surviving point of any block holding three or more.

    Returns (kept indices, removed indices). One pass reaches the fixpoint
    because deleting points never raises a block's count.
    """
    alive = np.ones(len(points), dtype=bool)
    removed = []
    for _, members in sorted(family.occupancy(points).items()):
        live = [i for i in members if alive[i]]
        while len(live) >= 3:
            alive[live[0]] = False
            removed.append(live[0])
            live = live[1:]
    kept = [int(i) for i in np.nonzero(alive)[0]]
    return kept, sorted(removed)


def max_block_load(points, family):
    return max((len(v) for v in family.occupancy(points).values()), default=0)


def run_pipeline(params):
    base = params.base
    family = BlockFamily(FULL, base)
    q_target = params.resolved_q_size()
    clean = sample_clean_points(base, q_target, strategy=params.strategy)
    Q = clean.points
    q_size = len(Q)
    t_k, m_pow = params.t_k, params.m_pow
    n = largest_n(q_size, params.divisor, t_k)
    if n < 1:
        raise ParameterError(f"|Q|={q_size} is too small for divisor {params.divisor}")
    prob = params.sample_prob if params.sample_prob is not None else Fraction(4 * n, q_size)
    if not 0 < prob < 1:
        raise ParameterError(f"sample probability {prob} outside (0, 1)")

    ss = np.random.SeedSequence([base.seed, 1])
    kept = None
    for attempt, child in enumerate(ss.spawn(params.max_retries), start=1):
        rng = np.random.default_rng(child)
        draws = rng.integers(0, prob.denominator, size=q_size) < prob.numerator
        p0 = [int(i) for i in np.nonzero(draws)[0]]
        P0 = Q.subset(p0)
        triples_p0 = triple_count(P0, family)
        k1, removed = remove_block_triples(P0, family)
        if len(k1) >= n:
            pick = np.sort(rng.choice(len(k1), size=n, replace=False))
            kept = [p0[k1[i]] for i in pick]
            break
        log.info("attempt %d: %d points left after triple removal, need %d", attempt, len(k1), n)
    if kept is None:
        raise RetriesExhausted(f"no sample kept {n} points after triple removal in {params.max_retries} attempts")

    P = Q.subset(kept)
    G_Q = build_block_graph(Q, family)
    G_P = G_Q.induced(kept)
    load = max_block_load(P, family)
    D = delaunay_graph(P, "sweep")
    sweep_ok = None
    if len(P) <= 200:
        sweep_ok = D.edge_set() == delaunay_graph(P, "brute").edge_set()
    missing = G_P.edge_set() - D.edge_set()
    if missing:
        raise SubgraphViolation(f"{len(missing)} block-graph edges are not Delaunay edges (max block load {load})")

    alpha_gp = _alpha(G_P, params.mis_budget)
    alpha_d = _alpha(D, params.mis_budget)

    theta = params.resolved_theta()
    z = params.z if params.z is not None else fingerprint_cap(q_size, theta, t_k, m_pow)
    containers = {"count": None, "max_size": None, "cap_exceeded": None, "alpha_bound": None}
    if params.enumerate:
        run = ContainerRun(G_Q, theta, z)
        try:
            found = enumerate_containers(run, params.node_cap)
            containers["cap_exceeded"] = False
        except CapExceeded as exc:
            found = exc.partial
            containers["cap_exceeded"] = True
        if len(found):
            containers["max_size"] = max(found.sizes())
            containers["max_fingerprint"] = max(found.fingerprint_sizes())
        containers["count"] = len(found)
        if not containers["cap_exceeded"]:
            containers["alpha_bound"] = found.max_overlap(kept)

    s_note = "sampling base s is a free parameter; the two constructions nominally use s=100k^{2d} and s=16k^{2d}"
    report = {
        "params": {
            "d": base.d,
            "k": base.k,
            "s": base.s,
            "m": base.m,
            "seed": base.seed,
            "divisor": str(params.divisor),
            "strategy": clean.stats.get("strategy"),
        },
        "N": q_size,
        "N_nominal": params.n_nominal,
        "n": n,
        "p": str(prob),
        "P0": len(p0),
        "triples_P0": triples_p0,
        "triples_removed": len(removed),
        "max_block_load": load,
        "edges_GP": G_P.num_edges,
        "edges_D": D.num_edges,
        "subgraph_check": True,
        "sweep_matches_brute": sweep_ok,
        "alpha_GP": alpha_gp["value"],
        "alpha_D": alpha_d["value"],
        "alpha_GP_detail": alpha_gp,
        "alpha_D_detail": alpha_d,
        "theta": theta,
        "z": z,
        "container_count": containers["count"],
        "container_max_size": containers["max_size"],
        "container_cap_exceeded": containers["cap_exceeded"],
        "container_max_fingerprint": containers.get("max_fingerprint"),
        "container_alpha_bound": containers["alpha_bound"],
        "theorem_bound_nominal": theorem_bound_nominal(n, base.d),
        "notes": [s_note],
    }
    return PipelineResult(Q, P, G_Q, G_P, D, kept, report)


def sampled_container_coverage(run, samples, seed, containers=None):
    """Check I <= container_of(I) (and membership in ``containers``) for sampled maximal I."""
    ss = np.random.SeedSequence(seed)
    failures = []
    oversize = 0
    limit = run.theta + (run.z if run.z is not None else 0)
    for child in ss.spawn(samples):
        ind = random_maximal_independent_set(run.graph, child)
        fp, cont = container_of(run, ind)
        if not ind <= cont:
            failures.append(("not covered", sorted(ind)))
        if containers is not None and cont not in containers:
            failures.append(("not enumerated", fp))
        if run.z is not None and (len(fp) > run.z or len(cont) > limit):
            oversize += 1
    return {"samples": samples, "failures": failures, "oversize": oversize}


def trend_report(d=3, k=2, sizes=(3, 4, 5, 6), seeds=range(5), divisor=Fraction(4), mis_budget=200_000):
    """alpha(D)/n across increasing instance sizes (median over seeds).

    When the exact solver runs out of budget the ratio uses the lower bound
    and the row is marked inexact. ``flagged`` is set when fewer than two
    consecutive steps are nonincreasing.
    """
    rows = []
    for s in sizes:
        ratios, ns, exact = [], [], True
        for seed in seeds:
            params = DelaunayParams(BoxParams(d=d, k=k, s=s, seed=seed), divisor=divisor, mis_budget=mis_budget, enumerate=False)
            rep = run_pipeline(params).report
            a = rep["alpha_D"]
            if a is None:
                a = rep["alpha_D_detail"]["lower"]
                exact = False
            ratios.append(a / rep["n"])
            ns.append(rep["n"])
        rows.append({"s": s, "n": int(np.median(ns)), "alpha_D_over_n": ratios, "median": float(np.median(ratios)), "exact": exact})
    medians = [r["median"] for r in rows]
    steps = [b <= a for a, b in zip(medians, medians[1:])]
    need = min(2, len(steps))
    return {"d": d, "k": k, "rows": rows, "nonincreasing_steps": sum(steps), "steps": len(steps), "flagged": sum(steps) < need}
