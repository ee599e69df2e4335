"""The verify-all property suite.

Each check builds a small instance, tests one structural invariant and
returns a detail dict with an ``ok`` flag. ``fault`` names a check whose
input should be corrupted on purpose, so the harness itself can be tested.
"""

import itertools
import logging
import time
from fractions import Fraction

import numpy as np

from . import blocks as B
from . import lines as L
from .containers import ContainerRun, container_of, enumerate_containers, fingerprint_cap
from .delaunay import (
    DelaunayParams,
    block_edge_audit,
    build_block_graph,
    delaunay_graph,
    max_block_load,
    run_pipeline,
    supersaturation_degree,
    supersaturation_threshold,
)
from .errors import CapExceeded, ParameterError
from .geom import IntVec3, PointSet
from .graphs import BipartiteIncidence, Graph, enumerate_triangles, exact_mis, find_k22, random_maximal_independent_set
from .vectors import DirectionSet, VectorParams, build_direction_set, check_direction_set

log = logging.getLogger(__name__)

SCALES = {
    "small": {
        "vector_N": (10, 30),
        "line_N": 10,
        "line_k": 8,
        "line_r": 2,
        "oracle_k": 5,
        "cleanup_seeds": 5,
        "box_instances": ((2, 3, 4, 100), (3, 2, 9, 200)),
        "law": ((2, 1, 2), (2, 2, 3), (2, 3, 4), (3, 2, 3)),
        "vdc_t": 8,
        "delaunay_seeds": 5,
        "delaunay_points": 60,
        "pipeline": (3, 2, 4),
        "container_gap": 24,
        "container_samples": 200,
        "mis_graphs": 30,
    },
    "medium": {
        "vector_N": (10, 30, 100),
        "line_N": 10,
        "line_k": 16,
        "line_r": 2,
        "oracle_k": 7,
        "cleanup_seeds": 20,
        "box_instances": ((2, 3, 4, 100), (3, 2, 9, 500)),
        "law": tuple((d, k, s) for d in (2, 3) for k in (1, 2, 3) for s in (2, 3, 4)),
        "vdc_t": 10,
        "delaunay_seeds": 50,
        "delaunay_points": 200,
        "pipeline": (3, 2, 5),
        "container_gap": 40,
        "container_samples": 1000,
        "mis_graphs": 100,
    },
}

CHECKS = []


def check(name):
    def wrap(fn):
        CHECKS.append((name, fn))
        return fn

    return wrap


def _line_instance(cfg, k=None):
    ds = build_direction_set(VectorParams(N=cfg["line_N"], seed=0))
    params = L.LineParams(k=k or cfg["line_k"], r=cfg["line_r"], directions=ds, seed=0)
    fam = L.build_line_family(params)
    return fam, L.intersection_graph(fam)


@check("vectors.independence")
def _vectors(cfg, fault):
    out = {}
    for N in cfg["vector_N"]:
        ds = build_direction_set(VectorParams(N=N, seed=0))
        if fault == "vectors.independence" and len(ds) >= 2:
            a, b = ds.elements[0], ds.elements[1]
            ds = DirectionSet(ds.elements + [IntVec3(*(x + y for x, y in zip(a, b)))], ds.params, ds.curve, ds.attempts)
        rep = check_direction_set(ds)
        out[N] = {"size": len(ds), "violations": rep["violations"], "ok": rep["ok"]}
    return {"ok": all(v["ok"] for v in out.values()), "instances": out}


@check("lines.grid-points")
def _grid(cfg, fault):
    fam, _ = _line_instance(cfg)
    k, r = fam.params.k, fam.params.r
    short = [ln for ln in fam.lines if ln.grid_count(k) < r]
    if fault == "lines.grid-points":
        short.append(fam.lines[0])
    return {"ok": not short, "lines": len(fam), "short": len(short)}


@check("lines.graph-oracle")
def _oracle(cfg, fault):
    fam, g = _line_instance(cfg, k=cfg["oracle_k"])
    brute = L.intersection_graph_bruteforce(fam)
    fast = g.edge_set()
    if fault == "lines.graph-oracle":
        fast = fast ^ {(0, len(fam) - 1)}
    return {"ok": fast == brute.edge_set(), "edges": len(fast)}


@check("lines.triangle-concurrency")
def _concurrency(cfg, fault):
    fam, g = _line_instance(cfg)
    tri = enumerate_triangles(g)
    if fault == "lines.triangle-concurrency":
        groups = fam.type_groups()
        tri = tri + [tuple(sorted(groups[t][0] for t in sorted(groups)[:3]))]
    bad = L.nonconcurrent_triangles(fam, tri, limit=1)
    return {"ok": not bad, "triangles": len(tri)}


@check("lines.plane-partition")
def _partition(cfg, fault):
    fam, g = _line_instance(cfg)
    planes = L.build_plane_families(fam)
    if fault == "lines.plane-partition":
        g = Graph(g.n, g.edge_set())
        u, v = next((u, v) for u in range(g.n) for v in range(u + 1, g.n) if not g.has_edge(u, v))
        g.add_edge(u, v)
    missing, extra, repeated = L.edge_partition_check(g, planes)
    bound = L.plane_bound(fam.params.k, fam.params.r)
    biggest = max((len(x) + len(y) for _, _, x, y in planes.bipartite_blocks()), default=0)
    biggest_pair = max(planes.sizes().values(), default=0)
    ok = not (missing or extra or repeated) and biggest_pair <= bound
    return {"ok": ok, "missing": len(missing), "extra": len(extra), "repeated": len(repeated), "max_pair_lines": biggest_pair, "max_plane_lines": biggest}


@check("lines.cleanup")
def _cleanup(cfg, fault):
    fam, g = _line_instance(cfg)
    bad = []
    for seed in range(cfg["cleanup_seeds"]):
        res = L.sparsify_and_clean(fam, g, Fraction(1, 10), seed)
        h = res.graph
        if fault == "lines.cleanup" and h.n >= 3:
            h = Graph(h.n, h.edge_set() | {(0, 1), (1, 2), (0, 2)})
        st = res.stats
        if enumerate_triangles(h) or st["vertices_H_prime"] < st["vertices_H"] - st["triangles_H"]:
            bad.append(seed)
    return {"ok": not bad, "failing_seeds": bad}


@check("boxes.tiling")
def _tiling(cfg, fault):
    params = B.BoxParams(d=2, k=2, s=2)
    fam = B.BlockFamily(B.FULL, params)
    grid = [(x, y) for x in range(params.m) for y in range(params.m)]
    pts = PointSet.from_rows([(2 * x + 1, 2 * y + 1) for x, y in grid], 1, params.m)
    blocks = list(fam)
    bad = 0
    for t in fam.exponents:
        same_t = [b for b in blocks if b.t == t]
        if fault == "boxes.tiling":
            same_t = same_t[1:]
        for p in pts:
            if sum(b.contains(p) for b in same_t) != 1:
                bad += 1
    return {"ok": bad == 0, "uncovered_or_doubled": bad}


@check("boxes.intersection-law")
def _law(cfg, fault):
    bad = []
    for d, k, s in cfg["law"]:
        if B.block_law_violation(B.BoxParams(d=d, k=k, s=s)) is not None:
            bad.append((d, k, s))
    if fault == "boxes.intersection-law":
        bad.append("injected")
    return {"ok": not bad, "violations": bad}


def _box_instance(d, k, s, n, seed=0):
    params = B.BoxParams(d=d, k=k, s=s, seed=seed)
    clean = B.sample_clean_points(params, n)
    fam = B.BlockFamily(B.FULL, params)
    return params, clean, fam, B.incidence_graph(clean.points, fam)


def _with_duplicate_point(inc):
    extra = inc.edges[inc.edges[:, 0] == 0].copy()
    extra[:, 0] = inc.n_left
    return BipartiteIncidence(inc.n_left + 1, inc.n_right, np.concatenate([inc.edges, extra]))


@check("boxes.k22-free")
def _k22(cfg, fault):
    out = []
    for d, k, s, n in cfg["box_instances"]:
        params, clean, fam, inc = _box_instance(d, k, s, n)
        if fault == "boxes.k22-free":
            inc = _with_duplicate_point(inc)
        t_k = len(fam.exponents)
        degrees = set(inc.left_degrees().tolist())
        ok = find_k22(inc) is None and degrees == {t_k} and not B.lower_block_violations(clean.points, params)
        out.append({"instance": [d, k, s, n], "ok": ok})
    return {"ok": all(o["ok"] for o in out), "instances": out}


@check("boxes.van-der-corput")
def _vdc(cfg, fault):
    bad = {}
    for t in range(1, cfg["vdc_t"] + 1):
        pts = B.van_der_corput(t)
        if fault == "boxes.van-der-corput":
            pts[0] = pts[1]
        v = B.dyadic_net_violations(pts, t)
        if v:
            bad[t] = len(v)
    return {"ok": not bad, "violations": bad}


@check("boxes.separation")
def _separation(cfg, fault):
    out = []
    for d, k, s, n in cfg["box_instances"]:
        params, clean, fam, inc = _box_instance(d, k, s, n)
        boxes = np.unique(inc.edges[:, 1])
        emb = B.separation_embedding(clean.points, fam, boxes)
        order = B.embedding_order_violations(clean.points, fam, emb)
        if fault == "boxes.separation":
            inc = _with_duplicate_point(inc)
            emb = B.SeparationEmbedding(np.concatenate([emb.point_phi, emb.point_phi[:1]]), emb.box_phi, emb.box_ids, emb.bits)
        sep = B.verify_separation(emb, inc)
        out.append({"instance": [d, k, s, n], "order_violations": len(order), "ok": sep is True and not order})
    return {"ok": all(o["ok"] for o in out), "instances": out}


@check("delaunay.sweep-vs-brute")
def _sweep(cfg, fault):
    bad = []
    for seed in range(cfg["delaunay_seeds"]):
        rng = np.random.default_rng(seed)
        n = cfg["delaunay_points"]
        d = 2 + seed % 2
        rows = np.stack([rng.permutation(n) for _ in range(d)], axis=1)
        pts = PointSet(rows.astype(np.int64), 0, n)
        a = delaunay_graph(pts, "sweep").edge_set()
        b = delaunay_graph(pts, "brute").edge_set()
        if fault == "delaunay.sweep-vs-brute":
            a = a - {min(a)}
        if a != b:
            bad.append(seed)
    return {"ok": not bad, "failing_seeds": bad}


def _pipeline(cfg, seed=3, q_size=None):
    d, k, s = cfg["pipeline"]
    return run_pipeline(DelaunayParams(B.BoxParams(d=d, k=k, s=s, seed=seed), q_size=q_size, enumerate=False))


@check("delaunay.pipeline")
def _pipeline_check(cfg, fault):
    res = _pipeline(cfg)
    fam = B.BlockFamily(B.FULL, B.BoxParams(*cfg["pipeline"]))
    P = res.P
    if fault == "delaunay.pipeline":
        P = PointSet(np.concatenate([P.num, P.num[:1] + 1, P.num[:1] + 2]), P.bits, P.extent)
    load = max_block_load(P, fam)
    subgraph = build_block_graph(P, fam).edge_set() <= delaunay_graph(P).edge_set() if not P.has_axis_collisions() else False
    rep = res.report
    return {"ok": load <= 2 and subgraph, "max_block_load": load, "n": rep["n"], "alpha_GP": rep["alpha_GP"], "alpha_D": rep["alpha_D"]}


@check("delaunay.edge-audit")
def _audit(cfg, fault):
    res = _pipeline(cfg)
    fam = B.BlockFamily(B.FULL, B.BoxParams(*cfg["pipeline"]))
    P = res.P
    if fault == "delaunay.edge-audit":
        P = P.subset(list(range(len(P))) + [0])
    audit = block_edge_audit(P, fam)
    ok = audit["unique"] and audit["edges"] == build_block_graph(P, fam).num_edges
    return {"ok": ok, "edges": audit["edges"], "block_pair_total": audit["block_pair_total"]}


def _container_instance(cfg):
    d, k, s = cfg["pipeline"]
    params = DelaunayParams(B.BoxParams(d=d, k=k, s=s, seed=3))
    theta = params.resolved_theta()
    clean = B.sample_clean_points(params.base, theta + cfg["container_gap"])
    fam = B.BlockFamily(B.FULL, params.base)
    g = build_block_graph(clean.points, fam)
    z = fingerprint_cap(len(clean.points), theta, params.t_k, params.m_pow)
    return params, g, ContainerRun(g, theta, z)


@check("containers.supersaturation")
def _supersaturation(cfg, fault):
    d, k, s = cfg["pipeline"]
    params = DelaunayParams(B.BoxParams(d=d, k=k, s=s, seed=3))
    q = B.sample_clean_points(params.base, params.resolved_q_size()).points
    g = build_block_graph(q, B.BlockFamily(B.FULL, params.base))
    rng = np.random.default_rng(11)
    low = 2 * params.m_pow
    fails = 0
    for _ in range(100):
        size = int(rng.integers(low, len(q) + 1))
        sub = rng.choice(len(q), size=size, replace=False)
        deg = supersaturation_degree(g, sub)
        if fault == "containers.supersaturation":
            deg = 0
        if deg < supersaturation_threshold(size, params.m_pow, params.t_k):
            fails += 1
    return {"ok": fails == 0, "failures": fails, "Q": len(q), "min_subset": low}


@check("containers.coverage")
def _coverage(cfg, fault):
    params, g, run = _container_instance(cfg)
    try:
        found, capped = enumerate_containers(run, 200_000), False
    except CapExceeded as exc:
        found, capped = exc.partial, True
    ss = np.random.SeedSequence(5)
    uncovered = missing = oversize = 0
    limit = run.theta + run.z
    for child in ss.spawn(cfg["container_samples"]):
        ind = random_maximal_independent_set(g, child)
        fp, cont = container_of(run, ind)
        if fault == "containers.coverage":
            cont = frozenset(list(cont)[1:])
        if not ind <= cont:
            uncovered += 1
        if not capped and cont not in found:
            missing += 1
        if len(cont) > limit or len(fp) > run.z:
            oversize += 1
    oversize += sum(1 for sz in found.sizes() if sz > limit)
    ok = uncovered == 0 and missing == 0 and oversize == 0 and not capped
    return {"ok": ok, "containers": len(found), "cap_exceeded": capped, "uncovered": uncovered, "not_enumerated": missing, "oversize": oversize, "theta": run.theta, "z": run.z}


def _brute_alpha(g):
    best = 0
    masks = g.masks()
    for mask in range(1 << g.n):
        if mask.bit_count() <= best:
            continue
        if all(not (masks[v] & mask) for v in range(g.n) if (mask >> v) & 1):
            best = mask.bit_count()
    return best


@check("graphs.exact-mis")
def _mis(cfg, fault):
    rng = np.random.default_rng(17)
    bad = 0
    for _ in range(cfg["mis_graphs"]):
        n = int(rng.integers(1, 15))
        dens = rng.random()
        g = Graph(n, [(u, v) for u, v in itertools.combinations(range(n), 2) if rng.random() < dens])
        size, _ = exact_mis(g)
        if fault == "graphs.exact-mis":
            size += 1
        if size != _brute_alpha(g):
            bad += 1
    return {"ok": bad == 0, "mismatches": bad}


def check_names():
    return [name for name, _ in CHECKS]


def run_all(scale="small", fault=None):
    """Run every check; returns (all_ok, first_failing_name, results)."""
    if scale not in SCALES:
        raise ParameterError(f"scale must be one of {sorted(SCALES)}")
    if fault is not None and fault not in check_names():
        raise ParameterError(f"unknown fault {fault!r}; faults are named after checks: {check_names()}")
    cfg = SCALES[scale]
    results = {}
    first = None
    for name, fn in CHECKS:
        t0 = time.perf_counter()
        detail = fn(cfg, fault)
        results[name] = detail
        log.info("%s: %s (%.2fs)", name, "pass" if detail["ok"] else "FAIL", time.perf_counter() - t0)
        if not detail["ok"] and first is None:
            first = name
    return first is None, first, results
