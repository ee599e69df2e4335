"""Command-line front end.

Every subcommand prints one JSON document (sorted keys) on stdout that starts
with a ``config`` echo of the resolved flags. ``--out DIR`` additionally
writes the artifacts (point sets, edge lists, histograms) as files.

Exit codes: 0 pass, 2 invariant failure, 3 parameter error, 4 retries or cap
exhausted.
"""

import argparse
import json
import logging
import os
import sys
from fractions import Fraction
from math import comb
from pathlib import Path

from . import __version__, kernels
from .errors import (
    BudgetExceeded,
    CapExceeded,
    InfeasibleConstants,
    InvariantFailure,
    ParameterError,
    RetriesExhausted,
    SubgraphViolation,
)

log = logging.getLogger("extremal_geom")

EXIT_OK, EXIT_INVARIANT, EXIT_PARAM, EXIT_EXHAUSTED = 0, 2, 3, 4

# the brute-force line oracle is quadratic in the number of lines
ORACLE_LINE_LIMIT = 3000


def _fraction(text):
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _default_seed():
    raw = os.environ.get("EXTREMAL_GEOM_SEED")
    if raw is None or raw == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ParameterError(f"EXTREMAL_GEOM_SEED must be an integer, got {raw!r}") from None


def _jsonable(obj):
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (set, frozenset, tuple)):
        return list(obj)
    if hasattr(obj, "item"):
        return obj.item()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(doc):
    return json.dumps(doc, sort_keys=True, indent=2, default=_jsonable) + "\n"


def _config(args):
    skip = {"func", "verbose"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _edge_text(g):
    return "".join(f"{u} {v}\n" for u, v in g.edges())


def _write(args, name, text):
    if args.out is None:
        return None
    path = Path(args.out) / name
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return str(path)


def _emit(args, doc, views=None):
    """Print the JSON document, or one of its views for --format csv/edgelist."""
    views = views or {}
    if args.format != "json":
        if args.format not in views:
            raise ParameterError(f"{args.func.__name__[4:]} has no {args.format} view")
        sys.stdout.write(views[args.format])
    else:
        sys.stdout.write(dumps(doc))


# subcommands


def cmd_vectors(args):
    from .vectors import VectorParams, build_direction_set, check_direction_set

    params = VectorParams(N=args.N, epsilon=args.epsilon, seed=args.seed, trim=args.trim)
    ds = build_direction_set(params)
    rep = check_direction_set(ds)
    doc = {
        "config": _config(args),
        "direction_set": ds.to_json(),
        "report": {
            "size": len(ds),
            "size_target": rep["size_target"],
            "attempts": ds.attempts,
            "triples_checked": rep["triples_checked"],
            "triples_expected": comb(len(ds), 3),
            "violations": rep["violations"],
            "out_of_range": len(rep["out_of_range"]),
            "divisible": len(rep["divisible"]),
            "ok": rep["ok"],
        },
        "stats": ds.stats,
    }
    _write(args, "vectors.json", dumps(ds.to_json()))
    _emit(args, doc)
    return EXIT_OK if rep["ok"] else EXIT_INVARIANT


def cmd_lines(args):
    from .graphs import enumerate_triangles
    from .lines import (
        LineParams,
        build_line_family,
        build_plane_families,
        edge_partition_check,
        intersection_graph,
        intersection_graph_bruteforce,
        plane_bound,
        sparsify_and_clean,
        verify_triangle_concurrency,
    )
    from .vectors import VectorParams, build_direction_set

    ds = build_direction_set(VectorParams(N=args.N, epsilon=args.epsilon, seed=args.seed))
    params = LineParams(k=args.k, r=args.r, directions=ds, sample_prob=args.p, seed=args.seed)
    family = build_line_family(params)
    g = intersection_graph(family)
    triangles = enumerate_triangles(g)
    planes = build_plane_families(family)
    missing, extra, repeated = edge_partition_check(g, planes)
    worst = max(planes.sizes().values(), default=0)
    cleaned = sparsify_and_clean(family, g, args.p, args.seed)
    h = cleaned.graph
    recheck = len(enumerate_triangles(h))
    checks = {
        "grid_points": all(ln.grid_count(args.k) >= args.r for ln in family.lines),
        "triangle_concurrency": verify_triangle_concurrency(family, triangles),
        "plane_partition": not (missing or extra or repeated),
        "plane_bound": worst <= plane_bound(args.k, args.r, args.epsilon),
        "triangle_free": recheck == 0,
        "cleanup_count": cleaned.stats["vertices_H_prime"] >= cleaned.stats["vertices_H"] - cleaned.stats["triangles_H"],
    }
    # H' edges in line indices of the full family
    h_edges = [[cleaned.vertices[u], cleaned.vertices[v]] for u, v in h.edges().tolist()]
    doc = {
        "config": _config(args),
        "directions": [list(v) for v in ds.elements],
        "G": {"vertices": g.n, "edges": g.num_edges, "triangles": len(triangles)},
        "planes": {"pairs": len(planes.normals), "max_pair_lines": worst, "bound": plane_bound(args.k, args.r, args.epsilon)},
        "stats": {**cleaned.stats, "triangles_H_prime": recheck},
        "H_prime": {"vertices": cleaned.vertices, "edges": h_edges},
        "checks": checks,
        "scale": params.scale_report(),
    }
    edge_view = "".join(f"{u} {v}\n" for u, v in h_edges)
    if args.emit_full_graph:
        doc["G"]["edge_list"] = g.edges().tolist()
        if len(family) <= ORACLE_LINE_LIMIT:
            checks["full_graph_oracle"] = g.edge_set() == intersection_graph_bruteforce(family).edge_set()
        _write(args, "G.edgelist", _edge_text(g))
        edge_view = _edge_text(g)
    _write(args, "lines.json", dumps(family.to_json()))
    _write(args, "H_prime.edgelist", "".join(f"{u} {v}\n" for u, v in h_edges))
    _emit(args, doc, {"edgelist": edge_view})
    return EXIT_OK if all(checks.values()) else EXIT_INVARIANT


def cmd_boxes(args):
    from .blocks import (
        FULL,
        BlockFamily,
        BoxParams,
        degree_histogram,
        degree_histogram_csv,
        dyadic_net_violations,
        embedding_order_violations,
        incidence_graph,
        lower_block_violations,
        sample_clean_points,
        separation_embedding,
        van_der_corput,
        verify_separation,
    )
    from .graphs import find_k22

    if args.van_der_corput is not None:
        t = args.van_der_corput
        if not 1 <= t <= 24:
            raise ParameterError("--van-der-corput needs 1 <= t <= 24")
        pts = van_der_corput(t)
        bad = dyadic_net_violations(pts, t)
        doc = {
            "config": _config(args),
            "van_der_corput": {"t": t, "points": 1 << t, "rectangles_checked": (t + 1) << t, "violations": len(bad), "ok": not bad},
        }
        _write(args, "points.json", dumps({"denominator_exponent": t, "points": [list(p.num) for p in pts]}))
        _emit(args, doc)
        return EXIT_OK if not bad else EXIT_INVARIANT

    params = BoxParams(d=args.d, k=args.k, s=args.s, seed=args.seed, oversample=args.oversample)
    clean = sample_clean_points(params, args.n, strategy=args.strategy)
    family = BlockFamily(FULL, params)
    inc = incidence_graph(clean.points, family)
    t_k = len(family.exponents)
    k22 = find_k22(inc)
    hist = degree_histogram(inc)
    lower = lower_block_violations(clean.points, params)
    checks = {"k22_free": k22 is None, "degrees": hist == {t_k: len(clean.points)}, "lower_blocks_clean": not lower}
    doc = {
        "config": _config(args),
        "T_k": t_k,
        "k22": "none" if k22 is None else {"points": k22[:2], "boxes": [family.block(b).to_json() for b in k22[2:]]},
        "degree_histogram": {str(k): v for k, v in hist.items()},
        "sampling": clean.stats,
        "nominal_params": params.nominal_params(),
        "checks": checks,
    }
    if args.verify_separation:
        emb = separation_embedding(clean.points, family, sorted(set(inc.edges[:, 1].tolist())))
        order = embedding_order_violations(clean.points, family, emb)
        sep = verify_separation(emb, inc)
        checks["embedding_order"] = not order
        checks["separation"] = sep is True
        doc["separation"] = {"edges": len(inc.edges), "result": "pass" if sep is True else {"edges": sep}}
    _write(args, "points.json", dumps(clean.points.to_json()))
    csv = degree_histogram_csv(hist)
    _write(args, "degrees.csv", csv)
    _write(args, "incidence.edgelist", "".join(f"{p} {b}\n" for p, b in inc.edges.tolist()))
    _emit(args, doc, {"csv": csv})
    return EXIT_OK if all(checks.values()) else EXIT_INVARIANT


def cmd_delaunay(args):
    from .blocks import BoxParams
    from .delaunay import DelaunayParams, run_pipeline

    params = DelaunayParams(
        BoxParams(d=args.d, k=args.k, s=args.s, seed=args.seed),
        divisor=args.divisor,
        sample_prob=args.p,
        q_size=args.q_size,
        theta=args.theta,
        node_cap=args.node_cap,
        enumerate=not args.no_containers,
    )
    res = run_pipeline(params)
    rep = res.report
    doc = {"config": _config(args), "report": rep, "nominal_params": params.base.nominal_params()}
    if rep["alpha_D"] is not None and rep["alpha_GP"] is not None:
        rep["alpha_D_le_alpha_GP"] = rep["alpha_D"] <= rep["alpha_GP"]
    _write(args, "P.json", dumps(res.P.to_json()))
    _write(args, "G_P.edgelist", _edge_text(res.G_P))
    _write(args, "D.edgelist", _edge_text(res.D))
    _emit(args, doc, {"edgelist": _edge_text(res.D)})
    ok = rep["max_block_load"] <= 2 and rep["subgraph_check"] and rep["sweep_matches_brute"] is not False
    return EXIT_OK if ok else EXIT_INVARIANT


def cmd_trend(args):
    from .delaunay import trend_report

    rep = trend_report(d=args.d, k=args.k, sizes=tuple(args.sizes), seeds=range(args.seed, args.seed + args.seeds), divisor=args.divisor)
    _emit(args, {"config": _config(args), "trend": rep})
    return EXIT_OK


def cmd_verify_all(args):
    from .verify import run_all

    ok, first, results = run_all(args.scale, fault=args.inject_fault)
    doc = {"config": _config(args), "ok": ok, "first_failure": first, "checks": results}
    _emit(args, doc)
    for name, detail in results.items():
        print(f"{'PASS' if detail['ok'] else 'FAIL'} {name}", file=sys.stderr)
    if not ok:
        print(f"first failing invariant: {first}", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


# parser


def _positive(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="RNG seed (default: $EXTREMAL_GEOM_SEED or 0)")
    common.add_argument("--out", default=None, help="directory for artifact files")
    common.add_argument("--format", choices=("json", "csv", "edgelist"), default="json", help="stdout view")
    common.add_argument("--threads", type=_positive, default=None, help="cap on kernel worker threads")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="extremal-geom", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("vectors", parents=[common], help="direction set with no three dependent vectors")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--epsilon", type=_fraction, default=Fraction(1, 200))
    p.add_argument("--trim", type=int, default=None, help="keep only this many vectors")
    p.set_defaults(func=cmd_vectors)

    p = sub.add_parser("lines", parents=[common], help="line family, intersection graph and triangle cleanup")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--p", type=_fraction, required=True, help="sampling probability in (0, 1)")
    p.add_argument("--epsilon", type=_fraction, default=Fraction(1, 200))
    p.add_argument("--emit-full-graph", action="store_true")
    p.set_defaults(func=cmd_lines)

    p = sub.add_parser("boxes", parents=[common], help="point/box incidences without K_{2,2}")
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--s", type=int, default=4)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--oversample", type=_fraction, default=Fraction(2))
    p.add_argument("--strategy", choices=("auto", "delete-pairs", "sequential"), default="auto")
    p.add_argument("--van-der-corput", type=int, default=None, metavar="T")
    p.add_argument("--verify-separation", action="store_true")
    p.set_defaults(func=cmd_boxes)

    p = sub.add_parser("delaunay", parents=[common], help="sparse sample whose box-Delaunay graph has small independence number")
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--s", type=int, default=4)
    p.add_argument("--divisor", type=_fraction, default=Fraction(4), help="n = |Q| / (divisor |T_k|^{3/2})")
    p.add_argument("--p", type=_fraction, default=None, help="sampling probability (default 4n/|Q|)")
    p.add_argument("--q-size", type=int, default=None)
    p.add_argument("--theta", type=int, default=None)
    p.add_argument("--node-cap", type=int, default=50_000)
    p.add_argument("--no-containers", action="store_true")
    p.set_defaults(func=cmd_delaunay)

    p = sub.add_parser("trend", parents=[common], help="alpha(D)/n across instance sizes")
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--sizes", type=int, nargs="+", default=[3, 4, 5, 6])
    p.add_argument("--seeds", type=_positive, default=5)
    p.add_argument("--divisor", type=_fraction, default=Fraction(4))
    p.set_defaults(func=cmd_trend)

    p = sub.add_parser("verify-all", parents=[common], help="run the invariant suite")
    p.add_argument("--scale", choices=("small", "medium"), default="small")
    p.add_argument("--inject-fault", default=None, metavar="CHECK", help="corrupt the input of one check")
    p.set_defaults(func=cmd_verify_all)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.seed is None:
            args.seed = _default_seed()
        if args.threads:
            kernels.set_threads(args.threads)
        return args.func(args)
    except (ParameterError, InfeasibleConstants) as exc:
        print(f"parameter error: {exc}", file=sys.stderr)
        return EXIT_PARAM
    except (RetriesExhausted, CapExceeded, BudgetExceeded) as exc:
        print(f"exhausted: {exc}", file=sys.stderr)
        return EXIT_EXHAUSTED
    except (InvariantFailure, SubgraphViolation) as exc:
        print(f"invariant failure: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
