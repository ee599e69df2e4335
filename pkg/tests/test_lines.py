from fractions import Fraction
from itertools import combinations, product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from extremal_geom.errors import InfeasibleConstants, ParameterError
from extremal_geom.geom import IntVec3, Line3, canonicalize_line, lines_intersect
from extremal_geom.graphs import enumerate_triangles, exact_mis
from extremal_geom.lines import (
    Constants,
    LineFamily,
    LineParams,
    build_line_family,
    build_plane_families,
    edge_partition_check,
    in_window,
    intersection_graph,
    intersection_graph_bruteforce,
    nominal_r,
    nonconcurrent_triangles,
    plane_bound,
    probability_window,
    sparsify_and_clean,
    theorem_1_1_parameters,
    verify_triangle_concurrency,
)
from extremal_geom.vectors import DirectionSet, VectorParams, build_direction_set

# pairwise independent, and det = 1 for the triple
TRIPLE = [IntVec3(1, 1, 1), IntVec3(1, 2, 3), IntVec3(2, 3, 5)]


def directions(elems, N=10):
    return DirectionSet([IntVec3(*e) for e in elems], VectorParams(N=N), None)


def family_oracle(dirs, k, r):
    """Every line through a grid point, kept when it carries >= r grid points."""
    found = set()
    for x in product(range(1, k + 1), repeat=3):
        for d in dirs:
            pts = [p for p in product(range(1, k + 1), repeat=3) if canonicalize_line(x, d).contains(p)]
            if len(pts) >= r:
                found.add(canonicalize_line(x, d))
    return sorted(found)


def diagonal_count(k, r):
    # a (1,1,1) line is fixed by (y - x, z - x); its points number k - span
    return sum(
        1 for dy in range(-k, k + 1) for dz in range(-k, k + 1) if k - (max(0, dy, dz) - min(0, dy, dz)) >= r
    )


def test_single_diagonal_family_matches_oracle():
    fam = build_line_family(LineParams(k=4, r=2, directions=directions([(1, 1, 1)], N=4)))
    assert fam.lines == family_oracle([(1, 1, 1)], 4, 2)
    assert len(fam) == diagonal_count(4, 2) == 19
    assert all(c >= 2 for c in fam.counts)


def test_pigeonhole_empty_family():
    fam = build_line_family(LineParams(k=2, r=3, directions=directions([(1, 1, 1)], N=4)))
    assert len(fam) == 0
    assert intersection_graph(fam).n == 0


@pytest.mark.parametrize("k,r", [(3, 2), (4, 2), (5, 3)])
def test_family_matches_oracle(k, r):
    fam = build_line_family(LineParams(k=k, r=r, directions=directions(TRIPLE)))
    assert fam.lines == family_oracle(TRIPLE, k, r)
    for line, c in zip(fam.lines, fam.counts):
        assert c == line.grid_count(k) >= r


def test_line_params_validation():
    ds = directions([(1, 1, 1)])
    for kw in ({"k": 4, "r": 1}, {"k": 0, "r": 2}, {"k": 4, "r": 2, "sample_prob": 1}):
        with pytest.raises(ParameterError):
            LineParams(directions=ds, **kw)
    assert not LineParams(k=4, r=2, directions=ds).scale_report()["coupled"]


def hand_family(lines, elems):
    params = LineParams(k=10, r=2, directions=directions(elems))
    types = [elems.index(tuple(l.dir)) for l in lines]
    return LineFamily(lines, params, types, [l.grid_count(10) for l in lines])


def test_concurrent_triple_forms_triangle():
    elems = [tuple(v) for v in TRIPLE]
    through = (3, 3, 3)
    fam = hand_family([canonicalize_line(through, d) for d in elems], elems)
    g = intersection_graph(fam)
    assert g.num_edges == 3
    tris = enumerate_triangles(g)
    assert tris == [(0, 1, 2)]
    assert verify_triangle_concurrency(fam, tris)


def test_two_lines_and_parallels():
    elems = [(1, 1, 1), (1, 2, 3)]
    fam = hand_family([canonicalize_line((2, 2, 2), d) for d in elems], elems)
    assert intersection_graph(fam).num_edges == 1
    par = hand_family([canonicalize_line((1, 1, 1), (1, 1, 1)), canonicalize_line((1, 2, 1), (1, 1, 1))], [(1, 1, 1)])
    assert intersection_graph(par).num_edges == 0


def test_nonconcurrent_and_same_type_triangles():
    elems = [tuple(v) for v in TRIPLE]
    lines = [canonicalize_line((3, 3, 3), elems[0]), canonicalize_line((3, 3, 3), elems[1])]
    # third line meets neither at (3,3,3): through a different point of line 0
    lines.append(canonicalize_line((4, 4, 4), elems[2]))
    fam = hand_family(lines, elems)
    assert nonconcurrent_triangles(fam, [(0, 1, 2)]) == [(0, 1, 2)]
    assert not verify_triangle_concurrency(fam, [(0, 1, 2)])
    same = hand_family(
        [canonicalize_line((1, 1, 1), elems[0]), canonicalize_line((1, 2, 1), elems[0]), lines[1]], elems
    )
    with pytest.raises(ParameterError):
        nonconcurrent_triangles(same, [(0, 1, 2)])


@pytest.fixture(scope="module")
def n10_family():
    ds = build_direction_set(VectorParams(N=10, seed=1))
    return build_line_family(LineParams(k=10, r=2, directions=ds))


def test_intersection_graph_matches_bruteforce(n10_family):
    g = intersection_graph(n10_family)
    assert g.edge_set() == intersection_graph_bruteforce(n10_family).edge_set()
    sample = n10_family.lines[:60]
    for i, j in combinations(range(len(sample)), 2):
        assert g.has_edge(i, j) == (i != j and lines_intersect(sample[i], sample[j]))


def test_triangles_of_real_family_are_concurrent(n10_family):
    g = intersection_graph(n10_family)
    tris = enumerate_triangles(g)
    assert tris
    assert verify_triangle_concurrency(n10_family, tris)


def test_plane_families_partition_edges(n10_family):
    g = intersection_graph(n10_family)
    planes = build_plane_families(n10_family)
    missing, extra, repeated = edge_partition_check(g, planes)
    assert not missing and not extra and not repeated
    k, r = n10_family.params.k, n10_family.params.r
    bound = plane_bound(k, r)
    assert bound == 3200 * Fraction(k**3, r * r)
    assert all(size <= bound for size in planes.sizes().values())
    for _, _, xs, ys in planes.bipartite_blocks():
        assert xs and ys
        for x in xs:
            for y in ys:
                assert g.has_edge(x, y)


def test_plane_family_simple_cases():
    elems = [(1, 1, 1), (1, 2, 3)]
    fam = hand_family([canonicalize_line((2, 2, 2), d) for d in elems], elems)
    planes = build_plane_families(fam)
    assert planes.sizes() == {(0, 1): 1}
    lonely = hand_family([canonicalize_line((2, 2, 2), elems[0])], elems)
    assert build_plane_families(lonely).sizes() == {(0, 1): 0}
    single = hand_family([canonicalize_line((2, 2, 2), elems[0])], elems[:1])
    assert len(build_plane_families(single)) == 0


def test_independence_number_at_most_grid_volume():
    for k, r in ((3, 2), (4, 3)):
        fam = build_line_family(LineParams(k=k, r=r, directions=directions(TRIPLE)))
        g = intersection_graph(fam)
        alpha, witness = exact_mis(g)
        assert g.is_independent(witness)
        assert alpha <= Fraction(k**3, r)


def test_sparsify_keeps_triangle_free_graph():
    elems = [(1, 1, 1), (1, 2, 3)]
    fam = hand_family([canonicalize_line((2, 2, 2), d) for d in elems], elems)
    g = intersection_graph(fam)
    out = sparsify_and_clean(fam, g, Fraction(999999, 1000000), seed=0)
    assert out.vertices == [0, 1] and not out.removed
    assert out.graph.num_edges == 1


def test_sparsify_single_triangle_removes_one():
    elems = [tuple(v) for v in TRIPLE]
    fam = hand_family([canonicalize_line((3, 3, 3), d) for d in elems], elems)
    g = intersection_graph(fam)
    out = sparsify_and_clean(fam, g, Fraction(999999, 1000000), seed=0)
    assert out.removed == [0]
    assert out.stats["triangles_H"] == 1
    assert out.graph.num_edges == 1


def test_sparsify_rejects_bad_probability(n10_family):
    g = intersection_graph(n10_family)
    for p in (0, 1, Fraction(3, 2)):
        with pytest.raises(ParameterError):
            sparsify_and_clean(n10_family, g, p, seed=0)


@settings(max_examples=15)
@given(st.integers(0, 10**6), st.sampled_from([Fraction(1, 5), Fraction(1, 2), Fraction(9, 10)]))
def test_cleanup_is_triangle_free(n10_family, seed, prob):
    g = intersection_graph(n10_family)
    out = sparsify_and_clean(n10_family, g, prob, seed)
    assert enumerate_triangles(out.graph) == []
    s = out.stats
    assert s["vertices_H_prime"] >= s["vertices_H"] - s["triangles_H"]
    assert s["vertices_H_prime"] + s["removed"] == s["vertices_H"]
    again = sparsify_and_clean(n10_family, g, prob, seed)
    assert again.vertices == out.vertices


@pytest.mark.parametrize("n", [1, 50, 10**4])
def test_tiny_targets_are_infeasible(n):
    with pytest.raises(InfeasibleConstants):
        theorem_1_1_parameters(n)


def test_theorem_parameters_accepted_instance():
    constants = Constants(c_l=Fraction(1), c_t=Fraction(1), c_j=Fraction(1, 10**6))
    params = theorem_1_1_parameters(10**4, c0=Fraction(1, 8), constants=constants)
    k, r = params.k, params.r
    assert Fraction(k) ** 45 <= Fraction(10**4) ** 32 < Fraction(k + 1) ** 45
    assert 8**16 * r**16 <= k**15 < 8**16 * (r + 1) ** 16
    lower, upper_sq = probability_window(len(params.directions), k, r, constants)
    assert in_window(params.sample_prob, lower, upper_sq)


def test_nominal_r_exponent():
    for k in (16, 100, 4096):
        assert nominal_r(2 * k) / nominal_r(k) == pytest.approx(2 ** (15 / 16))


def test_theorem_parameters_rejects_nonpositive():
    with pytest.raises(ParameterError):
        theorem_1_1_parameters(0)


def test_line3_type():
    assert isinstance(canonicalize_line((1, 1, 1), (1, 1, 1)), Line3)
