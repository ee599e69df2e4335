from fractions import Fraction
from itertools import permutations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from extremal_geom.errors import ParameterError
from extremal_geom.geom import (
    DyadicPoint,
    IntVec3,
    Line3,
    PointSet,
    canonicalize_line,
    det3,
    intersection_point,
    is_indivisible,
    lines_intersect,
    point_on_line,
    primitive,
    vec,
)

ints = st.integers(-50, 50)
vectors = st.tuples(ints, ints, ints)
directions = st.tuples(st.integers(1, 9), st.integers(1, 9), st.integers(1, 9)).filter(is_indivisible)


def leibniz_det(rows):
    """Permutation-sum determinant, independent of the cross product."""
    total = 0
    for perm in permutations(range(3)):
        inv = sum(1 for i in range(3) for j in range(i + 1, 3) if perm[i] > perm[j])
        term = (-1) ** inv
        for r, c in enumerate(perm):
            term *= rows[r][c]
        total += term
    return total


def solve_meet(l1, l2):
    """Oracle: solve b1 + s d1 = b2 + t d2 by elimination over Fractions."""
    a = [[Fraction(l1.dir[i]), Fraction(-l2.dir[i]), Fraction(l2.base[i] - l1.base[i])] for i in range(3)]
    for i, j in ((0, 1), (0, 2), (1, 2)):
        den = a[i][0] * a[j][1] - a[i][1] * a[j][0]
        if den != 0:
            s = (a[i][2] * a[j][1] - a[i][1] * a[j][2]) / den
            t = (a[i][0] * a[j][2] - a[i][2] * a[j][0]) / den
            if all(a[r][0] * s + a[r][1] * t == a[r][2] for r in range(3)):
                return tuple(l1.base[r] + s * l1.dir[r] for r in range(3))
            return None
    return "parallel"


def test_det3_examples():
    assert det3((1, 0, 0), (0, 1, 0), (0, 0, 1)) == 1
    assert det3((1, 1, 1), (2, 2, 2), (0, 1, 0)) == 0
    rows = [(1, 1, 1), (1, 2, 4), (1, 3, 2)]
    # cofactor expansion: (4 - 12) - (2 - 4) + (3 - 2)
    assert leibniz_det(rows) == -5
    assert det3(*rows) == -5


def test_det3_big_integers_exact():
    big = 10**40
    assert det3((big, 0, 0), (0, big, 0), (0, 0, big)) == big**3


@given(vectors, vectors, vectors)
def test_det3_matches_leibniz_and_alternates(a, b, c):
    d = det3(a, b, c)
    assert d == leibniz_det([a, b, c])
    assert det3(b, a, c) == -d
    assert det3(a, c, b) == -d
    assert det3(c, b, a) == -d


def test_lines_intersect_examples():
    l1 = canonicalize_line((0, 0, 0), (1, 2, 3))
    assert lines_intersect(l1, canonicalize_line((0, 0, 0), (2, 3, 5)))
    assert det3((0, 0, 1), (1, 2, 3), (2, 3, 5)) == -1
    assert not lines_intersect(l1, canonicalize_line((0, 0, 1), (2, 3, 5)))
    assert not lines_intersect(l1, canonicalize_line((1, 0, 0), (1, 2, 3)))


def test_canonicalize_examples():
    assert canonicalize_line((5, 10, 15), (1, 2, 3)).base == (0, 0, 0)
    assert canonicalize_line((3, 5, 7), (2, 3, 5)).base == (1, 2, 2)
    assert canonicalize_line((0, 1, 0), (1, 1, 1)).base == (0, 1, 0)


@pytest.mark.parametrize("bad", [(0, 1, 1), (-1, 2, 3), (2, 4, 6)])
def test_canonicalize_rejects_bad_direction(bad):
    with pytest.raises(ParameterError):
        canonicalize_line((0, 0, 0), bad)


@given(vectors, directions, st.integers(-10, 10))
def test_canonical_form_is_shift_invariant(p, d, t):
    line = canonicalize_line(p, d)
    shifted = IntVec3(*p) + IntVec3(*d).scale(t)
    assert canonicalize_line(shifted, d) == line
    assert 0 <= line.base.x < d[0]
    assert line.contains(p)


@given(vectors, directions, vectors, directions)
def test_lines_intersect_matches_elimination(p1, d1, p2, d2):
    l1, l2 = canonicalize_line(p1, d1), canonicalize_line(p2, d2)
    assert lines_intersect(l1, l2) == lines_intersect(l2, l1)
    assert lines_intersect(l1, l1)
    meet = solve_meet(l1, l2)
    if meet == "parallel":
        assert lines_intersect(l1, l2) == (l1 == l2)
    else:
        assert lines_intersect(l1, l2) == (meet is not None)
        if meet is not None:
            assert intersection_point(l1, l2) == meet
            assert point_on_line(meet, l1) and point_on_line(meet, l2)


def test_intersection_point_errors():
    l1 = canonicalize_line((0, 0, 0), (1, 2, 3))
    with pytest.raises(ParameterError):
        intersection_point(l1, canonicalize_line((1, 0, 0), (1, 2, 3)))
    with pytest.raises(ParameterError):
        intersection_point(l1, canonicalize_line((0, 0, 1), (2, 3, 5)))


def test_grid_count_matches_enumeration():
    for d in [(1, 1, 1), (1, 2, 3), (2, 3, 5)]:
        for p in [(0, 0, 0), (1, 2, 2), (0, 1, 0), (1, 0, 3)]:
            line = canonicalize_line(p, d)
            k = 7
            brute = sum(
                1
                for x in range(1, k + 1)
                for y in range(1, k + 1)
                for z in range(1, k + 1)
                if line.contains((x, y, z))
            )
            assert line.grid_count(k) == brute


def test_primitive():
    assert primitive((2, 4, 6)) == (1, 2, 3)
    assert primitive((0, -3, 6)) == (0, 1, -2)
    with pytest.raises(ParameterError):
        primitive((0, 0, 0))


def test_line_ordering_and_equality():
    a = canonicalize_line((3, 5, 7), (2, 3, 5))
    b = canonicalize_line((1, 2, 2), (2, 3, 5))
    assert a == b and hash(a) == hash(b)
    assert isinstance(a, Line3)
    assert vec((1, 2, 3)).cross((0, 0, 1)) == (2, -1, 0)


def test_dyadic_point():
    p = DyadicPoint((1, 6), 2)
    assert p.as_fractions() == (Fraction(1, 4), Fraction(3, 2))
    assert p.scaled(3).num == (3, 18)


def test_pointset_json_roundtrip_and_ranks():
    ps = PointSet.from_rows([[5, 1], [2, 7], [9, 3]], bits=3, extent=2)
    again = PointSet.from_json(ps.to_json())
    assert again.to_json() == ps.to_json()
    assert ps.to_json() == {"denominator_exponent": 3, "extent": 2, "points": [[5, 1], [2, 7], [9, 3]]}
    assert ps.ranks().tolist() == [[1, 0], [0, 2], [2, 1]]
    assert not ps.has_axis_collisions()
    assert PointSet.from_rows([[1, 2], [1, 3]], 0, 4).has_axis_collisions()
    assert ps.lexsorted().num.tolist() == [[2, 7], [5, 1], [9, 3]]


def test_pointset_big_numerators_use_objects():
    big = 2**70
    ps = PointSet.from_rows([[big, 1], [3, big + 1]], bits=70, extent=2)
    assert ps.num.dtype == object
    assert ps.point(0).num == (big, 1)
    assert np.array_equal(ps.ranks(), [[1, 0], [0, 1]])
