"""Exact integer and dyadic primitives.

Nothing in here touches floating point: vectors hold Python ints, rationals are
``fractions.Fraction``, and random points are integer numerators over a shared
power-of-two denominator.
"""

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import NamedTuple

import numpy as np

from .errors import ParameterError

Rational = Fraction


class IntVec3(NamedTuple):
    x: int
    y: int
    z: int

    def __add__(self, other):
        return IntVec3(self.x + other[0], self.y + other[1], self.z + other[2])

    def __sub__(self, other):
        return IntVec3(self.x - other[0], self.y - other[1], self.z - other[2])

    def scale(self, t):
        return IntVec3(t * self.x, t * self.y, t * self.z)

    def dot(self, other):
        return self.x * other[0] + self.y * other[1] + self.z * other[2]

    def cross(self, other):
        return IntVec3(
            self.y * other[2] - self.z * other[1],
            self.z * other[0] - self.x * other[2],
            self.x * other[1] - self.y * other[0],
        )


def vec(a):
    return a if isinstance(a, IntVec3) else IntVec3(*(int(c) for c in a))


def det3(a, b, c):
    """Exact determinant of the 3x3 matrix with rows a, b, c."""
    a, b, c = vec(a), vec(b), vec(c)
    return a.dot(b.cross(c))


def is_indivisible(v):
    return gcd(gcd(int(v[0]), int(v[1])), int(v[2])) == 1


def primitive(v):
    """Divide out the gcd and make the first nonzero coordinate positive."""
    v = vec(v)
    g = gcd(gcd(v.x, v.y), v.z)
    if g == 0:
        raise ParameterError("zero vector has no primitive form")
    v = IntVec3(v.x // g, v.y // g, v.z // g)
    first = next(c for c in v if c != 0)
    return v.scale(-1) if first < 0 else v


@dataclass(frozen=True, order=True)
class Line3:
    """A line {base + t*dir}, stored in canonical form.

    ``dir`` is indivisible with positive coordinates and ``base`` is the unique
    integer point of the line with ``0 <= base.x < dir.x``, so two values are
    equal exactly when they describe the same line.
    """

    base: IntVec3
    dir: IntVec3

    def contains(self, point):
        return (vec(point) - self.base).cross(self.dir) == (0, 0, 0)

    def grid_count(self, k):
        """Number of points of {1..k}^3 on the line."""
        lo, hi = None, None
        for b, d in zip(self.base, self.dir):
            # 1 <= b + t*d <= k  with d > 0
            t_lo = -((b - 1) // d)
            t_hi = (k - b) // d
            lo = t_lo if lo is None else max(lo, t_lo)
            hi = t_hi if hi is None else min(hi, t_hi)
        return max(0, hi - lo + 1)


def canonicalize_line(point, direction):
    direction = vec(direction)
    if min(direction) <= 0:
        raise ParameterError(f"direction {tuple(direction)} must have positive coordinates")
    if not is_indivisible(direction):
        raise ParameterError(f"direction {tuple(direction)} is not indivisible")
    point = vec(point)
    t = point.x // direction.x
    return Line3(point - direction.scale(t), direction)


def lines_intersect(l1, l2):
    n = l1.dir.cross(l2.dir)
    if n == (0, 0, 0):
        return l1 == l2
    return det3(l2.base - l1.base, l1.dir, l2.dir) == 0


def intersection_point(l1, l2):
    """Common point of two coplanar non-parallel lines, as a tuple of Fractions."""
    n = l1.dir.cross(l2.dir)
    nn = n.dot(n)
    if nn == 0:
        raise ParameterError("parallel lines have no unique intersection point")
    diff = l2.base - l1.base
    if diff.dot(n) != 0:
        raise ParameterError("lines are skew")
    s = Fraction(diff.cross(l2.dir).dot(n), nn)
    return tuple(Fraction(b) + s * d for b, d in zip(l1.base, l1.dir))


def point_on_line(point, line):
    diff = [Fraction(p) - b for p, b in zip(point, line.base)]
    d = line.dir
    return (
        diff[1] * d.z - diff[2] * d.y == 0
        and diff[2] * d.x - diff[0] * d.z == 0
        and diff[0] * d.y - diff[1] * d.x == 0
    )


@dataclass(frozen=True)
class DyadicPoint:
    """A point with coordinates ``num[i] / 2**bits``."""

    num: tuple
    bits: int

    @property
    def d(self):
        return len(self.num)

    def as_fractions(self):
        return tuple(Fraction(c, 2**self.bits) for c in self.num)

    def scaled(self, factor):
        return DyadicPoint(tuple(c * factor for c in self.num), self.bits)


class PointSet:
    """A batch of dyadic points sharing one denominator ``2**bits``.

    ``num`` is an (n, d) array of numerators; it is int64 when every value
    fits and an object array of Python ints otherwise.
    """

    def __init__(self, num, bits, extent):
        self.num = num
        self.bits = int(bits)
        self.extent = int(extent)

    @classmethod
    def from_rows(cls, rows, bits, extent, d=None):
        rows = [tuple(int(c) for c in r) for r in rows]
        if d is None:
            d = len(rows[0]) if rows else 0
        top = max((max(r) for r in rows if r), default=0)
        dtype = np.int64 if top < 2**62 else object
        num = np.array(rows, dtype=dtype).reshape(len(rows), d)
        return cls(num, bits, extent)

    def __len__(self):
        return self.num.shape[0]

    @property
    def d(self):
        return self.num.shape[1]

    def point(self, i):
        return DyadicPoint(tuple(int(c) for c in self.num[i]), self.bits)

    def __iter__(self):
        for i in range(len(self)):
            yield self.point(i)

    def subset(self, idx):
        return PointSet(self.num[np.asarray(idx, dtype=np.int64)], self.bits, self.extent)

    def lexsorted(self):
        """Copy with rows in lexicographic coordinate order."""
        if len(self) == 0:
            return self
        rows = sorted(range(len(self)), key=lambda i: tuple(int(c) for c in self.num[i]))
        return self.subset(rows)

    def ranks(self):
        """Per-axis ranks (int64); coordinates must be distinct per axis."""
        out = np.empty(self.num.shape, dtype=np.int64)
        for a in range(self.d):
            col = self.num[:, a]
            order = sorted(range(len(col)), key=lambda i: int(col[i]))
            out[order, a] = np.arange(len(col))
        return out

    def has_axis_collisions(self):
        for a in range(self.d):
            col = [int(c) for c in self.num[:, a]]
            if len(set(col)) != len(col):
                return True
        return False

    def to_json(self):
        return {
            "denominator_exponent": self.bits,
            "extent": self.extent,
            "points": [[int(c) for c in row] for row in self.num],
        }

    @classmethod
    def from_json(cls, data):
        rows = data["points"]
        d = len(rows[0]) if rows else 0
        return cls.from_rows(rows, data["denominator_exponent"], data.get("extent", 1), d=d)
