"""Direction sets in which every three vectors are linearly independent.

Vectors come from a random moment curve t -> (a, b*t, c*t^2) over F_p. Each
point is lifted to its smallest integer representative, and points whose
scalings can land near a coordinate hyperplane are discarded. The largest
sign class is kept and its signs are flipped positive.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import ceil, comb, isqrt

import numpy as np

from . import kernels
from .errors import ParameterError, RetriesExhausted
from .geom import IntVec3, det3, is_indivisible

log = logging.getLogger(__name__)

DEFAULT_EPSILON = Fraction(1, 200)


@dataclass(frozen=True)
class VectorParams:
    N: int
    epsilon: Fraction = DEFAULT_EPSILON
    seed: int = 0
    max_retries: int = 20
    trim: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "epsilon", Fraction(self.epsilon))
        if self.N < 2:
            raise ParameterError(f"N must be at least 2, got {self.N}")
        if not 0 < self.epsilon < 1:
            raise ParameterError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.max_retries < 1:
            raise ParameterError("max_retries must be positive")
        if self.trim is not None and self.trim < 0:
            raise ParameterError("trim must be nonnegative")

    @property
    def low(self):
        """Smallest allowed coordinate, ceil(epsilon * N)."""
        return ceil(self.epsilon * self.N)


@dataclass(frozen=True)
class ModCurve:
    p: int
    a: int
    b: int
    c: int

    def point(self, t):
        return (self.a % self.p, self.b * t % self.p, self.c * t * t % self.p)

    def points(self):
        return [self.point(t) for t in range(1, self.p)]


@dataclass
class DirectionSet:
    elements: list
    params: VectorParams
    curve: ModCurve
    attempts: int = 1
    stats: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    @property
    def prime(self):
        return self.curve.p

    def to_json(self):
        return {
            "N": self.params.N,
            "epsilon": str(self.params.epsilon),
            "prime": self.curve.p,
            "a": self.curve.a,
            "b": self.curve.b,
            "c": self.curve.c,
            "elements": [list(v) for v in self.elements],
        }

    @classmethod
    def from_json(cls, data, seed=0):
        params = VectorParams(N=data["N"], epsilon=Fraction(data["epsilon"]), seed=seed)
        curve = ModCurve(data["prime"], data["a"], data["b"], data["c"])
        return cls([IntVec3(*v) for v in data["elements"]], params, curve)


def _is_prime(n):
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def find_prime(N):
    """Smallest prime p with N^{3/2}/2 < p < N^{3/2}."""
    if N < 2:
        raise ParameterError(f"N must be at least 2, got {N}")
    cube = N**3
    p = max(2, isqrt(cube) // 2)
    while 4 * p * p <= cube:
        p += 1
    while p * p < cube:
        if _is_prime(p):
            return p
        p += 1
    raise AssertionError(f"no prime in (N^1.5/2, N^1.5) for N={N}; Bertrand's postulate violated?")


def _centered(x, p):
    r = x % p
    return r - p if 2 * r > p else r


def minimal_representative(u, p):
    """Integer lift of the smallest-max-norm scaling of u mod p (ties: smallest lambda)."""
    u = [int(c) % p for c in u]
    if not any(u):
        raise ParameterError("the zero vector has no representative")
    best, best_max = None, None
    for lam in range(1, p):
        cand = [_centered(lam * c, p) for c in u]
        mx = max(abs(c) for c in cand)
        if best_max is None or mx < best_max:
            best, best_max = cand, mx
    rep = IntVec3(*best)
    assert is_indivisible(rep), f"minimal representative {rep} is divisible"
    return rep


def is_good(v, p, N, epsilon=DEFAULT_EPSILON):
    """True iff no scaling of v lies in [-N, N]^3 with a coordinate in [-eps*N, eps*N]."""
    epsilon = Fraction(epsilon)
    v = [int(c) % p for c in v]
    if not any(v):
        raise ParameterError("the zero vector has no representative")
    for lam in range(1, p):
        c = [abs(_centered(lam * x, p)) for x in v]
        if max(c) <= N and min(c) <= epsilon * N:
            return False
    return True


def sign_pattern(v):
    return tuple(int(c < 0) for c in v)


def build_direction_set(params):
    """Run the moment-curve construction until the size target is met."""
    p = find_prime(params.N)
    if p >= 2**31:
        raise ParameterError(f"prime {p} too large for the representative scan")
    target = Fraction(p - 1, 16)
    rng = np.random.default_rng(params.seed)
    eps = params.epsilon
    best_size = 0
    for attempt in range(1, params.max_retries + 1):
        a, b, c = (int(x) for x in rng.integers(1, p, size=3))
        curve = ModCurve(p, a, b, c)
        pts = np.array(curve.points(), dtype=np.int64)
        lam, maxabs, bad = kernels.representative_scan(pts, p, params.N, eps.numerator, eps.denominator)
        classes = {}
        n_good = 0
        for i in range(len(pts)):
            if bad[i] or maxabs[i] > params.N:
                continue
            n_good += 1
            rep = IntVec3(*(_centered(int(lam[i]) * int(x), p) for x in pts[i]))
            classes.setdefault(sign_pattern(rep), []).append(rep)
        if classes:
            # largest class; ties go to the lexicographically smallest pattern
            pattern = max(sorted(classes), key=lambda k: len(classes[k]))
            chosen = [IntVec3(*(abs(x) for x in v)) for v in classes[pattern]]
        else:
            chosen = []
        best_size = max(best_size, len(chosen))
        log.debug("attempt %d: good=%d kept=%d target=%s", attempt, n_good, len(chosen), target)
        if len(chosen) >= target and chosen:
            stats = {
                "good": n_good,
                "kept": len(chosen),
                "target": str(target),
                "nominal_size": round(nominal_size(params.N), 3),
            }
            if params.trim is not None:
                if params.trim > len(chosen):
                    stats["trim_unattainable"] = True
                chosen = chosen[: params.trim]
            return DirectionSet(chosen, params, curve, attempt, stats)
    raise RetriesExhausted(
        f"no curve produced {target} good elements in {params.max_retries} attempts "
        f"(best {best_size}) for N={params.N}"
    )


def nominal_size(N, c_s=Fraction(1, 64)):
    """c_s * N^{3/2} as a float; reported, never enforced."""
    return float(c_s) * N**1.5


def _triple_dets(arr, idx):
    a, b, c = arr[idx[:, 0]], arr[idx[:, 1]], arr[idx[:, 2]]
    cross = np.stack(
        [
            b[:, 1] * c[:, 2] - b[:, 2] * c[:, 1],
            b[:, 2] * c[:, 0] - b[:, 0] * c[:, 2],
            b[:, 0] * c[:, 1] - b[:, 1] * c[:, 0],
        ],
        axis=1,
    )
    return (a * cross).sum(axis=1)


def dependent_triples(elements, limit=None, chunk=200_000):
    """All index triples (i<j<l) with det3 == 0, plus the number of triples checked."""
    n = len(elements)
    checked = comb(n, 3)
    if n < 3:
        return [], checked
    top = max(abs(int(c)) for v in elements for c in v)
    bad = []
    if kernels.fits_int64(top, factor=6 * top * top):
        arr = np.array([list(v) for v in elements], dtype=np.int64)
        it = combinations(range(n), 3)
        while True:
            idx = np.fromiter((x for t in _take(it, chunk) for x in t), dtype=np.int64)
            if idx.size == 0:
                break
            idx = idx.reshape(-1, 3)
            zero = np.nonzero(_triple_dets(arr, idx) == 0)[0]
            bad.extend(tuple(int(x) for x in idx[z]) for z in zero)
            if limit is not None and len(bad) >= limit:
                return bad[:limit], checked
    else:
        for i, j, l in combinations(range(n), 3):
            if det3(elements[i], elements[j], elements[l]) == 0:
                bad.append((i, j, l))
                if limit is not None and len(bad) >= limit:
                    break
    return bad, checked


def _take(it, k):
    for _, x in zip(range(k), it):
        yield x


def check_direction_set(ds, exhaustive_limit=None):
    """Invariant report for a DirectionSet; ``ok`` is False on any violation."""
    low, N = ds.params.low, ds.params.N
    out_of_box = [tuple(v) for v in ds.elements if not all(low <= c <= N for c in v)]
    divisible = [tuple(v) for v in ds.elements if not is_indivisible(v)]
    report = {
        "size": len(ds),
        "size_target": str(Fraction(ds.prime - 1, 16)),
        "coordinate_range": [low, N],
        "out_of_range": out_of_box,
        "divisible": divisible,
    }
    if exhaustive_limit is None or len(ds) <= exhaustive_limit:
        bad, checked = dependent_triples(ds.elements, limit=10)
        report["triples_checked"] = checked
        report["violations"] = len(bad)
        report["first_violations"] = bad
    size_ok = ds.params.trim is not None or len(ds) >= Fraction(ds.prime - 1, 16)
    report["size_ok"] = size_ok
    report["ok"] = not out_of_box and not divisible and report.get("violations", 0) == 0 and size_ok
    return report
