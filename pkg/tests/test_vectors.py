from fractions import Fraction
from itertools import combinations, product
from math import ceil, comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from extremal_geom.errors import ParameterError, RetriesExhausted
from extremal_geom.geom import is_indivisible
from extremal_geom.vectors import (
    DirectionSet,
    ModCurve,
    VectorParams,
    build_direction_set,
    check_direction_set,
    dependent_triples,
    find_prime,
    is_good,
    minimal_representative,
)


def sieve(limit):
    flags = bytearray([1]) * (limit + 1)
    flags[0:2] = b"\x00\x00"
    for i in range(2, int(limit**0.5) + 1):
        if flags[i]:
            flags[i * i :: i] = bytearray(len(flags[i * i :: i]))
    return [i for i, f in enumerate(flags) if f]


def prime_oracle(N):
    # N^1.5 / 2 < p < N^1.5  <=>  N^3 < 4 p^2  and  p^2 < N^3
    return next(p for p in sieve(2 * N**2) if 4 * p * p > N**3 and p * p < N**3)


def representative_oracle(u, p):
    """Search integer vectors by growing max-norm for a multiple of u mod p."""
    multiples = {}
    for lam in range(1, p):
        multiples.setdefault(tuple(lam * c % p for c in u), lam)
    for bound in range(p):
        best = None
        for w in product(range(-bound, bound + 1), repeat=3):
            if max(map(abs, w)) != bound:
                continue
            lam = multiples.get(tuple(c % p for c in w))
            if lam is not None and (best is None or lam < best[0]):
                best = (lam, w)
        if best:
            return best[1]
    raise AssertionError("unreachable")


def int_det(a, b, c):
    return round(np.linalg.det(np.array([a, b, c], dtype=float)))


@pytest.mark.parametrize("N,p", [(4, 5), (9, 17), (100, 503)])
def test_find_prime_examples(N, p):
    assert find_prime(N) == p == prime_oracle(N)


@given(st.integers(2, 400))
def test_find_prime_matches_sieve(N):
    assert find_prime(N) == prime_oracle(N)


def test_find_prime_rejects_small():
    with pytest.raises(ParameterError):
        find_prime(1)


def test_minimal_representative_examples():
    assert minimal_representative((1, 1, 1), 5) == (1, 1, 1)
    # lambda = 1 already reaches max-norm 1, so the smallest-lambda tie break
    # keeps (-1, -1, -1); lambda = 4 would give the sign-flipped (1, 1, 1)
    assert minimal_representative((4, 4, 4), 5) == (-1, -1, -1) == representative_oracle((4, 4, 4), 5)
    assert minimal_representative((2, 3, 0), 7) == (-1, 2, 0)
    with pytest.raises(ParameterError):
        minimal_representative((0, 7, 14), 7)


@settings(max_examples=40)
@given(st.sampled_from([5, 7, 11, 13]), st.tuples(st.integers(0, 12), st.integers(0, 12), st.integers(0, 12)))
def test_minimal_representative_matches_search(p, u):
    u = tuple(c % p for c in u)
    if not any(u):
        return
    assert minimal_representative(u, p) == representative_oracle(u, p)


def test_is_good_examples():
    assert is_good((1, 1, 1), 5, 4)
    for lam in range(1, 7):
        assert not is_good((lam, 0, 0), 7, 5)
    # representative (-1, 2, 0) has a zero coordinate
    assert not is_good((2, 3, 0), 7, 5)


@pytest.mark.parametrize("p", [p for p in sieve(31) if p >= 5])
def test_moment_curve_triples_independent_mod_p(p):
    rng = np.random.default_rng(p)
    for _ in range(3):
        a, b, c = (int(x) for x in rng.integers(1, p, size=3))
        pts = ModCurve(p, a, b, c).points()
        assert len(pts) == p - 1
        for x, y, z in combinations(pts, 3):
            assert int_det(x, y, z) % p != 0


@settings(max_examples=20)
@given(st.integers(0, 10**6))
def test_tiny_instance_any_seed(seed):
    ds = build_direction_set(VectorParams(N=4, seed=seed))
    assert ds.prime == 5
    assert len(ds) >= 1
    assert check_direction_set(ds)["ok"]


@pytest.mark.parametrize("N", [10, 30, 57])
def test_direction_set_invariants_with_oracles(N):
    ds = build_direction_set(VectorParams(N=N, seed=3))
    low = ceil(Fraction(N, 200))
    assert ds.prime == prime_oracle(N)
    assert len(ds) >= Fraction(ds.prime - 1, 16)
    assert len(set(ds.elements)) == len(ds)
    for v in ds.elements:
        assert all(low <= c <= N for c in v)
        assert is_indivisible(v)
    for x, y, z in combinations(ds.elements, 3):
        assert int_det(x, y, z) != 0


def test_n30_size():
    ds = build_direction_set(VectorParams(N=30, seed=0))
    assert ds.prime == 83
    assert len(ds) >= ceil(82 / 16)


def test_determinism_and_json():
    a = build_direction_set(VectorParams(N=30, seed=11))
    b = build_direction_set(VectorParams(N=30, seed=11))
    assert a.elements == b.elements
    doc = a.to_json()
    assert set(doc) >= {"N", "epsilon", "prime", "a", "b", "c", "elements"}
    again = DirectionSet.from_json(doc)
    assert again.elements == a.elements


def test_trim_reports_unattainable():
    ds = build_direction_set(VectorParams(N=30, seed=0, trim=3))
    assert len(ds) == 3
    big = build_direction_set(VectorParams(N=30, seed=0, trim=10**6))
    assert big.stats.get("trim_unattainable")


def test_retries_exhausted():
    with pytest.raises(RetriesExhausted):
        build_direction_set(VectorParams(N=30, epsilon=Fraction(99, 100), max_retries=2))


@pytest.mark.parametrize("kwargs", [{"N": 1}, {"N": 10, "epsilon": Fraction(0)}, {"N": 10, "epsilon": Fraction(1)}])
def test_params_validation(kwargs):
    with pytest.raises(ParameterError):
        VectorParams(**kwargs)


def test_dependent_triples_detects_injection():
    ds = build_direction_set(VectorParams(N=30, seed=0))
    u, v = ds.elements[0], ds.elements[1]
    elems = list(ds.elements) + [tuple(x + y for x, y in zip(u, v))]
    bad, checked = dependent_triples(elems)
    assert checked == comb(len(elems), 3)
    assert bad
