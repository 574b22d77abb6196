from __future__ import annotations

import random
from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, settings, strategies as st

from bvlab.exterior import (
    ExteriorSpace,
    StructureError,
    indices,
    mask_of,
    masks_of_degree,
    merge_sign,
    super_commutativity_check,
    wedge,
)
from bvlab.poly import PolynomialRing


def bubble_sign(seq: list[int]) -> int:
    """Sort by adjacent swaps and count them; independent of the bitset code."""
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(len(seq) - 1 - i):
            if seq[j] > seq[j + 1]:
                seq[j], seq[j + 1] = seq[j + 1], seq[j]
                sign = -sign
    return sign


def oracle_wedge(a: dict, b: dict) -> dict:
    """Wedge of dicts {sorted index tuple: Fraction} by concatenation and bubble sort."""
    out: dict = {}
    for s, ca in a.items():
        for t, cb in b.items():
            seq = list(s) + list(t)
            if len(set(seq)) < len(seq):
                continue
            key = tuple(sorted(seq))
            out[key] = out.get(key, 0) + bubble_sign(seq) * ca * cb
    return {k: v for k, v in out.items() if v}


def random_element(rnd: random.Random, n: int, terms: int = 4) -> dict:
    out = {}
    for _ in range(terms):
        k = rnd.randint(0, n)
        idx = tuple(sorted(rnd.sample(range(n), k)))
        out[idx] = out.get(idx, 0) + Fraction(rnd.randint(-4, 4), rnd.randint(1, 3))
    return {k: v for k, v in out.items() if v}


def to_mv(space: ExteriorSpace, d: dict):
    return space.from_terms({mask_of(k): v for k, v in d.items()})


def to_dict(v) -> dict:
    return {tuple(indices(m)): c for m, c in v.terms.items()}


def test_merge_sign_matches_bubble_sort():
    for n in range(1, 7):
        for s_size in range(n + 1):
            for s in combinations(range(n), s_size):
                rest = [i for i in range(n) if i not in s]
                for t_size in range(len(rest) + 1):
                    for t in combinations(rest, t_size):
                        assert merge_sign(mask_of(s), mask_of(t)) == bubble_sign(list(s) + list(t))


def test_wedge_matches_oracle_random():
    rnd = random.Random(7)
    for n in range(1, 7):
        sp = ExteriorSpace([f"e{i}" for i in range(n)])
        for _ in range(40):
            a, b = random_element(rnd, n), random_element(rnd, n)
            assert to_dict(wedge(to_mv(sp, a), to_mv(sp, b))) == oracle_wedge(a, b)


def test_associativity_and_super_commutativity_all_monomials_dim4():
    sp = ExteriorSpace("abcd")
    monos = [sp.monomial(m) for k in range(5) for m in masks_of_degree(4, k)]
    for a in monos:
        for b in monos:
            assert super_commutativity_check(a, b)
            for c in monos:
                assert (a * b) * c == a * (b * c)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), st.integers(0, 10 ** 6))
def test_associativity_property(n, seed):
    rnd = random.Random(seed)
    sp = ExteriorSpace([f"e{i}" for i in range(n)])
    a, b, c = (to_mv(sp, random_element(rnd, n)) for _ in range(3))
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), st.integers(0, 10 ** 6), st.integers(0, 6), st.integers(0, 6))
def test_super_commutativity_property(n, seed, p, q):
    rnd = random.Random(seed)
    sp = ExteriorSpace([f"e{i}" for i in range(n)])
    a = sum((sp.monomial(m, rnd.randint(-3, 3)) for m in masks_of_degree(n, min(p, n))), sp.zero())
    b = sum((sp.monomial(m, rnd.randint(-3, 3)) for m in masks_of_degree(n, min(q, n))), sp.zero())
    if a.is_zero() or b.is_zero():
        return
    assert super_commutativity_check(a, b)


def test_odd_elements_square_to_zero():
    sp = ExteriorSpace("xyz")
    v = sp.parse("2 * x + -1 * y + 1/3 * z")
    assert (v * v).is_zero()


def test_monomial_from_unsorted_indices_carries_sign():
    sp = ExteriorSpace("abc")
    assert sp.monomial([1, 0]) == -sp.monomial([0, 1])
    assert sp.monomial([2, 0, 1]) == sp.monomial([0, 1, 2])
    assert sp.monomial([0, 0]).is_zero()


def test_text_round_trip_rational():
    rnd = random.Random(3)
    sp = ExteriorSpace(["x1", "x2", "h1", "y1"])
    for _ in range(50):
        v = to_mv(sp, random_element(rnd, 4))
        assert sp.parse(v.to_text()) == v


def test_text_round_trip_polynomial_coefficients():
    ring = PolynomialRing(2)
    sp = ExteriorSpace(["dx", "dy"], ring)
    v = sp.parse("(x^2 + -3/2*y) * dx + (x*y) * dx^dy + (1)")
    assert sp.parse(v.to_text()) == v
    assert v.degree_part(2) == sp.monomial(0b11, ring.parse("x*y"))


def test_text_format_is_canonical():
    sp = ExteriorSpace("xhy")
    v = sp.parse("1 * h^y + -2 * x")
    assert v.to_text() == "-2 * x + 1 * h^y"


def test_inhomogeneous_degree_is_rejected():
    sp = ExteriorSpace("ab")
    with pytest.raises(ValueError):
        (sp.gen(0) + sp.one()).require_degree()


def test_duplicate_names_rejected():
    with pytest.raises(StructureError):
        ExteriorSpace("aa")
