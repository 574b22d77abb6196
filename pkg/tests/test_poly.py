from __future__ import annotations

import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from bvlab.poly import PolyParseError, PolynomialRing, format_fraction, parse_fraction

X, Y, Z = sympy.symbols("x y z")


def random_text(rnd: random.Random, terms: int = 4) -> str:
    pieces = []
    for _ in range(terms):
        c = Fraction(rnd.randint(-5, 5), rnd.randint(1, 4))
        mono = "*".join(f"{v}^{rnd.randint(1, 3)}" for v in "xyz" if rnd.random() < 0.5)
        pieces.append(f"({c})" + (f"*{mono}" if mono else ""))
    return " + ".join(pieces)


def as_sympy(p, ring) -> sympy.Expr:
    return sympy.expand(sympy.sympify(ring.format(p).replace("^", "**")))


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_arithmetic_matches_sympy(seed):
    rnd = random.Random(seed)
    ring = PolynomialRing(3, ("x", "y", "z"))
    ta, tb = random_text(rnd), random_text(rnd)
    a, b = ring.parse(ta), ring.parse(tb)
    sa, sb = sympy.sympify(ta.replace("^", "**")), sympy.sympify(tb.replace("^", "**"))
    assert as_sympy(a * b, ring) == sympy.expand(sa * sb)
    assert as_sympy(a - b, ring) == sympy.expand(sa - sb)
    assert as_sympy(a.diff(1), ring) == sympy.expand(sympy.diff(sa, Y))


def test_format_parse_round_trip():
    ring = PolynomialRing(2)
    rnd = random.Random(11)
    for _ in range(50):
        p = ring.parse(random_text(rnd).replace("z", "x"))
        assert ring.parse(ring.format(p)) == p


def test_format_is_graded_lex():
    ring = PolynomialRing(2)
    assert ring.format(ring.parse("1 + y + x + y^2 + x*y + x^2")) == "x^2 + x*y + y^2 + x + y + 1"
    assert ring.format(ring.parse("-x + 3/2*y")) == "-x + 3/2*y"


def test_indexed_names_alias():
    ring = PolynomialRing(2)
    assert ring.parse("x1*x2") == ring.parse("x*y")


@pytest.mark.parametrize("text", ["x^^2", "x/y", "x^-1", "x^(1/2)", "w + 1", "x.real", "1/0", "x^y"])
def test_parse_errors(text):
    ring = PolynomialRing(2)
    with pytest.raises(PolyParseError):
        ring.parse(text)


def test_parse_error_reports_column():
    ring = PolynomialRing(2)
    with pytest.raises(PolyParseError) as exc:
        ring.parse("x + w")
    assert exc.value.column == 4


def test_fraction_helpers():
    assert format_fraction(Fraction(-3, 6)) == "-1/2"
    assert format_fraction(Fraction(4)) == "4"
    assert parse_fraction(" 3/9 ") == Fraction(1, 3)
    with pytest.raises(ValueError):
        parse_fraction("1/0")
