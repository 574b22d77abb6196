from __future__ import annotations

import random
from fractions import Fraction

import pytest

from bvlab.exterior import ExteriorSpace
from bvlab.fastcheck import (
    bracket_table,
    fast_bracket_leibniz,
    fast_generates_bracket,
    fast_graded_jacobi,
    fast_seven_term,
    table_to_dict,
)
from bvlab.gerstenhaber import (
    BVAxiomError,
    BVOperator,
    DivergenceOperator,
    LinearOperator,
    NotStrongDifferential,
    anticommutator,
    bracket_from_delta,
    check_bracket_leibniz,
    check_generates_bracket,
    check_graded_jacobi,
    check_seven_term,
    check_square_zero,
    divergence_from_delta,
    is_strong_differential,
    schouten_bracket,
)
from bvlab.lie import LieAlgebra, preset
from bvlab.operators import qvec
from bvlab.poisson import PolyLieRinehart
from bvlab.suites import random_poly


def grade_sign(p: int) -> int:
    return -1 if p % 2 else 1


@pytest.fixture(scope="module")
def plane():
    return PolyLieRinehart(2)


def random_element(lr, rnd, k, degree=2):
    sp = lr.space
    return sum((sp.monomial(m, random_poly(lr, rnd, degree)) for m in sp.masks(k)), sp.zero())


# -- conventions -------------------------------------------------------------------

def test_field_on_function_is_derivative(plane):
    f = plane.ring.parse("x^2*y + 3*y")
    X = plane.field("y", "x")
    assert plane.bracket(X, plane.scalar(f)) == plane.scalar(plane.ring.parse("2*x*y^2 + x^3 + 3*x"))


def test_bivector_on_function_convention(plane):
    f = plane.ring.parse("x^3 + x*y^2")
    fx, fy = f.diff(0), f.diff(1)
    assert plane.bracket(plane.volume(), plane.scalar(f)) == plane.field(fy, -fx)


def test_field_bracket_matches_commutator_oracle(plane):
    rnd = random.Random(5)
    for _ in range(20):
        a = [random_poly(plane, rnd, 2) for _ in range(2)]
        b = [random_poly(plane, rnd, 2) for _ in range(2)]
        # [X, Y]^i = X(Y^i) - Y(X^i)
        expect = [sum((a[j] * b[i].diff(j) - b[j] * a[i].diff(j) for j in range(2)), plane.ring.zero)
                  for i in range(2)]
        assert plane.bracket(plane.field(*a), plane.field(*b)) == plane.field(*expect)


def test_schouten_alias(plane):
    X, Y = plane.field("x", "y^2"), plane.volume()
    assert schouten_bracket(plane, X, Y) == plane.bracket(X, Y)


# -- Gerstenhaber axioms on random polynomial multivectors --------------------------

@pytest.mark.parametrize("p,q,r", [(0, 1, 2), (1, 1, 1), (1, 2, 2), (2, 2, 1), (2, 0, 2)])
def test_graded_axioms_random(plane, p, q, r):
    rnd = random.Random(100 * p + 10 * q + r)
    for _ in range(4):
        a, b, c = (random_element(plane, rnd, k) for k in (p, q, r))
        br = plane.bracket
        # antisymmetry
        assert br(a, b) == -br(b, a).scale(grade_sign((p - 1) * (q - 1)))
        # Leibniz in the second slot
        assert br(a, b * c) == br(a, b) * c + (b * br(a, c)).scale(grade_sign((p - 1) * q))
        # Jacobi
        lhs = br(a, br(b, c))
        rhs = br(br(a, b), c) + br(b, br(a, c)).scale(grade_sign((p - 1) * (q - 1)))
        assert lhs == rhs


def test_graded_jacobi_on_window(plane):
    keys = plane.window(1).all_keys()
    assert check_graded_jacobi(plane, keys).holds


# -- BV operator -----------------------------------------------------------------------

def test_delta_on_fields_is_minus_divergence(plane):
    delta = plane.bv()
    X = plane.field("x^2*y", "y^3")
    assert delta(X) == plane.scalar(plane.ring.parse("-(2*x*y + 3*y^2)"))


def test_delta_axioms_on_window(plane):
    delta = plane.bv()
    keys = plane.window(2).all_keys()
    assert check_square_zero(delta, keys).holds
    assert check_seven_term(delta, keys[:40]).holds
    assert check_generates_bracket(delta, keys).holds


def test_shifted_divergence_still_bv():
    lr = PolyLieRinehart(2, shift="x*y + y^2")
    delta = lr.bv()
    keys = lr.window(2).all_keys()
    assert check_square_zero(delta, keys).holds
    assert check_generates_bracket(delta, keys).holds
    assert delta.divergence.axiom_reports([lr.field("x", "1"), lr.field("y^2", "x")],
                                          [lr.ring.parse("x"), lr.ring.parse("y^2")])[0].holds


def test_divergence_round_trip(plane):
    div = divergence_from_delta(plane.bv())
    assert div(plane.field("x^2", "x*y")) == plane.ring.parse("3*x")


def test_bad_divergence_violates_axioms(plane):
    bad = DivergenceOperator(plane, lambda X: plane.ring.one if not X.is_zero() else plane.ring.zero, "bad")
    reports = bad.axiom_reports([plane.field("x", "0"), plane.field("0", "y")], [plane.ring.parse("x")])
    assert not all(r.holds for r in reports)
    assert any(r.witness is not None for r in reports)


def test_lie_algebra_ce_operator_generates_bracket():
    g, _ = preset("sl2_standard")
    ce = g.ce_operator()
    x, h, y = (g.gen(n) for n in ("x", "h", "y"))
    assert bracket_from_delta(ce, x, y) == g.bracket(x, y)
    assert bracket_from_delta(ce, x * h, y) == g.bracket(x * h, y)


def test_non_bv_operator_rejected():
    g, _ = preset("sl2_standard")
    good = g.ce_operator()

    class Broken(BVOperator):
        def _basis_image(self, key):
            out = dict(good.image(key))
            if key[1] == 0b011:
                out[((), 0)] = out.get(((), 0), 0) + 1
            return out

    with pytest.raises(BVAxiomError):
        divergence_from_delta(Broken(g))


# -- strong differentials ------------------------------------------------------------

def test_d_delta_is_strong_differential():
    g, c = preset("sl2_standard")
    assert is_strong_differential(c.differential(), g, g.full_basis()).holds


def test_wrong_degree_is_not_strong(plane):
    report = is_strong_differential(plane.bv(), plane, keys=plane.window(1).all_keys())
    assert not report.holds
    assert report.first_failure().identity == "degree +1"


def test_anticommutator_refuses_non_differential():
    g, c = preset("sl2_standard")
    with pytest.raises(NotStrongDifferential):
        anticommutator(g.ce_operator(), g.ce_operator(), g)


# -- fast path versus the generic checks ---------------------------------------------

@pytest.mark.parametrize("name", ["aff2_case2", "aff2_case3", "sl2_standard"])
def test_fast_agrees_with_generic_small(name):
    g, c = preset(name)
    keys = g.full_basis().all_keys()
    ce = g.ce_operator()
    assert fast_seven_term(ce).holds == check_seven_term(ce, keys).holds is True
    assert fast_generates_bracket(ce, g).holds == check_generates_bracket(ce, keys).holds is True
    assert fast_graded_jacobi(g).holds == check_graded_jacobi(g, keys).holds is True
    d = c.differential()
    assert fast_bracket_leibniz(d, g).holds == check_bracket_leibniz(d, g, keys).holds is True


def test_bracket_table_matches_generic_sl3():
    g, _ = preset("sl3_standard")
    table = bracket_table(g)
    size = 1 << g.dim
    rnd = random.Random(1)
    for _ in range(300):
        a, b = rnd.randrange(size), rnd.randrange(size)
        got = table_to_dict(table, a * size + b)
        expect = {k[1]: v for k, v in g.bracket_keys(((), a), ((), b)).items()}
        assert got == expect


def _faulty_delta(g, mask, extra):
    good = g.ce_operator()

    class Faulty(BVOperator):
        def _basis_image(self, key):
            out = dict(good.image(key))
            if key[1] == mask:
                for m, v in extra.items():
                    out[((), m)] = out.get(((), m), 0) + v
            return out

    return Faulty(g, name="faulty")


def test_planted_seven_term_fault_detected():
    g, _ = preset("sl2_standard")
    op = _faulty_delta(g, 0b111, {0b011: Fraction(1)})
    fast = fast_seven_term(op)
    generic = check_seven_term(op, g.full_basis().all_keys())
    assert not fast.holds and not generic.holds
    w = fast.witness
    assert w is not None and w.lhs != w.rhs


def test_planted_bracket_fault_detected():
    g, _ = preset("aff2_case3")
    op = _faulty_delta(g, 0b11, {0: Fraction(1, 2)})
    fast = fast_generates_bracket(op, g)
    assert not fast.holds
    assert not check_generates_bracket(op, g.full_basis().all_keys()).holds
    w = fast.witness
    assert w.lhs != w.rhs


def test_planted_jacobi_fault_detected():
    # [a,b] = c, [b,c] = a, [a,c] = a violates Jacobi
    g = LieAlgebra("abc", {(0, 1): {2: 1}, (1, 2): {0: 1}, (0, 2): {0: 1}}, check=False)
    assert not g.jacobi_report().holds
    fast = fast_graded_jacobi(g)
    assert not fast.holds
    assert not check_graded_jacobi(g, g.full_basis().all_keys()).holds


def test_planted_bracket_leibniz_fault_detected():
    g, c = preset("sl2_standard")
    d = c.differential()
    sp = g.space
    extra = qvec(sp.parse("1 * x^y"))

    def image(key):
        out = dict(d.image(key))
        if key[1] == 0b010:
            for k, v in extra.items():
                out[k] = out.get(k, 0) + v
        return out

    bad = LinearOperator(sp, 1, image, "bad")
    fast = fast_bracket_leibniz(bad, g)
    assert not fast.holds
    assert fast.witness.lhs != fast.witness.rhs
    assert not check_bracket_leibniz(bad, g, g.full_basis().all_keys()).holds
