from __future__ import annotations

import random
from fractions import Fraction

import pytest

from bvlab.cohomology import cohomology
from bvlab.gerstenhaber import check_generates_bracket, check_square_zero
from bvlab.poisson import (
    PoissonBivector,
    PoissonError,
    PolyLieRinehart,
    TruncationWindow,
    WindowError,
    d_pi,
    hamiltonian_field,
    modular_class,
    planar_fields,
    planar_relations,
    rotation_invariant_subcomplex,
    shifted_bv,
    unimodularity_probe,
)
from bvlab.operators import qvec
from bvlab.suites import anticommutator_reports, poisson_reports, random_poly


@pytest.fixture(scope="module")
def lr():
    return PolyLieRinehart(2)


def test_modular_field_formula_random(lr):
    """X_Delta of f d_x^d_y is f_y d_x - f_x d_y."""
    rnd = random.Random(9)
    for _ in range(30):
        f = random_poly(lr, rnd, 4)
        p = PoissonBivector.planar(lr, f)
        assert modular_class(lr, p) == lr.field(f.diff(1), -f.diff(0))


def test_modular_field_values(lr):
    assert modular_class(lr, PoissonBivector.planar(lr, "x^2+y^2")) == lr.field("2*y", "-2*x")
    assert modular_class(lr, PoissonBivector.planar(lr, "x*y")) == lr.field("x", "-y")
    assert modular_class(lr, PoissonBivector.planar(lr, "1")).is_zero()


def test_hamiltonian_field(lr):
    vol = PoissonBivector.planar(lr, 1)
    assert hamiltonian_field(lr, vol, "x") == lr.field(0, -1)
    p = PoissonBivector.planar(lr, "x^2+y^2")
    g = lr.ring.parse("x*y^2")
    f = lr.ring.parse("x^2+y^2")
    assert hamiltonian_field(lr, p, g) == lr.field(f * g.diff(1), -(f * g.diff(0)))


def test_d_pi_square_zero(lr):
    p = PoissonBivector.planar(lr, "x^3 - y")
    keys = lr.window(2).all_keys()
    assert check_square_zero(d_pi(lr, p), keys).holds


def test_non_poisson_rejected():
    lr3 = PolyLieRinehart(3)
    with pytest.raises(PoissonError) as exc:
        PoissonBivector(lr3, lr3.space.parse("(y) * dx^dy + (x) * dy^dz"))
    assert exc.value.witness == lr3.space.parse("(-2*x) * dx^dy^dz")
    assert PoissonBivector.from_terms(lr3, [{"coeff": "1", "frame": [0, 1]}, {"coeff": "x", "frame": [1, 2]}])


def test_inhomogeneous_bivector_rejected(lr):
    with pytest.raises(PoissonError):
        PoissonBivector(lr, lr.volume() + lr.field(1, 0))


def test_shifted_bv(lr):
    a = lr.ring.parse("x^2*y + y")
    op = shifted_bv(lr, a)
    delta = lr.bv()
    keys = lr.window(2).all_keys()
    sa = lr.scalar(a)
    for k in keys:
        v = lr.space.from_qterms([(k, Fraction(1))])
        assert op(v) == delta(v) - lr.bracket(sa, v)
    assert check_square_zero(op, keys).holds
    assert check_generates_bracket(op, keys).holds


def _verify_certificate(lr, p, report):
    rows = {qvec(lr.space.parse(label)).popitem()[0]: c for label, c in report.certificate}
    for e in lr.ring.monomials_up_to(report.max_degree):
        img = qvec(lr.bracket(p.pi, lr.scalar(lr.ring.lift(e, Fraction(1)))))
        assert sum((rows.get(k, 0) * c for k, c in img.items()), Fraction(0)) == 0
    assert sum((rows.get(k, 0) * c for k, c in qvec(report.x_delta).items()), Fraction(0)) != 0


@pytest.mark.parametrize("f", ["x^2+y^2", "x", "x*y"])
def test_unimodularity_infeasible_with_certificate(lr, f):
    p = PoissonBivector.planar(lr, f)
    report = unimodularity_probe(lr, p, TruncationWindow(6))
    assert not report.unimodular_within_window
    _verify_certificate(lr, p, report)
    assert "says nothing about higher degrees" in report.summary(lr.ring)


def test_unimodularity_feasible(lr):
    report = unimodularity_probe(lr, PoissonBivector.planar(lr, 1), 6)
    assert report.unimodular_within_window and report.strictly_unimodular
    # a shifted divergence moves X_Delta by an exact field, so it is nonzero but solvable
    shift = PolyLieRinehart(2, shift="x")
    p = PoissonBivector.planar(shift, 1)
    rep = unimodularity_probe(shift, p, 3)
    assert rep.unimodular_within_window and not rep.strictly_unimodular
    assert shift.bracket(p.pi, shift.scalar(rep.witness)) == rep.x_delta


@pytest.mark.parametrize("n", [2, 4, 6, 8])
def test_rotation_invariant_betti(n):
    c = rotation_invariant_subcomplex(n)
    report = cohomology(c)
    assert report.betti() == [1, 2, 2]
    assert report[0].texts == ["1 * 1"]
    assert report[1].texts == ["1 * dtheta", "1 * D_r"]
    assert report[2].texts == ["1 * Vol", "1 * r^2*Vol"]


def test_rotation_invariant_elements():
    c = rotation_invariant_subcomplex(4)
    f = c.fields
    assert c.basis_elements[2][1] == f["Pi"]
    assert c.labels[1][:4] == ["dtheta", "D_r", "r^2*dtheta", "r^2*D_r"]
    for deg in c.basis_elements:
        for v in deg:
            assert c.lr.bracket(f["dtheta"], v).is_zero()


def test_rotation_window_too_small():
    with pytest.raises(WindowError):
        rotation_invariant_subcomplex(1)


def test_planar_relations():
    rels = planar_relations()
    assert rels.orientation == -1
    lr = PolyLieRinehart(2)
    f = planar_fields(lr)
    assert rels.x_delta == f["dtheta"].scale(2)
    assert rels.bv_values["dtheta"].is_zero()
    assert rels.bv_values["D_r"] == lr.scalar(-2)
    assert rels.bv_values["Vol"].is_zero()
    assert rels.bv_values["Pi"] == f["dtheta"].scale(2)
    assert all(rels.relations.values())


def test_poisson_suite_r_squared(lr):
    p = PoissonBivector.planar(lr, "x^2+y^2")
    reports = poisson_reports(lr, p, 2)
    assert all(r.holds for r in reports), [r.identity for r in reports if not r.holds]


def test_anticommutator_identities_hold_for_shifted_divergence(lr):
    p = PoissonBivector.planar(lr, "x^2+y^2")
    keys = lr.window(1).all_keys()
    assert all(r.holds for r in anticommutator_reports(lr, p, keys))
    shifted = PolyLieRinehart(2, shift="x^3")
    # the shifted operator is still BV, so the identity holds with its own X_Delta
    p2 = PoissonBivector.planar(shifted, "x^2+y^2")
    assert all(r.holds for r in anticommutator_reports(shifted, p2, keys))


def test_shift_covariance_of_modular_field():
    rnd = random.Random(21)
    base = PolyLieRinehart(2)
    for _ in range(10):
        f = random_poly(base, rnd, 3)
        a0 = random_poly(base, rnd, 3)
        shifted = PolyLieRinehart(2, shift=a0)
        p0, p1 = PoissonBivector.planar(base, f), PoissonBivector.planar(shifted, f)
        expect = modular_class(base, p0) + base.bracket(p0.pi, base.scalar(a0))
        assert modular_class(shifted, p1).to_text() == expect.to_text()


def test_planted_witness_recovered_and_removed():
    rnd = random.Random(4)
    for _ in range(5):
        a0 = random_poly(PolyLieRinehart(2), rnd, 3)
        lr = PolyLieRinehart(2, shift=a0)
        f = lr.ring.parse("1")
        p = PoissonBivector.planar(lr, f)
        report = unimodularity_probe(lr, p, 3)
        assert report.unimodular_within_window
        tilde = shifted_bv(lr, report.witness)
        assert tilde(p.pi).is_zero()
        dp = d_pi(lr, p)
        keys = lr.window(2).all_keys()
        for k in keys:
            v = lr.space.from_qterms([(k, Fraction(1))])
            assert (tilde(dp(v)) + dp(tilde(v))).is_zero()


def test_shifted_bv_zero_is_base(lr):
    base, same = lr.bv(), shifted_bv(lr, 0)
    for k in lr.window(2).all_keys():
        assert base.image(k) == same.image(k)


def test_hamiltonian_field_goldens(lr):
    p = PoissonBivector.planar(lr, "x^2+y^2")
    assert hamiltonian_field(lr, p, "x") == lr.field(0, "-(x^2+y^2)")
    assert hamiltonian_field(lr, p, "7").is_zero()
