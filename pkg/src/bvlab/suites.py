"""Identity suites for a loaded bialgebra or Poisson bivector, in a fixed order."""

from __future__ import annotations

import random
from fractions import Fraction

from .fastcheck import (
    bracket_table,
    fast_bracket_leibniz,
    fast_generates_bracket,
    fast_graded_jacobi,
    fast_seven_term,
    fast_strong_differential,
)
from .gerstenhaber import (
    CheckReport,
    Witness,
    anticommutator,
    check_bracket_leibniz,
    check_generates_bracket,
    check_graded_jacobi,
    check_product_leibniz,
    check_seven_term,
    check_square_zero,
    divergence_from_delta,
    inner_derivation,
    is_strong_differential,
)
from .lie import Cobracket, LieAlgebra, coderivation_report, derivation_report, intrinsic_biderivation, ce_anticommutator_report
from .poisson import PoissonBivector, PolyLieRinehart, d_pi
from .poly import Poly


def _named(report: CheckReport, name: str) -> CheckReport:
    report.identity = name
    return report


def bialgebra_reports(g: LieAlgebra, c: Cobracket) -> list[CheckReport]:
    """Every identity for a finite-dimensional Lie bialgebra, exhaustive on basis monomials."""
    keys = g.full_basis().all_keys()
    ce = g.ce_operator()
    d = c.differential()
    out = [g.jacobi_report(), c.co_jacobi_report(), c.cocycle_report()]
    out.append(_named(check_square_zero(ce, keys), "d_CE^2 = 0"))
    try:
        brackets = bracket_table(g)
        out.append(fast_seven_term(ce))
        out.append(fast_generates_bracket(ce, g, brackets))
        out.append(fast_graded_jacobi(g, brackets))
        sd = fast_strong_differential(d, g, brackets)
    except OverflowError:
        # coefficients too large for machine integers: use the exact generic checks
        out.append(check_seven_term(ce, keys))
        out.append(check_generates_bracket(ce, keys))
        out.append(check_graded_jacobi(g, keys))
        sd = is_strong_differential(d, g, keys=keys)
    div = divergence_from_delta(ce, check=False)
    gens = [g.space.gen(i) for i in range(g.dim)]
    out.extend(div.axiom_reports(gens, [Fraction(1), Fraction(-2, 3)]))
    out.extend(_named(r, f"d_delta: {r.identity}") for r in sd.reports()[1:])
    k = anticommutator(ce, d, verify=False)
    out.append(_named(check_product_leibniz(k, keys), "d_delta d_CE + d_CE d_delta is a derivation of the product"))
    try:
        kb = fast_bracket_leibniz(k, g, bracket_table(g))
    except OverflowError:
        kb = check_bracket_leibniz(k, g, keys)
    out.append(_named(kb, "d_delta d_CE + d_CE d_delta is a derivation of the bracket"))
    D = intrinsic_biderivation(c, verify=False)
    out.append(ce_anticommutator_report(c, D))
    out.append(derivation_report(D))
    out.append(coderivation_report(c, D))
    if D.h_r is not None:
        bad = next((i for i in range(g.dim) if D.images[i] != g.bracket(D.h_r, gens[i])), None)
        out.append(CheckReport("D = [H_r, -]", bad is None,
                               None if bad is None else Witness([gens[bad]], D.images[bad], g.bracket(D.h_r, gens[bad])),
                               g.dim))
    return out


def poisson_reports(lr: PolyLieRinehart, p: PoissonBivector, max_degree: int) -> list[CheckReport]:
    """Identities on the window of coefficient degree <= max_degree."""
    basis = lr.window(max_degree)
    keys = basis.all_keys()
    delta = lr.bv()
    dp = d_pi(lr, p)
    pp = lr.bracket(p.pi, p.pi)
    out = [CheckReport("[Pi, Pi] = 0", pp.is_zero(), None if pp.is_zero() else Witness([p.pi, p.pi], pp, lr.space.zero()), 1)]
    fields = [basis.element(k) for k in keys if k[1] and k[1].bit_count() == 1]
    scalars = [lr.ring.lift(k[0], Fraction(1)) for k in keys if k[1] == 0]
    out.extend(delta.divergence.axiom_reports(fields, scalars))
    out.append(_named(check_square_zero(delta, keys), "Delta^2 = 0"))
    out.append(check_seven_term(delta, keys))
    out.append(check_generates_bracket(delta, keys))
    sd = is_strong_differential(dp, lr, keys=keys)
    out.extend(_named(r, f"d_Pi: {r.identity}") for r in sd.reports()[1:])
    out.extend(anticommutator_reports(lr, p, keys))
    k = anticommutator(delta, dp, verify=False)
    out.append(_named(check_bracket_leibniz(k, lr, keys), "Delta d_Pi + d_Pi Delta is a derivation of the bracket"))
    return out


def anticommutator_reports(lr: PolyLieRinehart, p: PoissonBivector, keys) -> list[CheckReport]:
    """Delta d_Pi + d_Pi Delta is a product derivation and equals [X_Delta, -] on ``keys``."""
    delta = lr.bv()
    dp = d_pi(lr, p)
    k = anticommutator(delta, dp, verify=False)
    x = delta(p.pi)
    ad = inner_derivation(lr, x)
    out = [_named(check_product_leibniz(k, keys), "Delta d_Pi + d_Pi Delta is a derivation of the product")]
    closed = lr.bracket(p.pi, x)
    out.append(CheckReport("d_Pi(X_Delta) = 0", closed.is_zero(),
                           None if closed.is_zero() else Witness([x], closed, lr.space.zero()), 1))
    inner = CheckReport("Delta d_Pi + d_Pi Delta = [X_Delta, -]", True)
    for key in keys:
        inner.checked += 1
        if k.image(key) != ad.image(key):
            v = lr.space.from_qterms([(key, Fraction(1))])
            inner = CheckReport(inner.identity, False, Witness([v], k(v), ad(v)), inner.checked)
            break
    out.append(inner)
    return out


def random_poly(lr: PolyLieRinehart, rnd: random.Random, degree: int) -> Poly:
    """Random polynomial of total degree <= ``degree`` with small integer coefficients."""
    f = lr.ring.zero
    for e in lr.ring.monomials_up_to(degree):
        c = rnd.randint(-3, 3)
        if c:
            f = f + lr.ring.lift(e, Fraction(c))
    return f


def random_anticommutator_suite(seed: int = 0, cases: int = 50, degree: int = 3, window: int = 3) -> list[tuple[Poly, list[CheckReport]]]:
    """The biderivation identities for ``cases`` seeded random bivectors f d_x ^ d_y."""
    rnd = random.Random(seed)
    lr = PolyLieRinehart(2)
    keys = lr.window(window).all_keys()
    out = []
    for _ in range(cases):
        f = random_poly(lr, rnd, degree)
        out.append((f, anticommutator_reports(lr, PoissonBivector.planar(lr, f), keys)))
    return out
