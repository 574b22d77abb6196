"""Gerstenhaber brackets, BV operators and exhaustive identity checks.

Sign conventions (see SIGNS.md): [X, f] = X(f) for a degree-1 generator X and
a scalar f; graded antisymmetry [a,b] = -(-1)^((|a|-1)(|b|-1)) [b,a]; left
Leibniz [a, bc] = [a,b]c + (-1)^((|a|-1)|b|) b[a,c].  With these,
[d_x ^ d_y, f] = f_y d_x - f_x d_y.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Callable, Iterable, Sequence

from .exterior import ExteriorSpace, Multivector, StructureError, degree_of, indices, mask_of
from .operators import (
    GradedBasis,
    Key,
    LinearOperator,
    QVec,
    key_degree,
    key_product,
    qadd,
    qclean,
    qmul_key,
    qvec,
)


# -- reports -----------------------------------------------------------------

@dataclass
class Witness:
    inputs: list[Multivector]
    lhs: Multivector
    rhs: Multivector

    def to_dict(self) -> dict:
        return {"inputs": [v.to_text() for v in self.inputs], "lhs": self.lhs.to_text(), "rhs": self.rhs.to_text()}


@dataclass
class CheckReport:
    identity: str
    holds: bool
    witness: Witness | None = None
    checked: int = 0

    def to_dict(self) -> dict:
        return {"identity": self.identity, "holds": self.holds,
                "checked": self.checked, "witness": self.witness.to_dict() if self.witness else None}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def __bool__(self) -> bool:
        return self.holds


@dataclass
class StrongDifferentialReport:
    degree: CheckReport
    square_zero: CheckReport
    product_leibniz: CheckReport
    bracket_leibniz: CheckReport

    @property
    def holds(self) -> bool:
        return all(r.holds for r in self.reports())

    def reports(self) -> list[CheckReport]:
        return [self.degree, self.square_zero, self.product_leibniz, self.bracket_leibniz]

    def first_failure(self) -> CheckReport | None:
        return next((r for r in self.reports() if not r.holds), None)


class BVAxiomError(ValueError):
    def __init__(self, report: CheckReport):
        super().__init__(f"{report.identity} fails: {report.witness.to_dict() if report.witness else ''}")
        self.report = report


class NotStrongDifferential(ValueError):
    def __init__(self, report: StrongDifferentialReport):
        bad = report.first_failure()
        detail = bad.witness.to_dict() if bad and bad.witness else ""
        super().__init__(f"not a strong differential: {bad.identity if bad else '?'} {detail}")
        self.report = report


# -- contexts ------------------------------------------------------------------

class GerstenhaberContext:
    """Exterior algebra of a Lie-Rinehart pair (A, L) with L free on a frame.

    Subclasses provide the frame bracket [e_i, e_j] and the anchor e_i(f).
    The Gerstenhaber bracket of the exterior algebra is derived from these.
    """

    space: ExteriorSpace

    def generator_bracket(self, i: int, j: int) -> Multivector:
        raise NotImplementedError

    def anchor(self, i: int, f):
        raise NotImplementedError

    def default_basis(self, max_poly_degree: int | None = None) -> GradedBasis:
        return GradedBasis(self.space, max_poly_degree)

    # -- degree-one calculus ----------------------------------------------------
    def act(self, X: Multivector, f):
        """X(f) for a degree-1 element X."""
        ring = self.space.ring
        out = ring.zero
        for m, p in X.terms.items():
            if degree_of(m) != 1:
                raise StructureError("anchor action needs a degree-1 element")
            out = out + p * self.anchor(m.bit_length() - 1, f)
        return out

    def lie_bracket(self, X: Multivector, Y: Multivector) -> Multivector:
        """[pX_i, qX_j] = pq[X_i,X_j] + p X_i(q) X_j - q X_j(p) X_i."""
        sp = self.space
        out = sp.zero()
        for mi, p in X.terms.items():
            i = mi.bit_length() - 1
            for mj, q in Y.terms.items():
                j = mj.bit_length() - 1
                out = out + self.generator_bracket(i, j).scale(p * q)
                out = out + sp.monomial(mj, p * self.anchor(i, q)) - sp.monomial(mi, q * self.anchor(j, p))
        return out

    # -- the bracket ------------------------------------------------------------
    def _term_bracket(self, f, S: int, g, T: int) -> Multivector:
        """[f e_S, g e_T] by biderivation expansion from the generator rules."""
        sp = self.space
        s, t = indices(S), indices(T)
        p = len(s)

        def mono(idx):
            return sp.monomial(mask_of(idx))

        def with_gen(j: int) -> Multivector:
            # [f e_S, X_j] = f [e_S, X_j] - X_j(f) e_S
            out = sp.zero()
            for k, sk in enumerate(s):
                out = out + mono(s[:k]) * self.generator_bracket(sk, j) * mono(s[k + 1:])
            out = out.scale(f)
            df = self.anchor(j, f)
            if df != 0:
                out = out - sp.monomial(S, df)
            return out

        # [f e_S, g] = f sum_k (-1)^(p-k) X_sk(g) e_(S - sk), k counted from 1
        result = sp.zero()
        for k, sk in enumerate(s, start=1):
            dg = self.anchor(sk, g)
            if dg != 0:
                c = dg * f
                result = result + sp.monomial(S & ~(1 << sk), c if (p - k) % 2 == 0 else -c)
        result = result * sp.monomial(T)
        for k, tk in enumerate(t):
            term = (mono(t[:k]) * with_gen(tk) * mono(t[k + 1:])).scale(g)
            result = result + (term if ((p - 1) * k) % 2 == 0 else -term)
        return result

    def bracket_keys(self, a: Key, b: Key) -> QVec:
        cache = self.__dict__.setdefault("_bracket_cache", {})
        got = cache.get((a, b))
        if got is None:
            ring = self.space.ring
            f = ring.lift(a[0], Fraction(1))
            g = ring.lift(b[0], Fraction(1))
            got = cache.setdefault((a, b), qvec(self._term_bracket(f, a[1], g, b[1])))
        return got

    def bracket_q(self, u: dict, v: dict) -> QVec:
        out: QVec = {}
        for ka, ca in u.items():
            for kb, cb in v.items():
                qadd(out, self.bracket_keys(ka, kb), ca * cb)
        return out

    def bracket(self, a: Multivector, b: Multivector) -> Multivector:
        if a.space != self.space or b.space != self.space:
            raise StructureError("bracket operands belong to a different context")
        return self.space.from_qterms(self.bracket_q(qvec(a), qvec(b)).items())

    def jacobi_report(self) -> CheckReport:
        """Jacobi for the frame bracket plus compatibility with the anchor."""
        sp = self.space
        n = sp.dim
        for done, (i, j, k) in enumerate(combinations(range(n), 3), 1):
            ei, ej, ek = sp.gen(i), sp.gen(j), sp.gen(k)
            lhs = (self.lie_bracket(self.lie_bracket(ei, ej), ek)
                   + self.lie_bracket(self.lie_bracket(ej, ek), ei)
                   + self.lie_bracket(self.lie_bracket(ek, ei), ej))
            if not lhs.is_zero():
                return CheckReport("jacobi", False, Witness([ei, ej, ek], lhs, sp.zero()), done)
        for i in range(n):
            for j in range(n):
                lhs = self.generator_bracket(i, j) + self.generator_bracket(j, i)
                if not lhs.is_zero():
                    return CheckReport("antisymmetry", False, Witness([sp.gen(i), sp.gen(j)], lhs, sp.zero()))
        return CheckReport("jacobi", True, checked=len(list(combinations(range(n), 3))) + n * n)


def schouten_bracket(ctx: GerstenhaberContext, a: Multivector, b: Multivector) -> Multivector:
    return ctx.bracket(a, b)


# -- divergence and BV operators ---------------------------------------------------

class DivergenceOperator:
    """Map from degree-1 elements to scalars."""

    def __init__(self, ctx: GerstenhaberContext, fn: Callable[[Multivector], object], name: str = "div"):
        self.ctx = ctx
        self._fn = fn
        self.name = name

    @classmethod
    def from_generator_values(cls, ctx: GerstenhaberContext, values: Sequence, name: str = "div"):
        """div(sum p_i e_i) = sum p_i div(e_i) + e_i(p_i)."""
        ring = ctx.space.ring
        vals = [ring.coerce(v) for v in values]
        if len(vals) != ctx.space.dim:
            raise ValueError("one divergence value per generator")

        def fn(X: Multivector):
            out = ring.zero
            for m, p in X.terms.items():
                if degree_of(m) != 1:
                    raise StructureError("divergence takes degree-1 elements")
                i = m.bit_length() - 1
                out = out + p * vals[i] + ctx.anchor(i, p)
            return out

        return cls(ctx, fn, name)

    def __call__(self, X: Multivector):
        return self._fn(X)

    def generator_values(self) -> list:
        return [self(self.ctx.space.gen(i)) for i in range(self.ctx.space.dim)]

    def axiom_reports(self, degree1: Sequence[Multivector], scalars: Sequence) -> list[CheckReport]:
        """The two divergence axioms on the given degree-1 elements and scalars."""
        ctx, sp = self.ctx, self.ctx.space
        bracket_ok = CheckReport("div[X,Y] = X(div Y) - Y(div X)", True)
        for X, Y in combinations(degree1, 2):
            lhs = self(ctx.lie_bracket(X, Y))
            rhs = ctx.act(X, self(Y)) - ctx.act(Y, self(X))
            bracket_ok.checked += 1
            if lhs != rhs:
                bracket_ok = CheckReport(bracket_ok.identity, False,
                                         Witness([X, Y], sp.scalar(lhs), sp.scalar(rhs)))
                break
        module_ok = CheckReport("div(aX) = a div(X) + X(a)", True)
        for X in degree1:
            for a in scalars:
                lhs = self(X.scale(a))
                rhs = a * self(X) + ctx.act(X, a)
                module_ok.checked += 1
                if lhs != rhs:
                    module_ok = CheckReport(module_ok.identity, False,
                                            Witness([X, sp.scalar(a)], sp.scalar(lhs), sp.scalar(rhs)))
                    break
            if not module_ok.holds:
                break
        return [bracket_ok, module_ok]


def zero_divergence(ctx: GerstenhaberContext) -> DivergenceOperator:
    return DivergenceOperator.from_generator_values(ctx, [0] * ctx.space.dim, "0")


def _delta_decomposable(ctx: GerstenhaberContext, div: DivergenceOperator, xs: list[Multivector]) -> Multivector:
    """Two-sum formula on X_1 ^ ... ^ X_n (indices counted from 1)."""
    sp = ctx.space
    n = len(xs)

    def wedge_all(skip: set[int]) -> Multivector:
        v = sp.one()
        for k, x in enumerate(xs):
            if k not in skip:
                v = v * x
        return v

    out = sp.zero()
    for i, j in combinations(range(n), 2):
        term = ctx.lie_bracket(xs[i], xs[j]) * wedge_all({i, j})
        out = out + (term if (i + j) % 2 == 0 else -term)  # (-1)^((i+1)+(j+1))
    for i in range(n):
        d = div(xs[i])
        if d != 0:
            term = wedge_all({i}).scale(d)
            out = out + (term if (i + 1) % 2 == 0 else -term)
    return out


class BVOperator(LinearOperator):
    """BV operator of a divergence on the exterior algebra of a context."""

    def __init__(self, ctx: GerstenhaberContext, divergence: DivergenceOperator | None = None,
                 name: str = "Delta"):
        self.ctx = ctx
        self.divergence = divergence or zero_divergence(ctx)
        super().__init__(ctx.space, -1, self._basis_image, name)

    def _basis_image(self, key: Key) -> QVec:
        exp, mask = key
        if mask == 0:
            return {}
        sp = self.ctx.space
        idx = indices(mask)
        first = sp.monomial(1 << idx[0], sp.ring.lift(exp, Fraction(1)))
        xs = [first] + [sp.gen(i) for i in idx[1:]]
        return qvec(_delta_decomposable(self.ctx, self.divergence, xs))

    def delta_of_one(self) -> Multivector:
        return self(self.space.one())


def bv_delta(op: BVOperator, v: Multivector) -> Multivector:
    return op(v)


def bracket_from_delta(op: BVOperator, a: Multivector, b: Multivector) -> Multivector:
    """[a,b]_D = (-1)^|a| D(ab) - (-1)^|a| D(a)b - aD(b) + aD(1)b."""
    p = a.require_degree()
    sgn = -1 if p % 2 else 1
    return (op(a * b) - op(a) * b).scale(sgn) - a * op(b) + a * op.delta_of_one() * b


def divergence_from_delta(op: BVOperator, basis: GradedBasis | None = None, check: bool = True) -> DivergenceOperator:
    """div := -Delta restricted to degree one."""
    ctx = op.ctx
    if check:
        keys = [k for k in (basis or ctx.default_basis(2)).all_keys() if key_degree(k) <= 2]
        low = [k for k in keys if key_degree(k) <= 1]
        for report in (check_square_zero(op, keys), check_seven_term(op, low), check_generates_bracket(op, low)):
            if not report.holds:
                raise BVAxiomError(report)
    sp = ctx.space

    def fn(X: Multivector):
        if X.homogeneous_degree() != 1 and not X.is_zero():
            raise StructureError("divergence takes degree-1 elements")
        return -(op(X).coeff(0))

    return DivergenceOperator(ctx, fn, f"-{op.name}|L")


# -- exhaustive checks over basis keys ----------------------------------------------

def _elem(space: ExteriorSpace, vec: dict) -> Multivector:
    return space.from_qterms(vec.items())


def _key_elem(space: ExteriorSpace, key: Key) -> Multivector:
    return space.from_qterms([(key, Fraction(1))])


def check_square_zero(op: LinearOperator, keys: Iterable[Key], name: str | None = None) -> CheckReport:
    report = CheckReport(name or f"{op.name}^2 = 0", True)
    for k in keys:
        out = op.apply_q(op.image(k))
        report.checked += 1
        if out:
            sp = op.space
            return CheckReport(report.identity, False, Witness([_key_elem(sp, k)], _elem(sp, out), sp.zero()),
                               report.checked)
    return report


def check_product_leibniz(d: LinearOperator, keys: Sequence[Key], name: str | None = None) -> CheckReport:
    """d(ab) = d(a)b + (-1)^(n|a|) a d(b) for a degree-n operator d."""
    n = d.degree
    report = CheckReport(name or f"{d.name}(ab) = {d.name}(a)b + (-1)^(n|a|) a {d.name}(b)", True)
    for a in keys:
        sa = -1 if (n * key_degree(a)) % 2 else 1
        da = d.image(a)
        for b in keys:
            s, ab = key_product(a, b)
            lhs = {} if not s else {k: s * c for k, c in d.image(ab).items()}
            rhs = qmul_key(b, da, left=False)
            qadd(rhs, qmul_key(a, d.image(b)), sa)
            report.checked += 1
            if qclean(lhs) != qclean(rhs):
                sp = d.space
                return CheckReport(report.identity, False,
                                   Witness([_key_elem(sp, a), _key_elem(sp, b)], _elem(sp, lhs), _elem(sp, rhs)),
                                   report.checked)
    return report


def check_bracket_leibniz(d: LinearOperator, ctx: GerstenhaberContext, keys: Sequence[Key],
                          name: str | None = None) -> CheckReport:
    """d[a,b] = [da,b] + (-1)^((|a|-1)n) [a,db] for a degree-n operator d."""
    n = d.degree
    report = CheckReport(name or f"{d.name}[a,b] = [{d.name}(a),b] + (-1)^((|a|-1)n)[a,{d.name}(b)]", True)
    for a in keys:
        sa = -1 if ((key_degree(a) - 1) * n) % 2 else 1
        da = d.image(a)
        for b in keys:
            lhs = d.apply_q(ctx.bracket_keys(a, b))
            rhs = ctx.bracket_q(da, {b: Fraction(1)})
            qadd(rhs, ctx.bracket_q({a: Fraction(1)}, d.image(b)), sa)
            report.checked += 1
            if qclean(lhs) != qclean(rhs):
                sp = d.space
                return CheckReport(report.identity, False,
                                   Witness([_key_elem(sp, a), _key_elem(sp, b)], _elem(sp, lhs), _elem(sp, rhs)),
                                   report.checked)
    return report


def check_seven_term(op: LinearOperator, keys: Sequence[Key]) -> CheckReport:
    """The seven-term BV identity on every triple of basis keys.

    Triples whose three pairwise products all vanish are skipped: every term
    of the identity then contains a vanishing product.
    """
    identity = "seven-term BV identity"
    one = ((0,) * op.space.ring.nvars, 0)
    d1 = op.image(one)
    deg = {k: key_degree(k) for k in keys}
    img = {k: op.image(k) for k in keys}
    checked = 0
    for a in keys:
        pa = deg[a]
        sa = -1 if pa % 2 else 1
        for b in keys:
            pb = deg[b]
            s_ab, ab = key_product(a, b)
            d_ab = op.image(ab) if s_ab else None
            a_db = qmul_key(a, img[b])
            for c in keys:
                s_bc, bc = key_product(b, c)
                s_ac, ac = key_product(a, c)
                if not (s_ab or s_bc or s_ac):
                    continue
                checked += 1
                acc: QVec = {}
                if s_ab:
                    s_abc, abc = key_product(ab, c)
                    if s_abc:
                        qadd(acc, op.image(abc), s_ab * s_abc)                     # D(abc)
                    qadd(acc, qmul_key(c, d_ab, left=False), -s_ab)                # -D(ab)c
                    qadd(acc, qmul_key(ab, img[c]), s_ab * sa * (-1 if pb % 2 else 1))  # (-1)^(|a|+|b|) ab D(c)
                if s_bc:
                    qadd(acc, qmul_key(bc, img[a], left=False), s_bc)               # D(a)bc
                    qadd(acc, qmul_key(a, op.image(bc)), -sa * s_bc)               # -(-1)^|a| a D(bc)
                if s_ac:
                    e = ((pa + 1) * pb) % 2
                    qadd(acc, qmul_key(b, op.image(ac)), -(-1 if e else 1) * s_ac)  # -(-1)^((|a|+1)|b|) b D(ac)
                qadd(acc, qmul_key(c, a_db, left=False), sa)                       # (-1)^|a| a D(b) c
                if d1 and s_ab:
                    s_abc, abc = key_product(ab, c)
                    if s_abc:
                        qadd(acc, qmul_key(abc, d1), -s_ab * s_abc)                # -D(1)abc
                if acc:
                    sp = op.space
                    return CheckReport(identity, False,
                                       Witness([_key_elem(sp, a), _key_elem(sp, b), _key_elem(sp, c)],
                                               _elem(sp, acc), sp.zero()), checked)
    return CheckReport(identity, True, checked=checked)


def check_generates_bracket(op: BVOperator, keys: Sequence[Key]) -> CheckReport:
    """bracket_from_delta agrees with the Schouten bracket on all key pairs."""
    ctx, sp = op.ctx, op.space
    report = CheckReport("[a,b]_Delta = [a,b]", True)
    for a in keys:
        ea = _key_elem(sp, a)
        for b in keys:
            eb = _key_elem(sp, b)
            lhs = bracket_from_delta(op, ea, eb)
            rhs = _elem(sp, ctx.bracket_keys(a, b))
            report.checked += 1
            if lhs != rhs:
                return CheckReport(report.identity, False, Witness([ea, eb], lhs, rhs), report.checked)
    return report


def check_graded_jacobi(ctx: GerstenhaberContext, keys: Sequence[Key]) -> CheckReport:
    """[a,[b,c]] = [[a,b],c] + (-1)^((|a|-1)(|b|-1)) [b,[a,c]]."""
    report = CheckReport("graded Jacobi", True)
    for a in keys:
        for b in keys:
            e = ((key_degree(a) - 1) * (key_degree(b) - 1)) % 2
            ab = ctx.bracket_keys(a, b)
            for c in keys:
                lhs = ctx.bracket_q({a: 1}, ctx.bracket_keys(b, c))
                rhs = ctx.bracket_q(ab, {c: 1})
                qadd(rhs, ctx.bracket_q({b: 1}, ctx.bracket_keys(a, c)), -1 if e else 1)
                report.checked += 1
                if qclean(lhs) != qclean(rhs):
                    sp = ctx.space
                    return CheckReport(report.identity, False,
                                       Witness([_key_elem(sp, a), _key_elem(sp, b), _key_elem(sp, c)],
                                               _elem(sp, lhs), _elem(sp, rhs)), report.checked)
    return report


def is_strong_differential(d: LinearOperator, ctx: GerstenhaberContext, basis: GradedBasis | None = None,
                           keys: Sequence[Key] | None = None) -> StrongDifferentialReport:
    keys = list(keys if keys is not None else (basis or ctx.default_basis()).all_keys())
    degree = CheckReport("degree +1", d.degree == 1)
    if not degree.holds:
        skipped = CheckReport("not checked: wrong degree", False)
        return StrongDifferentialReport(degree, skipped, skipped, skipped)
    return StrongDifferentialReport(
        degree,
        check_square_zero(d, keys),
        check_product_leibniz(d, keys),
        check_bracket_leibniz(d, ctx, keys),
    )


def anticommutator(op: LinearOperator, d: LinearOperator, ctx: GerstenhaberContext | None = None,
                   basis: GradedBasis | None = None, verify: bool = True) -> LinearOperator:
    """The degree-0 operator d o Delta + Delta o d."""
    if verify:
        ctx = ctx or getattr(op, "ctx")
        report = is_strong_differential(d, ctx, basis)
        if not report.holds:
            raise NotStrongDifferential(report)
    k = d.compose(op) + op.compose(d)
    k.name = f"[{d.name},{op.name}]"
    return k


def inner_derivation(ctx: GerstenhaberContext, x: Multivector, name: str | None = None) -> LinearOperator:
    """The operator [x, -]."""
    deg = x.require_degree() - 1
    xq = qvec(x)
    return LinearOperator(ctx.space, deg, lambda k: ctx.bracket_q(xq, {k: Fraction(1)}), name or f"[{x},-]")
