"""Finite-dimensional Lie algebras, cobrackets and the intrinsic biderivation.

Conventions: ad_v(w) is the Schouten bracket [v, w] on the exterior algebra,
so a coboundary cobracket is delta(v) = [v, r].  The Chevalley-Eilenberg
operator is the BV operator of the zero divergence, hence
d_CE(x ^ y) = -[x, y].
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .exterior import ExteriorSpace, Multivector, degree_of, indices, mask_of
from .gerstenhaber import (
    BVOperator,
    CheckReport,
    DivergenceOperator,
    GerstenhaberContext,
    Witness,
    check_square_zero,
)
from .operators import GradedBasis, Key, LinearOperator, qvec
from .poly import QQ, parse_fraction


class InputError(ValueError):
    """Malformed structure input; ``location`` points into the source."""

    def __init__(self, message: str, location: str = ""):
        super().__init__(f"{location}: {message}" if location else message)
        self.location = location


class LieStructureError(ValueError):
    def __init__(self, report: CheckReport):
        w = report.witness.to_dict() if report.witness else None
        super().__init__(f"{report.identity} fails; witness {w}")
        self.report = report


class LieAlgebra(GerstenhaberContext):
    """Lie algebra given by structure constants on named basis vectors.

    ``brackets`` maps (i, j) to ``{k: coeff}`` meaning [e_i, e_j] = sum coeff e_k;
    the (j, i) entries follow by antisymmetry and omitted pairs are zero.
    """

    def __init__(self, names: Sequence[str], brackets: Mapping[tuple[int, int], Mapping[int, object]],
                 check: bool = True):
        self.space = ExteriorSpace(names, QQ)
        n = self.space.dim
        zero = self.space.zero()
        self._table = [[zero] * n for _ in range(n)]
        for (i, j), value in brackets.items():
            v = self.space.from_terms({1 << k: c for k, c in value.items()})
            if i == j and not v.is_zero():
                raise LieStructureError(CheckReport("antisymmetry", False,
                                                    Witness([self.space.gen(i)] * 2, v, zero)))
            prev = self._table[j][i]
            if not prev.is_zero() and prev != -v:
                raise LieStructureError(CheckReport("antisymmetry", False,
                                                    Witness([self.space.gen(i), self.space.gen(j)], v, -prev)))
            self._table[i][j] = v
            self._table[j][i] = -v
        if check:
            report = self.jacobi_report()
            if not report.holds:
                raise LieStructureError(report)

    @classmethod
    def from_matrices(cls, names: Sequence[str], matrices: Sequence[Sequence[Sequence[object]]]) -> "LieAlgebra":
        """Matrix Lie algebra spanned by ``matrices`` with the commutator bracket."""
        from .cohomology import solve

        mats = [[[Fraction(x) for x in row] for row in m] for m in matrices]
        size = len(mats[0])
        flat = [[m[r][c] for m in mats] for r in range(size) for c in range(size)]
        brackets = {}
        for i in range(len(mats)):
            for j in range(i + 1, len(mats)):
                a, b = mats[i], mats[j]
                comm = [[sum(a[r][t] * b[t][c] - b[r][t] * a[t][c] for t in range(size)) for c in range(size)]
                        for r in range(size)]
                coords = solve(flat, [comm[r][c] for r in range(size) for c in range(size)])
                if coords is None:
                    raise InputError(f"[{names[i]},{names[j]}] leaves the span")
                brackets[(i, j)] = {k: c for k, c in enumerate(coords) if c}
        return cls(names, brackets)

    @property
    def dim(self) -> int:
        return self.space.dim

    @property
    def names(self) -> tuple[str, ...]:
        return self.space.names

    def __repr__(self) -> str:
        return f"LieAlgebra({list(self.names)})"

    def generator_bracket(self, i: int, j: int) -> Multivector:
        return self._table[i][j]

    def anchor(self, i: int, f):
        return Fraction(0)

    def structure_constants(self) -> dict[tuple[int, int], dict[int, Fraction]]:
        out = {}
        for i in range(self.dim):
            for j in range(i + 1, self.dim):
                v = self._table[i][j]
                if not v.is_zero():
                    out[(i, j)] = {m.bit_length() - 1: c for m, c in v.terms.items()}
        return out

    def gen(self, name: str) -> Multivector:
        return self.space.named(name)

    def element(self, text: str) -> Multivector:
        return self.space.parse(text)

    def bracket_contraction(self, w: Multivector) -> Multivector:
        """[-,-] : Lambda^2 g -> g, e_i ^ e_j -> [e_i, e_j]."""
        out = self.space.zero()
        for m, c in w.terms.items():
            if degree_of(m) != 2:
                raise ValueError("bracket contraction takes degree-2 elements")
            i, j = indices(m)
            out = out + self._table[i][j].scale(c)
        return out

    def ce_operator(self, functional: Sequence[object] | None = None) -> BVOperator:
        """Chevalley-Eilenberg operator, optionally twisted by a divergence functional."""
        values = functional if functional is not None else [0] * self.dim
        div = DivergenceOperator.from_generator_values(self, values, "chi" if functional else "0")
        return BVOperator(self, div, "d_CE")

    def full_basis(self) -> GradedBasis:
        return GradedBasis(self.space)


def _derivation_image(space: ExteriorSpace, mask: int, images: Sequence[Multivector], koszul: bool) -> dict:
    """Sum over positions k of e_(S<k) ^ images[s_k] ^ e_(S>k), signed by (-1)^k if ``koszul``."""
    idx = indices(mask)
    out = space.zero()
    for k, s in enumerate(idx):
        term = space.monomial(mask_of(idx[:k])) * images[s] * space.monomial(mask_of(idx[k + 1:]))
        out = out + (-term if koszul and k % 2 else term)
    return qvec(out)


class Cobracket:
    """delta : g -> Lambda^2 g, one degree-2 element per basis vector."""

    def __init__(self, parent: LieAlgebra, images: Sequence[Multivector], r: Multivector | None = None,
                 check: bool = True):
        if len(images) != parent.dim:
            raise ValueError("one cobracket image per basis vector")
        for v in images:
            if v.space != parent.space or v.homogeneous_degree() not in (2,) and not v.is_zero():
                raise ValueError(f"cobracket images must lie in Lambda^2: {v}")
        self.parent = parent
        self.images = list(images)
        self.r = r
        self._differential: LinearOperator | None = None
        if check:
            for report in (self.co_jacobi_report(), self.cocycle_report()):
                if not report.holds:
                    raise LieStructureError(report)

    def __call__(self, v: Multivector) -> Multivector:
        out = self.parent.space.zero()
        for m, c in v.terms.items():
            if degree_of(m) != 1:
                raise ValueError("cobracket takes degree-1 elements")
            out = out + self.images[m.bit_length() - 1].scale(c)
        return out

    def is_zero(self) -> bool:
        return all(v.is_zero() for v in self.images)

    def differential(self) -> LinearOperator:
        """d_delta: the degree +1 derivation of the wedge product extending delta."""
        if self._differential is None:
            sp = self.parent.space
            self._differential = LinearOperator(
                sp, 1, lambda k: _derivation_image(sp, k[1], self.images, koszul=True), "d_delta")
        return self._differential

    def co_jacobi_report(self) -> CheckReport:
        report = check_square_zero(self.differential(), self.parent.full_basis().all_keys(), "co-Jacobi (d_delta^2 = 0)")
        return report

    def cocycle_report(self) -> CheckReport:
        """delta[x,y] = ad_x(delta y) - ad_y(delta x) on basis pairs."""
        g = self.parent
        sp = g.space
        for i in range(g.dim):
            for j in range(i + 1, g.dim):
                x, y = sp.gen(i), sp.gen(j)
                lhs = self(g.generator_bracket(i, j))
                rhs = g.bracket(x, self.images[j]) - g.bracket(y, self.images[i])
                if lhs != rhs:
                    return CheckReport("1-cocycle", False, Witness([x, y], lhs, rhs))
        return CheckReport("1-cocycle", True, checked=g.dim * (g.dim - 1) // 2)

    def table(self) -> list[tuple[str, str]]:
        names = self.parent.names
        return [(names[i], self.images[i].to_text()) for i in range(self.parent.dim)]


def build_cobracket_from_r(g: LieAlgebra, r: Multivector) -> Cobracket:
    """Coboundary cobracket delta(e_i) = ad_{e_i}(r) = [e_i, r]."""
    if r.space != g.space or (not r.is_zero() and r.homogeneous_degree() != 2):
        raise ValueError("r must lie in Lambda^2 g")
    images = [g.bracket(g.space.gen(i), r) for i in range(g.dim)]
    c = Cobracket(g, images, r=r, check=False)
    report = c.co_jacobi_report()
    if not report.holds:
        raise LieStructureError(report)
    cocycle = c.cocycle_report()
    assert cocycle.holds, "coboundaries are automatically 1-cocycles"
    return c


@dataclass
class Biderivation:
    """D = [-,-] o delta as a matrix (column i is D(e_i))."""

    parent: LieAlgebra
    images: list[Multivector]
    h_r: Multivector | None = None
    reports: list[CheckReport] = field(default_factory=list)

    @property
    def matrix(self) -> list[list[Fraction]]:
        n = self.parent.dim
        return [[self.images[j].coeff(1 << i) for j in range(n)] for i in range(n)]

    def __call__(self, v: Multivector) -> Multivector:
        out = self.parent.space.zero()
        for m, c in v.terms.items():
            out = out + self.images[m.bit_length() - 1].scale(c)
        return out

    def is_zero(self) -> bool:
        return all(v.is_zero() for v in self.images)

    def equals_inner(self, h: Multivector) -> bool:
        """Whether D = [h, -] on g."""
        g = self.parent
        return all(g.bracket(h, g.space.gen(i)) == self.images[i] for i in range(g.dim))

    def table(self) -> list[tuple[str, str]]:
        names = self.parent.names
        return [(names[i], self.images[i].to_text()) for i in range(self.parent.dim)]


def derivation_extension(D: Biderivation) -> LinearOperator:
    """The degree-0 derivation of Lambda g extending D."""
    sp = D.parent.space
    return LinearOperator(sp, 0, lambda k: _derivation_image(sp, k[1], D.images, koszul=False), "partial_D")


def ce_anticommutator_report(c: Cobracket, D: Biderivation) -> CheckReport:
    """d_CE d_delta + d_delta d_CE = -partial_D as per-degree matrices."""
    g = c.parent
    d = c.differential()
    ce = g.ce_operator()
    lhs_op = ce.compose(d) + d.compose(ce)
    rhs_op = -derivation_extension(D)
    basis = g.full_basis()
    for k in range(g.dim + 1):
        keys = basis.keys(k)
        if lhs_op.matrix(keys, keys) != rhs_op.matrix(keys, keys):
            for key in keys:
                if lhs_op.image(key) != rhs_op.image(key):
                    v = basis.element(key)
                    return CheckReport("d_CE d_delta + d_delta d_CE = -partial_D", False,
                                       Witness([v], lhs_op(v), rhs_op(v)))
    return CheckReport("d_CE d_delta + d_delta d_CE = -partial_D", True, checked=2 ** g.dim)


def intrinsic_biderivation(c: Cobracket, verify: bool = True) -> Biderivation:
    g = c.parent
    images = [g.bracket_contraction(c.images[i]) for i in range(g.dim)]
    h_r = -g.bracket_contraction(c.r) if c.r is not None else None
    D = Biderivation(g, images, h_r)
    if verify:
        D.reports.append(ce_anticommutator_report(c, D))
        D.reports.append(derivation_report(D))
        D.reports.append(coderivation_report(c, D))
        if h_r is not None:
            D.reports.append(CheckReport("D = [H_r, -]", D.equals_inner(h_r), checked=g.dim))
    return D


def derivation_report(D: Biderivation) -> CheckReport:
    """D[x,y] = [Dx,y] + [x,Dy] on basis pairs."""
    g = D.parent
    sp = g.space
    for i in range(g.dim):
        for j in range(g.dim):
            x, y = sp.gen(i), sp.gen(j)
            lhs = D(g.generator_bracket(i, j))
            rhs = g.lie_bracket(D.images[i], y) + g.lie_bracket(x, D.images[j])
            if lhs != rhs:
                return CheckReport("D is a bracket derivation", False, Witness([x, y], lhs, rhs))
    return CheckReport("D is a bracket derivation", True, checked=g.dim ** 2)


def coderivation_report(c: Cobracket, D: Biderivation) -> CheckReport:
    """partial_D d_delta = d_delta partial_D on every basis monomial."""
    pd = derivation_extension(D)
    d = c.differential()
    basis = c.parent.full_basis()
    for key in basis.all_keys():
        lhs = pd.apply_q(d.image(key))
        rhs = d.apply_q(pd.image(key))
        if lhs != rhs:
            v = basis.element(key)
            return CheckReport("partial_D d_delta = d_delta partial_D", False,
                               Witness([v], pd(d(v)), d(pd(v))))
    return CheckReport("partial_D d_delta = d_delta partial_D", True, checked=len(basis.all_keys()))


def is_involutive(c: Cobracket) -> bool:
    D = intrinsic_biderivation(c, verify=False)
    if not D.is_zero():
        return False
    g = c.parent
    d, ce = c.differential(), g.ce_operator()
    anti = ce.compose(d) + d.compose(ce)
    assert all(not anti.image(k) for k in g.full_basis().all_keys()), "involutive: d_CE must anticommute with d_delta"
    return True


# -- presets ---------------------------------------------------------------------

PRESETS = ("aff2_trivial", "aff2_case2", "aff2_case3", "sl2_standard", "sl3_standard")


def aff2() -> LieAlgebra:
    return LieAlgebra(["h", "x"], {(0, 1): {1: 1}})


def sl2() -> LieAlgebra:
    # basis order x, h, y; [h,x] = 2x, [x,y] = h, [h,y] = -2y
    return LieAlgebra(["x", "h", "y"], {(1, 0): {0: 2}, (0, 2): {1: 1}, (1, 2): {2: -2}})


def _e(i: int, j: int) -> list[list[int]]:
    m = [[0] * 3 for _ in range(3)]
    m[i - 1][j - 1] = 1
    return m


def sl3() -> LieAlgebra:
    """sl(3) on x1=E12, x2=E23, x3=E13, h1=E11-E22, h2=E22-E33, y_i = x_i^t."""
    names = ["x1", "x2", "x3", "h1", "h2", "y1", "y2", "y3"]
    h1 = [[1, 0, 0], [0, -1, 0], [0, 0, 0]]
    h2 = [[0, 0, 0], [0, 1, 0], [0, 0, -1]]
    mats = [_e(1, 2), _e(2, 3), _e(1, 3), h1, h2, _e(2, 1), _e(3, 2), _e(3, 1)]
    return LieAlgebra.from_matrices(names, mats)


def preset(name: str, lam: object = 1) -> tuple[LieAlgebra, Cobracket]:
    if name == "aff2_trivial":
        g = aff2()
        return g, Cobracket(g, [g.space.zero()] * 2)
    if name == "aff2_case2":
        g = aff2()
        h, x = g.gen("h"), g.gen("x")
        return g, Cobracket(g, [h * x, g.space.zero()])
    if name == "aff2_case3":
        lam = lam if isinstance(lam, Fraction) else parse_fraction(str(lam))
        if lam == 0:
            raise InputError("aff2_case3 needs lambda != 0", "--lambda")
        g = aff2()
        h, x = g.gen("h"), g.gen("x")
        return g, Cobracket(g, [g.space.zero(), (h * x).scale(lam)])
    if name == "sl2_standard":
        g = sl2()
        r = g.gen("x") * g.gen("y")
        return g, build_cobracket_from_r(g, r)
    if name == "sl3_standard":
        g = sl3()
        r = g.element("1 * x1^y1 + 1 * x2^y2 + 1 * x3^y3")
        return g, build_cobracket_from_r(g, r)
    raise InputError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}", "--preset")


# -- JSON input ------------------------------------------------------------------

def _index(g_names: Sequence[str], value, where: str) -> int:
    if isinstance(value, str):
        if value not in g_names:
            raise InputError(f"unknown basis name {value!r}", where)
        return g_names.index(value)
    if isinstance(value, int) and not isinstance(value, bool) and 0 <= value < len(g_names):
        return value
    raise InputError(f"bad basis index {value!r}", where)


def _coeff(value, where: str) -> Fraction:
    try:
        return parse_fraction(str(value))
    except ValueError as exc:
        raise InputError(str(exc), where) from None


def _bivector(g: LieAlgebra, terms, where: str) -> Multivector:
    if not isinstance(terms, list):
        raise InputError("expected a list of {i, j, coeff} terms", where)
    out = g.space.zero()
    for n, t in enumerate(terms):
        loc = f"{where}[{n}]"
        if not isinstance(t, dict) or not {"i", "j"} <= set(t):
            raise InputError("term needs keys i, j (and coeff)", loc)
        i = _index(g.names, t["i"], loc + ".i")
        j = _index(g.names, t["j"], loc + ".j")
        out = out + (g.space.gen(i) * g.space.gen(j)).scale(_coeff(t.get("coeff", 1), loc + ".coeff"))
    return out


def bialgebra_from_dict(data: Mapping) -> tuple[LieAlgebra, Cobracket]:
    """Build and validate a Lie bialgebra from the JSON schema."""
    if not isinstance(data, Mapping):
        raise InputError("top level must be an object", "$")
    for key in ("dim", "basis", "brackets"):
        if key not in data:
            raise InputError(f"missing key {key!r}", "$")
    names = data["basis"]
    if not isinstance(names, list) or not all(isinstance(s, str) for s in names):
        raise InputError("basis must be a list of names", "$.basis")
    if data["dim"] != len(names):
        raise InputError(f"dim {data['dim']} does not match {len(names)} basis names", "$.dim")
    brackets: dict[tuple[int, int], dict[int, Fraction]] = {}
    if not isinstance(data["brackets"], list):
        raise InputError("brackets must be a list", "$.brackets")
    for n, entry in enumerate(data["brackets"]):
        loc = f"$.brackets[{n}]"
        if not isinstance(entry, dict) or not {"i", "j", "value"} <= set(entry):
            raise InputError("bracket entry needs keys i, j, value", loc)
        i = _index(names, entry["i"], loc + ".i")
        j = _index(names, entry["j"], loc + ".j")
        value: dict[int, Fraction] = {}
        for m, term in enumerate(entry["value"]):
            tloc = f"{loc}.value[{m}]"
            if not isinstance(term, dict) or "k" not in term:
                raise InputError("value term needs keys k, coeff", tloc)
            k = _index(names, term["k"], tloc + ".k")
            value[k] = value.get(k, 0) + _coeff(term.get("coeff", 1), tloc + ".coeff")
        if (i, j) in brackets or (j, i) in brackets:
            raise InputError(f"bracket ({i},{j}) given twice", loc)
        brackets[(i, j)] = value
    g = LieAlgebra(names, brackets)
    cob = data.get("cobracket")
    if cob is None:
        return g, Cobracket(g, [g.space.zero()] * g.dim)
    if not isinstance(cob, Mapping):
        raise InputError("cobracket must be an object", "$.cobracket")
    if "r_matrix" in cob:
        return g, build_cobracket_from_r(g, _bivector(g, cob["r_matrix"], "$.cobracket.r_matrix"))
    if "by_generator" in cob:
        images = cob["by_generator"]
        if not isinstance(images, list) or len(images) != g.dim:
            raise InputError("by_generator needs one term list per basis vector", "$.cobracket.by_generator")
        return g, Cobracket(g, [_bivector(g, t, f"$.cobracket.by_generator[{n}]") for n, t in enumerate(images)])
    raise InputError("cobracket needs 'by_generator' or 'r_matrix'", "$.cobracket")


def load_bialgebra(path: str | Path) -> tuple[LieAlgebra, Cobracket]:
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(exc.msg, f"{path}:{exc.lineno}:{exc.colno}") from None
    return bialgebra_from_dict(data)
