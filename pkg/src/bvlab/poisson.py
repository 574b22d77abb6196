"""Polynomial Lie-Rinehart pairs, Poisson bivectors and the planar example.

The pair is A = QQ[x_1..x_n] with the free frame d_1..d_n, [d_i, d_j] = 0 and
anchor d_i(f) = df/dx_i.  The divergence is div(sum p_i d_i) = sum dp_i/dx_i,
optionally shifted to div(X) + X(a0).

In the plane the rotation field is d_theta := y d_x - x d_y, which is half the
modular field of (x^2 + y^2) d_x ^ d_y; see SIGNS.md for why this orientation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .cohomology import ChainComplex, infeasibility_certificate, solve
from .exterior import Multivector, StructureError, degree_of
from .gerstenhaber import BVOperator, DivergenceOperator, GerstenhaberContext, Witness, inner_derivation
from .operators import GradedBasis, LinearOperator, qvec
from .poly import Poly, PolynomialRing, format_fraction, parse_poly


class PoissonError(ValueError):
    def __init__(self, message: str, witness: Multivector | None = None):
        super().__init__(f"{message}: {witness}" if witness is not None else message)
        self.witness = witness


class WindowError(ValueError):
    pass


def frame_names(names: Sequence[str]) -> tuple[str, ...]:
    return tuple(f"d{v}" for v in names)


class PolyLieRinehart(GerstenhaberContext):
    """(QQ[x_1..x_n], free frame) with the coordinate divergence shifted by ``shift``."""

    def __init__(self, n: int, shift: Poly | str | int | None = None, names: Sequence[str] | None = None):
        from .exterior import ExteriorSpace

        self.ring = PolynomialRing(n, tuple(names) if names else None)
        self.n = n
        self.space = ExteriorSpace(frame_names(self.ring.names), self.ring)
        self.shift = self.ring.coerce(shift if shift is not None else 0)
        self._zero = self.space.zero()

    def __repr__(self) -> str:
        return f"PolyLieRinehart(n={self.n}, shift={self.ring.format(self.shift)})"

    def generator_bracket(self, i: int, j: int) -> Multivector:
        return self._zero

    def anchor(self, i: int, f):
        return f.diff(i) if isinstance(f, Poly) else self.ring.zero

    # -- constructors ------------------------------------------------------------
    def poly(self, value) -> Poly:
        return self.ring.coerce(value)

    def field(self, *coeffs) -> Multivector:
        """sum coeffs[i] d_i"""
        return self.space.from_terms({1 << i: self.poly(c) for i, c in enumerate(coeffs)})

    def frame(self, *idx: int, coeff=1) -> Multivector:
        return self.space.monomial(list(idx), self.poly(coeff))

    def volume(self) -> Multivector:
        return self.frame(*range(self.n))

    def scalar(self, f) -> Multivector:
        return self.space.scalar(self.poly(f))

    # -- divergence and BV ------------------------------------------------------------
    def divergence(self) -> DivergenceOperator:
        values = [self.shift.diff(i) for i in range(self.n)]
        name = "div" if self.shift.is_zero() else f"div + X({self.ring.format(self.shift)})"
        return DivergenceOperator.from_generator_values(self, values, name)

    def bv(self) -> BVOperator:
        return BVOperator(self, self.divergence(), "Delta")

    def window(self, max_poly_degree: int, widen=None) -> GradedBasis:
        return GradedBasis(self.space, max_poly_degree, widen)


class PoissonBivector:
    """Degree-2 element with [Pi, Pi] = 0 (checked)."""

    def __init__(self, lr: PolyLieRinehart, pi: Multivector, check: bool = True):
        if pi.space != lr.space:
            raise StructureError("bivector belongs to another context")
        if not pi.is_zero() and pi.homogeneous_degree() != 2:
            raise PoissonError("a Poisson bivector must be homogeneous of degree 2", pi)
        self.lr = lr
        self.pi = pi
        if check:
            sq = lr.bracket(pi, pi)
            if not sq.is_zero():
                raise PoissonError("[Pi, Pi] != 0", sq)

    @classmethod
    def planar(cls, lr: PolyLieRinehart, f) -> "PoissonBivector":
        if lr.n != 2:
            raise ValueError("planar bivectors need n = 2")
        return cls(lr, lr.volume().scale(lr.poly(f)))

    @classmethod
    def from_terms(cls, lr: PolyLieRinehart, terms: Sequence[dict]) -> "PoissonBivector":
        """Terms {"coeff": "poly-text", "frame": [i, j]} with 0-based frame indices."""
        pi = lr.space.zero()
        for t in terms:
            i, j = t["frame"]
            pi = pi + lr.frame(i, j, coeff=parse_poly(str(t.get("coeff", "1")), lr.ring))
        return cls(lr, pi)

    def coefficient_degree(self) -> int:
        return max((c.degree() for c in self.pi.terms.values()), default=0)

    def __str__(self) -> str:
        return self.pi.to_text()


@dataclass
class TruncationWindow:
    """Coefficients of total degree <= max_poly_degree, widened per exterior degree."""

    max_poly_degree: int
    widen_per_degree: int = 0

    def __post_init__(self):
        if self.max_poly_degree < 0:
            raise WindowError("the window degree must be non-negative")

    @classmethod
    def for_bivector(cls, p: PoissonBivector, max_poly_degree: int) -> "TruncationWindow":
        """Widen by deg(Pi) - 1 per exterior degree so d_Pi maps the window into itself."""
        return cls(max_poly_degree, max(p.coefficient_degree() - 1, 0))

    def bound(self, k: int) -> int:
        return self.max_poly_degree + k * self.widen_per_degree

    def basis(self, lr: PolyLieRinehart) -> GradedBasis:
        return lr.window(self.max_poly_degree, lambda k: k * self.widen_per_degree)

    def describe(self) -> str:
        if not self.widen_per_degree:
            return f"coefficient degree <= {self.max_poly_degree}"
        return f"coefficient degree <= {self.max_poly_degree} + {self.widen_per_degree}*k in exterior degree k"


def d_pi(lr: PolyLieRinehart, p: PoissonBivector) -> LinearOperator:
    """The Lichnerowicz differential [Pi, -]."""
    return inner_derivation(lr, p.pi, "d_Pi")


def modular_class(lr: PolyLieRinehart, p: PoissonBivector) -> Multivector:
    """X_Delta = Delta(Pi); checks that it is d_Pi-closed."""
    x = lr.bv()(p.pi)
    closed = lr.bracket(p.pi, x)
    if not closed.is_zero():
        raise PoissonError("d_Pi(X_Delta) != 0", closed)
    return x


def hamiltonian_field(lr: PolyLieRinehart, p: PoissonBivector, g) -> Multivector:
    """d_Pi(g) = [Pi, g]."""
    return lr.bracket(p.pi, lr.scalar(g))


def shifted_bv(lr: PolyLieRinehart, a) -> BVOperator:
    """Delta - [a, -]: the BV operator of the divergence div(X) - X(a)."""
    shifted = PolyLieRinehart(lr.n, lr.shift - lr.poly(a), lr.ring.names)
    op = BVOperator(lr, shifted.divergence(), "Delta~")
    return op


@dataclass
class UnimodularityReport:
    max_degree: int
    x_delta: Multivector
    unimodular_within_window: bool
    witness: Poly | None = None
    certificate: list[tuple[str, Fraction]] | None = None
    unknowns: int = 0
    equations: int = 0

    @property
    def strictly_unimodular(self) -> bool:
        return self.x_delta.is_zero()

    def summary(self, ring: PolynomialRing) -> str:
        if self.unimodular_within_window:
            return f"unimodular: X_Delta = [Pi, a] with a = {ring.format(self.witness)}"
        return (f"no polynomial a of degree <= {self.max_degree} solves X_Delta = [Pi, a] "
                f"(this says nothing about higher degrees or non-polynomial a)")

    def to_dict(self, ring: PolynomialRing) -> dict:
        return {
            "max_degree": self.max_degree,
            "x_delta": self.x_delta.to_text(),
            "unimodular_within_window": self.unimodular_within_window,
            "witness": ring.format(self.witness) if self.witness is not None else None,
            "certificate": [[label, format_fraction(c)] for label, c in self.certificate] if self.certificate else None,
            "unknowns": self.unknowns,
            "equations": self.equations,
            "summary": self.summary(ring),
        }


def unimodularity_probe(lr: PolyLieRinehart, p: PoissonBivector, w: TruncationWindow | int) -> UnimodularityReport:
    """Solve [Pi, a] = X_Delta for a of degree <= N by exact linear algebra.

    On failure the certificate is a functional y on the equations with
    y(d_Pi(m)) = 0 for every monomial m in the window and y(X_Delta) != 0.
    """
    n_max = w.max_poly_degree if isinstance(w, TruncationWindow) else int(w)
    x = modular_class(lr, p)
    exps = lr.ring.monomials_up_to(n_max)
    cols = [qvec(lr.bracket(p.pi, lr.scalar(lr.ring.lift(e, Fraction(1))))) for e in exps]
    target = qvec(x)
    rows = sorted({k for c in cols for k in c} | set(target), key=lambda k: (k[1], sum(k[0]), k[0]))
    matrix = [[c.get(r, Fraction(0)) for c in cols] for r in rows]
    b = [target.get(r, Fraction(0)) for r in rows]
    report = UnimodularityReport(n_max, x, False, unknowns=len(cols), equations=len(rows))
    if not rows:
        report.unimodular_within_window = True
        report.witness = lr.ring.zero
        return report
    sol = solve(matrix, b) if cols else (None if any(b) else [])
    if sol is not None:
        a = lr.ring.zero
        for e, c in zip(exps, sol):
            if c:
                a = a + lr.ring.lift(e, c)
        if lr.bracket(p.pi, lr.scalar(a)) != x:
            raise AssertionError("unimodularity witness failed verification")
        report.unimodular_within_window = True
        report.witness = a
        return report
    y = infeasibility_certificate(matrix, b) if cols else [Fraction(int(bool(v))) for v in b]
    report.certificate = [(lr.space.from_qterms([(r, Fraction(1))]).to_text(), c) for r, c in zip(rows, y) if c]
    return report


# -- the planar example ----------------------------------------------------------------

def planar_fields(lr: PolyLieRinehart) -> dict[str, Multivector]:
    """Named fields of the plane: d_theta, D_r, Vol and Pi = (x^2 + y^2) Vol."""
    if lr.n != 2:
        raise ValueError("planar fields need n = 2")
    x, y = lr.ring.var(0), lr.ring.var(1)
    vol = lr.volume()
    return {
        "dtheta": lr.field(y, -x),
        "D_r": lr.field(x, y),
        "Vol": vol,
        "Pi": vol.scale(x * x + y * y),
    }


def _power_label(k: int, name: str) -> str:
    if k == 0:
        return name
    r = "r^2" if k == 1 else f"r^{2 * k}"
    return r if name == "1" else f"{r}*{name}"


class RotationInvariantComplex(ChainComplex):
    """d_Pi restricted to rotation-invariant polynomial multivectors, Pi = (x^2 + y^2) d_x ^ d_y.

    Degree k holds coefficients of degree <= N + k (d_Pi raises coefficient
    degree by one).  ``elements`` holds the Cartesian multivector of each basis
    vector; ``labels`` use the names 1, r^2k, dtheta, D_r, Vol.
    """

    lr: PolyLieRinehart
    bivector: PoissonBivector
    window: TruncationWindow
    basis_elements: list[list[Multivector]]
    fields: dict[str, Multivector]


def rotation_invariant_subcomplex(w: TruncationWindow | int) -> RotationInvariantComplex:
    window = w if isinstance(w, TruncationWindow) else TruncationWindow(int(w), 1)
    n_max = window.max_poly_degree
    if n_max < 2:
        raise WindowError("the rotation-invariant window needs N >= 2")
    lr = PolyLieRinehart(2)
    fields = planar_fields(lr)
    p = PoissonBivector(lr, fields["Pi"])
    rsq = lr.ring.var(0) ** 2 + lr.ring.var(1) ** 2
    m = n_max // 2
    labels: list[list[str]] = [[], [], []]
    elements: list[list[Multivector]] = [[], [], []]
    for k in range(m + 1):
        labels[0].append(_power_label(k, "1"))
        elements[0].append(lr.scalar(rsq ** k))
        for name in ("dtheta", "D_r"):
            labels[1].append(_power_label(k, name))
            elements[1].append(fields[name].scale(rsq ** k))
    for k in range(m + 2):
        labels[2].append(_power_label(k, "Vol"))
        elements[2].append(fields["Vol"].scale(rsq ** k))
    theta = fields["dtheta"]
    for deg in elements:
        for v in deg:
            if not lr.bracket(theta, v).is_zero():
                raise AssertionError(f"{v} is not rotation invariant")
    mats = []
    for k in range(2):
        src, dst = elements[k], elements[k + 1]
        dst_q = [qvec(v) for v in dst]
        keys = sorted({key for q in dst_q for key in q})
        table = [[q.get(key, Fraction(0)) for q in dst_q] for key in keys]
        cols = []
        for v in src:
            image = qvec(lr.bracket(p.pi, v))
            extra = set(image) - set(keys)
            coords = None if extra else solve(table, [image.get(key, Fraction(0)) for key in keys])
            if coords is None:
                raise AssertionError(f"d_Pi({v}) leaves the invariant window")
            cols.append(coords)
        mats.append([[cols[j][i] for j in range(len(src))] for i in range(len(dst))])
    c = RotationInvariantComplex([len(e) for e in elements], mats, labels, 0, None,
                                 f"rotation-invariant d_Pi, N = {n_max}")
    c.lr, c.bivector, c.window, c.basis_elements, c.fields = lr, p, window, elements, fields
    return c


@dataclass
class PlanarRelations:
    """BV values and Gerstenhaber relations on the planar generators."""

    x_delta: Multivector
    orientation: int  # X_Delta = orientation * 2 (x d_y - y d_x)
    bv_values: dict[str, Multivector] = field(default_factory=dict)
    relations: dict[str, bool] = field(default_factory=dict)


def planar_relations(lr: PolyLieRinehart | None = None) -> PlanarRelations:
    lr = lr or PolyLieRinehart(2)
    f = planar_fields(lr)
    delta = lr.bv()
    x_delta = delta(f["Pi"])
    ccw = lr.field(-lr.ring.var(1), lr.ring.var(0))  # x d_y - y d_x
    if x_delta == ccw.scale(2):
        orientation = 1
    elif x_delta == ccw.scale(-2):
        orientation = -1
    else:
        raise AssertionError(f"unexpected modular field {x_delta}")
    out = PlanarRelations(x_delta, orientation)
    for name in ("dtheta", "D_r", "Vol", "Pi"):
        out.bv_values[name] = delta(f[name])
    vol = f["Vol"]
    out.relations["dtheta ^ D_r = Pi"] = f["dtheta"] * f["D_r"] == f["Pi"]
    out.relations["[D_r, Vol] = -2 Vol"] = lr.bracket(f["D_r"], vol) == vol.scale(-2)
    for name in ("dtheta", "D_r", "Vol", "Pi"):
        out.relations[f"[dtheta, {name}] = 0"] = lr.bracket(f["dtheta"], f[name]).is_zero()
    out.relations["Delta(Pi) = 2 dtheta"] = out.bv_values["Pi"] == f["dtheta"].scale(2)
    return out
