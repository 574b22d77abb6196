"""QQ-linear operators on exterior algebras, defined on basis elements.

Every multivector expands over the QQ-basis ``x^exp * e_S``; a basis element
is the *key* ``(exp, mask)`` (``exp == ()`` over QQ).  Operators store their
basis images lazily as sparse dicts ``{key: Fraction}``; a materialized image
is never replaced, so concurrent readers agree.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product
from typing import Callable, Iterable, Mapping

from .exterior import ExteriorSpace, Multivector, degree_of, masks_of_degree, merge_sign
from .poly import PolynomialRing

Key = tuple[tuple[int, ...], int]
QVec = dict[Key, Fraction]


def key_degree(key: Key) -> int:
    return degree_of(key[1])


def key_product(a: Key, b: Key) -> tuple[int, Key | None]:
    """x^a e_S * x^b e_T = sign * x^(a+b) e_(S|T)."""
    s, t = a[1], b[1]
    if s & t:
        return 0, None
    exp = tuple(i + j for i, j in zip(a[0], b[0])) if a[0] else b[0]
    return merge_sign(s, t), (exp, s | t)


def qvec(v: Multivector) -> QVec:
    return dict(v.qterms())


def qadd(acc: QVec, vec: Mapping[Key, Fraction], c=1) -> None:
    for k, x in vec.items():
        y = acc.get(k, 0) + c * x
        if y:
            acc[k] = y
        else:
            acc.pop(k, None)


def qclean(vec: QVec) -> QVec:
    return {k: c for k, c in vec.items() if c}


def qmul(a: Mapping[Key, Fraction], b: Mapping[Key, Fraction]) -> QVec:
    out: QVec = {}
    for ka, ca in a.items():
        for kb, cb in b.items():
            s, k = key_product(ka, kb)
            if s:
                out[k] = out.get(k, 0) + (ca * cb if s > 0 else -(ca * cb))
    return qclean(out)


def qmul_key(key: Key, vec: Mapping[Key, Fraction], left: bool = True) -> QVec:
    """key * vec (``left``) or vec * key."""
    out: QVec = {}
    for k, c in vec.items():
        s, m = key_product(key, k) if left else key_product(k, key)
        if s:
            out[m] = out.get(m, 0) + (c if s > 0 else -c)
    return qclean(out)


class LinearOperator:
    """Homogeneous QQ-linear map on ``space`` shifting degree by ``degree``."""

    def __init__(self, space: ExteriorSpace, degree: int, image: Callable[[Key], Mapping[Key, Fraction]],
                 name: str = "op"):
        self.space = space
        self.degree = degree
        self.name = name
        self._image = image
        self._cache: dict[Key, QVec] = {}

    def __repr__(self) -> str:
        return f"LinearOperator({self.name}, degree={self.degree:+d})"

    def image(self, key: Key) -> QVec:
        """Image of one basis element; the returned dict must not be mutated."""
        got = self._cache.get(key)
        if got is None:
            got = self._cache.setdefault(key, qclean(dict(self._image(key))))
        return got

    def apply_q(self, vec: Mapping[Key, Fraction]) -> QVec:
        out: QVec = {}
        for k, c in vec.items():
            qadd(out, self.image(k), c)
        return out

    def __call__(self, v: Multivector) -> Multivector:
        if v.space != self.space:
            raise ValueError(f"{self.name} acts on {self.space!r}, got {v.space!r}")
        return self.space.from_qterms(self.apply_q(qvec(v)).items())

    # -- algebra of operators --------------------------------------------------
    def compose(self, other: "LinearOperator") -> "LinearOperator":
        """self o other"""
        return LinearOperator(self.space, self.degree + other.degree,
                              lambda k: self.apply_q(other.image(k)), f"{self.name}*{other.name}")

    def __add__(self, other: "LinearOperator") -> "LinearOperator":
        if other.degree != self.degree:
            raise ValueError("cannot add operators of different degree")

        def img(k):
            out = dict(self.image(k))
            qadd(out, other.image(k))
            return out

        return LinearOperator(self.space, self.degree, img, f"({self.name}+{other.name})")

    def scale(self, c) -> "LinearOperator":
        c = Fraction(c)
        return LinearOperator(self.space, self.degree,
                              lambda k: {m: c * x for m, x in self.image(k).items()}, f"{c}*{self.name}")

    def __neg__(self) -> "LinearOperator":
        return self.scale(-1)

    def __sub__(self, other: "LinearOperator") -> "LinearOperator":
        return self + (-other)

    def matrix(self, domain: list[Key], codomain: list[Key]) -> list[list[Fraction]]:
        """Rows indexed by ``codomain``, columns by ``domain``."""
        pos = {k: i for i, k in enumerate(codomain)}
        rows = [[Fraction(0)] * len(domain) for _ in codomain]
        for j, key in enumerate(domain):
            for k, c in self.image(key).items():
                if k not in pos:
                    raise ValueError(f"{self.name}: image of {key} leaves the target basis at {k}")
                rows[pos[k]][j] = c
        return rows


def zero_operator(space: ExteriorSpace, degree: int = 0) -> LinearOperator:
    return LinearOperator(space, degree, lambda k: {}, "0")


def identity_operator(space: ExteriorSpace) -> LinearOperator:
    return LinearOperator(space, 0, lambda k: {k: Fraction(1)}, "id")


class GradedBasis:
    """Finite QQ-basis per exterior degree.

    Over QQ this is every monomial e_S.  Over a polynomial ring the
    coefficient monomials are truncated at total degree ``max_poly_degree``
    (optionally widened per exterior degree via ``widen``).
    """

    def __init__(self, space: ExteriorSpace, max_poly_degree: int | None = None,
                 widen: Callable[[int], int] | None = None):
        self.space = space
        self.max_poly_degree = max_poly_degree
        self.widen = widen or (lambda k: 0)
        if isinstance(space.ring, PolynomialRing) and max_poly_degree is None:
            raise ValueError("polynomial coefficients need a truncation degree")

    def poly_bound(self, k: int) -> int | None:
        if self.max_poly_degree is None:
            return None
        return self.max_poly_degree + self.widen(k)

    def keys(self, k: int) -> list[Key]:
        if k < 0 or k > self.space.dim:
            return []
        masks = masks_of_degree(self.space.dim, k)
        ring = self.space.ring
        if not isinstance(ring, PolynomialRing):
            return [((), m) for m in masks]
        exps = ring.monomials_up_to(self.poly_bound(k))
        return [(e, m) for m, e in product(masks, exps)]

    def all_keys(self) -> list[Key]:
        return [k for d in range(self.space.dim + 1) for k in self.keys(d)]

    def element(self, key: Key) -> Multivector:
        return self.space.from_qterms([(key, Fraction(1))])


def basis_elements(basis: GradedBasis, degrees: Iterable[int] | None = None) -> list[Key]:
    if degrees is None:
        return basis.all_keys()
    return [k for d in degrees for k in basis.keys(d)]
