"""Sparse multivectors in the exterior algebra over a scalar ring.

A basis monomial e_S is stored as an int bitmask S over the generators
0..dim-1; its degree is the popcount.  A :class:`Multivector` maps masks to
nonzero scalars (``Fraction`` over QQ, :class:`~bvlab.poly.Poly` over a
polynomial ring).  The algebra product ``a * b`` is the wedge product.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from typing import Iterable, Iterator, Mapping

from .poly import QQ, Poly, PolynomialRing, Rationals, format_fraction

MAX_GENERATORS = 64


class StructureError(ValueError):
    """Operands live in different spaces, or a structural invariant fails."""


class InhomogeneousError(ValueError):
    pass


# -- bitset helpers -----------------------------------------------------------

def degree_of(mask: int) -> int:
    return mask.bit_count()


def indices(mask: int) -> list[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def mask_of(idx: Iterable[int]) -> int:
    m = 0
    for i in idx:
        if m >> i & 1:
            raise StructureError(f"repeated generator {i}")
        m |= 1 << i
    return m


def merge_sign(s: int, t: int) -> int:
    """Sign of e_S ^ e_T = sign * e_{S|T} for disjoint S, T.

    Counts the pairs (i in S, j in T) with i > j, i.e. the transpositions that
    sort the concatenated index list.
    """
    n = 0
    while t:
        low = t & -t
        j = low.bit_length() - 1
        n += (s >> (j + 1)).bit_count()
        t ^= low
    return -1 if n & 1 else 1


def monomial_product(s: int, t: int) -> tuple[int, int]:
    """(sign, mask) of e_S ^ e_T; sign 0 when S and T overlap."""
    if s & t:
        return 0, 0
    return merge_sign(s, t), s | t


def masks_of_degree(dim: int, k: int) -> list[int]:
    """Degree-k masks in lexicographic order of their index sequences."""
    return [mask_of(c) for c in combinations(range(dim), k)]


def monomial_sort_key(mask: int) -> tuple[int, tuple[int, ...]]:
    return degree_of(mask), tuple(indices(mask))


# -- spaces --------------------------------------------------------------------

class ExteriorSpace:
    """Exterior algebra on named generators over ``ring``."""

    def __init__(self, names: Iterable[str], ring: Rationals | PolynomialRing = QQ):
        self.names = tuple(names)
        if len(self.names) > MAX_GENERATORS:
            raise StructureError(f"at most {MAX_GENERATORS} generators are supported")
        if len(set(self.names)) != len(self.names):
            raise StructureError("generator names must be distinct")
        self.ring = ring
        self.dim = len(self.names)

    def __repr__(self) -> str:
        return f"ExteriorSpace({list(self.names)}, {self.ring!r})"

    def __eq__(self, other) -> bool:
        return isinstance(other, ExteriorSpace) and self.names == other.names and self.ring == other.ring

    def __hash__(self) -> int:
        return hash((self.names, self.ring))

    # constructors
    def zero(self) -> "Multivector":
        return Multivector(self, {})

    def one(self) -> "Multivector":
        return self.scalar(1)

    def scalar(self, c) -> "Multivector":
        return Multivector(self, {0: self.ring.coerce(c)})

    def gen(self, i: int) -> "Multivector":
        return Multivector(self, {1 << i: self.ring.one})

    def monomial(self, idx: int | Iterable[int], coeff=1) -> "Multivector":
        """``idx`` is a mask or an index sequence (not necessarily sorted)."""
        if isinstance(idx, int):
            return Multivector(self, {idx: self.ring.coerce(coeff)})
        v = self.scalar(coeff)
        for i in idx:
            v = v * self.gen(i)
        return v

    def from_terms(self, terms: Mapping[int, object]) -> "Multivector":
        return Multivector(self, {m: self.ring.coerce(c) for m, c in terms.items()})

    def from_qterms(self, items: Iterable[tuple[tuple[tuple[int, ...], int], Fraction]]) -> "Multivector":
        """Inverse of :meth:`Multivector.qterms`."""
        acc: dict[int, object] = {}
        ring = self.ring
        for (exp, mask), c in items:
            if c:
                piece = ring.lift(exp, c)
                acc[mask] = acc[mask] + piece if mask in acc else piece
        return Multivector(self, acc)

    def named(self, name: str) -> "Multivector":
        return self.gen(self.names.index(name))

    def masks(self, k: int) -> list[int]:
        return masks_of_degree(self.dim, k)

    def monomial_name(self, mask: int) -> str:
        if mask == 0:
            return "1"
        return "^".join(self.names[i] for i in indices(mask))

    def parse(self, text: str) -> "Multivector":
        return parse_multivector(text, self)


def _is_zero(c) -> bool:
    return c == 0 if not isinstance(c, Poly) else c.is_zero()


class Multivector:
    """Immutable sparse element of an :class:`ExteriorSpace`."""

    __slots__ = ("space", "terms")

    def __init__(self, space: ExteriorSpace, terms: Mapping[int, object]):
        self.space = space
        self.terms = {m: c for m, c in terms.items() if not _is_zero(c)}

    # -- queries -------------------------------------------------------------
    @property
    def ring(self):
        return self.space.ring

    def is_zero(self) -> bool:
        return not self.terms

    def degrees(self) -> set[int]:
        return {degree_of(m) for m in self.terms}

    def homogeneous_degree(self) -> int | None:
        """Common degree of all terms, ``None`` if inhomogeneous (zero gives 0)."""
        degs = self.degrees()
        if not degs:
            return 0
        if len(degs) > 1:
            return None
        return degs.pop()

    def require_degree(self) -> int:
        k = self.homogeneous_degree()
        if k is None:
            raise InhomogeneousError(f"inhomogeneous element: {self}")
        return k

    def coeff(self, mask: int):
        return self.terms.get(mask, self.space.ring.zero)

    def qterms(self) -> Iterator[tuple[tuple[tuple[int, ...], int], Fraction]]:
        """Expansion over the QQ-basis {x^exp e_S}: yields ((exp, mask), c)."""
        split = self.space.ring.split
        for m, c in self.terms.items():
            for exp, q in split(c):
                yield (exp, m), q

    def degree_part(self, k: int) -> "Multivector":
        return Multivector(self.space, {m: c for m, c in self.terms.items() if degree_of(m) == k})

    # -- arithmetic ----------------------------------------------------------
    def _check(self, other: "Multivector") -> None:
        if self.space != other.space:
            raise StructureError(f"{self.space!r} vs {other.space!r}")

    def __add__(self, other):
        if not isinstance(other, Multivector):
            return NotImplemented
        self._check(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out[m] + c if m in out else c
        return Multivector(self.space, out)

    def __neg__(self) -> "Multivector":
        return Multivector(self.space, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, Multivector):
            return NotImplemented
        return self + (-other)

    def scale(self, c) -> "Multivector":
        c = self.space.ring.coerce(c)
        return Multivector(self.space, {m: c * v for m, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, Multivector):
            return wedge(self, other)
        try:
            return self.scale(other)
        except TypeError:
            return NotImplemented

    def __rmul__(self, other):
        try:
            return self.scale(other)
        except TypeError:
            return NotImplemented

    def __eq__(self, other) -> bool:
        if isinstance(other, Multivector):
            return self.space == other.space and self.terms == other.terms
        if isinstance(other, (int, Fraction)) and other == 0:
            return not self.terms
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.space, frozenset(self.terms.items())))

    # -- text ----------------------------------------------------------------
    def sorted_masks(self) -> list[int]:
        return sorted(self.terms, key=monomial_sort_key)

    def to_text(self) -> str:
        if not self.terms:
            return "0"
        ring = self.space.ring
        pieces = []
        for m in self.sorted_masks():
            c = self.terms[m]
            if isinstance(ring, Rationals):
                coeff = format_fraction(c)
            else:
                coeff = f"({ring.format(c)})"
            pieces.append(coeff if m == 0 else f"{coeff} * {self.space.monomial_name(m)}")
        return " + ".join(pieces)

    __str__ = to_text

    def __repr__(self) -> str:
        return f"Multivector({self.to_text()!r})"


def wedge(a: Multivector, b: Multivector) -> Multivector:
    """Graded-commutative product with Koszul signs."""
    a._check(b)
    out: dict[int, object] = {}
    for s, ca in a.terms.items():
        for t, cb in b.terms.items():
            if s & t:
                continue
            m = s | t
            v = ca * cb if merge_sign(s, t) > 0 else -(ca * cb)
            out[m] = out[m] + v if m in out else v
    return Multivector(a.space, out)


def super_commutativity_check(a: Multivector, b: Multivector) -> bool:
    p = a.require_degree()
    q = b.require_degree()
    lhs = a * b
    rhs = b * a
    return lhs == (rhs if (p * q) % 2 == 0 else -rhs)


def contract_degree(v: Multivector, k: int) -> Multivector:
    """Projection onto the degree-k graded piece."""
    return v.degree_part(k)


def _split_top(text: str, sep: str) -> list[str]:
    out, depth, start, i = [], 0, 0, 0
    while i < len(text):
        ch = text[i]
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif depth == 0 and text.startswith(sep, i):
            out.append(text[start:i])
            i += len(sep)
            start = i
            continue
        i += 1
    out.append(text[start:])
    return out


def parse_multivector(text: str, space: ExteriorSpace) -> Multivector:
    """Inverse of :meth:`Multivector.to_text`."""
    text = text.strip()
    if text == "0":
        return space.zero()
    result = space.zero()
    for term in _split_top(text, " + "):
        parts = _split_top(term, " * ")
        if len(parts) == 1:
            coeff_text, mono = parts[0], "1"
        elif len(parts) == 2:
            coeff_text, mono = parts
        else:
            raise ValueError(f"malformed term {term!r}")
        coeff_text = coeff_text.strip()
        if coeff_text.startswith("(") and coeff_text.endswith(")"):
            coeff_text = coeff_text[1:-1]
        coeff = space.ring.parse(coeff_text)
        if mono.strip() == "1":
            idx: list[int] = []
        else:
            try:
                idx = [space.names.index(n.strip()) for n in mono.split("^")]
            except ValueError:
                raise ValueError(f"unknown generator in {mono!r}") from None
        result = result + space.monomial(idx, coeff)
    return result
