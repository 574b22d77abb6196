"""Scalar rings: exact rationals and sparse multivariate polynomials over QQ.

Polynomials are immutable dictionaries from dense exponent tuples to nonzero
``Fraction`` coefficients.  Text input goes through :func:`parse_poly`, which
accepts integers, ``p/q`` rationals, the variables of the ring, ``+ - *`` and
``^`` (or ``**``) with non-negative integer exponents.
"""

from __future__ import annotations

import ast
from fractions import Fraction
from itertools import product
from typing import Iterable, Iterator, Union

Number = Union[int, Fraction]


class PolyParseError(ValueError):
    """Malformed polynomial text; ``column`` is 0-based into the input."""

    def __init__(self, message: str, text: str, column: int | None = None):
        where = f" at column {column}" if column is not None else ""
        super().__init__(f"{message}{where}: {text!r}")
        self.text = text
        self.column = column


def format_fraction(c: Fraction) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


def parse_fraction(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not a rational number: {text!r}") from exc


class Poly:
    """Polynomial in ``nvars`` variables with rational coefficients."""

    __slots__ = ("nvars", "terms", "_hash")

    def __init__(self, nvars: int, terms: dict[tuple[int, ...], Fraction] | None = None):
        self.nvars = nvars
        # callers hand over ownership; zero coefficients are dropped here
        self.terms = {e: c for e, c in (terms or {}).items() if c != 0}
        self._hash = None

    # -- construction ------------------------------------------------------
    @classmethod
    def constant(cls, nvars: int, c: Number) -> "Poly":
        return cls(nvars, {(0,) * nvars: Fraction(c)})

    @classmethod
    def monomial(cls, exponent: Iterable[int], c: Number = 1) -> "Poly":
        exponent = tuple(exponent)
        return cls(len(exponent), {exponent: Fraction(c)})

    @classmethod
    def variable(cls, nvars: int, i: int) -> "Poly":
        e = [0] * nvars
        e[i] = 1
        return cls(nvars, {tuple(e): Fraction(1)})

    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            if other.nvars != self.nvars:
                raise ValueError(f"polynomial rings differ: {self.nvars} vs {other.nvars} variables")
            return other
        if isinstance(other, (int, Fraction)):
            return Poly.constant(self.nvars, other)
        return NotImplemented

    # -- queries -----------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not any(e) for e in self.terms)

    def constant_term(self) -> Fraction:
        return self.terms.get((0,) * self.nvars, Fraction(0))

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((sum(e) for e in self.terms), default=-1)

    def diff(self, i: int) -> "Poly":
        out: dict[tuple[int, ...], Fraction] = {}
        for e, c in self.terms.items():
            k = e[i]
            if k:
                e2 = e[:i] + (k - 1,) + e[i + 1:]
                out[e2] = c * k
        return Poly(self.nvars, out)

    def __iter__(self) -> Iterator[tuple[tuple[int, ...], Fraction]]:
        return iter(self.terms.items())

    # -- arithmetic --------------------------------------------------------
    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) + c
        return Poly(self.nvars, out)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out: dict[tuple[int, ...], Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return Poly(self.nvars, out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Poly":
        if not isinstance(k, int) or k < 0:
            raise ValueError("polynomial exponent must be a non-negative integer")
        result = Poly.constant(self.nvars, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other) -> bool:
        if isinstance(other, Poly):
            return self.nvars == other.nvars and self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            if other == 0:
                return not self.terms
            return self.terms == {(0,) * self.nvars: Fraction(other)}
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.nvars, frozenset(self.terms.items())))
        return self._hash

    def __bool__(self) -> bool:
        return bool(self.terms)

    # -- text ----------------------------------------------------------------
    def sorted_terms(self) -> list[tuple[tuple[int, ...], Fraction]]:
        # graded lex, highest first: x^2 + x*y + y^2 + x + y + 1
        return sorted(self.terms.items(), key=lambda t: (-sum(t[0]), tuple(-k for k in t[0])))

    def format(self, names: tuple[str, ...]) -> str:
        if not self.terms:
            return "0"
        pieces = []
        for e, c in self.sorted_terms():
            factors = []
            for name, k in zip(names, e):
                if k == 1:
                    factors.append(name)
                elif k > 1:
                    factors.append(f"{name}^{k}")
            mono = "*".join(factors)
            if not mono:
                pieces.append(format_fraction(c))
            elif c == 1:
                pieces.append(mono)
            elif c == -1:
                pieces.append("-" + mono)
            else:
                pieces.append(f"{format_fraction(c)}*{mono}")
        return " + ".join(pieces)

    def __repr__(self) -> str:
        return f"Poly({self.format(default_variable_names(self.nvars))})"


def default_variable_names(n: int) -> tuple[str, ...]:
    if n <= 3:
        return ("x", "y", "z")[:n]
    return tuple(f"x{i + 1}" for i in range(n))


class Rationals:
    """The field QQ; elements are ``fractions.Fraction``."""

    nvars = 0
    names: tuple[str, ...] = ()

    def __repr__(self) -> str:
        return "QQ"

    def __eq__(self, other) -> bool:
        return isinstance(other, Rationals)

    def __hash__(self) -> int:
        return hash("QQ")

    @property
    def zero(self) -> Fraction:
        return Fraction(0)

    @property
    def one(self) -> Fraction:
        return Fraction(1)

    def coerce(self, c) -> Fraction:
        if isinstance(c, Fraction):
            return c
        if isinstance(c, int):
            return Fraction(c)
        if isinstance(c, str):
            return parse_fraction(c)
        raise TypeError(f"cannot coerce {c!r} into QQ")

    def split(self, c: Fraction) -> list[tuple[tuple[int, ...], Fraction]]:
        return [((), c)] if c else []

    def lift(self, exponent: tuple[int, ...], c: Fraction) -> Fraction:
        return c

    def derivative(self, c, i: int) -> Fraction:
        return Fraction(0)

    def format(self, c: Fraction) -> str:
        return format_fraction(c)

    def parse(self, text: str) -> Fraction:
        return parse_fraction(text)


class PolynomialRing:
    """QQ[x_1..x_n] with dense exponent vectors."""

    def __init__(self, nvars: int, names: tuple[str, ...] | None = None):
        if nvars < 1:
            raise ValueError("a polynomial ring needs at least one variable")
        self.nvars = nvars
        self.names = tuple(names) if names else default_variable_names(nvars)
        if len(self.names) != nvars:
            raise ValueError("one name per variable")

    def __repr__(self) -> str:
        return f"QQ[{','.join(self.names)}]"

    def __eq__(self, other) -> bool:
        return isinstance(other, PolynomialRing) and (self.nvars, self.names) == (other.nvars, other.names)

    def __hash__(self) -> int:
        return hash((self.nvars, self.names))

    @property
    def zero(self) -> Poly:
        return Poly(self.nvars)

    @property
    def one(self) -> Poly:
        return Poly.constant(self.nvars, 1)

    def var(self, i: int) -> Poly:
        return Poly.variable(self.nvars, i)

    def coerce(self, c) -> Poly:
        if isinstance(c, Poly):
            if c.nvars != self.nvars:
                raise ValueError(f"polynomial in {c.nvars} variables used in {self!r}")
            return c
        if isinstance(c, (int, Fraction)):
            return Poly.constant(self.nvars, c)
        if isinstance(c, str):
            return parse_poly(c, self)
        raise TypeError(f"cannot coerce {c!r} into {self!r}")

    def split(self, c: Poly) -> list[tuple[tuple[int, ...], Fraction]]:
        return list(c.terms.items())

    def lift(self, exponent: tuple[int, ...], c: Fraction) -> Poly:
        return Poly(self.nvars, {exponent: c})

    def derivative(self, c: Poly, i: int) -> Poly:
        return c.diff(i)

    def monomials_up_to(self, degree: int) -> list[tuple[int, ...]]:
        """Exponent vectors of total degree <= ``degree``, graded then lex ascending."""
        exps = [e for e in product(range(degree + 1), repeat=self.nvars) if sum(e) <= degree]
        return sorted(exps, key=lambda e: (sum(e), tuple(-k for k in e)))

    def format(self, c: Poly) -> str:
        return c.format(self.names)

    def parse(self, text: str) -> Poly:
        return parse_poly(text, self)


QQ = Rationals()


_ALLOWED_BINOPS = (ast.Add, ast.Sub, ast.Mult, ast.Pow, ast.Div)


def parse_poly(text: str, ring: PolynomialRing) -> Poly:
    """Parse ``text`` such as ``"(x^2+y^2)"`` or ``"3/2*x1*x2 - 1"`` into ``ring``."""
    names = {name: i for i, name in enumerate(ring.names)}
    for i in range(ring.nvars):
        names.setdefault(f"x{i + 1}", i)
    source = text.replace("^", "**")
    try:
        tree = ast.parse(source.strip(), mode="eval")
    except SyntaxError as exc:
        raise PolyParseError("syntax error", text, (exc.offset or 1) - 1) from None

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, int) and not isinstance(node.value, bool):
            return Poly.constant(ring.nvars, node.value)
        if isinstance(node, ast.Name):
            if node.id not in names:
                raise PolyParseError(f"unknown variable {node.id!r}", text, node.col_offset)
            return ring.var(names[node.id])
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and isinstance(node.op, _ALLOWED_BINOPS):
            if isinstance(node.op, ast.Pow):
                base = ev(node.left)
                k = ev(node.right)
                if not k.is_constant() or k.constant_term().denominator != 1 or k.constant_term() < 0:
                    raise PolyParseError("exponent must be a non-negative integer", text, node.right.col_offset)
                return base ** int(k.constant_term())
            left, right = ev(node.left), ev(node.right)
            if isinstance(node.op, ast.Div):
                if not right.is_constant() or right.is_zero():
                    raise PolyParseError("division only by nonzero constants", text, node.right.col_offset)
                return left * (1 / right.constant_term())
            if isinstance(node.op, ast.Add):
                return left + right
            if isinstance(node.op, ast.Sub):
                return left - right
            return left * right
        raise PolyParseError("unsupported syntax", text, getattr(node, "col_offset", None))

    return ev(tree)
