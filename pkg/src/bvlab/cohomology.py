"""Exact linear algebra over QQ and cohomology of finite cochain complexes.

Matrices are lists of rows of ``Fraction``; a map from degree k to k+1 has
``dims[k+1]`` rows and ``dims[k]`` columns.  Elimination is Gauss-Jordan on
sparse rows with a fixed pivot rule (first nonzero column, then the row of
smallest index), so every echelon basis below is deterministic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .exterior import Multivector, StructureError
from .operators import GradedBasis, LinearOperator
from .poly import format_fraction

Matrix = list[list[Fraction]]
Row = dict[int, Fraction]


# -- sparse elimination ------------------------------------------------------------

def _sparse(rows: Sequence[Sequence[object]]) -> list[Row]:
    return [{j: Fraction(x) for j, x in enumerate(r) if x} for r in rows]


def _eliminate(row: Row, pivot_col: int, pivot_row: Row) -> None:
    c = row.get(pivot_col)
    if not c:
        return
    for j, v in pivot_row.items():
        w = row.get(j, 0) - c * v
        if w:
            row[j] = w
        else:
            row.pop(j, None)


def rref_sparse(rows: list[Row], ncols: int) -> tuple[list[Row], list[int]]:
    """Reduced row echelon form; returns the nonzero rows and their pivot columns."""
    work = [dict(r) for r in rows if r]
    out: list[Row] = []
    pivots: list[int] = []
    for col in range(ncols):
        idx = next((i for i, r in enumerate(work) if col in r), None)
        if idx is None:
            continue
        prow = work.pop(idx)
        inv = 1 / prow[col]
        prow = {j: v * inv for j, v in prow.items()}
        for r in work:
            _eliminate(r, col, prow)
        for r in out:
            _eliminate(r, col, prow)
        work = [r for r in work if r]
        out.append(prow)
        pivots.append(col)
    return out, pivots


def rref(matrix: Sequence[Sequence[object]], ncols: int | None = None) -> tuple[Matrix, list[int]]:
    ncols = ncols if ncols is not None else (len(matrix[0]) if matrix else 0)
    rows, pivots = rref_sparse(_sparse(matrix), ncols)
    return [_dense(r, ncols) for r in rows], pivots


def _dense(row: Row, n: int) -> list[Fraction]:
    v = [Fraction(0)] * n
    for j, c in row.items():
        v[j] = c
    return v


def rank(matrix: Sequence[Sequence[object]], ncols: int | None = None) -> int:
    ncols = ncols if ncols is not None else (len(matrix[0]) if matrix else 0)
    return len(rref_sparse(_sparse(matrix), ncols)[1])


def transpose(matrix: Sequence[Sequence[object]], nrows_out: int | None = None) -> Matrix:
    if not matrix:
        return [[] for _ in range(nrows_out or 0)]
    return [[Fraction(matrix[i][j]) for i in range(len(matrix))] for j in range(len(matrix[0]))]


def matmul(a: Sequence[Sequence[Fraction]], b: Sequence[Sequence[Fraction]], inner: int | None = None,
           ncols: int | None = None) -> Matrix:
    inner = inner if inner is not None else (len(b) if b else 0)
    ncols = ncols if ncols is not None else (len(b[0]) if b else 0)
    out = [[Fraction(0)] * ncols for _ in a]
    for i, row in enumerate(a):
        for t, x in enumerate(row):
            if x:
                brow = b[t]
                for j, y in enumerate(brow):
                    if y:
                        out[i][j] += x * y
    return out


def matvec(a: Sequence[Sequence[Fraction]], v: Sequence[Fraction]) -> list[Fraction]:
    return [sum((x * y for x, y in zip(row, v) if x and y), Fraction(0)) for row in a]


def kernel_sparse(rows: list[Row], ncols: int) -> list[tuple[int, Row]]:
    """Echelon kernel basis: one vector per free column f, with entry 1 at f."""
    red, pivots = rref_sparse(rows, ncols)
    pset = set(pivots)
    basis = []
    for f in range(ncols):
        if f in pset:
            continue
        v: Row = {f: Fraction(1)}
        for p, r in zip(pivots, red):
            c = r.get(f)
            if c:
                v[p] = -c
        basis.append((f, v))
    return basis


def kernel(matrix: Sequence[Sequence[object]], ncols: int) -> Matrix:
    return [_dense(v, ncols) for _, v in kernel_sparse(_sparse(matrix), ncols)]


def solve(matrix: Sequence[Sequence[object]], b: Sequence[object]) -> list[Fraction] | None:
    """One solution of A x = b (free variables zero), or None if inconsistent."""
    ncols = len(matrix[0]) if matrix else 0
    aug = [list(r) + [b[i]] for i, r in enumerate(matrix)]
    red, pivots = rref_sparse(_sparse(aug), ncols + 1)
    if pivots and pivots[-1] == ncols:
        return None
    x = [Fraction(0)] * ncols
    for p, r in zip(pivots, red):
        x[p] = r.get(ncols, Fraction(0))
    return x


def infeasibility_certificate(matrix: Sequence[Sequence[object]], b: Sequence[object]) -> list[Fraction] | None:
    """y with y^T A = 0 and y^T b != 0, or None when A x = b is solvable."""
    m = len(matrix)
    ncols = len(matrix[0]) if matrix else 0
    for _, y in kernel_sparse(_sparse(transpose(matrix)) if ncols else [], m):
        if sum((c * Fraction(b[i]) for i, c in y.items()), Fraction(0)):
            return _dense(y, m)
    return None


def _reduce(v: Row, echelon: list[tuple[int, Row]]) -> Row:
    v = dict(v)
    for p, r in echelon:
        _eliminate(v, p, r)
    return v


def _insert(echelon: list[tuple[int, Row]], v: Row) -> None:
    """Add a vector already reduced against ``echelon``, keeping it fully reduced."""
    p = min(v)
    inv = 1 / v[p]
    v = {j: c * inv for j, c in v.items()}
    for _, r in echelon:
        _eliminate(r, p, v)
    echelon.append((p, v))


# -- complexes ---------------------------------------------------------------------

class CohomologyError(StructureError):
    pass


class NotDiagonalizable(ValueError):
    """The operator fails to be diagonalizable over QQ in some degree."""

    def __init__(self, degree: int, detail: str):
        super().__init__(f"degree {degree}: {detail}; invariant-subcomplex reduction needs a "
                         f"diagonalizable operator with rational eigenvalues")
        self.degree = degree


def _label_render(labels: list[str], vec: Sequence[Fraction]) -> str:
    pieces = [f"{format_fraction(c)} * {labels[i]}" for i, c in enumerate(vec) if c]
    return " + ".join(pieces) if pieces else "0"


class ChainComplex:
    """Cochain complex over QQ in degrees ``start .. start + len(dims) - 1``.

    ``differentials[i]`` maps degree ``start + i`` to ``start + i + 1``.
    ``elements`` optionally gives a Multivector for each basis vector, used
    to print representatives.
    """

    def __init__(self, dims: Sequence[int], differentials: Sequence[Matrix], labels: Sequence[Sequence[str]] | None = None,
                 start: int = 0, elements: Sequence[Sequence[Multivector]] | None = None, name: str = "complex",
                 check: bool = True):
        self.dims = list(dims)
        self.start = start
        self.name = name
        if len(differentials) != max(len(self.dims) - 1, 0):
            raise CohomologyError("need one differential between consecutive degrees")
        self.differentials = [[[Fraction(x) for x in row] for row in d] for d in differentials]
        for i, d in enumerate(self.differentials):
            if len(d) != self.dims[i + 1] or any(len(row) != self.dims[i] for row in d):
                raise CohomologyError(f"differential out of degree {start + i} has the wrong shape")
        self.elements = [list(e) for e in elements] if elements is not None else None
        if labels is None:
            if self.elements is not None:
                labels = [[v.to_text() for v in e] for e in self.elements]
            else:
                labels = [[f"c{start + i}_{j}" for j in range(n)] for i, n in enumerate(self.dims)]
        self.labels = [list(l) for l in labels]
        if check:
            self.check_square_zero()

    @property
    def degrees(self) -> range:
        return range(self.start, self.start + len(self.dims))

    def dim(self, k: int) -> int:
        i = k - self.start
        return self.dims[i] if 0 <= i < len(self.dims) else 0

    def d(self, k: int) -> Matrix:
        """Matrix of the differential out of degree k (possibly empty)."""
        i = k - self.start
        if 0 <= i < len(self.differentials):
            return self.differentials[i]
        return [[Fraction(0)] * self.dim(k) for _ in range(self.dim(k + 1))]

    def check_square_zero(self) -> None:
        for i in range(len(self.differentials) - 1):
            a, b = self.differentials[i + 1], self.differentials[i]
            prod = matmul(a, b, self.dims[i + 1], self.dims[i])
            for r, row in enumerate(prod):
                for c, x in enumerate(row):
                    if x:
                        k = self.start + i
                        raise CohomologyError(
                            f"d^2 != 0: entry ({r},{c}) of d_{k + 1} d_{k} is {format_fraction(x)} "
                            f"(input {self.labels[i][c]}, output {self.labels[i + 2][r]})")

    def render(self, k: int, vec: Sequence[Fraction]) -> str:
        i = k - self.start
        if self.elements is not None:
            els = self.elements[i]
            out = None
            for c, v in zip(vec, els):
                if c:
                    t = v.scale(c)
                    out = t if out is None else out + t
            return out.to_text() if out is not None else "0"
        return _label_render(self.labels[i], vec)

    @classmethod
    def from_operator(cls, op: LinearOperator, basis: GradedBasis, degrees: Sequence[int] | None = None,
                      name: str | None = None) -> "ChainComplex":
        if op.degree != 1:
            raise CohomologyError("a cochain differential must raise degree by one")
        degrees = list(degrees if degrees is not None else range(op.space.dim + 1))
        keys = [basis.keys(k) for k in degrees]
        mats = [op.matrix(keys[i], keys[i + 1]) for i in range(len(degrees) - 1)]
        elements = [[basis.element(key) for key in ks] for ks in keys]
        return cls([len(ks) for ks in keys], mats, start=degrees[0], elements=elements, name=name or op.name)


# -- cohomology --------------------------------------------------------------------

@dataclass
class DegreeCohomology:
    degree: int
    dim: int
    rank_in: int  # rank of the differential into this degree
    rank_out: int
    representatives: list[list[Fraction]]
    texts: list[str]

    @property
    def kernel_dim(self) -> int:
        return self.dim - self.rank_out

    @property
    def image_dim(self) -> int:
        return self.rank_in

    @property
    def betti(self) -> int:
        return self.kernel_dim - self.rank_in

    def to_dict(self) -> dict:
        return {"degree": self.degree, "betti": self.betti, "representatives": self.texts}


@dataclass
class CohomologyReport:
    name: str
    degrees: list[DegreeCohomology] = field(default_factory=list)

    def betti(self) -> list[int]:
        return [d.betti for d in self.degrees]

    def __getitem__(self, k: int) -> DegreeCohomology:
        for d in self.degrees:
            if d.degree == k:
                return d
        raise KeyError(k)

    def to_dict(self) -> list[dict]:
        return [d.to_dict() for d in self.degrees]

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def table(self) -> str:
        rows = [("degree", "dim", "ker", "im", "betti", "representatives")]
        for d in self.degrees:
            rows.append((f"H^{d.degree}", str(d.dim), str(d.kernel_dim), str(d.image_dim), str(d.betti),
                         "; ".join(d.texts) if d.texts else "-"))
        widths = [max(len(r[i]) for r in rows) for i in range(5)]
        lines = []
        for r in rows:
            lines.append("  ".join(r[i].ljust(widths[i]) for i in range(5)) + "  " + r[5])
        return "\n".join(line.rstrip() for line in lines)


def cohomology(c: ChainComplex, degrees: Sequence[int] | None = None) -> CohomologyReport:
    report = CohomologyReport(c.name)
    for k in (degrees if degrees is not None else c.degrees):
        n = c.dim(k)
        d_out = _sparse(c.d(k))
        d_in = c.d(k - 1)
        image_rows, _ = rref_sparse(_sparse(transpose(d_in)) if d_in and c.dim(k - 1) else [], n)
        image = [(min(r), r) for r in image_rows]
        ker = kernel_sparse(d_out, n)
        reps: list[Row] = []
        quotient: list[tuple[int, Row]] = [(p, dict(r)) for p, r in image]
        for _, v in ker:
            r = _reduce(v, image)
            test = _reduce(r, quotient)
            if test:
                reps.append(r)
                _insert(quotient, test)
        rank_out = n - len(ker)
        item = DegreeCohomology(k, n, len(image), rank_out, [_dense(r, n) for r in reps], [])
        if item.betti != len(reps):
            raise CohomologyError(f"degree {k}: {len(reps)} representatives for betti {item.betti}")
        stacked = [_dense(r, n) for _, r in image] + item.representatives
        if rank(stacked, n) != len(stacked):
            raise CohomologyError(f"degree {k}: representatives are dependent modulo the image")
        item.texts = [c.render(k, v) for v in item.representatives]
        report.degrees.append(item)
    return report


# -- diagonalization and invariant subcomplexes ------------------------------------------

def characteristic_polynomial(matrix: Matrix) -> list[Fraction]:
    """Coefficients of det(t I - M), highest degree first."""
    from sympy import QQ as SQQ
    from sympy.polys.matrices import DomainMatrix

    n = len(matrix)
    if n == 0:
        return [Fraction(1)]
    dm = DomainMatrix([[SQQ(x.numerator, x.denominator) for x in row] for row in matrix], (n, n), SQQ)
    return [Fraction(int(c.numerator), int(c.denominator)) for c in dm.charpoly()]


def rational_eigenvalues(matrix: Matrix, degree: int = 0) -> list[Fraction]:
    """Distinct eigenvalues, all of which must be rational."""
    from sympy import Poly, Rational, symbols

    t = symbols("t")
    coeffs = characteristic_polynomial(matrix)
    p = Poly([Rational(c.numerator, c.denominator) for c in coeffs], t)
    roots: list[Fraction] = []
    for factor, _ in p.factor_list()[1]:
        if factor.degree() != 1:
            raise NotDiagonalizable(degree, f"irreducible factor {factor.as_expr()} of the characteristic polynomial")
        a, b = factor.all_coeffs()
        root = -Fraction(int(b.p), int(b.q)) / Fraction(int(a.p), int(a.q))
        roots.append(root)
    return sorted(set(roots))


def _shift(matrix: Matrix, lam: Fraction) -> Matrix:
    return [[x - lam if i == j else x for j, x in enumerate(row)] for i, row in enumerate(matrix)]


@dataclass
class Eigenspace:
    value: Fraction
    basis: list[tuple[int, Row]]  # echelon, with the coordinate column of each vector


def eigenspaces(matrix: Matrix, degree: int = 0) -> list[Eigenspace]:
    """Eigenspace decomposition; raises NotDiagonalizable when dimensions do not add up."""
    n = len(matrix)
    spaces = [Eigenspace(lam, kernel_sparse(_sparse(_shift(matrix, lam)), n))
              for lam in rational_eigenvalues(matrix, degree)]
    total = sum(len(e.basis) for e in spaces)
    if total != n:
        raise NotDiagonalizable(degree, f"eigenspaces span {total} of {n} dimensions")
    return spaces


def _restrict(c: ChainComplex, bases: list[list[tuple[int, Row]]], name: str) -> ChainComplex:
    """Subcomplex on echelon bases (one per degree of ``c``)."""
    mats = []
    for i in range(len(c.dims) - 1):
        k = c.start + i
        d = c.d(k)
        src, dst = bases[i], bases[i + 1]
        cols = []
        for _, v in src:
            image = {r: sum((row[j] * x for j, x in v.items()), Fraction(0)) for r, row in enumerate(d)}
            image = {r: x for r, x in image.items() if x}
            coords = [image.get(col, Fraction(0)) for col, _ in dst]
            back: Row = {}
            for a, (_, w) in zip(coords, dst):
                if a:
                    for j, x in w.items():
                        back[j] = back.get(j, 0) + a * x
            if {j: x for j, x in back.items() if x} != image:
                raise CohomologyError(f"degree {k}: the differential leaves the subspace")
            cols.append(coords)
        mats.append([[cols[j][r] for j in range(len(src))] for r in range(len(dst))])
    dims = [len(b) for b in bases]
    elements = None
    if c.elements is not None:
        elements = []
        for i, b in enumerate(bases):
            row = []
            for _, v in b:
                acc = None
                for j, x in v.items():
                    t = c.elements[i][j].scale(x)
                    acc = t if acc is None else acc + t
                row.append(acc)
            elements.append(row)
    labels = [[c.render(c.start + i, _dense(v, c.dims[i])) for _, v in b] for i, b in enumerate(bases)]
    return ChainComplex(dims, mats, labels, c.start, elements, name)


@dataclass
class QuasiIsoCertificate:
    """Eigenvalue multiplicities per degree and acyclicity of the nonzero-eigenvalue summands."""

    multiplicities: dict[int, dict[Fraction, int]]
    summand_betti: dict[Fraction, list[int]]

    @property
    def acyclic(self) -> bool:
        return all(not any(b) for lam, b in self.summand_betti.items() if lam != 0)

    def to_dict(self) -> dict:
        return {
            "multiplicities": {str(k): {format_fraction(l): m for l, m in sorted(v.items())}
                               for k, v in sorted(self.multiplicities.items())},
            "nonzero_summand_betti": {format_fraction(l): b for l, b in sorted(self.summand_betti.items()) if l != 0},
            "acyclic": self.acyclic,
        }


def _operator_matrices(c: ChainComplex, D) -> list[Matrix]:
    if isinstance(D, LinearOperator):
        raise TypeError("pass per-degree matrices or use operator_matrices()")
    return [[[Fraction(x) for x in row] for row in m] for m in D]


def operator_matrices(op: LinearOperator, basis: GradedBasis, degrees: Sequence[int]) -> list[Matrix]:
    """Per-degree square matrices of a degree-0 operator."""
    if op.degree != 0:
        raise ValueError("expected a degree-0 operator")
    return [op.matrix(basis.keys(k), basis.keys(k)) for k in degrees]


def _check_commutes(c: ChainComplex, mats: list[Matrix]) -> None:
    for i in range(len(c.dims) - 1):
        d = c.differentials[i]
        lhs = matmul(d, mats[i], c.dims[i], c.dims[i])
        rhs = matmul(mats[i + 1], d, c.dims[i + 1], c.dims[i])
        if lhs != rhs:
            raise CohomologyError(f"the operator does not commute with the differential out of degree {c.start + i}")


def invariant_subcomplex(c: ChainComplex, D: Sequence[Matrix]) -> tuple[ChainComplex, QuasiIsoCertificate]:
    """Kernel of D per degree, with the acyclicity certificate for the other eigenvalues."""
    mats = _operator_matrices(c, D)
    if len(mats) != len(c.dims):
        raise CohomologyError("one operator matrix per degree")
    _check_commutes(c, mats)
    per_degree = [eigenspaces(m, c.start + i) for i, m in enumerate(mats)]
    values = sorted({e.value for es in per_degree for e in es} | {Fraction(0)})
    multiplicities = {c.start + i: {e.value: len(e.basis) for e in es} for i, es in enumerate(per_degree)}
    summands: dict[Fraction, ChainComplex] = {}
    for lam in values:
        bases = [next((e.basis for e in es if e.value == lam), []) for es in per_degree]
        summands[lam] = _restrict(c, bases, f"{c.name} [eigenvalue {format_fraction(lam)}]")
    betti = {lam: cohomology(sub).betti() for lam, sub in summands.items()}
    sub = summands[Fraction(0)]
    sub.name = f"{c.name} [invariant]"
    return sub, QuasiIsoCertificate(multiplicities, betti)


def compare_full_vs_invariant(c: ChainComplex, D: Sequence[Matrix], degrees: Sequence[int]) -> bool:
    """Equal Betti numbers, and invariant representatives independent modulo the full image."""
    sub, cert = invariant_subcomplex(c, D)
    full = cohomology(c, degrees)
    inv = cohomology(sub, degrees)
    if full.betti() != inv.betti() or not cert.acyclic:
        return False
    for k in degrees:
        i = k - c.start
        n = c.dim(k)
        embedded = []
        for rep in inv[k].representatives:
            v = [Fraction(0)] * n
            for coord, (_, w) in zip(rep, _invariant_bases(c, D)[i]):
                if coord:
                    for j, x in w.items():
                        v[j] += coord * x
            if any(matvec(c.d(k), v)):
                return False
            embedded.append(v)
        image = rref(transpose(c.d(k - 1)), n)[0] if c.dim(k - 1) else []
        if rank(image + embedded, n) != len(image) + len(embedded):
            return False
    return True


def _invariant_bases(c: ChainComplex, D: Sequence[Matrix]) -> list[list[tuple[int, Row]]]:
    mats = _operator_matrices(c, D)
    return [kernel_sparse(_sparse(m), len(m)) for m in mats]
