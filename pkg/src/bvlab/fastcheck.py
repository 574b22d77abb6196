"""Compiled exhaustive checks for exterior algebras over QQ.

Every identity checked here is linear in the operator and the bracket, so both
are scaled to integer tables (CSR arrays indexed by basis mask) and the checks
run over all monomial pairs or triples with machine integers.  The tables are
built from the generic implementations in :mod:`bvlab.gerstenhaber`, except the
Schouten table, which is recomputed here from the structure constants as an
independent second route; the test suite compares the two.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm

import numpy as np
from numba import njit

from .exterior import Multivector
from .gerstenhaber import CheckReport, GerstenhaberContext, Witness
from .operators import LinearOperator

INT_LIMIT = 2**40  # scaled entries stay far from int64 overflow in every product formed below


@dataclass
class IntTable:
    """CSR table: row m lists (masks[k], coeffs[k]) for k in indptr[m]..indptr[m+1]; values are scale * true value."""

    indptr: np.ndarray
    masks: np.ndarray
    coeffs: np.ndarray
    scale: int


def _pack(rows: list[dict[int, Fraction]]) -> IntTable:
    scale = 1
    for r in rows:
        for c in r.values():
            scale = lcm(scale, c.denominator)
    indptr = np.zeros(len(rows) + 1, dtype=np.int64)
    masks, coeffs = [], []
    for i, r in enumerate(rows):
        for m in sorted(r):
            v = r[m] * scale
            if abs(v) > INT_LIMIT:
                raise OverflowError("coefficients too large for the integer fast path")
            masks.append(m)
            coeffs.append(int(v))
        indptr[i + 1] = len(masks)
    return IntTable(indptr, np.array(masks, dtype=np.int64), np.array(coeffs, dtype=np.int64), scale)


def operator_table(op: LinearOperator) -> IntTable:
    """All 2^dim basis images of an operator on an exterior algebra over QQ."""
    if op.space.ring.nvars:
        raise ValueError("the fast path needs rational coefficients")
    rows = []
    for m in range(1 << op.space.dim):
        rows.append({k[1]: c for k, c in op.image(((), m)).items()})
    return _pack(rows)


def structure_table(ctx: GerstenhaberContext) -> IntTable:
    """Generator brackets [e_i, e_j] as rows i * dim + j."""
    n = ctx.space.dim
    rows = []
    for i in range(n):
        for j in range(n):
            v = ctx.generator_bracket(i, j)
            rows.append({m: Fraction(c) for m, c in v.terms.items()})
    return _pack(rows)


# -- kernels ----------------------------------------------------------------------

@njit(cache=True)
def _popcount(x):
    c = 0
    while x:
        x &= x - 1
        c += 1
    return c


@njit(cache=True)
def _msign(s, t):
    """Sign of e_S ^ e_T for disjoint S, T."""
    n = 0
    while t:
        low = t & -t
        j = 0
        while (low >> j) != 1:
            j += 1
        n += _popcount(s >> (j + 1))
        t ^= low
    return -1 if n & 1 else 1


@njit(cache=True)
def _bit_list(mask, out):
    k = 0
    i = 0
    while mask:
        if mask & 1:
            out[k] = i
            k += 1
        mask >>= 1
        i += 1
    return k


@njit(cache=True)
def _bracket_rows(dim, sc_ptr, sc_masks, sc_coeffs):
    """Schouten bracket of every monomial pair from the generator brackets (zero anchor).

    [e_S, e_T] = sum_k (-1)^((p-1)k) e_T<k ^ ([e_S, t_k]) ^ e_T>k with
    [e_S, t] = sum_l e_S<l ^ [s_l, t] ^ e_S>l, positions counted from 0.
    Returns dense rows packed as (pair, mask, coeff) triples.
    """
    size = 1 << dim
    cap = 1 << 16
    pairs = np.empty(cap, dtype=np.int64)
    omask = np.empty(cap, dtype=np.int64)
    ocoef = np.empty(cap, dtype=np.int64)
    n_out = 0
    acc = np.zeros(size, dtype=np.int64)
    touched = np.empty(size, dtype=np.int64)
    seen = np.zeros(size, dtype=np.bool_)
    sbits = np.empty(64, dtype=np.int64)
    tbits = np.empty(64, dtype=np.int64)
    for a in range(size):
        p = _bit_list(a, sbits)
        for b in range(size):
            q = _bit_list(b, tbits)
            nt = 0
            for k in range(q):
                tk = tbits[k]
                tpre = b & ((1 << tk) - 1)
                tpost = b & ~((1 << (tk + 1)) - 1)
                outer = -1 if ((p - 1) * k) % 2 else 1
                for l in range(p):
                    sl = sbits[l]
                    spre = a & ((1 << sl) - 1)
                    spost = a & ~((1 << (sl + 1)) - 1)
                    row = sl * dim + tk
                    for e in range(sc_ptr[row], sc_ptr[row + 1]):
                        m = sc_masks[e]
                        if m & (spre | spost):
                            continue
                        s1 = _msign(spre, m)
                        inner = spre | m
                        s1 *= _msign(inner, spost)
                        inner |= spost
                        if inner & (tpre | tpost):
                            continue
                        s2 = _msign(tpre, inner)
                        full = tpre | inner
                        s2 *= _msign(full, tpost)
                        full |= tpost
                        nt = _put(acc, seen, touched, nt, full, outer * s1 * s2 * sc_coeffs[e])
            for t in range(nt):
                m = touched[t]
                v = acc[m]
                if v != 0:
                    if n_out == cap:
                        cap *= 2
                        pairs = np.concatenate((pairs, np.empty(cap - n_out, dtype=np.int64)))
                        omask = np.concatenate((omask, np.empty(cap - n_out, dtype=np.int64)))
                        ocoef = np.concatenate((ocoef, np.empty(cap - n_out, dtype=np.int64)))
                    pairs[n_out] = a * size + b
                    omask[n_out] = m
                    ocoef[n_out] = v
                    n_out += 1
                acc[m] = 0
                seen[m] = False
    return pairs[:n_out], omask[:n_out], ocoef[:n_out]


def bracket_table(ctx: GerstenhaberContext) -> IntTable:
    """Schouten bracket of all monomial pairs; row a * 2^dim + b."""
    if ctx.space.ring.nvars:
        raise ValueError("the fast path needs rational coefficients")
    sc = structure_table(ctx)
    dim = ctx.space.dim
    pairs, masks, coeffs = _bracket_rows(dim, sc.indptr, sc.masks, sc.coeffs)
    counts = np.bincount(pairs, minlength=1 << (2 * dim))
    indptr = np.zeros(len(counts) + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return IntTable(indptr, masks, coeffs, sc.scale)


@njit(cache=True)
def _put(acc, seen, touched, nt, m, v):
    if not seen[m]:
        seen[m] = True
        touched[nt] = m
        nt += 1
    acc[m] += v
    return nt


@njit(cache=True)
def _flush(acc, seen, touched, nt):
    bad = False
    for t in range(nt):
        m = touched[t]
        if acc[m] != 0:
            bad = True
        acc[m] = 0
        seen[m] = False
    return bad


@njit(cache=True)
def _seven_term(size, masks, ptr, om, oc):
    """First failing triple (a, b, c) of the seven-term identity, or (-1, -1, -1)."""
    acc = np.zeros(size, dtype=np.int64)
    touched = np.empty(size, dtype=np.int64)
    seen = np.zeros(size, dtype=np.bool_)
    d1s, d1e = ptr[0], ptr[1]
    for ia in range(masks.shape[0]):
        a = masks[ia]
        pa = _popcount(a)
        sa = -1 if pa % 2 else 1
        for ib in range(masks.shape[0]):
            b = masks[ib]
            pb = _popcount(b)
            sb = -1 if pb % 2 else 1
            ab_ok = (a & b) == 0
            s_ab = _msign(a, b) if ab_ok else 0
            ab = a | b
            for ic in range(masks.shape[0]):
                c = masks[ic]
                bc_ok = (b & c) == 0
                ac_ok = (a & c) == 0
                if not (ab_ok or bc_ok or ac_ok):
                    continue
                nt = 0
                if ab_ok:
                    if (ab & c) == 0:
                        s = s_ab * _msign(ab, c)
                        abc = ab | c
                        for e in range(ptr[abc], ptr[abc + 1]):  # D(abc)
                            nt = _put(acc, seen, touched, nt, om[e], s * oc[e])
                        for e in range(d1s, d1e):  # -D(1)abc
                            m = om[e]
                            if (m & abc) == 0:
                                nt = _put(acc, seen, touched, nt, m | abc, -(s * _msign(abc, m) * oc[e]))
                    for e in range(ptr[ab], ptr[ab + 1]):  # -D(ab)c
                        m = om[e]
                        if (m & c) == 0:
                            nt = _put(acc, seen, touched, nt, m | c, -(s_ab * _msign(m, c) * oc[e]))
                    for e in range(ptr[c], ptr[c + 1]):  # (-1)^(|a|+|b|) ab D(c)
                        m = om[e]
                        if (ab & m) == 0:
                            nt = _put(acc, seen, touched, nt, ab | m, s_ab * sa * sb * _msign(ab, m) * oc[e])
                if bc_ok:
                    s_bc = _msign(b, c)
                    bc = b | c
                    for e in range(ptr[a], ptr[a + 1]):  # D(a)bc
                        m = om[e]
                        if (m & bc) == 0:
                            nt = _put(acc, seen, touched, nt, m | bc, s_bc * _msign(m, bc) * oc[e])
                    for e in range(ptr[bc], ptr[bc + 1]):  # -(-1)^|a| a D(bc)
                        m = om[e]
                        if (a & m) == 0:
                            nt = _put(acc, seen, touched, nt, a | m, -(sa * s_bc * _msign(a, m) * oc[e]))
                if ac_ok:
                    s_ac = _msign(a, c)
                    ac = a | c
                    sgn = -1 if ((pa + 1) * pb) % 2 else 1
                    for e in range(ptr[ac], ptr[ac + 1]):  # -(-1)^((|a|+1)|b|) b D(ac)
                        m = om[e]
                        if (b & m) == 0:
                            nt = _put(acc, seen, touched, nt, b | m, -(sgn * s_ac * _msign(b, m) * oc[e]))
                for e in range(ptr[b], ptr[b + 1]):  # (-1)^|a| a D(b) c
                    m = om[e]
                    if (a & m) == 0:
                        am = a | m
                        if (am & c) == 0:
                            nt = _put(acc, seen, touched, nt, am | c, sa * _msign(a, m) * _msign(am, c) * oc[e])
                if _flush(acc, seen, touched, nt):
                    return a, b, c
    return -1, -1, -1


@njit(cache=True)
def _generates(size, masks, ptr, om, oc, bptr, bm, bc_, d_scale, b_scale):
    """First pair where b_scale*[a,b]_D differs from d_scale*[a,b], or (-1, -1)."""
    acc = np.zeros(size, dtype=np.int64)
    touched = np.empty(size, dtype=np.int64)
    seen = np.zeros(size, dtype=np.bool_)
    for ia in range(masks.shape[0]):
        a = masks[ia]
        sa = -1 if _popcount(a) % 2 else 1
        for ib in range(masks.shape[0]):
            b = masks[ib]
            nt = 0
            if (a & b) == 0:
                s = sa * _msign(a, b)
                ab = a | b
                for e in range(ptr[ab], ptr[ab + 1]):
                    nt = _put(acc, seen, touched, nt, om[e], b_scale * s * oc[e])
            for e in range(ptr[a], ptr[a + 1]):
                m = om[e]
                if (m & b) == 0:
                    nt = _put(acc, seen, touched, nt, m | b, -(b_scale * sa * _msign(m, b) * oc[e]))
            for e in range(ptr[b], ptr[b + 1]):
                m = om[e]
                if (a & m) == 0:
                    nt = _put(acc, seen, touched, nt, a | m, -(b_scale * _msign(a, m) * oc[e]))
            for e in range(ptr[0], ptr[1]):
                m = om[e]
                if (a & m) == 0 and ((a | m) & b) == 0:
                    nt = _put(acc, seen, touched, nt, a | m | b, b_scale * _msign(a, m) * _msign(a | m, b) * oc[e])
            row = a * size + b
            for e in range(bptr[row], bptr[row + 1]):
                nt = _put(acc, seen, touched, nt, bm[e], -(d_scale * bc_[e]))
            if _flush(acc, seen, touched, nt):
                return a, b
    return -1, -1


@njit(cache=True)
def _graded_jacobi(size, masks, bptr, bm, bc_):
    """First triple violating [a,[b,c]] = [[a,b],c] + (-1)^((|a|-1)(|b|-1)) [b,[a,c]], or (-1,-1,-1)."""
    acc = np.zeros(size, dtype=np.int64)
    touched = np.empty(size, dtype=np.int64)
    seen = np.zeros(size, dtype=np.bool_)
    for ia in range(masks.shape[0]):
        a = masks[ia]
        pa = _popcount(a)
        for ib in range(masks.shape[0]):
            b = masks[ib]
            pb = _popcount(b)
            sgn = -1 if ((pa - 1) * (pb - 1)) % 2 else 1
            rab = a * size + b
            for ic in range(masks.shape[0]):
                c = masks[ic]
                nt = 0
                rbc = b * size + c
                for e in range(bptr[rbc], bptr[rbc + 1]):
                    row = a * size + bm[e]
                    for f in range(bptr[row], bptr[row + 1]):
                        nt = _put(acc, seen, touched, nt, bm[f], bc_[e] * bc_[f])
                for e in range(bptr[rab], bptr[rab + 1]):
                    row = bm[e] * size + c
                    for f in range(bptr[row], bptr[row + 1]):
                        nt = _put(acc, seen, touched, nt, bm[f], -(bc_[e] * bc_[f]))
                rac = a * size + c
                for e in range(bptr[rac], bptr[rac + 1]):
                    row = b * size + bm[e]
                    for f in range(bptr[row], bptr[row + 1]):
                        nt = _put(acc, seen, touched, nt, bm[f], -(sgn * bc_[e] * bc_[f]))
                if _flush(acc, seen, touched, nt):
                    return a, b, c
    return -1, -1, -1


@njit(cache=True)
def _bracket_leibniz(size, masks, n, ptr, om, oc, bptr, bm, bc_):
    """First pair violating d[a,b] = [da,b] + (-1)^((|a|-1)n)[a,db], or (-1, -1)."""
    acc = np.zeros(size, dtype=np.int64)
    touched = np.empty(size, dtype=np.int64)
    seen = np.zeros(size, dtype=np.bool_)
    for ia in range(masks.shape[0]):
        a = masks[ia]
        sgn = -1 if ((_popcount(a) - 1) * n) % 2 else 1
        for ib in range(masks.shape[0]):
            b = masks[ib]
            nt = 0
            row = a * size + b
            for e in range(bptr[row], bptr[row + 1]):
                m = bm[e]
                for f in range(ptr[m], ptr[m + 1]):
                    nt = _put(acc, seen, touched, nt, om[f], bc_[e] * oc[f])
            for e in range(ptr[a], ptr[a + 1]):
                r2 = om[e] * size + b
                for f in range(bptr[r2], bptr[r2 + 1]):
                    nt = _put(acc, seen, touched, nt, bm[f], -(oc[e] * bc_[f]))
            for e in range(ptr[b], ptr[b + 1]):
                r2 = a * size + om[e]
                for f in range(bptr[r2], bptr[r2 + 1]):
                    nt = _put(acc, seen, touched, nt, bm[f], -(sgn * oc[e] * bc_[f]))
            if _flush(acc, seen, touched, nt):
                return a, b
    return -1, -1


# -- reports -----------------------------------------------------------------------

def _mono(space, m: int) -> Multivector:
    return space.monomial(m)


def _all_masks(dim: int) -> np.ndarray:
    return np.arange(1 << dim, dtype=np.int64)


def fast_seven_term(op: LinearOperator) -> CheckReport:
    """Seven-term identity on every triple of basis monomials."""
    from .gerstenhaber import check_seven_term

    t = operator_table(op)
    size = 1 << op.space.dim
    a, b, c = _seven_term(size, _all_masks(op.space.dim), t.indptr, t.masks, t.coeffs)
    if a < 0:
        return CheckReport("seven-term BV identity", True, checked=size ** 3)
    keys = [((), int(a)), ((), int(b)), ((), int(c))]
    return check_seven_term(op, keys)  # recompute the witness exactly


def fast_generates_bracket(op, ctx: GerstenhaberContext, brackets: IntTable | None = None) -> CheckReport:
    """[a,b]_Delta equals the Schouten bracket on every pair of basis monomials."""
    t = operator_table(op)
    b = brackets or bracket_table(ctx)
    size = 1 << op.space.dim
    x, y = _generates(size, _all_masks(op.space.dim), t.indptr, t.masks, t.coeffs,
                      b.indptr, b.masks, b.coeffs, t.scale, b.scale)
    if x < 0:
        return CheckReport("[a,b]_Delta = [a,b]", True, checked=size ** 2)
    from .gerstenhaber import bracket_from_delta

    sp = op.space
    ea, eb = _mono(sp, int(x)), _mono(sp, int(y))
    return CheckReport("[a,b]_Delta = [a,b]", False, Witness([ea, eb], bracket_from_delta(op, ea, eb), ctx.bracket(ea, eb)))


def fast_graded_jacobi(ctx: GerstenhaberContext, brackets: IntTable | None = None) -> CheckReport:
    b = brackets or bracket_table(ctx)
    dim = ctx.space.dim
    size = 1 << dim
    x, y, z = _graded_jacobi(size, _all_masks(dim), b.indptr, b.masks, b.coeffs)
    if x < 0:
        return CheckReport("graded Jacobi", True, checked=size ** 3)
    from .gerstenhaber import check_graded_jacobi

    return check_graded_jacobi(ctx, [((), int(x)), ((), int(y)), ((), int(z))])


def table_to_dict(t: IntTable, row: int) -> dict[int, Fraction]:
    return {int(t.masks[e]): Fraction(int(t.coeffs[e]), t.scale) for e in range(t.indptr[row], t.indptr[row + 1])}


def fast_bracket_leibniz(d: LinearOperator, ctx: GerstenhaberContext, brackets: IntTable | None = None) -> CheckReport:
    from .gerstenhaber import check_bracket_leibniz

    t = operator_table(d)
    b = brackets or bracket_table(ctx)
    dim = ctx.space.dim
    x, y = _bracket_leibniz(1 << dim, _all_masks(dim), d.degree, t.indptr, t.masks, t.coeffs,
                            b.indptr, b.masks, b.coeffs)
    if x < 0:
        report = check_bracket_leibniz(d, ctx, [])
        report.checked = 1 << (2 * dim)
        return report
    return check_bracket_leibniz(d, ctx, [((), int(x)), ((), int(y))])


def fast_strong_differential(d: LinearOperator, ctx: GerstenhaberContext, brackets: IntTable | None = None):
    """Strong-differential report with the bracket Leibniz rule checked by the compiled kernel."""
    from .gerstenhaber import StrongDifferentialReport, check_product_leibniz, check_square_zero

    degree = CheckReport("degree +1", d.degree == 1)
    if not degree.holds:
        skipped = CheckReport("not checked: wrong degree", False)
        return StrongDifferentialReport(degree, skipped, skipped, skipped)
    keys = [((), m) for m in range(1 << ctx.space.dim)]
    return StrongDifferentialReport(degree, check_square_zero(d, keys), check_product_leibniz(d, keys),
                                    fast_bracket_leibniz(d, ctx, brackets))
