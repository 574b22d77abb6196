"""Independent reference computations for the tests.

Nothing here imports bvlab: dense Fraction matrices, plain Gaussian
elimination and complexes with a known answer by construction.
"""

from __future__ import annotations

import random
from fractions import Fraction


def naive_rank(matrix: list[list[Fraction]]) -> int:
    m = [list(map(Fraction, row)) for row in matrix]
    if not m or not m[0]:
        return 0
    rows, cols = len(m), len(m[0])
    r = 0
    for c in range(cols):
        pivot = next((i for i in range(r, rows) if m[i][c] != 0), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        for i in range(rows):
            if i != r and m[i][c] != 0:
                f = m[i][c] / m[r][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        r += 1
        if r == rows:
            break
    return r


def naive_inverse(matrix: list[list[Fraction]]) -> list[list[Fraction]]:
    n = len(matrix)
    aug = [list(map(Fraction, row)) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(matrix)]
    for c in range(n):
        pivot = next(i for i in range(c, n) if aug[i][c] != 0)
        aug[c], aug[pivot] = aug[pivot], aug[c]
        inv = 1 / aug[c][c]
        aug[c] = [x * inv for x in aug[c]]
        for i in range(n):
            if i != c and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [a - f * b for a, b in zip(aug[i], aug[c])]
    return [row[n:] for row in aug]


def mul(a, b):
    inner = len(b)
    cols = len(b[0]) if b else 0
    return [[sum((a[i][k] * b[k][j] for k in range(inner)), Fraction(0)) for j in range(cols)] for i in range(len(a))]


def naive_betti(dims: list[int], diffs: list[list[list[Fraction]]]) -> list[int]:
    """dim ker d_k - rank d_(k-1), by the rank-nullity count."""
    ranks = [naive_rank(d) if dims[i] and dims[i + 1] else 0 for i, d in enumerate(diffs)]
    out = []
    for k, n in enumerate(dims):
        r_out = ranks[k] if k < len(ranks) else 0
        r_in = ranks[k - 1] if k > 0 else 0
        out.append(n - r_out - r_in)
    return out


def random_invertible(rnd: random.Random, n: int) -> list[list[Fraction]]:
    while True:
        m = [[Fraction(rnd.randint(-2, 2)) for _ in range(n)] for _ in range(n)]
        if naive_rank(m) == n:
            return m


def random_complex(rnd: random.Random, max_total: int = 40):
    """(dims, differentials, betti) with betti known from the block construction.

    Degree k splits as B_k + H_k + E_k where d maps E_k isomorphically onto
    B_(k+1); a random change of basis in each degree hides the blocks.
    """
    length = rnd.randint(1, 5)
    while True:
        h = [rnd.randint(0, 3) for _ in range(length)]
        e = [rnd.randint(0, 4) for _ in range(length - 1)] + [0]
        b = [0] + e[:-1]
        dims = [b[k] + h[k] + e[k] for k in range(length)]
        if sum(dims) <= max_total:
            break
    blocks = []
    for k in range(length - 1):
        d = [[Fraction(0)] * dims[k] for _ in range(dims[k + 1])]
        for i in range(e[k]):
            d[i][b[k] + h[k] + i] = Fraction(1)
        blocks.append(d)
    change = [random_invertible(rnd, n) if n else [] for n in dims]
    diffs = []
    for k, d in enumerate(blocks):
        if dims[k] == 0 or dims[k + 1] == 0:
            diffs.append([[Fraction(0)] * dims[k] for _ in range(dims[k + 1])])
            continue
        diffs.append(mul(mul(change[k + 1], d), naive_inverse(change[k])))
    return dims, diffs, h


# -- exterior algebra over a matrix Lie algebra ----------------------------------------

def bubble_sign(seq) -> int:
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(len(seq) - 1 - i):
            if seq[j] > seq[j + 1]:
                seq[j], seq[j + 1] = seq[j + 1], seq[j]
                sign = -sign
    return sign


def wedge_words(a: dict, b: dict) -> dict:
    """Product of {sorted index tuple: coeff} dicts."""
    out: dict = {}
    for s, ca in a.items():
        for t, cb in b.items():
            seq = list(s) + list(t)
            if len(set(seq)) < len(seq):
                continue
            key = tuple(sorted(seq))
            out[key] = out.get(key, 0) + bubble_sign(seq) * ca * cb
    return {k: v for k, v in out.items() if v}


def matrix_bracket(mats: list, coords) -> list[list[Fraction]]:
    """Structure table [e_i, e_j] -> coordinate list, from matrix commutators."""
    n = len(mats)
    size = len(mats[0])

    def mm(a, b):
        return [[sum(Fraction(a[i][k]) * b[k][j] for k in range(size)) for j in range(size)] for i in range(size)]

    table = {}
    for i in range(n):
        for j in range(n):
            ab, ba = mm(mats[i], mats[j]), mm(mats[j], mats[i])
            table[i, j] = coords([[ab[r][c] - ba[r][c] for c in range(size)] for r in range(size)])
    return table


def schouten_words(table, a: dict, b: dict) -> dict:
    """[X1..Xp, Y1..Yq] = sum (-1)^(i+j) [Xi,Yj] X1..^Xi..Xp Y1..^Yj..Yq (1-based i, j)."""
    out: dict = {}
    for s, ca in a.items():
        for t, cb in b.items():
            for i, xi in enumerate(s):
                for j, yj in enumerate(t):
                    sign = -1 if (i + j) % 2 else 1
                    br = {(k,): c for k, c in enumerate(table[xi, yj]) if c}
                    rest_a = {tuple(x for n, x in enumerate(s) if n != i): Fraction(1)}
                    rest_b = {tuple(y for n, y in enumerate(t) if n != j): Fraction(1)}
                    term = wedge_words(wedge_words(br, rest_a), rest_b)
                    for k, v in term.items():
                        out[k] = out.get(k, 0) + sign * ca * cb * v
    return {k: v for k, v in out.items() if v}
