"""Exact linear algebra over Q and Z: kernels, saturation, LLL.

Kernel bases are returned as Z-bases of the *saturated* integer kernel
lattice (all integer vectors of the rational kernel), computed by column
reduction with a tracked unimodular transform, so no denominator or index
issues can leak into downstream quadric searches.
"""
from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Optional, Sequence


def _rref(rows):
    """Reduced row echelon form over Fraction. Returns (rows, pivot_cols)."""
    rows = [[Fraction(x) for x in r] for r in rows]
    if not rows:
        return [], []
    ncols = len(rows[0])
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows[:r], pivots


def _primitive(vec):
    g = 0
    for x in vec:
        g = gcd(g, abs(x))
    if g > 1:
        vec = [x // g for x in vec]
    return vec


def _integer_row_basis(rows):
    """Primitive integer rows spanning the same rational row space."""
    red, _ = _rref(rows)
    out = []
    for r in red:
        den = 1
        for x in r:
            den = den * x.denominator // gcd(den, x.denominator)
        out.append(_primitive([int(x * den) for x in r]))
    return out


def kernel_basis(matrix: Sequence[Sequence]) -> list[list[int]]:
    """Z-basis of {v in Z^n : M v = 0}, saturated.

    Column-reduces an integer row basis of M while applying the same column
    operations to an identity matrix; columns that end up zero in M give the
    kernel lattice basis (a subset of a unimodular basis, hence saturated).
    """
    rows = [list(r) for r in matrix]
    if not rows:
        return []
    n = len(rows[0])
    base = _integer_row_basis(rows)
    if not base:
        return [[1 if j == i else 0 for j in range(n)] for i in range(n)]
    k = len(base)
    cols = [([base[i][j] for i in range(k)],
             [1 if t == j else 0 for t in range(n)]) for j in range(n)]
    kept: list[int] = []
    for row in range(k):
        live = [j for j in range(n) if j not in kept]
        while True:
            nz = [j for j in live if cols[j][0][row] != 0]
            if len(nz) <= 1:
                break
            nz.sort(key=lambda j: abs(cols[j][0][row]))
            jm = nz[0]
            a = cols[jm][0][row]
            for j in nz[1:]:
                q = cols[j][0][row] // a
                if q:
                    cols[j] = ([x - q * y for x, y in zip(cols[j][0], cols[jm][0])],
                               [x - q * y for x, y in zip(cols[j][1], cols[jm][1])])
        nz = [j for j in live if cols[j][0][row] != 0]
        if nz:
            kept.append(nz[0])
    kernel = [cols[j][1] for j in range(n) if j not in kept]
    for v in kernel:
        assert all(sum(b * x for b, x in zip(brow, v)) == 0 for brow in base)
    return kernel


def integer_saturate(vectors: Sequence[Sequence[int]]) -> list[list[int]]:
    """Saturation of the lattice spanned by integer `vectors`.

    Double orthogonal complement: the integer kernel of the kernel is
    exactly the set of integer points of the rational span.
    """
    vecs = [list(v) for v in vectors]
    if not vecs:
        return []
    comp = kernel_basis(vecs)
    if not comp:
        n = len(vecs[0])
        return [[1 if j == i else 0 for j in range(n)] for i in range(n)]
    return kernel_basis(comp)


def hnf_rows(vectors: Sequence[Sequence[int]]) -> list[list[int]]:
    """Row-style Hermite normal form (canonical basis of the row lattice)."""
    rows = [list(v) for v in vectors if any(v)]
    if not rows:
        return []
    n = len(rows[0])
    out = []
    for col in range(n):
        if not rows:
            break
        nz = [r for r in rows if r[col] != 0]
        rest = [r for r in rows if r[col] == 0]
        if not nz:
            continue
        while len(nz) > 1:
            nz.sort(key=lambda r: abs(r[col]))
            a = nz[0]
            new = [a]
            for r in nz[1:]:
                q = r[col] // a[col]
                r2 = [x - q * y for x, y in zip(r, a)]
                if r2[col] != 0:
                    new.append(r2)
                elif any(r2):
                    rest.append(r2)
            nz = new
        piv = nz[0] if nz[0][col] > 0 else [-x for x in nz[0]]
        out.append(piv)
        rows = rest
    # canonical form: reduce entries above pivots, ascending pivot order so
    # a later (larger-column) reduction cannot disturb an earlier one
    for i in range(len(out)):
        for k in range(i + 1, len(out)):
            pc = next(j for j, x in enumerate(out[k]) if x)
            q = out[i][pc] // out[k][pc]
            if q:
                out[i] = [x - q * y for x, y in zip(out[i], out[k])]
    return out


def lll_reduce(basis: Sequence[Sequence[int]], delta=Fraction(99, 100),
               check: bool = True) -> list[list[int]]:
    """LLL-reduce a linearly independent integer basis, exactly.

    Rational Gram-Schmidt with the standard incremental swap updates.
    With `check`, asserts the output spans the same lattice (equal HNF).
    """
    b = [list(map(int, v)) for v in basis]
    n = len(b)
    if n <= 1:
        return b
    delta = Fraction(delta)

    def dot(u, v):
        return sum(x * y for x, y in zip(u, v))

    # initial GSO: B[i] = |b*_i|^2, mu[i][j] for j < i
    mu = [[Fraction(0)] * n for _ in range(n)]
    B = [Fraction(0)] * n
    star = [None] * n
    for i in range(n):
        v = [Fraction(x) for x in b[i]]
        for j in range(i):
            mu[i][j] = sum(Fraction(x) * y for x, y in zip(b[i], star[j])) / B[j]
            v = [x - mu[i][j] * y for x, y in zip(v, star[j])]
        star[i] = v
        B[i] = sum(x * x for x in v)
        assert B[i] > 0, "basis not linearly independent"

    def red(k, l):
        if 2 * abs(mu[k][l]) > 1:
            q = round(mu[k][l])
            b[k] = [x - q * y for x, y in zip(b[k], b[l])]
            for j in range(l):
                mu[k][j] -= q * mu[l][j]
            mu[k][l] -= q

    k = 1
    while k < n:
        red(k, k - 1)
        if B[k] < (delta - mu[k][k - 1] ** 2) * B[k - 1]:
            # swap b_k, b_(k-1) with the standard GSO update
            m_ = mu[k][k - 1]
            Bk = B[k] + m_ * m_ * B[k - 1]
            mu[k][k - 1] = m_ * B[k - 1] / Bk
            B[k] = B[k - 1] * B[k] / Bk
            B[k - 1] = Bk
            b[k], b[k - 1] = b[k - 1], b[k]
            for j in range(k - 1):
                mu[k][j], mu[k - 1][j] = mu[k - 1][j], mu[k][j]
            for i in range(k + 1, n):
                t = mu[i][k]
                mu[i][k] = mu[i][k - 1] - m_ * t
                mu[i][k - 1] = t + mu[k][k - 1] * mu[i][k]
            k = max(k - 1, 1)
        else:
            for l in range(k - 2, -1, -1):
                red(k, l)
            k += 1
    if check:
        assert hnf_rows(basis) == hnf_rows(b), "LLL changed the lattice"
    return b


def lovasz_ok(basis: Sequence[Sequence[int]], delta=Fraction(99, 100)) -> bool:
    """Check size reduction and the Lovasz condition (test oracle)."""
    b = [list(map(int, v)) for v in basis]
    n = len(b)
    mu = [[Fraction(0)] * n for _ in range(n)]
    B = [Fraction(0)] * n
    star = []
    for i in range(n):
        v = [Fraction(x) for x in b[i]]
        for j in range(i):
            mu[i][j] = (sum(Fraction(x) * y for x, y in zip(b[i], star[j])) / B[j]
                        if B[j] else Fraction(0))
            v = [x - mu[i][j] * y for x, y in zip(v, star[j])]
        star.append(v)
        B[i] = sum(x * x for x in v)
    for i in range(n):
        for j in range(i):
            if 2 * abs(mu[i][j]) > 1:
                return False
    for k in range(1, n):
        if B[k] < (Fraction(delta) - mu[k][k - 1] ** 2) * B[k - 1]:
            return False
    return True


def _to_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if hasattr(value, "_mpf_"):  # mpmath mpf: exact binary value
        sign, man, exp, _ = value._mpf_
        f = Fraction(int(man)) * Fraction(2) ** int(exp)
        return -f if sign else f
    return Fraction(value)


def rational_reconstruct(value, max_den: int) -> Optional[Fraction]:
    """Nearest fraction with denominator <= max_den via continued fractions.

    Returns None when the best convergent sits farther than
    1/(2 max_den^2) from `value` (the classical uniqueness window).
    """
    x = _to_fraction(value)
    orig = x
    p0, q0, p1, q1 = 1, 0, 0, 1  # (p0/q0) ahead of (p1/q1) by one step
    while True:
        a = x.numerator // x.denominator
        p0, q0, p1, q1 = a * p0 + p1, a * q0 + q1, p0, q0
        if q0 > max_den:
            cand = Fraction(p1, q1) if q1 else None
            break
        if x == a:
            cand = Fraction(p0, q0)
            break
        x = 1 / (x - a)
    if cand is None:
        return None
    if abs(orig - cand) * 2 * max_den * max_den > 1:
        return None
    return cand
