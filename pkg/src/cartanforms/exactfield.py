"""Exact arithmetic in cyclotomic fields and one-step relative extensions.

Elements live in Q(zeta_m)[x]/(E(x)) where E is a monic polynomial with
coefficients in Q(zeta_m) (or in Q(zeta_m) itself when E is absent).  All
coefficients are `fractions.Fraction`; nothing here is floating point except
`complex_embed`, which reports an explicit error radius alongside its value.

The extension step is never assumed irreducible: arithmetic works in the
quotient ring, and `tower_inv` raises `ZeroDivisorError` lazily if an
inversion hits a zero divisor.
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Optional, Sequence

import mpmath

Q0 = Fraction(0)
Q1 = Fraction(1)


class ZeroDivisorError(ArithmeticError):
    """Inversion met a zero divisor (reducible extension polynomial)."""


# ----------------------------------------------------------------------
# cyclotomic polynomials and reduction tables


def _poly_divmod_exact(num: list[int], den: list[int]) -> list[int]:
    """Quotient of integer polynomials known to divide exactly (monic-ish den)."""
    num = list(num)
    out = [0] * (len(num) - len(den) + 1)
    lead = den[-1]
    for k in range(len(num) - len(den), -1, -1):
        c = num[k + len(den) - 1]
        assert c % lead == 0
        q = c // lead
        out[k] = q
        for i, d in enumerate(den):
            num[k + i] -= q * d
    assert all(c == 0 for c in num)
    return out


@lru_cache(maxsize=None)
def cyclotomic_poly(m: int) -> tuple[int, ...]:
    """Coefficients (low to high) of the m-th cyclotomic polynomial."""
    if m == 1:
        return (-1, 1)
    poly = [-1, 1]  # x - 1
    n = m
    # Phi_m via Phi_p-steps: Phi_{mp}(x) = Phi_m(x^p)/Phi_m(x) for p not | m,
    # Phi_{mp}(x) = Phi_m(x^p) for p | m.
    done = 1
    for p in _prime_factors(m):
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        lifted = _poly_compose_power(poly, p)
        poly = _poly_divmod_exact(lifted, poly)
        done *= p
        for _ in range(e - 1):
            poly = _poly_compose_power(poly, p)
            done *= p
    assert done == m
    return tuple(poly)


def _prime_factors(m: int) -> list[int]:
    out = []
    d = 2
    while d * d <= m:
        if m % d == 0:
            out.append(d)
            while m % d == 0:
                m //= d
        d += 1
    if m > 1:
        out.append(m)
    return out


def _poly_compose_power(poly: Sequence[int], p: int) -> list[int]:
    out = [0] * ((len(poly) - 1) * p + 1)
    for i, c in enumerate(poly):
        out[i * p] = c
    return out


def euler_phi(m: int) -> int:
    return len(cyclotomic_poly(m)) - 1


@lru_cache(maxsize=None)
def _reduction_rows(m: int) -> tuple[tuple[Fraction, ...], ...]:
    """x^(phi+k) mod Phi_m for k = 0..phi-2, as power-basis rows."""
    phi = euler_phi(m)
    cp = cyclotomic_poly(m)
    rows = []
    # x^phi = -sum cp[i] x^i (cp monic)
    cur = [Fraction(-c) for c in cp[:-1]]
    rows.append(tuple(cur))
    for _ in range(phi - 2):
        top = cur[-1]
        cur = [Q0] + cur[:-1]
        if top:
            cur = [a + top * b for a, b in zip(cur, rows[0])]
        rows.append(tuple(cur))
    return tuple(rows)


def cyclo_reduce(coeffs: Iterable[Fraction | int], m: int) -> tuple[Fraction, ...]:
    """Reduce a polynomial in zeta_m (any degree) to the power basis."""
    phi = euler_phi(m)
    vec = [Q0] * phi
    high: list[Fraction] = []
    for i, c in enumerate(coeffs):
        c = Fraction(c)
        if i < phi:
            vec[i] += c
        else:
            while len(high) <= i - phi:
                high.append(Q0)
            high[i - phi] += c
    if high:
        rows = _reduction_rows(m)
        while len(high) > len(rows):
            # degree too large for the table: fold the top monomial once
            top = high.pop()
            k = len(high)  # x^(phi+k) = x^k * x^phi
            if top:
                extra = [Q0] * k + [top * r for r in rows[0]]
                for i, c in enumerate(extra):
                    if i < phi:
                        vec[i] += c
                    else:
                        high[i - phi] += c
        for k, c in enumerate(high):
            if c:
                for i, r in enumerate(rows[k]):
                    vec[i] += c * r
    return tuple(vec)


class CycloElt:
    """Element of Q(zeta_m) in the power basis 1, zeta, ..., zeta^(phi-1)."""

    __slots__ = ("m", "c")

    def __init__(self, m: int, coeffs: Iterable[Fraction | int], reduced=False):
        self.m = m
        if reduced:
            self.c = tuple(coeffs)
        else:
            self.c = cyclo_reduce(coeffs, m)

    @classmethod
    def zero(cls, m: int) -> "CycloElt":
        return cls(m, [Q0] * euler_phi(m), reduced=True)

    @classmethod
    def one(cls, m: int) -> "CycloElt":
        return cls.rational(m, Q1)

    @classmethod
    def rational(cls, m: int, q) -> "CycloElt":
        v = [Q0] * euler_phi(m)
        v[0] = Fraction(q)
        return cls(m, v, reduced=True)

    @classmethod
    def zeta_power(cls, m: int, k: int) -> "CycloElt":
        k %= m
        phi = euler_phi(m)
        if k < phi:
            v = [Q0] * phi
            v[k] = Q1
            return cls(m, v, reduced=True)
        return cls(m, [0] * k + [1])

    def is_zero(self) -> bool:
        return all(x == 0 for x in self.c)

    def is_rational(self) -> bool:
        return all(x == 0 for x in self.c[1:])

    def rational_value(self) -> Fraction:
        if not self.is_rational():
            raise ValueError("not rational")
        return self.c[0]

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.m == other.m and self.c == other.c

    def __hash__(self):
        return hash((self.m, self.c))

    def _coerce(self, other):
        if isinstance(other, CycloElt):
            if other.m != self.m:
                raise ValueError(f"conductor mismatch {self.m} vs {other.m}")
            return other
        if isinstance(other, (int, Fraction)):
            return CycloElt.rational(self.m, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return CycloElt(self.m, [a + b for a, b in zip(self.c, other.c)], reduced=True)

    __radd__ = __add__

    def __neg__(self):
        return CycloElt(self.m, [-a for a in self.c], reduced=True)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return CycloElt(self.m, [a - b for a, b in zip(self.c, other.c)], reduced=True)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            q = Fraction(other)
            return CycloElt(self.m, [a * q for a in self.c], reduced=True)
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        n = len(self.c)
        prod = [Q0] * (2 * n - 1)
        for i, a in enumerate(self.c):
            if a:
                for j, b in enumerate(other.c):
                    if b:
                        prod[i + j] += a * b
        return CycloElt(self.m, prod)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            q = Fraction(other)
            return CycloElt(self.m, [a / q for a in self.c], reduced=True)
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def inverse(self) -> "CycloElt":
        """1/self via the extended Euclidean algorithm against Phi_m."""
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero")
        if self.is_rational():
            return CycloElt.rational(self.m, 1 / self.c[0])
        a = [Fraction(x) for x in cyclotomic_poly(self.m)]
        b = list(self.c)
        while b and b[-1] == 0:
            b.pop()
        # extended gcd, tracking only the cofactor of b
        s0: list[Fraction] = [Q0]
        s1: list[Fraction] = [Q1]
        while True:
            if len(b) == 1:
                inv = 1 / b[0]
                return CycloElt(self.m, [x * inv for x in s1])
            q, r = _poly_divmod_frac(a, b)
            a, b = b, r
            if not b:
                raise ZeroDivisorError("element not invertible mod Phi_m")
            s0, s1 = s1, _poly_sub(s0, _poly_mul(q, s1))

    def galois(self, k: int) -> "CycloElt":
        """Image under zeta_m -> zeta_m^k, gcd(k, m) = 1."""
        if math.gcd(k, self.m) != 1:
            raise ValueError("exponent not coprime to conductor")
        out = [Q0] * self.m
        for i, c in enumerate(self.c):
            if c:
                out[(i * k) % self.m] += c
        return CycloElt(self.m, out)

    def lift_conductor(self, m2: int) -> "CycloElt":
        """Reinterpret in Q(zeta_m2), m | m2 (zeta_m = zeta_m2^(m2/m))."""
        if m2 == self.m:
            return self
        if m2 % self.m != 0:
            raise ValueError("not a conductor multiple")
        step = m2 // self.m
        out = [Q0] * (euler_phi(self.m) * step + 1)
        for i, c in enumerate(self.c):
            out[i * step] = c
        return CycloElt(m2, out)

    def __repr__(self):
        terms = [f"{c}*z^{i}" for i, c in enumerate(self.c) if c]
        return f"CycloElt({self.m}: {' + '.join(terms) or '0'})"


def _poly_divmod_frac(a: list[Fraction], b: list[Fraction]):
    a = list(a)
    db, lb = len(b) - 1, b[-1]
    q = [Q0] * max(len(a) - db, 1)
    for k in range(len(a) - db - 1, -1, -1):
        c = a[k + db] / lb
        if c:
            q[k] = c
            for i, bc in enumerate(b):
                a[k + i] -= c * bc
    while a and a[-1] == 0:
        a.pop()
    return q, a


def _poly_mul(a, b):
    out = [Q0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _poly_sub(a, b):
    n = max(len(a), len(b))
    out = [Q0] * n
    for i, x in enumerate(a):
        out[i] += x
    for i, y in enumerate(b):
        out[i] -= y
    while out and out[-1] == 0:
        out.pop()
    return out


# ----------------------------------------------------------------------
# towers


class Tower:
    """Q(zeta_m), optionally extended by a monic polynomial E over it.

    `ext_poly` holds the non-leading coefficients e_0..e_(d-1) of
    E(x) = x^d + e_(d-1) x^(d-1) + ... + e_0 as CycloElt values.
    `embedding_exponent` and `ext_root_index` fix the complex embedding used
    by `complex_embed` (zeta_m -> exp(2 pi i k/m); root index into the sorted
    root list of E under that embedding).
    """

    __slots__ = ("m", "ext_poly", "embedding_exponent", "ext_root_index")

    def __init__(self, m: int, ext_poly: Optional[Sequence[CycloElt]] = None,
                 embedding_exponent: int = 1, ext_root_index: int = 0):
        self.m = m
        self.ext_poly = tuple(ext_poly) if ext_poly else None
        if self.ext_poly:
            assert all(e.m == m for e in self.ext_poly)
        self.embedding_exponent = embedding_exponent
        self.ext_root_index = ext_root_index

    @property
    def ext_degree(self) -> int:
        # ext_poly lists all d non-leading coefficients of the monic E
        return len(self.ext_poly) if self.ext_poly else 1

    def degree(self) -> int:
        return euler_phi(self.m) * self.ext_degree

    def __eq__(self, other):
        return (isinstance(other, Tower) and self.m == other.m
                and self.ext_poly == other.ext_poly)

    def __hash__(self):
        return hash((self.m, self.ext_poly))

    def __repr__(self):
        if self.ext_poly:
            return f"Tower(Q(zeta_{self.m})[x], ext deg {self.ext_degree})"
        return f"Tower(Q(zeta_{self.m}))"

    def zero(self) -> "TowerElt":
        return TowerElt(self, [CycloElt.zero(self.m)] * self.ext_degree)

    def one(self) -> "TowerElt":
        return self.embed(CycloElt.one(self.m))

    def rational(self, q) -> "TowerElt":
        return self.embed(CycloElt.rational(self.m, q))

    def zeta(self, k: int = 1) -> "TowerElt":
        return self.embed(CycloElt.zeta_power(self.m, k))

    def embed(self, c: CycloElt) -> "TowerElt":
        assert c.m == self.m
        pad = [CycloElt.zero(self.m)] * (self.ext_degree - 1)
        return TowerElt(self, [c] + pad)

    def gen(self) -> "TowerElt":
        """The extension generator alpha (requires ext_poly)."""
        if not self.ext_poly:
            raise ValueError("tower has no extension step")
        coeffs = [CycloElt.zero(self.m)] * self.ext_degree
        coeffs[1] = CycloElt.one(self.m)
        return TowerElt(self, coeffs)

    def to_descriptor(self) -> dict:
        ext = None
        if self.ext_poly:
            ext = [[str(f) for f in e.c] for e in self.ext_poly]
        return {
            "conductor": self.m,
            "ext_poly": ext,
            "embedding_exponent": self.embedding_exponent,
            "ext_root_index": self.ext_root_index,
        }

    @classmethod
    def from_descriptor(cls, d: dict) -> "Tower":
        m = int(d["conductor"])
        ext = None
        if d.get("ext_poly") is not None:
            ext = [CycloElt(m, [Fraction(f) for f in e], reduced=True)
                   for e in d["ext_poly"]]
        return cls(m, ext, int(d.get("embedding_exponent", 1)),
                   int(d.get("ext_root_index", 0)))


class TowerElt:
    """Element sum coeffs[i] * alpha^i of a Tower."""

    __slots__ = ("tower", "coeffs")

    def __init__(self, tower: Tower, coeffs: Sequence[CycloElt]):
        assert len(coeffs) == tower.ext_degree
        self.tower = tower
        self.coeffs = tuple(coeffs)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs)

    def base_part(self) -> CycloElt:
        if any(not c.is_zero() for c in self.coeffs[1:]):
            raise ValueError("element has nonzero extension coordinates")
        return self.coeffs[0]

    def __eq__(self, other):
        return (isinstance(other, TowerElt) and self.tower == other.tower
                and self.coeffs == other.coeffs)

    def __hash__(self):
        return hash((self.tower, self.coeffs))

    def _coerce(self, other):
        if isinstance(other, TowerElt):
            if other.tower != self.tower:
                raise ValueError("tower mismatch")
            return other
        if isinstance(other, (int, Fraction)):
            return self.tower.rational(other)
        if isinstance(other, CycloElt):
            return self.tower.embed(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return TowerElt(self.tower,
                        [a + b for a, b in zip(self.coeffs, other.coeffs)])

    __radd__ = __add__

    def __neg__(self):
        return TowerElt(self.tower, [-a for a in self.coeffs])

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return TowerElt(self.tower,
                        [a - b for a, b in zip(self.coeffs, other.coeffs)])

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, CycloElt)):
            if isinstance(other, CycloElt):
                q = other
            else:
                q = CycloElt.rational(self.tower.m, other)
            return TowerElt(self.tower, [c * q for c in self.coeffs])
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        d = self.tower.ext_degree
        if d == 1:
            return TowerElt(self.tower, [self.coeffs[0] * other.coeffs[0]])
        zero = CycloElt.zero(self.tower.m)
        prod = [zero] * (2 * d - 1)
        for i, a in enumerate(self.coeffs):
            if a.is_zero():
                continue
            for j, b in enumerate(other.coeffs):
                if not b.is_zero():
                    prod[i + j] = prod[i + j] + a * b
        # reduce mod E: alpha^d = -sum e_i alpha^i
        ext = self.tower.ext_poly
        for k in range(2 * d - 2, d - 1, -1):
            top = prod[k]
            if top.is_zero():
                continue
            prod[k] = zero
            for i, e in enumerate(ext):
                prod[k - d + i] = prod[k - d + i] - top * e
        return TowerElt(self.tower, prod[:d])

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            q = Fraction(other)
            return TowerElt(self.tower, [c / q for c in self.coeffs])
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self * tower_inv(other)

    def __pow__(self, n: int):
        assert n >= 0
        out = self.tower.one()
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base if n > 1 else base
            n >>= 1
        return out

    def __repr__(self):
        return f"TowerElt({self.tower!r}, {list(self.coeffs)!r})"


def tower_arith(op: str, a: TowerElt, b: TowerElt) -> TowerElt:
    """Dispatch helper: op in '+', '-', '*', '/'."""
    return {"+": a.__add__, "-": a.__sub__, "*": a.__mul__,
            "/": a.__truediv__}[op](b)


def tower_inv(a: TowerElt) -> TowerElt:
    """Inverse via the multiplication matrix over the base field.

    Solves M_a x = e_0 where M_a is multiplication by `a` in the alpha-power
    basis; a zero pivot that cannot be repaired means `a` is a zero divisor
    in the quotient ring (reducible extension polynomial) and raises
    ZeroDivisorError.
    """
    t = a.tower
    if a.is_zero():
        raise ZeroDivisionError("inverse of zero")
    d = t.ext_degree
    if d == 1:
        return TowerElt(t, [a.coeffs[0].inverse()])
    # columns: a * alpha^j
    cols = []
    cur = a
    for _ in range(d):
        cols.append(cur.coeffs)
        cur = cur * t.gen()
    m = t.m
    rows = [[cols[j][i] for j in range(d)] for i in range(d)]
    rhs = [CycloElt.one(m) if i == 0 else CycloElt.zero(m) for i in range(d)]
    # gaussian elimination over Q(zeta_m)
    for col in range(d):
        piv = next((r for r in range(col, d) if not rows[r][col].is_zero()), None)
        if piv is None:
            raise ZeroDivisorError("multiplication matrix is singular")
        rows[col], rows[piv] = rows[piv], rows[col]
        rhs[col], rhs[piv] = rhs[piv], rhs[col]
        inv = rows[col][col].inverse()
        rows[col] = [x * inv for x in rows[col]]
        rhs[col] = rhs[col] * inv
        for r in range(d):
            if r != col and not rows[r][col].is_zero():
                f = rows[r][col]
                rows[r] = [x - f * y for x, y in zip(rows[r], rows[col])]
                rhs[r] = rhs[r] - f * rhs[col]
    return TowerElt(t, rhs)


# ----------------------------------------------------------------------
# Galois actions


class GaloisAction:
    """zeta_m -> zeta_m^k together with an optional image of alpha.

    For pure cyclotomic towers `gen_image` stays None.  For extended towers
    it must be supplied whenever elements with nonzero alpha-coordinates are
    mapped (the action on the base does not determine it).
    """

    __slots__ = ("exponent", "gen_image")

    def __init__(self, exponent: int, gen_image: Optional[TowerElt] = None):
        self.exponent = exponent
        self.gen_image = gen_image

    def __repr__(self):
        extra = ", gen_image=..." if self.gen_image is not None else ""
        return f"GaloisAction(k={self.exponent}{extra})"


def galois_apply(action: GaloisAction, a: TowerElt) -> TowerElt:
    t = a.tower
    k = action.exponent
    mapped = [c.galois(k) for c in a.coeffs]
    if t.ext_degree == 1:
        return TowerElt(t, mapped)
    if all(c.is_zero() for c in mapped[1:]):
        return TowerElt(t, mapped)
    if action.gen_image is None:
        raise ValueError("action needs gen_image for extension coordinates")
    out = t.embed(mapped[0])
    g = t.one()
    for c in mapped[1:]:
        g = g * action.gen_image
        out = out + g * c
    return out


# ----------------------------------------------------------------------
# subfields, traces, descents


class Subfield:
    """Declared subfield Q(zeta_mod) or its real part Q(zeta_mod)^+.

    `mod` must divide the conductor of any tower it is used with.
    """

    __slots__ = ("mod", "real")

    def __init__(self, mod: int, real: bool = False):
        self.mod = mod
        self.real = real

    def stabilizer_exponents(self, m: int) -> list[int]:
        assert m % self.mod == 0
        ks = []
        for k in range(1, m):
            if math.gcd(k, m) != 1:
                continue
            r = k % self.mod
            if r == 1 % self.mod or (self.real and r == (self.mod - 1) % self.mod):
                ks.append(k)
        return ks

    def __repr__(self):
        return f"Subfield(Q(zeta_{self.mod}){'+' if self.real else ''})"


def trace_to_base(a: TowerElt) -> CycloElt:
    """Trace from the tower to its cyclotomic base: tr of the mult matrix."""
    t = a.tower
    d = t.ext_degree
    if d == 1:
        return a.coeffs[0]
    tr = a.coeffs[0] * d
    cur = a
    gen = t.gen()
    for i in range(1, d):
        cur = cur * gen  # a * alpha^i
        # diagonal entry i of the multiplication matrix is coeff i of a*alpha^i
        # summed incrementally: tr += coeff_i(a alpha^i) - a0 (already counted)
        tr = tr + (cur.coeffs[i] - a.coeffs[0])
    return tr


def relative_trace(a: TowerElt, sub: Subfield) -> CycloElt:
    """Trace of `a` to the declared subfield, returned at conductor sub.mod.

    Composition of the multiplication-matrix trace (extension step, no
    Galois closure needed) and a Galois sum over the exponents fixing the
    subfield.  The result is rewritten into the power basis at conductor
    sub.mod; a failure to rewrite means the declared subfield was wrong.
    """
    t = a.tower
    base = trace_to_base(a)
    acc = CycloElt.zero(t.m)
    for k in sub.stabilizer_exponents(t.m):
        acc = acc + base.galois(k)
    return rewrite_conductor(acc, sub.mod)


class SubfieldMismatch(ValueError):
    """An element claimed to lie in a subfield does not."""


@lru_cache(maxsize=None)
def _conductor_rewrite_solver(m: int, m2: int):
    """Row-reduced system expressing conductor-m elements in Q(zeta_m2)."""
    phi2 = euler_phi(m2)
    cols = [CycloElt.zeta_power(m2, i).lift_conductor(m).c for i in range(phi2)]
    phi = euler_phi(m)
    # gaussian elimination on the phi x phi2 matrix, tracking pivots
    rows = [[cols[j][i] for j in range(phi2)] for i in range(phi)]
    pivots = []
    row = 0
    ops = []  # (type, ...) replay log applied to rhs vectors
    for col in range(phi2):
        piv = next((r for r in range(row, phi) if rows[r][col] != 0), None)
        if piv is None:
            continue
        if piv != row:
            rows[row], rows[piv] = rows[piv], rows[row]
            ops.append(("swap", row, piv))
        inv = 1 / rows[row][col]
        rows[row] = [x * inv for x in rows[row]]
        ops.append(("scale", row, inv))
        for r in range(phi):
            if r != row and rows[r][col] != 0:
                f = rows[r][col]
                rows[r] = [x - f * y for x, y in zip(rows[r], rows[row])]
                ops.append(("elim", r, row, f))
        pivots.append(col)
        row += 1
    assert len(pivots) == phi2, "subfield basis must be independent"
    return ops, pivots, phi


def rewrite_conductor(a: CycloElt, m2: int) -> CycloElt:
    """Express `a` (conductor m) in Q(zeta_m2) for m2 | m, exactly.

    Raises SubfieldMismatch when `a` does not lie in the subfield.
    """
    if m2 == a.m:
        return a
    if a.m % m2 != 0:
        raise ValueError("target conductor must divide")
    ops, pivots, phi = _conductor_rewrite_solver(a.m, m2)
    rhs = list(a.c)
    for op in ops:
        if op[0] == "swap":
            _, i, j = op
            rhs[i], rhs[j] = rhs[j], rhs[i]
        elif op[0] == "scale":
            _, i, f = op
            rhs[i] *= f
        else:
            _, r, i, f = op
            rhs[r] -= f * rhs[i]
    phi2 = euler_phi(m2)
    sol = rhs[:phi2]
    if any(x != 0 for x in rhs[phi2:]):
        raise SubfieldMismatch(f"element not in Q(zeta_{m2})")
    return CycloElt(m2, sol, reduced=True)


def in_subfield(a: TowerElt, sub: Subfield, keep_ext: bool = False) -> bool:
    """Does `a` lie in sub (tensored with the extension when keep_ext)?"""
    t = a.tower
    coords = a.coeffs if keep_ext else (a.coeffs[0],)
    if not keep_ext and any(not c.is_zero() for c in a.coeffs[1:]):
        return False
    for c in coords:
        for k in sub.stabilizer_exponents(t.m):
            if k != 1 and c.galois(k) != c:
                return False
    return True


# ----------------------------------------------------------------------
# eta coordinates (real cyclotomic subfield of prime conductor)


def eta_coordinates(a: CycloElt, p: int) -> list[Fraction]:
    """Coordinates in the basis eta_j = zeta_p^j + zeta_p^-j, j = 1..(p-1)/2.

    The basis spans Q(zeta_p)^+ over Q (note sum eta_j = -1 supplies the
    rationals).  Raises SubfieldMismatch if `a` is not real.
    """
    x = rewrite_conductor(a, p) if a.m != p else a
    c = x.c
    h = (p - 1) // 2
    if c[1] != 0 or any(c[j] != c[p - j] for j in range(2, h + 1)):
        raise SubfieldMismatch("element not fixed by conjugation")
    y = [-c[0] if j == 1 else c[j] - c[0] for j in range(1, h + 1)]
    return y


def from_eta_coordinates(y: Sequence[Fraction | int], p: int) -> CycloElt:
    h = (p - 1) // 2
    assert len(y) == h
    acc = [Q0] * (p + 1)
    for j, v in enumerate(y, start=1):
        acc[j] += Fraction(v)
        acc[p - j] += Fraction(v)
    return CycloElt(p, acc)


# ----------------------------------------------------------------------
# Gauss and Salie sums


def gauss_sum(p: int, char_values, order: int) -> CycloElt:
    """sum_x chi(x) zeta_p^x as an exact element of Q(zeta_(lcm(p, order))).

    `char_values` maps x in 1..p-1 to the exponent e with chi(x) =
    zeta_order^e (a callable).
    """
    m = math.lcm(p, order)
    acc = CycloElt.zero(m)
    zp = m // p
    zo = m // order
    for x in range(1, p):
        e = char_values(x)
        if e is None:
            continue
        acc = acc + CycloElt.zeta_power(m, (e * zo + x * zp) % m)
    return acc


def salie_sum(p: int, u: int, n: int, char_inv_values, order: int) -> CycloElt:
    """lambda_n = sum_r chi^-1(r^2 - u) zeta_p^(r n), exact.

    `char_inv_values` maps x in F_p^* to the exponent of chi^-1(x) on
    zeta_order (None for x = 0 never occurs: r^2 - u != 0 since u is a
    non-square).
    """
    m = math.lcm(p, order)
    acc = CycloElt.zero(m)
    zp = m // p
    zo = m // order
    for r in range(p):
        x = (r * r - u) % p
        assert x != 0
        e = char_inv_values(x)
        acc = acc + CycloElt.zeta_power(m, (e * zo + r * n * zp) % m)
    return acc


# ----------------------------------------------------------------------
# complex embedding


def complex_embed(a: TowerElt, bits: int = 128):
    """Embed into C using the tower's declared embedding.

    Returns (value, radius): `value` is an mpmath complex computed with
    `bits + 48` working bits; `radius` bounds |value - true| by combining a
    roundoff-accumulation estimate with a recomputation at a higher
    precision (the two evaluations must agree within the reported radius,
    which is asserted).
    """
    v1 = _embed_at(a, bits + 48)
    v2 = _embed_at(a, bits + 80)
    diff = abs(v1 - v2)
    scale = max(1.0, float(abs(v2)))
    radius = max(float(diff) * 4.0, scale * 2.0 ** (-(bits + 16)))
    assert float(diff) <= radius
    return v2, radius


def _embed_at(a: TowerElt, prec: int):
    t = a.tower
    with mpmath.workprec(prec):
        zeta = mpmath.e ** (2j * mpmath.pi * t.embedding_exponent / t.m)
        zpows = [mpmath.mpc(1)]
        for _ in range(euler_phi(t.m) - 1):
            zpows.append(zpows[-1] * zeta)

        def emb_c(c: CycloElt):
            return mpmath.fsum((mpmath.mpf(x.numerator) / x.denominator) * z
                               for x, z in zip(c.c, zpows) if x != 0) + 0j

        base_vals = [emb_c(c) for c in a.coeffs]
        if t.ext_degree == 1:
            return base_vals[0]
        poly = [emb_c(e) for e in t.ext_poly] + [mpmath.mpc(1)]
        roots = mpmath.polyroots(list(reversed(poly)), maxsteps=200,
                                 extraprec=prec // 2)
        roots = sorted(roots, key=lambda z: (mpmath.re(z), mpmath.im(z)))
        alpha = roots[t.ext_root_index]
        out = mpmath.mpc(0)
        for c in reversed(base_vals):
            out = out * alpha + c
        return out
