"""Matrix groups over F_p, their characters, and two explicit models.

Conventions, fixed once for the whole package:

* nu is the generator character of F_p^* sending the smallest primitive
  root g0 to zeta_(p-1); mu = nu^e.
* the nonsplit torus is T' = {(a, b*u; b, a)}, u a fixed non-square; its
  projective quotient T'/Z is cyclic of order p+1, and theta = chi^e where
  chi sends a fixed generator (the lexicographically least (a, b)) to
  zeta_(p+1).
* principal series: basis e_r, r in P1 = F_p + {inf};
  shifts (1 k; 0 1) move e_r to e_(r+k) and fix e_inf;
  diag(a, 1) maps e_r to mu(a)^-1 e_(ar) and e_inf to mu(a) e_inf;
  w = (0 1; -1 0) maps e_r to mu(r)^2 e_(-1/r) and swaps e_0, e_inf
  (the square rather than its inverse is what makes the three formulas
  compose associatively; see test_ps_action_is_group_action).
* cuspidal: functions on F_p modulo constants; the Borel acts by moebius
  permutation of the arguments, and
  w phi = -(1/p) sum_y theta(y) (N(y), Tr(y); 0, 1) phi over y in the
  nonzero part of the quadratic extension realized inside 2x2 matrices.
  Stored coordinates are e_1..e_(p-1) with e_0 = -(e_1 + ... + e_(p-1)).

Scalar matrices act trivially in both models, so all of G = GL_2 may be
fed to the action functions even though only the PGL_2 image matters.
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

from .exactfield import CycloElt, cyclo_reduce

INF = "inf"


def smallest_primitive_root(p):
    for g in range(2, p):
        seen, x = set(), 1
        for _ in range(p - 1):
            x = x * g % p
            seen.add(x)
        if len(seen) == p - 1:
            return g
    raise ValueError(f"{p} is not prime")


def default_nonsquare(p):
    """Least positive non-square mod p (the package-wide default u)."""
    for u in range(2, p):
        if pow(u, (p - 1) // 2, p) == p - 1:
            return u
    raise ValueError(f"no non-square mod {p}")


class GL2Elt:
    __slots__ = ("p", "a", "b", "c", "d")

    def __init__(self, p, a, b, c, d):
        self.p = p
        self.a, self.b, self.c, self.d = a % p, b % p, c % p, d % p
        if (self.a * self.d - self.b * self.c) % p == 0:
            raise ValueError("singular matrix")

    def det(self):
        return (self.a * self.d - self.b * self.c) % self.p

    def __mul__(self, o):
        p = self.p
        return GL2Elt(p, self.a * o.a + self.b * o.c, self.a * o.b + self.b * o.d,
                      self.c * o.a + self.d * o.c, self.c * o.b + self.d * o.d)

    def inv(self):
        p = self.p
        di = pow(self.det(), -1, p)
        return GL2Elt(p, di * self.d, -di * self.b, -di * self.c, di * self.a)

    def tuple(self):
        return (self.a, self.b, self.c, self.d)

    def proj_tuple(self):
        """Canonical representative of the class mod scalars."""
        for x in (self.a, self.b, self.c, self.d):
            if x:
                xi = pow(x, -1, self.p)
                return (self.a * xi % self.p, self.b * xi % self.p,
                        self.c * xi % self.p, self.d * xi % self.p)
        raise AssertionError

    def moebius(self, r):
        """Action on P1: r in F_p or INF."""
        p = self.p
        if r == INF:
            num, den = self.a, self.c
        else:
            num, den = self.a * r + self.b, self.c * r + self.d
        if den % p == 0:
            return INF
        return num * pow(den, -1, p) % p

    def __eq__(self, o):
        return isinstance(o, GL2Elt) and self.p == o.p and self.tuple() == o.tuple()

    def __hash__(self):
        return hash((self.p,) + self.tuple())

    def __repr__(self):
        return f"[{self.a} {self.b}; {self.c} {self.d}] mod {self.p}"


def w_elt(p):
    return GL2Elt(p, 0, 1, -1, 0)


def subgroup_elements(kind, p, u=None):
    """Elements of Z, U, B, T, N, T', N' or G inside GL_2(F_p)."""
    if u is None and kind in ("T'", "N'"):
        u = default_nonsquare(p)
    units = [x for x in range(1, p)]
    if kind == "Z":
        return [GL2Elt(p, z, 0, 0, z) for z in units]
    if kind == "U":
        return [GL2Elt(p, 1, x, 0, 1) for x in range(p)]
    if kind == "B":
        return [GL2Elt(p, a, b, 0, d) for a in units for d in units
                for b in range(p)]
    if kind == "T":
        return [GL2Elt(p, a, 0, 0, d) for a in units for d in units]
    if kind == "N":
        t = subgroup_elements("T", p)
        return t + [m * w_elt(p) for m in t]
    if kind == "T'":
        return [GL2Elt(p, a, b * u, b, a) for a in range(p) for b in range(p)
                if (a * a - u * b * b) % p != 0]
    if kind == "N'":
        t = subgroup_elements("T'", p, u)
        eps = GL2Elt(p, 1, 0, 0, -1)
        return t + [m * eps for m in t]
    if kind == "G":
        return [GL2Elt(p, a, b, c, d)
                for a in range(p) for b in range(p)
                for c in range(p) for d in range(p)
                if (a * d - b * c) % p != 0]
    raise ValueError(kind)


def projective_elements(kind, p, u=None):
    """Distinct images in PGL_2, one GL2Elt per class."""
    seen = {}
    for m in subgroup_elements(kind, p, u):
        seen.setdefault(m.proj_tuple(), m)
    return list(seen.values())


def tprime_coset_decomposition(p, u):
    """The p+1 products (1 r; 0 1) w (1 r; 0 r^2-u) plus the identity.

    Their multiset of projective classes equals T'/Z; each product also
    collapses to the torus matrix (r, u; 1, r), which is asserted.
    """
    out = [GL2Elt(p, 1, 0, 0, 1)]
    w = GL2Elt(p, 0, -1, 1, 0)
    for r in range(p):
        m = GL2Elt(p, 1, r, 0, 1) * w * GL2Elt(p, 1, r, 0, r * r - u)
        assert m.proj_tuple() == GL2Elt(p, r, u, 1, r).proj_tuple()
        out.append(m)
    return out


# ----------------------------------------------------------------------
# characters


@lru_cache(maxsize=None)
def _dlog_table(p):
    g = smallest_primitive_root(p)
    t, x = {}, 1
    for i in range(p - 1):
        t[x] = i
        x = x * g % p
    return t


class CharacterMu:
    """mu = nu^e on F_p^* (equivalently on T/Z via diag(r, 1))."""

    def __init__(self, p, e):
        self.p = p
        self.e = e % (p - 1)

    @property
    def order(self):
        return (self.p - 1) // math.gcd(self.e, self.p - 1)

    def is_even(self):
        return self.e % 2 == 0

    def conductor(self):
        return self.order if self.order > 1 else 1

    def exponent(self, x):
        """t with mu(x) = zeta_order^t."""
        d = _dlog_table(self.p)[x % self.p]
        g = math.gcd(self.e, self.p - 1)
        return (self.e // g) * d % self.order

    def value(self, x, m=None):
        """mu(x) as a CycloElt of conductor m (default: the order)."""
        m = m or self.conductor()
        step = m // self.conductor() if self.conductor() > 1 else m
        assert self.conductor() == 1 or m % self.conductor() == 0
        if self.conductor() == 1:
            return CycloElt.one(m)
        return CycloElt.zeta_power(m, self.exponent(x) * step)

    def inverse(self):
        return CharacterMu(self.p, -self.e)

    def __repr__(self):
        return f"CharacterMu(p={self.p}, e={self.e})"


def omega_char(p):
    """The quadratic character as a CharacterMu."""
    return CharacterMu(p, (p - 1) // 2)


@lru_cache(maxsize=None)
def _tprime_quotient_dlog(p, u):
    """Generator (lex-least) and dlog table of T'/Z, coset reps normalized.

    Cosets: (1, 0) for the scalars; (a/b, 1) when b != 0.
    """
    def norm(a, b):
        if b % p == 0:
            return (1, 0)
        return (a * pow(b, -1, p) % p, 1)

    def mul(x, y):
        # (a1 + b1 s)(a2 + b2 s) with s^2 = u
        a = (x[0] * y[0] + u * x[1] * y[1]) % p
        b = (x[0] * y[1] + x[1] * y[0]) % p
        return (a, b)

    best = None
    for a in range(p):
        for b in range(p):
            if (a * a - u * b * b) % p == 0:
                continue
            x, k = (a, b), 1
            cur = x
            while norm(*cur) != (1, 0):
                cur = mul(cur, x)
                k += 1
            if k == p + 1:
                best = (a, b)
                break
        if best:
            break
    assert best is not None
    table = {}
    cur = (1, 0)
    for i in range(p + 1):
        table[norm(*cur)] = i
        cur = mul(cur, best)
    assert len(table) == p + 1
    return best, table


class CharacterTheta:
    """theta = chi^e on T'/Z, chi fixed by the lex-least generator."""

    def __init__(self, p, e, u=None):
        self.p = p
        self.u = u if u is not None else default_nonsquare(p)
        self.e = e % (p + 1)

    @property
    def generator(self):
        return _tprime_quotient_dlog(self.p, self.u)[0]

    @property
    def order(self):
        return (self.p + 1) // math.gcd(self.e, self.p + 1)

    def is_odd(self):
        return self.e % 2 == 1

    def conductor(self):
        return self.order if self.order > 1 else 1

    def exponent(self, a, b):
        """t with theta(a + b sqrt(u)) = zeta_order^t."""
        _, table = _tprime_quotient_dlog(self.p, self.u)
        key = (1, 0) if b % self.p == 0 else (a * pow(b, -1, self.p) % self.p, 1)
        d = table[key]
        g = math.gcd(self.e, self.p + 1)
        return (self.e // g) * d % self.order

    def value(self, a, b, m=None):
        m = m or self.conductor()
        if self.conductor() == 1:
            return CycloElt.one(m)
        assert m % self.conductor() == 0
        step = m // self.conductor()
        return CycloElt.zeta_power(m, self.exponent(a, b) * step)

    def inverse(self):
        return CharacterTheta(self.p, -self.e, self.u)

    def __repr__(self):
        return f"CharacterTheta(p={self.p}, e={self.e}, u={self.u})"


# ----------------------------------------------------------------------
# principal series model


class RepVector:
    """Vector in one of the two models, coefficients CycloElt.

    model 'ps':   coeffs over F_p + {INF}, all p+1 stored.
    model 'cusp': coeffs over 1..p-1 (e_0 eliminated by sum e_r = 0).
    """

    __slots__ = ("model", "p", "m", "coeffs")

    def __init__(self, model, p, m, coeffs):
        self.model = model
        self.p = p
        self.m = m  # cyclotomic conductor of the coefficients
        self.coeffs = dict(coeffs)

    def support(self):
        if self.model == "ps":
            return [INF] + list(range(self.p))
        return list(range(1, self.p))

    @classmethod
    def zero(cls, model, p, m):
        z = CycloElt.zero(m)
        if model == "ps":
            return cls(model, p, m, {r: z for r in [INF] + list(range(p))})
        return cls(model, p, m, {r: z for r in range(1, p)})

    @classmethod
    def basis_ps(cls, p, m, r):
        v = cls.zero("ps", p, m)
        v.coeffs[r] = CycloElt.one(m)
        return v

    @classmethod
    def basis_cusp(cls, p, m, r):
        """Image of e_r (r in F_p) in the canonical coordinates."""
        v = cls.zero("cusp", p, m)
        one = CycloElt.one(m)
        if r % p == 0:
            for s in range(1, p):
                v.coeffs[s] = -one
        else:
            v.coeffs[r % p] = one
        return v

    def __add__(self, o):
        assert self.model == o.model and self.p == o.p and self.m == o.m
        return RepVector(self.model, self.p, self.m,
                         {r: self.coeffs[r] + o.coeffs[r] for r in self.coeffs})

    def __sub__(self, o):
        assert self.model == o.model and self.p == o.p and self.m == o.m
        return RepVector(self.model, self.p, self.m,
                         {r: self.coeffs[r] - o.coeffs[r] for r in self.coeffs})

    def __mul__(self, scalar):
        return RepVector(self.model, self.p, self.m,
                         {r: c * scalar for r, c in self.coeffs.items()})

    __rmul__ = __mul__

    def is_zero(self):
        return all(c.is_zero() for c in self.coeffs.values())

    def __eq__(self, o):
        return (isinstance(o, RepVector) and self.model == o.model
                and self.p == o.p and self.m == o.m and self.coeffs == o.coeffs)

    def __repr__(self):
        nz = {r: c for r, c in self.coeffs.items() if not c.is_zero()}
        return f"RepVector({self.model}, p={self.p}, {len(nz)} nonzero)"


def _ps_shift(vec, k):
    out = {INF: vec.coeffs[INF]}
    for r in range(vec.p):
        out[(r + k) % vec.p] = vec.coeffs[r]
    return RepVector("ps", vec.p, vec.m, out)


def _ps_diag(vec, a, mu):
    # diag(a, 1): e_r -> mu(a)^-1 e_(ar), e_inf -> mu(a) e_inf
    p, m = vec.p, vec.m
    va = mu.value(a, m)
    vai = mu.inverse().value(a, m)
    out = {INF: vec.coeffs[INF] * va}
    for r in range(p):
        out[a * r % p] = vec.coeffs[r] * vai
    return RepVector("ps", p, m, out)


def _ps_w(vec, mu):
    # w: e_0 <-> e_inf, e_r -> mu(r)^2 e_(-1/r).  The exponent +2 (rather
    # than -2) is forced: with -2 the composite of these generator moves
    # fails the relation w u(k) w = u(-1/k) t(1/k^2) w u(-1/k) mod Z.
    p, m = vec.p, vec.m
    out = {INF: vec.coeffs[0], 0: vec.coeffs[INF]}
    m2 = CharacterMu(p, 2 * mu.e)
    for r in range(1, p):
        out[-pow(r, -1, p) % p] = vec.coeffs[r] * m2.value(r, m)
    return RepVector("ps", p, m, out)


def ps_action(g, vec, mu):
    """Action of g in GL_2 on a principal-series vector for mu."""
    assert vec.model == "ps" and g.p == vec.p
    p = g.p
    if g.c % p == 0:
        # (a b; 0 d) = shift(b/d) diag(a/d, 1) scalar(d)
        di = pow(g.d, -1, p)
        return _ps_shift(_ps_diag(vec, g.a * di % p, mu), g.b * di % p)
    # g = u(a/c) t(det/c^2) w u(d/c) scalar(-c): apply right-to-left
    ci = pow(g.c, -1, p)
    out = _ps_shift(vec, g.d * ci % p)
    out = _ps_w(out, mu)
    out = _ps_diag(out, g.det() * ci * ci % p, mu)
    return _ps_shift(out, g.a * ci % p)


# ----------------------------------------------------------------------
# cuspidal model


def _cusp_raw(vec):
    """Coefficients on all of F_p with coefficient 0 at r = 0."""
    raw = {0: CycloElt.zero(vec.m)}
    raw.update(vec.coeffs)
    return raw


def _cusp_canonical(p, m, raw):
    c0 = raw[0]
    return RepVector("cusp", p, m, {r: raw[r] - c0 for r in range(1, p)})


def _cusp_borel(vec, a, b, d):
    # (a b; 0 d) e_r = e_((ar+b)/d)
    p = vec.p
    raw = _cusp_raw(vec)
    di = pow(d, -1, p)
    out = {(a * r + b) * di % p: raw[r] for r in range(p)}
    return _cusp_canonical(p, vec.m, out)


@lru_cache(maxsize=None)
def _cusp_w_multipliers(p, u, e):
    """For w: coefficient array: w e_r = -(1/p) sum_s W[(s - ?)] ... precomputed
    as a table M with w e_r = -(1/p) sum_s M[r][s] e_s; here M[r][s] =
    sum over y with N(y) r + Tr(y) = s of theta(y), stored as exponent
    multisets to stay conductor-free."""
    theta = CharacterTheta(p, e, u)
    d = theta.conductor()
    table = [[[0] * max(d, 1) for _ in range(p)] for _ in range(p)]
    for a in range(p):
        for b in range(p):
            if (a * a - u * b * b) % p == 0:
                continue
            ny = (a * a - u * b * b) % p
            tr = 2 * a % p
            t = theta.exponent(a, b) if d > 1 else 0
            for r in range(p):
                s = (ny * r + tr) % p
                table[r][s][t] += 1
    return table


def cusp_action(g, vec, theta):
    """Action of g in GL_2 on a cuspidal-model vector for theta."""
    assert vec.model == "cusp" and g.p == vec.p
    p, m = g.p, vec.m
    if g.c % p == 0:
        return _cusp_borel(vec, g.a, g.b, g.d)
    # same Bruhat word as the principal series
    ci = pow(g.c, -1, p)
    out = _cusp_borel(vec, 1, g.d * ci % p, 1)
    out = _cusp_w(out, theta)
    out = _cusp_borel(out, g.det() * ci * ci % p, 0, 1)
    return _cusp_borel(out, 1, g.a * ci % p, 1)


def _cusp_w(vec, theta):
    p, m = vec.p, vec.m
    d = theta.conductor()
    assert d == 1 or m % d == 0
    step = m // d if d > 1 else 0
    table = _cusp_w_multipliers(p, theta.u, theta.e)
    zpow = [CycloElt.zeta_power(m, t * step % m) for t in range(max(d, 1))]
    raw_in = _cusp_raw(vec)
    raw_out = {}
    phi = len(CycloElt.zero(m).c)
    for s in range(p):
        acc = [Fraction(0)] * phi
        for r in range(p):
            cr = raw_in[r]
            if cr.is_zero():
                continue
            col = table[r][s]
            for t, cnt in enumerate(col):
                if cnt:
                    prod = cr * zpow[t] * cnt
                    for i, x in enumerate(prod.c):
                        acc[i] += x
        raw_out[s] = CycloElt(m, acc, reduced=True) * Fraction(-1, p)
    return _cusp_canonical(p, m, raw_out)


# ----------------------------------------------------------------------
# invariant vectors and brute-force dimension counts


def invariant_vector_ps(mu, u):
    """e_inf + sum_r mu^-1(r^2 - u) e_r: the T'-fixed line in V_mu."""
    p = mu.p
    m = mu.conductor()
    mi = mu.inverse()
    v = RepVector.zero("ps", p, m)
    v.coeffs[INF] = CycloElt.one(m)
    for r in range(p):
        v.coeffs[r] = mi.value((r * r - u) % p, m)
    return v


def cusp_series_multipliers(theta, r):
    """w_s = p [s=r] - sum over (m, y) with index s of theta(y), s = 0..p-1.

    index(m, y) = (m + r) N(y) / (m^2 - u) + Tr(y) + m over F_p, y running
    through F_(p^2)^*.  These are the coefficients of the formal combination
    p e_r - sum theta(y) e_index before any model normalization; exact
    elements of Z[theta].  Accumulates integer histograms per zeta-exponent
    so the double loop stays in machine arithmetic.
    """
    p, u = theta.p, theta.u
    mco = theta.conductor()
    ys = []
    for a in range(p):
        for b in range(p):
            ny = (a * a - u * b * b) % p
            if ny == 0:
                continue
            ys.append((ny, 2 * a % p, theta.exponent(a, b)))
    counts = [[0] * mco for _ in range(p)]
    for mm in range(p):
        den = pow(mm * mm - u, -1, p)
        lead = (mm + r) * den % p
        for ny, tra, ex in ys:
            counts[(lead * ny + tra + mm) % p][ex] += 1
    out = []
    for s in range(p):
        w = CycloElt(mco, [-c for c in counts[s]])
        if s == r % p:
            w = w + p
        out.append(w)
    return out


def invariant_vector_cusp(theta, r):
    """p e_r - sum_(m,y) theta(y) e_idx: the T'-fixed line in V_theta.

    idx = (m + r) N(y) / (m^2 - u) + Tr(y) + m; may vanish for bad r, in
    which case try another r.
    """
    p = theta.p
    mco = theta.conductor()
    w = cusp_series_multipliers(theta, r)
    return _cusp_canonical(p, mco, dict(enumerate(w)))


def _model_trace(g, model, char):
    """Trace of the action of g on the chosen model (exact CycloElt)."""
    p = char.p
    m = char.conductor()
    tr = CycloElt.zero(m)
    if model == "ps":
        for r in [INF] + list(range(p)):
            img = ps_action(g, RepVector.basis_ps(p, m, r), char)
            tr = tr + img.coeffs[r]
    else:
        for r in range(1, p):
            img = cusp_action(g, RepVector.basis_cusp(p, m, r), char)
            tr = tr + img.coeffs[r]
    return tr


def _perm_trace(g, twist_omega):
    """Trace on functions(P1)/constants, optionally twisted by omega(det)."""
    p = g.p
    fixed = sum(1 for r in [INF] + list(range(p)) if g.moebius(r) == r)
    t = Fraction(fixed - 1)
    if twist_omega and pow(g.det(), (p - 1) // 2, p) == p - 1:
        t = -t
    return t


def invariant_dims_bruteforce(p, u=None):
    """Averaged-character dimensions of H-invariants for every irreducible.

    Returns {(repname, subgroup): dim} over subgroups T, N, T', N' for the
    Steinberg, its twist, all V_mu (e up to inversion) and all V_theta.
    Exact arithmetic throughout; intended for small p.
    """
    if u is None:
        u = default_nonsquare(p)
    subs = {k: projective_elements(k, p, u) for k in ("T", "N", "T'", "N'")}
    out = {}

    def put(name, traces):
        for kind, elts in subs.items():
            s = sum(traces(g) for g in elts)
            if isinstance(s, Fraction):
                val = s / len(elts)
            else:
                val = s * Fraction(1, len(elts))
                assert val.is_rational()
                val = val.rational_value()
            assert val.denominator == 1
            out[(name, kind)] = int(val)

    put("st", lambda g: _perm_trace(g, False))
    put("st_omega", lambda g: _perm_trace(g, True))
    for e in range(1, p - 1):
        mu = CharacterMu(p, e)
        if mu.order <= 2 or min(e, (p - 1 - e) % (p - 1)) != e:
            continue
        put(f"ps_{e}", lambda g, mu=mu: _model_trace(g, "ps", mu))
    for e in range(1, p + 1):
        th = CharacterTheta(p, e, u)
        if th.order <= 2 or min(e, (p + 1 - e) % (p + 1)) != e:
            continue
        put(f"cusp_{e}", lambda g, th=th: _model_trace(g, "cusp", th))
    return out


def expected_invariant_dims(p):
    """The predicted table: Steinberg vs everything else, parity rules."""
    out = {}
    out.update({("st", "T"): 2, ("st", "N"): 1, ("st", "T'"): 0,
                ("st", "N'"): 0})
    nrm = 1 if p % 4 == 1 else 0
    out.update({("st_omega", "T"): 1, ("st_omega", "N"): nrm,
                ("st_omega", "T'"): 1, ("st_omega", "N'"): nrm})
    for e in range(1, p - 1):
        mu = CharacterMu(p, e)
        if mu.order <= 2 or min(e, (p - 1 - e) % (p - 1)) != e:
            continue
        n = 1 if mu.is_even() else 0
        out.update({(f"ps_{e}", "T"): 1, (f"ps_{e}", "N"): n,
                    (f"ps_{e}", "T'"): 1, (f"ps_{e}", "N'"): n})
    for e in range(1, p + 1):
        th = CharacterTheta(p, e)
        if th.order <= 2 or min(e, (p + 1 - e) % (p + 1)) != e:
            continue
        n = 1 if th.is_odd() else 0
        out.update({(f"cusp_{e}", "T"): 1, (f"cusp_{e}", "N"): n,
                    (f"cusp_{e}", "T'"): 1, (f"cusp_{e}", "N'"): n})
    return out
