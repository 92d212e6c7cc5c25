"""Truncated q-expansions with exact tower coefficients.

A QSeries stores a_1..a_N of sum a_n q^n, q = e^(2 pi i tau / p), all a_n
in a single Tower.  a_0 is structurally zero (everything in scope is a cusp
form) and precision is explicit data: sums and differences keep min(N1, N2)
coefficients, products keep min(N1, N2) + 1 (exact because a_0 = 0), and no
operation ever fabricates a coefficient it cannot determine.

Weight is bookkeeping only (2 for basis coordinates, 4 for their products);
nothing here checks modularity.
"""
from __future__ import annotations

from fractions import Fraction

from .exactfield import (CycloElt, GaloisAction, Subfield, Tower, TowerElt,
                         eta_coordinates, from_eta_coordinates, galois_apply,
                         in_subfield, rewrite_conductor)


class DescentFailure(ValueError):
    """A coefficient is not fixed by the target subfield's stabilizer.

    `index` is the exponent n of the first offending q^n.
    """

    def __init__(self, index, message=None):
        self.index = index
        super().__init__(message or f"coefficient of q^{index} not in subfield")


class QSeries:
    __slots__ = ("p", "tower", "coeffs", "weight")

    def __init__(self, p, tower, coeffs, weight=2):
        self.p = p
        self.tower = tower
        self.coeffs = tuple(coeffs)
        self.weight = weight
        for a in self.coeffs:
            if not isinstance(a, TowerElt) or a.tower != tower:
                raise ValueError("coefficient outside the declared tower")

    @classmethod
    def zeros(cls, p, tower, n, weight=2):
        return cls(p, tower, [tower.zero()] * n, weight)

    @property
    def precision(self):
        return len(self.coeffs)

    def coeff(self, n):
        """a_n, 1-indexed.  Asking past the stored precision is an error."""
        if not 1 <= n <= len(self.coeffs):
            raise IndexError(f"coefficient {n} of a precision-{len(self.coeffs)} series")
        return self.coeffs[n - 1]

    def truncate(self, n):
        if n > len(self.coeffs):
            raise ValueError("cannot extend precision by truncating")
        return QSeries(self.p, self.tower, self.coeffs[:n], self.weight)

    def is_zero(self):
        return all(a.is_zero() for a in self.coeffs)

    def _match(self, other):
        if self.p != other.p or self.tower != other.tower:
            raise ValueError("series live over different levels or towers")

    def __eq__(self, other):
        if not isinstance(other, QSeries):
            return NotImplemented
        return (self.p == other.p and self.tower == other.tower
                and self.weight == other.weight and self.coeffs == other.coeffs)

    def __add__(self, other):
        self._match(other)
        if self.weight != other.weight:
            raise ValueError("cannot add series of different weights")
        n = min(len(self.coeffs), len(other.coeffs))
        return QSeries(self.p, self.tower,
                       [a + b for a, b in zip(self.coeffs[:n], other.coeffs[:n])],
                       self.weight)

    def __neg__(self):
        return QSeries(self.p, self.tower, [-a for a in self.coeffs], self.weight)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        """Multiply every coefficient by a scalar (TowerElt, CycloElt, or rational)."""
        if isinstance(c, CycloElt):
            c = self.tower.embed(c)
        elif not isinstance(c, TowerElt):
            c = self.tower.rational(Fraction(c))
        return QSeries(self.p, self.tower, [a * c for a in self.coeffs], self.weight)

    def __repr__(self):
        return (f"QSeries(p={self.p}, N={len(self.coeffs)}, weight={self.weight}, "
                f"tower={self.tower!r})")


def series_mul(f, g):
    """Cauchy product, truncated to min(N1, N2) + 1 coefficients.

    Since a_0 = b_0 = 0, c_n = sum_{i=1}^{n-1} a_i b_{n-i} only involves
    indices <= n - 1, so every kept coefficient is exact.
    """
    f._match(g)
    n = min(len(f.coeffs), len(g.coeffs)) + 1
    out = [f.tower.zero() for _ in range(n)]
    for i, a in enumerate(f.coeffs, start=1):
        if i >= n or a.is_zero():
            continue
        for j, b in enumerate(g.coeffs[:n - i], start=1):
            out[i + j - 1] = out[i + j - 1] + a * b
    return QSeries(f.p, f.tower, out, f.weight + g.weight)


def series_twist_char(h, mu):
    """sum mu(n) a_n q^n, with mu(n) = 0 when p | n."""
    if mu.p != h.p:
        raise ValueError("character and series have different p")
    m = h.tower.m
    if mu.conductor() > 1 and m % mu.conductor() != 0:
        raise ValueError(f"tower conductor {m} lacks the order-{mu.order} values")
    out = []
    for n, a in enumerate(h.coeffs, start=1):
        if n % h.p == 0:
            out.append(h.tower.zero())
        else:
            out.append(a * h.tower.embed(mu.value(n, m)))
    return QSeries(h.p, h.tower, out, h.weight)


def series_zeta_shift(f, r):
    """a_n -> a_n zeta_p^(rn)  (the series tau -> tau + r in the q variable)."""
    m = f.tower.m
    if m % f.p != 0:
        raise ValueError(f"tower conductor {m} does not contain zeta_{f.p}")
    step = m // f.p
    out = [a * f.tower.zeta(step * (r * n % f.p))
           for n, a in enumerate(f.coeffs, start=1)]
    return QSeries(f.p, f.tower, out, f.weight)


def level_lower_map(coeffs, p, tower, weight=2):
    """Reindex sum a_n q1^(pn) (level p^2, q1 = e^(2 pi i tau)) as sum a_n q^n.

    The coefficient list is untouched; only the meaning of the exponent
    changes, via q = e^(2 pi i tau / p).  Input may be TowerElt, CycloElt at
    the tower's conductor, or rational entries.
    """
    lifted = []
    for a in coeffs:
        if isinstance(a, TowerElt):
            lifted.append(a)
        elif isinstance(a, CycloElt):
            lifted.append(tower.embed(a))
        else:
            lifted.append(tower.rational(Fraction(a)))
    return QSeries(p, tower, lifted, weight)


def series_descend_subfield(f, sub, actions=None):
    """Check every coefficient lies in `sub` and rewrite where possible.

    For a pure cyclotomic tower the coefficients are re-expressed at
    conductor sub.mod (kept in the ambient power basis when sub is the real
    part at the full conductor, where no smaller power basis exists).  For
    a tower with an extension step the membership check runs and the
    ambient representation is kept; pass `actions` (GaloisAction list) when
    the stabilizer is supposed to move the extension generator too.

    Raises DescentFailure carrying the first offending index.
    """
    t = f.tower
    if t.m % sub.mod != 0:
        raise ValueError(f"Q(zeta_{sub.mod}) is not inside Q(zeta_{t.m})")
    if actions is not None:
        for n, a in enumerate(f.coeffs, start=1):
            for act in actions:
                if galois_apply(act, a) != a:
                    raise DescentFailure(n)
        return QSeries(f.p, t, f.coeffs, f.weight)
    keep_ext = t.ext_degree > 1
    for n, a in enumerate(f.coeffs, start=1):
        if not in_subfield(a, sub, keep_ext=keep_ext):
            raise DescentFailure(n)
    if keep_ext or sub.mod == t.m:
        return QSeries(f.p, t, f.coeffs, f.weight)
    t2 = Tower(sub.mod)
    out = [t2.embed(rewrite_conductor(a.base_part(), sub.mod)) for a in f.coeffs]
    return QSeries(f.p, t2, out, f.weight)


# ----------------------------------------------------------------------
# JSON payloads


def _rat(s):
    return Fraction(s)


def series_to_payload(f, eta=False):
    """JSON-ready dict.  With eta=True the coefficients are written in the
    eta_j = zeta^j + zeta^-j basis of Q(zeta_p)^+ (requires a pure
    cyclotomic tower at prime conductor p with real coefficients)."""
    d = {"p": f.p, "precision": len(f.coeffs), "weight": f.weight}
    if eta:
        if f.tower.ext_degree != 1 or f.tower.m != f.p:
            raise ValueError("eta output needs a plain Q(zeta_p) tower")
        d["field"] = {"conductor": f.p, "real": True, "basis": "eta"}
        d["coeffs"] = [[str(v) for v in eta_coordinates(a.base_part(), f.p)]
                       for a in f.coeffs]
    else:
        d["field"] = f.tower.to_descriptor()
        d["coeffs"] = [[[str(v) for v in c.c] for c in a.coeffs]
                       for a in f.coeffs]
    return d


def series_from_payload(d):
    p = int(d["p"])
    fld = d["field"]
    weight = int(d.get("weight", 2))
    if fld.get("basis") == "eta":
        t = Tower(int(fld["conductor"]))
        coeffs = [t.embed(from_eta_coordinates([_rat(v) for v in row], t.m))
                  for row in d["coeffs"]]
    else:
        t = Tower.from_descriptor(fld)
        coeffs = [TowerElt(t, [CycloElt(t.m, [_rat(v) for v in c], reduced=True)
                               for c in row])
                  for row in d["coeffs"]]
    f = QSeries(p, t, coeffs, weight)
    if len(f.coeffs) != int(d["precision"]):
        raise ValueError("payload precision disagrees with coefficient count")
    return f
