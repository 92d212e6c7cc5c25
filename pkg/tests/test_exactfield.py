import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from cartanforms.exactfield import (
    CycloElt, GaloisAction, Subfield, SubfieldMismatch, Tower, TowerElt,
    complex_embed, cyclotomic_poly, cyclo_reduce, eta_coordinates, euler_phi,
    from_eta_coordinates, galois_apply, gauss_sum, in_subfield, relative_trace,
    rewrite_conductor, salie_sum, tower_inv, trace_to_base,
)

# independent numeric oracle: evaluate a CycloElt directly with mpmath,
# bypassing complex_embed entirely
def numeric(c: CycloElt, prec=120):
    with mpmath.workprec(prec):
        z = mpmath.e ** (2j * mpmath.pi / c.m)
        return sum(mpmath.mpf(x.numerator) / x.denominator * z ** i
                   for i, x in enumerate(c.c))


KNOWN_PHI = {
    1: (-1, 1),
    2: (1, 1),
    4: (1, 0, 1),
    5: (1, 1, 1, 1, 1),
    8: (1, 0, 0, 0, 1),
    9: (1, 0, 0, 1, 0, 0, 1),
    12: (1, 0, -1, 0, 1),
    15: (1, -1, 0, 1, -1, 1, 0, -1, 1),
    24: (1, 0, 0, 0, -1, 0, 0, 0, 1),
}


@pytest.mark.parametrize("m,coeffs", sorted(KNOWN_PHI.items()))
def test_cyclotomic_poly_known(m, coeffs):
    assert cyclotomic_poly(m) == coeffs


@pytest.mark.parametrize("m", [7, 20, 36, 51, 153, 168])
def test_cyclotomic_poly_roots(m):
    # every primitive m-th root of unity must be a root, numerically
    cp = cyclotomic_poly(m)
    with mpmath.workprec(100):
        for k in (1, next(j for j in range(2, m) if math.gcd(j, m) == 1)):
            z = mpmath.e ** (2j * mpmath.pi * k / m)
            v = sum(c * z ** i for i, c in enumerate(cp))
            assert abs(v) < 1e-20


def test_cyclo_reduce_high_degree():
    # zeta_12^13 == zeta_12, via a degree far above the table
    v = cyclo_reduce([0] * 37 + [1], 12)  # zeta^37 = zeta^1
    assert v == (Fraction(0), Fraction(1), Fraction(0), Fraction(0))


def test_cyclo_mul_against_numeric():
    a = CycloElt(20, [1, -2, 3, 0, 5, 1, 0, 2])
    b = CycloElt(20, [2, 1, 0, -1, 0, 0, 7, -3])
    c = a * b
    with mpmath.workprec(120):
        va, vb, vc = numeric(a), numeric(b), numeric(c)
        assert abs(va * vb - vc) < 1e-25


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(-9, 9), min_size=6, max_size=6),
       st.lists(st.integers(-9, 9), min_size=6, max_size=6))
def test_cyclo_ring_axioms(xs, ys):
    a = CycloElt(9, xs)
    b = CycloElt(9, ys)
    assert a + b == b + a
    assert a * b == b * a
    assert (a + b) * a == a * a + b * a


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(-9, 9), min_size=4, max_size=4))
def test_cyclo_inverse(xs):
    a = CycloElt(5, xs)
    if a.is_zero():
        return
    assert a * a.inverse() == CycloElt.one(5)


def test_galois_is_ring_hom():
    a = CycloElt(13, list(range(1, 13)))
    b = CycloElt(13, [3, 1, 4, 1, 5, 9, 2, 6, 5, 3, 5, 8])
    for k in (2, 5, 12):
        assert (a * b).galois(k) == a.galois(k) * b.galois(k)
        assert (a + b).galois(k) == a.galois(k) + b.galois(k)


def test_galois_full_sum_is_rational():
    a = CycloElt(11, [0, 1, 0, 0, 2, 0, 0, 0, 0, 0])
    tr = CycloElt.zero(11)
    for k in range(1, 11):
        tr = tr + a.galois(k)
    # trace of zeta^j (j != 0) over Q is -1
    assert tr == CycloElt.rational(11, -3)


def test_rewrite_conductor_basic():
    z15 = CycloElt.zeta_power(15, 3)  # = zeta_5
    assert rewrite_conductor(z15, 5) == CycloElt.zeta_power(5, 1)
    with pytest.raises(SubfieldMismatch):
        rewrite_conductor(CycloElt.zeta_power(15, 1), 5)


def test_rewrite_conductor_roundtrip():
    a = CycloElt(8, [1, 2, -3, 5])
    lifted = a.lift_conductor(24)
    assert rewrite_conductor(lifted, 8) == a


def test_tower_quadratic_arithmetic():
    # Q(zeta_5)(sqrt(13)): alpha^2 = 13
    m = 5
    ext = [CycloElt.rational(m, -13), CycloElt.zero(m)]  # x^2 - 13
    t = Tower(m, ext)
    alpha = t.gen()
    assert alpha * alpha == t.rational(13)
    x = t.zeta() + alpha * 2
    y = tower_inv(x)
    assert x * y == t.one()


def test_tower_inv_zero_divisor():
    from cartanforms.exactfield import ZeroDivisorError
    # x^2 - 1 is reducible: (alpha - 1) is a zero divisor
    t = Tower(7, [CycloElt.rational(7, -1), CycloElt.zero(7)])
    bad = t.gen() - t.one()
    with pytest.raises(ZeroDivisorError):
        tower_inv(bad)


def test_trace_to_base_numeric_oracle():
    # trace must equal the sum over the d root-embeddings of alpha
    m = 5
    t = Tower(m, [CycloElt.rational(m, -2), CycloElt.zeta_power(m, 1)],
              ext_root_index=0)
    # E(x) = x^2 + zeta*x - 2
    a = t.zeta(2) + t.gen() * t.zeta(1) + t.rational(Fraction(1, 3))
    tr = trace_to_base(a)
    with mpmath.workprec(120):
        z = mpmath.e ** (2j * mpmath.pi / m)
        disc = mpmath.sqrt(z * z + 8)
        roots = [(-z + disc) / 2, (-z - disc) / 2]
        want = sum(z ** 2 + r * z + mpmath.mpf(1) / 3 for r in roots)
        assert abs(numeric(tr) - want) < 1e-25


def test_relative_trace_cyclotomic():
    # Tr from Q(zeta_15) to Q(zeta_5): zeta_15 has trace zeta_5^2 * mu-ish;
    # oracle: direct Galois sum over k = 1, 11 (k = 1 mod 5, gcd(k,15)=1)
    a = CycloElt.zeta_power(15, 1)
    t = Tower(15)
    got = relative_trace(t.embed(a), Subfield(5))
    want = CycloElt.zero(15)
    for k in (1, 11):
        want = want + a.galois(k)
    assert got == rewrite_conductor(want, 5)


def test_relative_trace_real_subfield():
    # Tr to Q(zeta_5)^+ out of Q(zeta_5): zeta + zeta^-1 = eta_1
    t = Tower(5)
    got = relative_trace(t.zeta(), Subfield(5, real=True))
    assert got == CycloElt(5, [0, 1, 0, 0]) + CycloElt.zeta_power(5, 4)
    ec = eta_coordinates(got, 5)
    assert ec == [1, 0]


def test_in_subfield():
    t = Tower(20)
    assert in_subfield(t.zeta(4), Subfield(5))      # zeta_20^4 = zeta_5
    assert not in_subfield(t.zeta(1), Subfield(5))
    real = t.zeta(1) + t.zeta(-1)
    assert in_subfield(real, Subfield(20, real=True))


def test_eta_roundtrip():
    p = 17
    y = [Fraction(k * k - 3, 2) for k in range(8)]
    a = from_eta_coordinates(y, p)
    assert eta_coordinates(a, p) == y


def test_eta_rejects_non_real():
    with pytest.raises(SubfieldMismatch):
        eta_coordinates(CycloElt.zeta_power(7, 1), 7)


def test_gauss_sum_magnitude():
    # tau(chi) tau(chi-bar) = chi(-1) p for primitive chi mod p
    for p, g in ((5, 2), (13, 2)):
        order = p - 1
        dlog = {pow(g, i, p): i for i in range(p - 1)}
        tau = gauss_sum(p, lambda x: dlog[x] % order, order)
        taubar = gauss_sum(p, lambda x: (-dlog[x]) % order, order)
        m = tau.m
        chi_m1 = CycloElt.zeta_power(m, (dlog[p - 1] * (m // order)) % m)
        assert tau * taubar == chi_m1 * p


def test_gauss_sum_quadratic():
    # quadratic character mod 5: tau = sqrt(5)
    p = 5
    dlog = {pow(2, i, p): i for i in range(4)}
    tau = gauss_sum(p, lambda x: dlog[x] % 2, 2)
    v = numeric(tau)
    with mpmath.workprec(80):
        assert abs(v - mpmath.sqrt(5)) < 1e-18


def test_salie_sum_numeric():
    p, u = 5, 2  # 2 is a non-square mod 5
    order = 4
    dlog = {pow(2, i, p): i for i in range(4)}
    lam = salie_sum(p, u, 1, lambda x: (-dlog[x]) % order, order)
    with mpmath.workprec(100):
        zp = mpmath.e ** (2j * mpmath.pi / p)
        zo = mpmath.e ** (2j * mpmath.pi / order)
        want = sum(zo ** ((-dlog[(r * r - u) % p]) % order) * zp ** r
                   for r in range(p))
        assert abs(numeric(lam) - want) < 1e-22


def test_complex_embed_radius():
    t = Tower(12, embedding_exponent=1)
    a = t.zeta() * Fraction(22, 7) + t.rational(Fraction(-3, 11))
    v, rad = complex_embed(a, bits=96)
    with mpmath.workprec(200):
        z = mpmath.e ** (2j * mpmath.pi / 12)
        want = mpmath.mpf(22) / 7 * z - mpmath.mpf(3) / 11
        assert abs(v - want) < rad
    assert rad < 2.0 ** -90


def test_complex_embed_ext_root_choice():
    m = 3
    t0 = Tower(m, [CycloElt.rational(m, -2), CycloElt.zero(m)], ext_root_index=0)
    t1 = Tower(m, [CycloElt.rational(m, -2), CycloElt.zero(m)], ext_root_index=1)
    v0, _ = complex_embed(t0.gen(), 64)
    v1, _ = complex_embed(t1.gen(), 64)
    # the two roots of x^2 - 2 under any embedding
    assert abs(v0 + v1) < 1e-15
    assert abs(abs(v0) - 2 ** 0.5) < 1e-12


def test_tower_descriptor_roundtrip():
    m = 51
    t = Tower(m, [CycloElt.rational(m, -13), CycloElt.zero(m)],
              embedding_exponent=2, ext_root_index=1)
    d = t.to_descriptor()
    t2 = Tower.from_descriptor(d)
    assert t2 == t and t2.embedding_exponent == 2 and t2.ext_root_index == 1


def test_galois_apply_with_gen_image():
    # sqrt(13) in Q(zeta_13): fixed by squares, negated by non-squares
    m = 13
    t = Tower(m, [CycloElt.rational(m, -13), CycloElt.zero(m)])
    a = t.gen() + t.zeta()
    sq = GaloisAction(4, gen_image=t.gen())          # 4 = 2^2 is a square
    ns = GaloisAction(2, gen_image=-t.gen())         # 2 is not
    va = galois_apply(sq, a)
    assert va == t.gen() + t.zeta(4)
    vb = galois_apply(ns, a)
    assert vb == -t.gen() + t.zeta(2)
