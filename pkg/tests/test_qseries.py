import json
import random
from fractions import Fraction
from functools import reduce

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cartanforms.exactfield import (CycloElt, GaloisAction, Subfield, Tower,
                                    from_eta_coordinates)
from cartanforms.gl2reps import CharacterMu, omega_char
from cartanforms.qseries import (DescentFailure, QSeries, level_lower_map,
                                 series_descend_subfield, series_from_payload,
                                 series_mul, series_to_payload,
                                 series_twist_char, series_zeta_shift)
from cartanforms.refdata import load_reference

T5 = Tower(5)


def rational_series(p, tower, ints, weight=2):
    return QSeries(p, tower, [tower.rational(v) for v in ints], weight)


def test_mul_monomials():
    q = rational_series(5, T5, [1])
    sq = series_mul(q, q)
    assert sq.weight == 4
    assert sq.precision == 2
    assert sq.coeffs == (T5.zero(), T5.one())


def test_mul_binomial_square():
    f = rational_series(5, T5, [1, -1, 0, 0])
    sq = series_mul(f, f)
    assert [a.base_part().rational_value() for a in sq.coeffs] == [0, 1, -2, 1, 0]


def test_mul_leading_product_against_numeric_oracle():
    # first two displayed coefficients of the first two level-17 basis forms;
    # the product's q^2, q^3 coefficients are checked against a plain float
    # convolution of the published eta-basis integers
    ref = load_reference(17)["basis_expansions"]
    t = Tower(17)

    def coeff(vec):
        return t.embed(from_eta_coordinates(vec, 17))

    g1 = QSeries(17, t, [coeff(ref["g1"]["1"]), coeff(ref["g1"]["2"])])
    g2 = QSeries(17, t, [coeff(ref["g2"]["1"]), coeff(ref["g2"]["2"])])
    prod = series_mul(g1, g2)
    assert prod.precision == 3
    assert prod.coeff(1).is_zero()

    with mpmath.workprec(120):
        def num(vec):
            return mpmath.fsum(v * 2 * mpmath.cos(2 * mpmath.pi * j / 17)
                               for j, v in enumerate(vec, start=1))

        def embed(a):
            z = mpmath.exp(2j * mpmath.pi / 17)
            return sum(mpmath.mpf(str(c)) * z ** k
                       for k, c in enumerate(a.base_part().c))

        n1, n2 = num(ref["g1"]["1"]), num(ref["g2"]["1"])
        m1, m2 = num(ref["g1"]["2"]), num(ref["g2"]["2"])
        assert abs(embed(prod.coeff(2)) - n1 * n2) < mpmath.mpf(2) ** -80
        assert abs(embed(prod.coeff(3)) - (n1 * m2 + m1 * n2)) < mpmath.mpf(2) ** -80


def test_mul_requires_matching_tower():
    f = rational_series(5, T5, [1, 2])
    g = rational_series(5, Tower(4), [1, 2])
    with pytest.raises(ValueError):
        series_mul(f, g)


def test_twist_by_quadratic_character():
    t = Tower(4)
    f = rational_series(5, t, list(range(1, 9)))
    tw = series_twist_char(f, omega_char(5))
    vals = [a.base_part().rational_value() for a in tw.coeffs]
    assert vals == [1, -2, -3, 4, 0, 6, -7, -8]


def test_twist_trivial_character_kills_only_level_multiples():
    t = Tower(4)
    f = rational_series(5, t, [3, 1, 4, 1, 5, 9, 2, 6, 5, 3])
    tw = series_twist_char(f, CharacterMu(5, 0))
    for n in range(1, 11):
        if n % 5 == 0:
            assert tw.coeff(n).is_zero()
        else:
            assert tw.coeff(n) == f.coeff(n)


def test_double_twist_recovers_prime_to_level_part():
    t = Tower(4)
    mu = CharacterMu(5, 1)
    f = rational_series(5, t, [2, -1, 7, 0, 4, 1, 1, -3])
    back = series_twist_char(series_twist_char(f, mu), mu.inverse())
    for n in range(1, 9):
        if n % 5 == 0:
            assert back.coeff(n).is_zero()
        else:
            assert back.coeff(n) == f.coeff(n)


def test_twist_quadratic_involution_on_seed_data():
    seed = load_reference(17)["seed_newforms"]["steinberg_twist"]["an"]
    t = Tower(2)
    f = rational_series(17, t, seed)
    om = omega_char(17)
    tw = series_twist_char(f, om)
    assert tw.coeff(5) == t.rational(-2)  # 5 is not a square mod 17
    assert series_twist_char(tw, om) == f  # a_17 = 0 already in the data


def test_twist_tower_too_small():
    f = rational_series(5, Tower(2), [1, 2, 3])
    with pytest.raises(ValueError):
        series_twist_char(f, CharacterMu(5, 1))


def test_zeta_shift_zero_is_identity():
    f = rational_series(5, T5, [1, 2, 3, 4, 5, 6])
    assert series_zeta_shift(f, 0) == f


def test_zeta_shift_inverse():
    rng = random.Random(7)
    f = rational_series(5, T5, [rng.randrange(-9, 10) for _ in range(11)])
    for r in range(1, 5):
        assert series_zeta_shift(series_zeta_shift(f, r), 5 - r) == f


def test_zeta_shift_root_of_unity_filter():
    rng = random.Random(20260815)
    ints = [rng.randrange(-20, 21) for _ in range(12)]
    f = rational_series(5, T5, ints)
    total = reduce(lambda a, b: a + b,
                   (series_zeta_shift(f, r) for r in range(5)))
    expected = QSeries(5, T5, [T5.rational(5 * v if n % 5 == 0 else 0)
                               for n, v in enumerate(ints, start=1)])
    assert total == expected


def test_zeta_shift_respects_products():
    rng = random.Random(3)
    f = rational_series(5, T5, [rng.randrange(-5, 6) for _ in range(6)])
    g = rational_series(5, T5, [rng.randrange(-5, 6) for _ in range(6)])
    for r in (1, 3):
        lhs = series_zeta_shift(series_mul(f, g), r)
        rhs = series_mul(series_zeta_shift(f, r), series_zeta_shift(g, r))
        assert lhs == rhs


def test_zeta_shift_needs_level_root():
    f = rational_series(5, Tower(4), [1])
    with pytest.raises(ValueError):
        series_zeta_shift(f, 1)


def test_level_lower_unit():
    t = Tower(1)
    f = level_lower_map([1], 5, t)
    assert f.precision == 1 and f.coeff(1) == t.one()
    g = level_lower_map([Fraction(1, 2), CycloElt.rational(1, 3)], 5, t)
    assert g.coeff(2) == t.rational(3)


def test_level_lower_seed_deg2_orbit():
    seed = load_reference(17)["seed_newforms"]["cuspidal_deg2"]
    c0, c1, c2 = seed["gen_poly"]
    assert (c0, c1, c2) == (-3, 1, 1)
    t = Tower(1, [CycloElt.rational(1, c0), CycloElt.rational(1, c1)])
    coeffs = [t.embed(CycloElt.rational(1, u)) + t.gen() * t.rational(v)
              for u, v in seed["an"]]
    f = level_lower_map(coeffs, 17, t)
    a = t.gen()
    assert f.coeff(1) == t.one()
    assert f.coeff(2) == -(a + t.one())
    assert f.coeff(3) == a
    assert f.coeff(6) == t.rational(-3)
    assert f.coeff(6) == f.coeff(2) * f.coeff(3)


def test_descend_rational_series_to_base():
    t = Tower(20)
    f = rational_series(5, t, [1, -2, 3])
    down = series_descend_subfield(f, Subfield(2))
    assert down.tower.m == 2
    assert [a.base_part().rational_value() for a in down.coeffs] == [1, -2, 3]


def test_descend_reference_basis_to_real_subfield():
    ref = load_reference(17)["basis_expansions"]["g1"]
    t = Tower(17)
    coeffs = []
    for n in range(1, 5):
        vec = ref.get(str(n), [0] * 8)
        coeffs.append(t.embed(from_eta_coordinates(vec, 17)))
    g1 = QSeries(17, t, coeffs)
    down = series_descend_subfield(g1, Subfield(17, real=True))
    assert down.tower is t  # no smaller power basis exists; representation kept
    assert down.coeffs == g1.coeffs


def test_descent_failure_reports_first_bad_index():
    t = Tower(17)
    f = QSeries(17, t, [t.one(), t.zeta(1), t.zeta(1)])
    with pytest.raises(DescentFailure) as err:
        series_descend_subfield(f, Subfield(17, real=True))
    assert err.value.index == 2


def test_descend_extension_tower_checks_coordinates():
    t = Tower(5, [CycloElt.rational(5, -13), CycloElt.zero(5)])  # x^2 - 13
    real = t.zeta(1) + t.zeta(4) + t.gen()
    ok = series_descend_subfield(QSeries(5, t, [real]), Subfield(5, real=True))
    assert ok.tower is t
    with pytest.raises(DescentFailure) as err:
        series_descend_subfield(QSeries(5, t, [real, t.zeta(2)]),
                                Subfield(5, real=True))
    assert err.value.index == 2


def test_descend_with_explicit_galois_actions():
    # sigma_2 on Q(zeta_13) paired with alpha -> -alpha (alpha^2 = 13);
    # alpha times the quadratic Gauss sum is fixed, alpha alone is not
    t = Tower(13, [CycloElt.rational(13, -13), CycloElt.zero(13)])
    squares = {pow(k, 2, 13) for k in range(1, 13)}
    gauss = sum((CycloElt.zeta_power(13, j) if j in squares
                 else -CycloElt.zeta_power(13, j)) for j in range(1, 13))
    act = GaloisAction(2, gen_image=-t.gen())
    fixed = t.gen() * t.embed(gauss)
    out = series_descend_subfield(QSeries(13, t, [fixed]), Subfield(1),
                                  actions=[act])
    assert out.coeffs == (fixed,)
    with pytest.raises(DescentFailure) as err:
        series_descend_subfield(QSeries(13, t, [fixed, t.gen()]), Subfield(1),
                                actions=[act])
    assert err.value.index == 2


def test_precision_bookkeeping():
    rng = random.Random(11)
    f = rational_series(5, T5, [rng.randrange(-9, 10) for _ in range(5)])
    g = rational_series(5, T5, [rng.randrange(-9, 10) for _ in range(3)])
    assert (f + g).precision == 3
    assert series_mul(f, g).precision == 4
    assert series_mul(f, g) == series_mul(f.truncate(4), g)
    with pytest.raises(IndexError):
        series_mul(f, g).coeff(5)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(-9, 9), min_size=4, max_size=4),
       st.lists(st.integers(-9, 9), min_size=4, max_size=4),
       st.lists(st.integers(-9, 9), min_size=4, max_size=4))
def test_mul_commutative_associative(xs, ys, zs):
    f = rational_series(5, T5, xs)
    g = rational_series(5, T5, ys)
    h = rational_series(5, T5, zs)
    assert series_mul(f, g) == series_mul(g, f)
    assert series_mul(series_mul(f, g), h) == series_mul(f, series_mul(g, h))


def test_payload_roundtrip_tower_basis():
    t = Tower(5, [CycloElt.rational(5, -13), CycloElt.zero(5)])
    f = QSeries(5, t, [t.zeta(2) + t.gen(), t.rational(Fraction(3, 7))], weight=4)
    blob = json.dumps(series_to_payload(f))
    assert series_from_payload(json.loads(blob)) == f


def test_payload_roundtrip_eta_basis():
    ref = load_reference(17)["basis_expansions"]["g1"]
    t = Tower(17)
    f = QSeries(17, t, [t.embed(from_eta_coordinates(ref["1"], 17)),
                        t.embed(from_eta_coordinates(ref["2"], 17))])
    payload = series_to_payload(f, eta=True)
    assert payload["field"]["basis"] == "eta"
    assert payload["coeffs"][0] == [str(v) for v in ref["1"]]
    assert series_from_payload(json.loads(json.dumps(payload))) == f


def test_payload_precision_mismatch_rejected():
    f = rational_series(5, T5, [1, 2])
    payload = series_to_payload(f)
    payload["precision"] = 3
    with pytest.raises(ValueError):
        series_from_payload(payload)
