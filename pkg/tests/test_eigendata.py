import json
import math

import pytest

from cartanforms.eigendata import (
    AmbiguousClassification, ClassificationError, EigenformRecord,
    FetchError, InvariantError, SchemaError, classify_representation,
    conjugate_coefficients, fetch_remote, list_bundled, load_bundled,
    parse_eigenform_file,
)
from cartanforms.exactfield import galois_apply
from cartanforms.gl2reps import CharacterMu


@pytest.fixture(scope="module")
def bundle():
    return {label: load_bundled(label) for label in list_bundled()}


@pytest.fixture(scope="module")
def candidates(bundle):
    return {17: [bundle["17.2.a.a"], bundle["17.2.chi8.a"]],
            19: [bundle["19.2.a.a"], bundle["19.2.chi9.a"]],
            23: [bundle["23.2.a.a"], bundle["23.2.chi11.a"]]}


def _obj(label):
    import importlib.resources as resources
    res = resources.files("cartanforms").joinpath(
        f"data/eigenforms/{label}.json")
    return json.loads(res.read_bytes())


def test_list_bundled():
    labels = list_bundled()
    assert len(labels) == 24
    assert "289.2.a.f2" in labels
    assert sum(1 for x in labels if x.startswith("529.")) == 8


def test_f2_matches_seed_display(bundle):
    f2 = bundle["289.2.a.f2"]
    t = f2.tower
    a, one, c = t.gen(), t.one(), t.rational
    want = [one, -(a + 1), a, a + 2, -(a + 1), c(-3), a - 1, c(-3), -a,
            a + 4, c(-3), a + 3, -(a + 2), a - 2, c(-3), a - 1]
    assert [f2.coeff(n) for n in range(1, 17)] == want


def test_f3_matches_seed_display(bundle):
    f3 = bundle["289.2.a.f3"]
    b = f3.tower.gen()
    b2 = b * b
    want = [f3.tower.one(), -(b2 + b - 2), -(b + 1), b, b2 + b - 4,
            b2 * 2 + b * 2 - 3, b, b2 + b - 3, b2 + b * 2 - 2,
            b2 * 2 + b - 6, -(b2 * 2 - 2), -(b2 + b)]
    assert [f3.coeff(n) for n in range(1, 13)] == want


def test_level17_a17_is_plus_one(bundle):
    h = bundle["17.2.a.a"]
    assert h.coeff(17) == h.tower.one()
    assert h.ap == h.tower.one()


def test_orbit_sizes_match_field_degrees(bundle):
    assert [bundle[f"289.2.a.f{i}"].tower.ext_degree
            for i in (1, 2, 3)] == [1, 2, 3]


def test_f1_is_quadratic_twist_of_level17(bundle):
    f1, h = bundle["289.2.a.f1"], bundle["17.2.a.a"]
    omega = CharacterMu(17, 8)
    assert omega.order == 2
    for n in range(1, min(f1.precision, h.precision) + 1):
        if n % 17 == 0:
            assert f1.coeff(n).is_zero()
        else:
            sign = omega.value(n, 2).c[0]
            assert f1.coeff(n) == h.coeff(n) * sign


def test_bundled_plus_inventory(bundle):
    # cuspidal-side W eigenvalue +1 degrees bundled per level (the
    # principal-series contribution at 19 and 23 lives at level p)
    plus = {}
    for rec in bundle.values():
        if rec.level in (289, 361, 529):
            assert rec.fricke in (1, -1)
            if rec.fricke == 1:
                plus[rec.level] = plus.get(rec.level, 0) + rec.tower.ext_degree
    assert plus == {289: 6, 361: 5, 529: 8}


# ----------------------------------------------------------------------
# parsing errors


def _write(tmp_path, obj, name="rec.json"):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return path


def test_parse_rejects_unnormalized(tmp_path):
    obj = _obj("17.2.a.a")
    obj["an"][0] = [["2"]]
    with pytest.raises(InvariantError) as err:
        parse_eigenform_file(_write(tmp_path, obj))
    assert err.value.index == 1


def test_parse_rejects_nonmultiplicative(tmp_path):
    obj = _obj("17.2.a.a")
    obj["an"][5] = [["99"]]
    with pytest.raises(InvariantError) as err:
        parse_eigenform_file(_write(tmp_path, obj))
    assert err.value.index == 6


def test_parse_rejects_bad_schema(tmp_path):
    obj = _obj("17.2.a.a")
    del obj["field"]
    with pytest.raises(SchemaError):
        parse_eigenform_file(_write(tmp_path, obj))
    obj = _obj("17.2.a.a")
    obj["weight"] = 4
    with pytest.raises(SchemaError):
        parse_eigenform_file(_write(tmp_path, obj))
    obj = _obj("17.2.a.a")
    obj["fricke"] = 2
    with pytest.raises(SchemaError):
        parse_eigenform_file(_write(tmp_path, obj))


def test_parse_rejects_broken_embedding(tmp_path):
    obj = _obj("289.2.a.f2")
    img = obj["embedding"]["gen_image"]
    img[0] = str(int(img[0]) + 1)
    with pytest.raises(InvariantError):
        parse_eigenform_file(_write(tmp_path, obj))


# ----------------------------------------------------------------------
# conjugation


def test_conjugation_fixes_totally_real(bundle):
    f2 = bundle["289.2.a.f2"]
    assert conjugate_coefficients(f2) == f2


def test_conjugation_involution_and_ap_norm(bundle):
    h = bundle["17.2.chi8.a"]
    hbar = conjugate_coefficients(h)
    assert hbar.char_exponent == 14
    assert conjugate_coefficients(hbar).an == h.an
    # |a_p|^2 = p for a form whose nebentypus has conductor p, exactly
    assert h.ap * galois_apply(h.conj, h.ap) == h.tower.rational(17)


def test_conjugation_detects_character_mismatch(tmp_path, bundle):
    obj = _obj("17.2.chi8.a")
    obj["char_exponent"] = 6  # same order, wrong character
    rec = parse_eigenform_file(_write(tmp_path, obj))
    with pytest.raises(InvariantError):
        conjugate_coefficients(rec)


# ----------------------------------------------------------------------
# fetch and cache


def test_fetch_bundled_roundtrip(tmp_path, bundle):
    cache = tmp_path / "cache"
    rec = fetch_remote("19.2.a.a", 100, cache_dir=str(cache))
    assert rec == bundle["19.2.a.a"]
    blob = (cache / "19.2.a.a.json").read_bytes()
    again = fetch_remote("19.2.a.a", 100, cache_dir=str(cache))
    assert (cache / "19.2.a.a.json").read_bytes() == blob
    assert again == rec


def test_fetch_errors(tmp_path):
    with pytest.raises(FetchError):
        fetch_remote("99.2.a.zz", 10, cache_dir=str(tmp_path))
    with pytest.raises(FetchError):
        fetch_remote("19.2.a.a", 10 ** 6, cache_dir=str(tmp_path))


def test_fetch_directory_source(tmp_path):
    src, cache = tmp_path / "src", tmp_path / "cache"
    src.mkdir()
    (src / "19.2.a.a.json").write_text(json.dumps(_obj("19.2.a.a")))
    rec = fetch_remote("19.2.a.a", 100, base_url=str(src),
                       cache_dir=str(cache))
    assert rec.label == "19.2.a.a"
    assert (cache / "19.2.a.a.json").exists()


def test_fetch_refreshes_short_cache(tmp_path):
    obj = _obj("19.2.a.a")
    obj["an"] = obj["an"][:10]
    cache = tmp_path
    (cache / "19.2.a.a.json").write_text(json.dumps(obj) + "\n")
    rec = fetch_remote("19.2.a.a", 100, cache_dir=str(cache))
    assert rec.precision >= 100


# ----------------------------------------------------------------------
# classification


PLUS_SIDE = [
    ("289.2.a.f1", "twisted-steinberg", 2, "17.2.a.a"),
    ("289.2.a.f2", "cuspidal", 6, None),
    ("289.2.a.f3", "cuspidal", 18, None),
    ("361.2.a.a", "cuspidal", 4, None),
    ("361.2.a.b", "twisted-steinberg", 2, "19.2.a.a"),
    ("361.2.a.g", "cuspidal", 20, None),
    ("529.2.a.b", "twisted-steinberg", 2, "23.2.a.a"),
    ("529.2.a.g", "cuspidal", 24, None),
    ("529.2.a.h", "cuspidal", 8, None),
]


@pytest.mark.parametrize("label,kind,order,partner", PLUS_SIDE)
def test_classify_known_types(bundle, candidates, label, kind, order,
                              partner):
    rec = bundle[label]
    p = math.isqrt(rec.level)
    c = classify_representation(rec, candidates[p])
    assert (c.kind, c.order, c.partner) == (kind, order, partner)
    if kind == "cuspidal":
        assert 1 <= c.exponent <= (p + 1) // 2
        assert c.order == (p + 1) // math.gcd(c.exponent, p + 1)


def test_classify_records_chain_evidence(bundle, candidates):
    c = classify_representation(bundle["289.2.a.f3"], candidates[17])
    assert c.evidence["chain"] == [6, 18]
    assert c.evidence["fricke"] == 1
    assert all(tag.startswith("mismatch") or tag == "odd exponent"
               for _, _, tag in c.evidence["twists"])


@pytest.mark.parametrize("label", ["361.2.a.c", "529.2.a.a", "529.2.a.c",
                                   "529.2.a.f"])
def test_classify_rejects_minus_side(bundle, candidates, label):
    rec = bundle[label]
    p = math.isqrt(rec.level)
    with pytest.raises(ClassificationError) as err:
        classify_representation(rec, candidates[p])
    assert not isinstance(err.value, AmbiguousClassification)
    assert err.value.evidence["thetas"]


def test_classify_input_guards(bundle, candidates):
    with pytest.raises(ValueError):
        classify_representation(bundle["17.2.chi8.a"], candidates[17])
    with pytest.raises(ValueError):
        classify_representation(bundle["17.2.a.a"], candidates[17])
    with pytest.raises(ValueError):
        classify_representation(bundle["289.2.a.f2"], candidates[19])


def test_classify_synthetic_principal_series(tmp_path):
    # build a twist pair at p = 5 by hand: b_n totally multiplicative
    # and supported away from 5, h_n = mu^(-1)(n) b_n at level 5
    mu = CharacterMu(5, 1)
    b = {1: 1, 2: 2, 3: -1, 7: 3, 11: 1, 13: -2, 17: 1, 19: 0, 23: 2}

    def bval(n):
        if n % 5 == 0:
            return 0
        out = 1
        for q, mult in _factor(n):
            out *= b[q] ** mult
        return out

    f_an = [[[str(bval(n))]] for n in range(1, 25)]
    h_an = []
    for n in range(1, 25):
        if n % 5 == 0:
            h_an.append([["0", "0"]])
        else:
            val = mu.inverse().value(n, 4) * bval(n)
            h_an.append([[str(x) for x in val.c]])
    f_obj = {"label": "25.2.a.synth", "level": 25, "weight": 2,
             "char_order": 1,
             "field": {"conductor": 1, "ext_poly": None,
                       "embedding_exponent": 1, "ext_root_index": 0},
             "conj_generator_image": None, "ap": None, "an": f_an,
             "source": {"url": "test", "fetched": "2026-08-15"}}
    h_obj = {"label": "5.2.chi4.synth", "level": 5, "weight": 2,
             "char_order": 2, "char_exponent": 2,
             "field": {"conductor": 4, "ext_poly": None,
                       "embedding_exponent": 1, "ext_root_index": 0},
             "conj_generator_image": None, "ap": None, "an": h_an,
             "source": {"url": "test", "fetched": "2026-08-15"}}
    f = parse_eigenform_file(_write(tmp_path, f_obj, "f.json"))
    h = parse_eigenform_file(_write(tmp_path, h_obj, "h.json"))
    c = classify_representation(f, [h])
    assert c.kind == "principal-series"
    assert c.partner == "5.2.chi4.synth"
    assert (c.order, c.exponent) == (4, 1)


def _factor(n):
    out = []
    q = 2
    while q * q <= n:
        if n % q == 0:
            k = 0
            while n % q == 0:
                n //= q
                k += 1
            out.append((q, k))
        q += 1
    if n > 1:
        out.append((n, 1))
    return out
