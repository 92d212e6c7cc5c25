import random
from fractions import Fraction

import pytest

from cartanforms.exactfield import CycloElt
from cartanforms.gl2reps import (
    INF, CharacterMu, CharacterTheta, GL2Elt, RepVector, cusp_action,
    default_nonsquare, expected_invariant_dims, invariant_dims_bruteforce,
    invariant_vector_cusp, invariant_vector_ps, omega_char,
    projective_elements, ps_action, smallest_primitive_root,
    subgroup_elements, tprime_coset_decomposition, w_elt, _model_trace,
)

random.seed(20260815)


def test_primitive_roots():
    assert smallest_primitive_root(5) == 2
    assert smallest_primitive_root(7) == 3
    assert smallest_primitive_root(17) == 3
    assert smallest_primitive_root(23) == 5


def test_default_nonsquares():
    assert default_nonsquare(17) == 3
    assert default_nonsquare(19) == 2
    assert default_nonsquare(23) == 5


def test_subgroup_orders():
    p = 7
    assert len(subgroup_elements("Z", p)) == p - 1
    assert len(subgroup_elements("B", p)) == p * (p - 1) ** 2
    assert len(subgroup_elements("T", p)) == (p - 1) ** 2
    assert len(subgroup_elements("T'", p)) == p * p - 1
    assert len(subgroup_elements("N'", p)) == 2 * (p * p - 1)
    assert len(projective_elements("T'", p)) == p + 1
    assert len(projective_elements("N'", p)) == 2 * (p + 1)


@pytest.mark.parametrize("p", [5, 7])
def test_transversal_is_projective_torus(p):
    u = default_nonsquare(p)
    trans = tprime_coset_decomposition(p, u)
    got = sorted(m.proj_tuple() for m in trans)
    want = sorted(m.proj_tuple() for m in projective_elements("T'", p, u))
    assert got == want


@pytest.mark.parametrize("p", [5, 7])
def test_desmit_edixhoven_identity(p):
    # permutation characters: fix(G/T) = fix(G/T') + 2 (fix(P1) - 1),
    # checked on every element of PGL_2 by brute coset counting
    u = default_nonsquare(p)
    pgl = projective_elements("G", p)
    tset = {m.proj_tuple() for m in subgroup_elements("T", p)}
    tpset = {m.proj_tuple() for m in subgroup_elements("T'", p, u)}

    def cosets(sub):
        reps, seen = [], set()
        for g in pgl:
            key = min((g * GL2Elt(p, *t)).proj_tuple() for t in sub)
            if key not in seen:
                seen.add(key)
                reps.append(g)
        return reps

    ct, ctp = cosets(tset), cosets(tpset)
    assert len(ct) == len(pgl) // len(tset)
    for g in random.sample(pgl, 25):
        fixt = sum(1 for x in ct
                   if (x.inv() * g * x).proj_tuple() in tset)
        fixtp = sum(1 for x in ctp
                    if (x.inv() * g * x).proj_tuple() in tpset)
        fixp1 = sum(1 for r in [INF] + list(range(p)) if g.moebius(r) == r)
        assert fixt == fixtp + 2 * (fixp1 - 1)


def rand_gl2(p):
    while True:
        a, b, c, d = (random.randrange(p) for _ in range(4))
        if (a * d - b * c) % p:
            return GL2Elt(p, a, b, c, d)


@pytest.mark.parametrize("p,e", [(5, 1), (7, 1), (7, 2)])
def test_ps_action_is_group_action(p, e):
    mu = CharacterMu(p, e)
    m = mu.conductor()
    for _ in range(12):
        g, h = rand_gl2(p), rand_gl2(p)
        r = random.choice([INF] + list(range(p)))
        v = RepVector.basis_ps(p, m, r)
        assert ps_action(g, ps_action(h, v, mu), mu) == ps_action(g * h, v, mu)


def test_ps_scalars_trivial_and_w_squared():
    p, mu = 7, CharacterMu(7, 1)
    m = mu.conductor()
    v = RepVector.basis_ps(p, m, 3)
    for z in (2, 3):
        assert ps_action(GL2Elt(p, z, 0, 0, z), v, mu) == v
    w = w_elt(p)
    assert ps_action(w, ps_action(w, v, mu), mu) == v


@pytest.mark.parametrize("p,e", [(5, 1), (7, 1), (7, 3)])
def test_cusp_action_is_group_action(p, e):
    th = CharacterTheta(p, e)
    m = th.conductor()
    for _ in range(10):
        g, h = rand_gl2(p), rand_gl2(p)
        v = RepVector.basis_cusp(p, m, random.randrange(1, p))
        assert cusp_action(g, cusp_action(h, v, th), th) == \
            cusp_action(g * h, v, th)


def test_cusp_borel_is_permutation():
    p = 5
    th = CharacterTheta(p, 1)
    m = th.conductor()
    g = GL2Elt(p, 2, 3, 0, 1)  # r -> 2r + 3
    v = RepVector.basis_cusp(p, m, 1)
    assert cusp_action(g, v, th) == RepVector.basis_cusp(p, m, 2 * 1 + 3)


def test_character_mu_basics():
    mu = CharacterMu(17, 2)
    assert mu.order == 8 and mu.is_even()
    x, y = 5, 11
    # multiplicativity through values at a common conductor
    assert mu.value(x * y % 17, 8) == mu.value(x, 8) * mu.value(y, 8)
    assert omega_char(17).order == 2
    assert CharacterMu(17, 1).is_even() is False


def test_character_theta_basics():
    th = CharacterTheta(17, 3)
    assert th.order == 6 and th.is_odd()
    # theta(y1 y2) = theta(y1) theta(y2) in F_(p^2)^*
    p, u = 17, th.u
    a1, b1, a2, b2 = 2, 5, 7, 1
    a3 = (a1 * a2 + u * b1 * b2) % p
    b3 = (a1 * b2 + a2 * b1) % p
    assert th.value(a3, b3, 6) == th.value(a1, b1, 6) * th.value(a2, b2, 6)
    assert CharacterTheta(17, 2).is_odd() is False


@pytest.mark.parametrize("p", [5, 7])
def test_model_traces_at_identity(p):
    ident = GL2Elt(p, 1, 0, 0, 1)
    mu = CharacterMu(p, 1)
    th = CharacterTheta(p, 1)
    assert _model_trace(ident, "ps", mu) == CycloElt.rational(mu.conductor(), p + 1)
    assert _model_trace(ident, "cusp", th) == CycloElt.rational(th.conductor(), p - 1)


@pytest.mark.parametrize("p", [5, 7])
def test_invariant_dims_match_expected(p):
    assert invariant_dims_bruteforce(p) == expected_invariant_dims(p)


def test_invariant_vector_ps_is_invariant():
    p, u = 7, default_nonsquare(7)
    for e in (1, 2):
        mu = CharacterMu(p, e)
        v = invariant_vector_ps(mu, u)
        assert not v.is_zero()
        for g in projective_elements("T'", p, u):
            assert ps_action(g, v, mu) == v
        eps = GL2Elt(p, 1, 0, 0, -1)
        fixed = ps_action(eps, v, mu) == v
        assert fixed == mu.is_even()


def test_invariant_vector_cusp_is_invariant():
    p, u = 7, default_nonsquare(7)
    for e in (1, 3):
        th = CharacterTheta(p, e, u)
        v = None
        for r in range(1, p):
            v = invariant_vector_cusp(th, r)
            if not v.is_zero():
                break
        assert v is not None and not v.is_zero()
        for g in projective_elements("T'", p, u):
            assert cusp_action(g, v, th) == v
        eps = GL2Elt(p, 1, 0, 0, -1)
        fixed = cusp_action(eps, v, th) == v
        assert fixed == th.is_odd()
