"""Graded identities of the four differentials and the exchange laws."""

import random
from fractions import Fraction

from quadrham.kcomplex import (
    KElement,
    ambient_derham,
    ambient_rho,
    cech,
    contraction,
    derham,
    lift,
    phi,
    push_delta,
    sym_insert,
    symmetric_derivative,
)
from quadrham.truncation import broken_identity

from complex_samples import basis_pool, random_element, sector_truncations


def test_identity_suite_every_basis_element_degree_4(engine, models):
    """(phi+cech+derham+iota)^2 = 0 on every sector basis element of total
    degree <= 4, all six models, via the assembled matrices; the ambient
    reference differential squares to zero on the same window."""
    counts = engine.identity_battery()
    for name in models:
        assert counts[name]["k"] > 0, name
        assert counts[name]["ambient"] > 0, name


def test_named_relations_on_random_elements(models):
    """Each of the graded relations vanishes individually (not just the
    total square) on seeded random elements."""
    rng = random.Random(401)
    for name, model in models.items():
        pool = basis_pool(model, 3)
        for _ in range(8):
            el = random_element(rng, pool)
            assert broken_identity(el) is None, (name, str(el))


def test_cech_iota_anticommutator_is_minus_total_symmetric_derivative(models):
    """[cech, iota] = -L with L = sum of the level derivatives L_q, q >= 0."""
    rng = random.Random(402)
    for name in ("gm_gm", "a1_gm", "gm_z2"):
        model = models[name]
        pool = basis_pool(model, 3)
        for _ in range(10):
            el = random_element(rng, pool)
            lhs = cech(contraction(el)) + contraction(cech(el))
            L = KElement(model)
            for n in el.levels():
                part = el.restrict_level(n)
                for q in range(n + 1):
                    L = L + symmetric_derivative(part, q)
            assert (lhs + L).is_zero(), (name, str(el))


def test_delta_exchanges_L_with_phi_derham(models):
    """delta o L = (phi o derham + derham o phi) o delta on ambient
    elements."""
    for name in ("gm_gm", "a1_gm"):
        model = models[name]
        for tr in sector_truncations(model, 3, max_radius=1, mode="ambient"):
            for deg in range(4):
                for key in tr.bases.get(deg, ()):
                    a = tr.element_of(key)
                    n = next(iter(a.levels()))
                    lhs = KElement(model)
                    for q in range(n + 1):
                        piece = (ambient_rho(q, ambient_derham(a))
                                 + ambient_derham(ambient_rho(q, a)))
                        lhs = lhs + push_delta(piece)
                    da = push_delta(a)
                    rhs = phi(derham(da)) + derham(phi(da))
                    assert (lhs - rhs).is_zero(), (name, str(a))


def _bare_anchor(model, x):
    """Anchor substitution without the level sign (one epsilon at a time)."""
    out = KElement(model)
    for n, wedge, sym, coeff in x.terms():
        lv = model.level(n)
        for pos, i in enumerate(wedge):
            rest = wedge[:pos] + wedge[pos + 1:]
            for a, c in lv.phi_dual[i]:
                out.add_term(n, rest, sym_insert(sym, a),
                             (coeff * c).scale((-1) ** pos))
    return out


def test_rho_exchange_on_lifted_elements(models):
    """rho_0 o eta_0 = eta_0 o (anchor substitution); rho_r o eta_0 = 0 for
    r > 0."""
    for name in ("gm_gm", "a1_gm"):
        model = models[name]
        pool = basis_pool(model, 3, max_radius=1)
        for _, el in pool:
            a = lift(el)
            n = next(iter(el.levels()))
            bare = lift(_bare_anchor(model, el))
            assert (ambient_rho(0, a) - bare).is_zero(), (name, str(el))
            for r in range(1, n + 1):
                assert ambient_rho(r, a).is_zero(), (name, r, str(el))


def test_transgression_micro_examples(models):
    """The level derivative and the contraction on character monomials:
    L_1(g^a) = a g^a v, iota(g^a v^k) = -a v^{k+1}; an invertible anchor
    sends epsilon to v; the torus coframe satisfies d t = t * (dt/t)."""
    bgm = models["bgm"]
    g = bgm.level(1).ring.var("g1")
    for a in (1, 2, -3):
        el = KElement.term(bgm, 1, (), (), g ** a)
        expect = KElement.term(bgm, 1, (), (0,), (g ** a).scale(a))
        assert (symmetric_derivative(el, 1) - expect).is_zero()
        for k in (0, 1, 2):
            elk = KElement.term(bgm, 1, (), (0,) * k, g ** a)
            out = KElement.term(bgm, 0, (), (0,) * (k + 1), Fraction(-a))
            assert (contraction(elk) - out).is_zero()

    gm = models["gm_gm"]
    eps = KElement.term(gm, 0, (0,), (), 1)
    ups = KElement.term(gm, 0, (), (0,), 1)
    assert (phi(eps) - ups).is_zero()
    t = gm.level(0).ring.var("t")
    dt = derham(KElement.term(gm, 0, (), (), t))
    assert (dt - KElement.term(gm, 0, (0,), (), t)).is_zero()
    assert cech(KElement.unit(gm)).is_zero()


def test_unit_is_total_cocycle(models):
    for model in models.values():
        one = KElement.unit(model)
        assert phi(one).is_zero()
        assert derham(one).is_zero()
        assert cech(one).is_zero()
        assert contraction(one).is_zero()


def test_operator_degrees(models):
    """phi: (0,1,0), cech: (0,0,1), derham: (1,0,0), iota: (1,1,-1) on the
    (p, k, n) spots."""
    rng = random.Random(403)
    model = models["gm_gm"]
    pool = basis_pool(model, 3)
    for _ in range(12):
        el = random_element(rng, pool)
        spots = set(el.spots())
        for op, delta in ((phi, (0, 1, 0)), (cech, (0, 0, 1)),
                          (derham, (1, 0, 0)), (contraction, (1, 1, -1))):
            for spot in op(el).spots():
                src = tuple(s - d for s, d in zip(spot, delta))
                assert src in spots, (op.__name__, spot, sorted(spots))
