"""Exact polynomial layer: arithmetic laws, substitution, rendering."""

import random
from fractions import Fraction

import pytest

from quadrham.poly import MAX_EXPONENT, Poly, Ring, RingHom, ring_ops, substitute


def random_poly(rng, ring, nterms=4, maxdeg=3):
    p = ring.zero()
    for _ in range(rng.randrange(nterms + 1)):
        exps = []
        for lau in ring.laurent:
            lo = -maxdeg if lau else 0
            exps.append(rng.randrange(lo, maxdeg + 1))
        p = p + ring.monomial(exps, Fraction(rng.randrange(-5, 6), rng.randrange(1, 4)))
    return p


def test_add_sub_roundtrip():
    rng = random.Random(11)
    ring = Ring(["g", "x"], [True, False])
    for _ in range(200):
        a = random_poly(rng, ring)
        b = random_poly(rng, ring)
        assert (a + b) - b == a


def test_mul_laws():
    rng = random.Random(12)
    ring = Ring(["g", "x"], [True, False])
    for _ in range(100):
        a = random_poly(rng, ring)
        b = random_poly(rng, ring)
        c = random_poly(rng, ring)
        assert a * b == b * a
        assert a * (b + c) == a * b + a * c
        assert (a * b) * c == a * (b * c)


def test_ring_ops_dispatch():
    ring = Ring(["x"])
    x = ring.var("x")
    assert ring_ops(x, x, "add") == x.scale(2)
    assert ring_ops(x, x, "mul") == x * x
    assert ring_ops(x, Fraction(3, 2), "scale") == x.scale(Fraction(3, 2))
    assert ring_ops(x * x, None, "partial_derivative", var="x") == x.scale(2)


def test_derive_product_rule():
    rng = random.Random(13)
    ring = Ring(["t", "x"], [True, False])
    for _ in range(100):
        a = random_poly(rng, ring)
        b = random_poly(rng, ring)
        lhs = (a * b).derive("x")
        rhs = a.derive("x") * b + a * b.derive("x")
        assert lhs == rhs
        assert (a * b).log_derive("t") == a.log_derive("t") * b + a * b.log_derive("t")


def test_laurent_flags():
    ring = Ring(["t", "x"], [True, False])
    t = ring.var("t")
    assert t ** -2 == ring.monomial([-2, 0])
    with pytest.raises(ValueError):
        ring.monomial([0, -1])
    with pytest.raises(ValueError):
        (ring.var("x") + 1) ** -1


def test_exponent_guard():
    ring = Ring(["t"], [True])
    big = ring.monomial([MAX_EXPONENT - 1])
    with pytest.raises(OverflowError):
        big * ring.var("t")


def test_substitution_is_ring_hom():
    rng = random.Random(14)
    src = Ring(["g", "x"], [True, False])
    tgt = Ring(["u", "v"], [True, False])
    h = RingHom(src, tgt, [tgt.var("u") ** -1, tgt.var("v") + tgt.one()])
    for _ in range(100):
        p = random_poly(rng, src)
        q = random_poly(rng, src)
        assert substitute(h, p * q) == substitute(h, p) * substitute(h, q)
        assert substitute(h, p + q) == substitute(h, p) + substitute(h, q)


def test_laurent_image_must_be_unit_monomial():
    src = Ring(["g"], [True])
    tgt = Ring(["u"], [True])
    with pytest.raises(ValueError):
        RingHom(src, tgt, [tgt.var("u") + 1])


def test_hom_composition():
    a = Ring(["g"], [True])
    b = Ring(["u"], [True])
    c = Ring(["w"], [True])
    h1 = RingHom(a, b, [b.var("u") ** 2])
    h2 = RingHom(b, c, [c.var("w") ** -1])
    p = a.var("g") + a.var("g") ** -3
    assert h1.then(h2).apply(p) == h2.apply(h1.apply(p))


def test_rendering():
    ring = Ring(["g1", "g2"], [True, True])
    p = ring.monomial([2, -1], 3) + ring.constant(Fraction(1, 2))
    assert str(p) == "3*g1^2*g2^-1 + 1/2"
    assert str(ring.zero()) == "0"
    q = ring.var("g1") - ring.one()
    assert str(q) == "g1 - 1"
