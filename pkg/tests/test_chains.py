from fractions import Fraction

import pytest

from scl_forge.bounds import default_certificate_set
from scl_forge.chains import (
    Chain1,
    Chain2,
    ChainError,
    boundary,
    clear_denominators,
    h_generator,
    h_normal_form,
    in_CQ,
    scale_approximate,
    validate_mixed_support,
)
from scl_forge.harness import random_CQ_chain, random_mixed_commutator_word, random_N_word, random_word
from scl_forge.marking import chain_in_CZ, in_mixed_commutator
from scl_forge.qm import evaluate_chain, homogenized_value
from scl_forge.word import EMPTY, commutator, inverse, multiply, power, product


def test_chain_basics(full):
    a, b = full.parse("a"), full.parse("b")
    c = Chain1([(a, 1), (b, Fraction(1, 2)), (a, -1)])
    assert c == Chain1([(b, Fraction(1, 2))])
    assert len(c) == 1 and c.coefficient(a) == 0
    assert (c + c) == 2 * c and not (c - c)
    assert Chain1.of(a, (b, 2)).l1_norm() == 3
    with pytest.raises(ChainError):
        Chain1([(a, 0.5)])
    assert Chain1.from_dict(c.to_dict(full), full) == c
    d = Chain2([((a, b), Fraction(3, 2))])
    assert Chain2.from_dict(d.to_dict(full), full) == d
    assert clear_denominators(Chain1([(a, Fraction(1, 2)), (b, Fraction(1, 3))]))[0] == 6


def test_boundary_examples(full):
    g1, g2 = full.parse("ab"), full.parse("bA")
    assert boundary(Chain2([((g1, g2), 1)])) == Chain1([(g2, 1), (multiply(g1, g2), -1), (g1, 1)])
    g = full.parse("a")
    assert boundary(Chain2([((g, EMPTY), 1)])) == Chain1([(EMPTY, 1)])
    x1, x2 = full.parse("abAB"), full.parse("aabABA")
    d = boundary(Chain2([((x1, x2), 1), ((x2, x1), -1)]))
    expect = Chain1([(x2, 1), (multiply(x1, x2), -1), (x1, 1), (x1, -1), (multiply(x2, x1), 1), (x2, -1)])
    assert d == expect


def test_boundary_random_and_linear(rng):
    for _ in range(100):
        g1, g2 = random_word(rng, 2, rng.randint(0, 6)), random_word(rng, 2, rng.randint(0, 6))
        got = boundary(Chain2([((g1, g2), 1)]))
        # termwise formula with an explicit counter
        expect: dict = {}
        for w, s in ((g2, 1), (multiply(g1, g2), -1), (g1, 1)):
            expect[w] = expect.get(w, 0) + s
        assert got == Chain1(expect)
        h1, h2 = random_word(rng, 2, 4), random_word(rng, 2, 4)
        al, be = Fraction(rng.randint(-5, 5), 3), Fraction(rng.randint(-5, 5), 7)
        c = Chain2([((g1, g2), 1), ((h1, g2), 2)])
        d = Chain2([((h1, h2), -1)])
        assert boundary(al * c + be * d) == al * boundary(c) + be * boundary(d)


def test_validate_mixed_support(half):
    g, x = half.parse("a"), half.parse("b")
    assert validate_mixed_support(half, Chain2([((g, x), 1)]))
    assert not validate_mixed_support(half, Chain2([((g, g), 1)]))
    assert validate_mixed_support(half, Chain2())


def test_boundaries_of_mixed_chains_are_in_CQ(rng, half, full):
    for m in (half, full):
        for _ in range(50):
            x1, x2 = random_N_word(rng, m, 4), random_N_word(rng, m, 4)
            g = random_word(rng, 2, 3)
            u = product([g, x2, inverse(g)])
            c2 = Chain2([((x1, x2), Fraction(rng.randint(1, 5), 2)), ((u, g), 1), ((g, x2), -1)])
            assert validate_mixed_support(m, c2)
            d = boundary(c2)
            assert in_CQ(m, d)
            assert chain_in_CZ(m, clear_denominators(d)[1])


def test_h_normal_form_examples(full):
    x = full.parse("ab")
    assert not h_normal_form(Chain1([(power(x, 6), 1), (x, -6)]))
    assert h_normal_form(Chain1([(full.parse("A"), 1)])) == Chain1([(full.parse("a"), -1)])
    assert h_normal_form(Chain1([(power(x, 3), Fraction(1, 2))])) == Chain1([(x, Fraction(3, 2))])


def test_h_normal_form_properties(rng, full):
    for _ in range(500):
        x = random_word(rng, 2, rng.randint(1, 6))
        k = rng.randint(-8, 8)
        assert not h_normal_form(h_generator(x, k))
    for _ in range(100):
        c, d = random_CQ_chain(rng, full), random_CQ_chain(rng, full)
        hc = h_normal_form(c)
        assert h_normal_form(hc) == hc
        s = Fraction(rng.randint(-4, 4), 3)
        assert h_normal_form(c + s * d) == hc + s * h_normal_form(d)


def test_scale_approximate_examples(full):
    y0 = commutator(full.parse("a"), full.parse("abAB"))
    s = scale_approximate(full, Chain1([(y0, 1)]), 1)
    assert (s.k, s.y, s.l, s.t, s.count) == (1, y0, 1, 1, 1)
    s = scale_approximate(full, Chain1([(y0, Fraction(1, 2))]), 1)
    assert (s.l, s.t, s.k, s.y) == (2, 1, 2, y0)
    x1, x2 = full.parse("abAB"), full.parse("aabABA")
    c = Chain1([(x1, 1), (x2, 1), (multiply(x1, x2), -1)])
    s = scale_approximate(full, c, Fraction(1, 4))
    assert (s.t, s.k, s.count) == (12, 12, 3)
    # the chain's terms come out in shortlex order of their words
    parts = {x1: power(x1, 12), x2: power(x2, 12), multiply(x1, x2): power(inverse(multiply(x1, x2)), 12)}
    order = [w for w, _ in c.items() if c.coefficient(w) > 0] + [w for w, _ in c.items() if c.coefficient(w) < 0]
    assert s.y == product(parts[w] for w in order)
    assert in_mixed_commutator(full, s.y)


def test_scale_approximate_errors(full):
    with pytest.raises(ChainError):
        scale_approximate(full, Chain1([(full.parse("abAB"), 1)]), 1)
    with pytest.raises(ChainError):
        scale_approximate(full, Chain1(), 0)
    with pytest.raises(ChainError):
        scale_approximate(full, Chain1([(full.parse("a"), 1)]), 1)


def test_scale_approximate_inequality(rng, full):
    certs = default_certificate_set(2)
    for _ in range(10):
        c = random_CQ_chain(rng, full)
        for eps in (1, Fraction(1, 2), Fraction(1, 4)):
            s = scale_approximate(full, c, eps, certs)
            for q in certs:
                gap = abs(evaluate_chain(q, s.k * c) - homogenized_value(q, s.y))
                assert gap <= s.count * q.defect_bound <= eps * s.k * q.defect_bound


def test_in_CQ(full):
    y = random_mixed_commutator_word(__import__("random").Random(1), full)
    assert in_CQ(full, Chain1([(y, Fraction(2, 3))]))
    assert not in_CQ(full, Chain1([(full.parse("abAB"), Fraction(1, 2))]))
