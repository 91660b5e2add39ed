import itertools
import json
from fractions import Fraction

import pytest

from oracles import all_words, in_GN_invariants_vanish, lattice_path, shoelace_twice_area
from scl_forge.chains import Chain1
from scl_forge.harness import random_N_word, random_word
from scl_forge.marking import (
    Marking,
    MarkingError,
    NotInN,
    abelianize,
    area_class,
    chain_in_CZ,
    in_commutator_subgroup,
    in_mixed_commutator,
    in_N,
    mixed_class,
    twice_area,
)
from scl_forge.qm import ball
from scl_forge.word import EMPTY, Word, commutator, inverse, multiply, product

MARKINGS = [
    Marking.ordinary_pair(2),
    Marking(2, ((1, 0),)),
    Marking(2, ((1, 1),)),
    Marking.full_abelianization(2),
    Marking(3, ((1, 0, 0), (0, 1, 0))),
    Marking(3, ((1, 0, 1), (0, 1, 1))),
]


def test_abelianize_examples(full):
    assert abelianize(full, full.parse("abAB")) == (0, 0)
    assert abelianize(full, full.parse("aaB")) == (2, -1)
    assert abelianize(full, full.parse("ababab")) == (3, 3)


def test_in_N_examples(half, full):
    assert in_N(half, half.parse("b"))
    assert not in_N(half, half.parse("a"))
    assert in_N(full, full.parse("abAB"))


def test_area_examples(full):
    assert area_class(full, full.parse("abAB")) == (1,)
    assert area_class(full, full.parse("abABabAB")) == (2,)
    assert area_class(full, full.parse("abABbaBA")) == (0,)
    with pytest.raises(NotInN):
        area_class(full, full.parse("a"))


def test_area_matches_shoelace(rng):
    for m in MARKINGS[3:]:
        for _ in range(100):
            w = random_N_word(rng, m, rng.randint(0, 12))
            pts = lattice_path(m.quotient_matrix, w)
            assert pts[-1] == (0,) * m.k
            for t, (i, j) in enumerate(itertools.combinations(range(m.k), 2)):
                plane = [(p[i], p[j]) for p in pts[:-1]]
                assert twice_area(m, w)[t] == shoelace_twice_area(plane)


def test_half_integral_area_outside_commutator_subgroup():
    # generator c maps to (1, 1); the loop a b C encloses half a unit square
    m = Marking(3, ((1, 0, 1), (0, 1, 1)))
    w = m.parse("abC")
    assert in_N(m, w) and not in_commutator_subgroup(m, w)
    assert area_class(m, w) == (Fraction(1, 2),)


def test_mixed_commutator_examples(half, full):
    assert in_mixed_commutator(half, half.parse("[a,b]"))
    assert not in_mixed_commutator(full, full.parse("[a,b]"))
    for m in MARKINGS:
        assert in_mixed_commutator(m, EMPTY)


def test_properties(rng):
    for m in MARKINGS:
        for _ in range(60):
            g = random_word(rng, m.rank, rng.randint(0, 5))
            x = random_N_word(rng, m, rng.randint(0, 5))
            y = commutator(g, x)
            assert in_mixed_commutator(m, y)
            h = random_word(rng, m.rank, rng.randint(0, 4))
            assert in_mixed_commutator(m, product([h, y, inverse(h)]))
            y2 = commutator(random_word(rng, m.rank, 3), random_N_word(rng, m, 3))
            assert in_mixed_commutator(m, multiply(y, y2))
            w = random_word(rng, m.rank, rng.randint(0, 10))
            if in_mixed_commutator(m, w):
                assert in_N(m, w) and not any(abelianize(m, w))
            assert in_mixed_commutator(m, product([h, w, inverse(h)])) == in_mixed_commutator(m, w)


def test_class_is_additive_on_N(rng):
    for m in MARKINGS:
        for _ in range(50):
            u, v = random_N_word(rng, m, 6), random_N_word(rng, m, 6)
            assert mixed_class(m, multiply(u, v)) == mixed_class(m, u) + mixed_class(m, v)


@pytest.mark.parametrize("m", MARKINGS[:4], ids=["ordinary", "a->1", "a,b->1", "full"])
def test_membership_oracle_exhaustive(m):
    """Every word of length <= 6: positives are products of <= 2 simple commutators
    [g, x] with |g|, |x| <= 4; negatives have a nonvanishing Heisenberg invariant."""
    G = ball(2, 4)
    X = [x for x in G if in_N(m, x)]
    S = {commutator(g, x) for g in G for x in X}
    for t in all_words(2, 6):
        w = Word(t)
        ours = in_mixed_commutator(m, w)
        assert ours == in_GN_invariants_vanish(m.quotient_matrix, 2, w), m.format(w)
        if ours:
            assert w in S or w == EMPTY or any(multiply(inverse(s), w) in S for s in S), m.format(w)


def _arrangements(m, c, conj_len=3):
    """All orderings of the factors; each with no conjugation, single-factor conjugation
    by every word of length <= conj_len, or all factors conjugated by one letter."""
    factors = []
    for w, coeff in c.items():
        n = int(coeff)
        factors += [w if n > 0 else inverse(w)] * abs(n)
    conj = ball(m.rank, conj_len)
    letters = ball(m.rank, 1)
    for order in set(itertools.permutations(factors)):
        yield product(order)
        for i in range(len(order)):
            for h in conj:
                f = list(order)
                f[i] = product([h, f[i], inverse(h)])
                yield product(f)
        for hs in itertools.product(letters, repeat=len(order)):
            yield product(product([h, f, inverse(h)]) for h, f in zip(hs, order))


def _oracle(m, c):
    results = {in_GN_invariants_vanish(m.quotient_matrix, m.rank, y) for y in _arrangements(m, c)}
    assert len(results) == 1  # every arrangement agrees
    return results.pop()


@pytest.mark.parametrize("m", MARKINGS[1:3], ids=["a->1", "a,b->1"])
def test_chain_membership_against_arrangements(m):
    words = [Word(t) for t in all_words(2, 3) if t and in_N(m, Word(t))]
    coeffs = (-2, -1, 1, 2)
    n = 0
    for w1 in words:
        for c1 in coeffs:
            c = Chain1([(w1, c1)])
            assert chain_in_CZ(m, c) == _oracle(m, c)
            n += 1
    for w1, w2 in itertools.combinations(words[:8], 2):
        for c1, c2 in itertools.product((-1, 1, 2), repeat=2):
            c = Chain1([(w1, c1), (w2, c2)])
            assert chain_in_CZ(m, c) == _oracle(m, c)
            n += 1
    assert n > 50


def test_chain_membership_examples(full, half):
    x1, x2 = half.parse("b"), half.parse("aBA")
    assert chain_in_CZ(half, Chain1([(x1, 1), (x2, 1), (multiply(x1, x2), -1)]))
    assert not chain_in_CZ(full, Chain1([(full.parse("abAB"), 1)]))
    y = commutator(full.parse("a"), full.parse("abAB"))
    assert chain_in_CZ(full, Chain1([(y, 1)]))
    with pytest.raises(NotInN):
        chain_in_CZ(full, Chain1([(full.parse("a"), 1)]))
    with pytest.raises(MarkingError):
        chain_in_CZ(full, Chain1([(y, Fraction(1, 2))]))


def test_marking_validation(tmp_path):
    with pytest.raises(MarkingError):
        Marking(2, ((2, 0),))  # not onto Z
    with pytest.raises(MarkingError):
        Marking(2, ((1, 0, 0),))
    with pytest.raises(MarkingError):
        Marking(2, ((1, 0),), ("a", "a"))
    with pytest.raises(MarkingError):
        Marking.from_dict({"rank": 2, "quotient_matrix": [[1, 0]], "torsion": [2]})
    m = Marking(2, ((1, 1),), ("x", "y"))
    path = tmp_path / "pair.json"
    path.write_text(json.dumps(m.to_dict()))
    assert Marking.load(path) == m
    assert m.format(m.parse("xyXY")) == "xyXY"
    assert m.ordinary().is_ordinary and m.ordinary().rank == 2


def test_rank_mismatch(full):
    with pytest.raises(Exception):
        in_N(full, Word((3,)))
