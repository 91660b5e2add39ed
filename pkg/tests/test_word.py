import pytest

from oracles import all_words, naive_reduce
from scl_forge.harness import random_word
from scl_forge.marking import Marking, abelianize
from scl_forge.word import (
    EMPTY,
    Word,
    WordError,
    commutator,
    conjugator,
    cyclic_reduce,
    format_word,
    inverse,
    is_proper_power,
    multiply,
    parse_word,
    power,
    primitive_root,
    product,
    reduce,
)

P = lambda s: parse_word(s, 2)  # noqa: E731


def test_reduce_examples():
    assert reduce([1, -1]) == EMPTY
    assert reduce([1, 2, -2, -1]) == EMPTY
    assert reduce([1, 2, -1, -2]) == P("abAB")


def test_reduce_rank_check():
    with pytest.raises(WordError):
        reduce([1, 3], rank=2)
    with pytest.raises(WordError):
        reduce([0])


def test_reduce_matches_naive(rng):
    for _ in range(300):
        raw = [rng.choice([1, -1, 2, -2, 3, -3]) for _ in range(rng.randint(0, 30))]
        w = reduce(raw)
        assert tuple(w) == naive_reduce(raw)
        assert reduce(w) == w


def test_multiply_examples():
    assert multiply(P("a"), P("A")) == EMPTY
    assert multiply(P("ab"), P("Ba")) == P("aa")
    assert multiply(P("abab"), inverse(P("ab"))) == P("ab")
    assert tuple(multiply(P("abab"), inverse(P("ab")))) == naive_reduce(list(P("abab")) + list(inverse(P("ab"))))


def test_multiply_group_laws(rng):
    for _ in range(200):
        u, v, w = (random_word(rng, 2, rng.randint(0, 12)) for _ in range(3))
        assert multiply(multiply(u, v), w) == multiply(u, multiply(v, w))
        assert multiply(u, EMPTY) == u == multiply(EMPTY, u)


def test_inverse_random(rng):
    for _ in range(1000):
        w = random_word(rng, 3, rng.randint(0, 64))
        assert multiply(w, inverse(w)) == EMPTY


def test_commutator_examples():
    assert commutator(P("a"), P("b")) == P("abAB")
    assert commutator(EMPTY, P("ab")) == EMPTY
    assert commutator(P("a"), P("aaa")) == EMPTY


def test_commutator_abelianizes_to_zero(rng):
    m = Marking.full_abelianization(3)
    for _ in range(200):
        g, x = random_word(rng, 3, rng.randint(0, 8)), random_word(rng, 3, rng.randint(0, 8))
        assert not any(abelianize(m, commutator(g, x)))


def test_cyclic_reduce_examples():
    assert cyclic_reduce(P("abA")) == (P("b"), P("a"))
    assert cyclic_reduce(P("abab")) == (P("abab"), EMPTY)
    w = product([P("B"), P("abAB"), P("b")])
    core, h = cyclic_reduce(w)
    assert product([h, core, inverse(h)]) == w
    assert len(core) == 4


def test_cyclic_reduce_roundtrip(rng):
    for _ in range(300):
        w = random_word(rng, 2, rng.randint(0, 20))
        core, h = cyclic_reduce(w)
        assert product([h, core, inverse(h)]) == w
        assert len(core) < 2 or core[0] != -core[-1]


def test_primitive_root_examples():
    r = primitive_root(P("abab"))
    assert (r.root, r.exponent) == (P("ab"), 2)
    r = primitive_root(P("AAA"))
    assert (r.root, r.exponent) == (P("a"), -3)
    r = primitive_root(P("abAB"))
    assert (r.root, r.exponent) == (P("abAB"), 1)
    r = primitive_root(EMPTY)
    assert (r.root, r.exponent) == (EMPTY, 0)


def _brute_root_exponent(w):
    # largest |m| with w = r^m for some r, searching all candidate roots directly
    best = 1
    n = len(w)
    for d in range(1, n + 1):
        for r in all_words(2, d) if d <= 4 else ():
            r = Word(r)
            for m in range(2, n + 1):
                if len(power(r, m)) > n + 2 * d * m:
                    break
                if power(r, m) == w:
                    best = max(best, m)
    return best


def test_primitive_root_against_brute_force(rng):
    for _ in range(25):
        base = random_word(rng, 2, rng.randint(1, 3))
        w = power(base, rng.randint(1, 4))
        h = random_word(rng, 2, rng.randint(0, 1))
        w = product([h, w, inverse(h)])
        r = primitive_root(w)
        assert power(r.root, r.exponent) == w
        assert abs(r.exponent) == _brute_root_exponent(w)
        assert not is_proper_power(r.root)


def test_root_orientation_is_canonical(rng):
    for _ in range(200):
        w = random_word(rng, 2, rng.randint(1, 10))
        a, b = primitive_root(w), primitive_root(inverse(w))
        assert a.root == b.root and a.exponent == -b.exponent


def test_root_roundtrip(rng):
    for _ in range(500):
        w = power(random_word(rng, 2, rng.randint(0, 8)), rng.randint(-4, 4))
        r = primitive_root(w)
        assert power(r.root, r.exponent) == w


def test_conjugator(rng):
    for _ in range(200):
        v = random_word(rng, 2, rng.randint(1, 8))
        g = random_word(rng, 2, rng.randint(0, 5))
        u = product([g, v, inverse(g)])
        h = conjugator(u, v)
        assert h is not None and product([h, v, inverse(h)]) == u
    assert conjugator(P("ab"), P("aB")) is None


def test_parse_and_format():
    assert parse_word("[a,b^8]", 2) == commutator(P("a"), power(P("b"), 8))
    assert parse_word("[a,b]^3", 2) == power(P("abAB"), 3)
    assert parse_word("a^-2 b", 2) == P("AAb")
    assert parse_word("e", 2) == EMPTY
    assert format_word(P("abAB")) == "abAB"
    with pytest.raises(WordError):
        parse_word("abc", 2)
