import random
from fractions import Fraction

import pytest

from scl_forge.coarse import (
    INF,
    SCOPE,
    CoarseError,
    MetricSample,
    add,
    asymptotic_check,
    asymptotic_report,
    coarse_hom_defect,
    d_plus,
    directed_radius,
    embedding_defect_samples,
    ext,
)
from scl_forge.harness import random_mixed_commutator_word


def line(n):
    return MetricSample.from_function([str(i) for i in range(n)], lambda x, y: abs(int(x) - int(y)))


def test_ext_parsing():
    assert ext("inf") == INF and ext(float("inf")) == INF
    assert ext("3/4") == Fraction(3, 4) and ext(2) == 2
    with pytest.raises(CoarseError):
        ext(0.5)
    with pytest.raises(CoarseError):
        ext(-1)
    assert add(INF, 1) == INF and add(Fraction(1, 2), 1) == Fraction(3, 2)


def test_d_plus():
    assert d_plus(Fraction(1, 2), False) == 1
    assert d_plus(0, True) == 0
    assert d_plus(0, False) == Fraction(1, 2)
    assert d_plus("inf", False) == INF


def test_sample_validation():
    with pytest.raises(CoarseError):
        MetricSample(("a", "b"), ((0, 1), (2, 0)))
    with pytest.raises(CoarseError):
        MetricSample(("a", "b"), ((1, 1), (1, 0)))
    with pytest.raises(CoarseError):
        MetricSample(("a", "b", "c"), ((0, 1, 5), (1, 0, 1), (5, 1, 0)))
    with pytest.raises(CoarseError):
        MetricSample(("a", "a"), ((0, 0), (0, 0)))
    s = MetricSample(("a", "b", "c"), ((0, "inf", 1), ("inf", 0, "inf"), (1, "inf", 0)))
    assert s.d("a", "b") == INF
    assert MetricSample.from_dict(s.to_dict()) == s


def test_radii_examples():
    s = line(6)
    assert directed_radius(s, ["0", "1"], ["5"]) == 5
    assert directed_radius(s, ["5"], ["0", "1"]) == 4
    assert asymptotic_check(s, ["0"], ["0", "5"]) == (0, 5)
    rep = asymptotic_report(s, ["0"], ["2"])
    assert rep["scope"] == SCOPE and rep["asymptotic"] and rep["radius_A_to_B"] == "2"
    with pytest.raises(CoarseError):
        directed_radius(s, [], ["0"])
    with pytest.raises(CoarseError):
        directed_radius(s, ["9"], ["0"])
    t = MetricSample(("a", "b"), ((0, "inf"), ("inf", 0)))
    assert not asymptotic_report(t, ["a"], ["b"])["asymptotic"]


def test_radius_triangle_random():
    rng = random.Random(2)
    for _ in range(50):
        n = rng.randint(1, 7)
        pts = [rng.randint(-10, 10) for _ in range(n)]
        s = MetricSample.from_function([str(i) for i in range(n)], lambda x, y: abs(pts[int(x)] - pts[int(y)]))
        A, B, C = (rng.sample(s.points, rng.randint(1, n)) for _ in range(3))
        assert directed_radius(s, A, C) <= directed_radius(s, A, B) + directed_radius(s, B, C)
        assert directed_radius(s, A, A) == 0
        if set(A) <= set(B):
            assert directed_radius(s, A, B) == 0


def test_coarse_hom_defect():
    assert coarse_hom_defect([]) == 0
    assert coarse_hom_defect([("x", "y", Fraction(1, 3)), ("x", "z", "1/2")]) == Fraction(1, 2)
    assert coarse_hom_defect([("x", "y", "inf")]) == INF


def test_embedding_defect(full):
    rng = random.Random(12)
    pairs = [(random_mixed_commutator_word(rng, full), random_mixed_commutator_word(rng, full)) for _ in range(3)]
    got = list(embedding_defect_samples(full, pairs))
    assert len(got) == 3
    assert coarse_hom_defect((a, b, v) for a, b, v, _ in got) <= Fraction(1, 2)
