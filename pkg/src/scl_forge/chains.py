"""Finitely supported rational 1-chains and 2-chains on a free group."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .marking import Marking, chain_in_CZ, in_N, in_mixed_commutator
from .qm import evaluate_chain, homogenized_value
from .word import EMPTY, Word, inverse, multiply, power, primitive_root, product, shortlex_key


class ChainError(ValueError):
    pass


def _frac(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, float):
        raise ChainError("chain coefficients must be exact; got a float")
    return Fraction(v)


class _Chain:
    """Shared sparse-vector behaviour; subclasses fix the key type."""

    __slots__ = ("_terms",)

    def __init__(self, terms=None):
        acc: dict = {}
        if terms:
            items = terms.items() if isinstance(terms, Mapping) else terms
            for key, c in items:
                key = self._key(key)
                acc[key] = acc.get(key, 0) + _frac(c)
        self._terms = {k: v for k, v in sorted(acc.items(), key=lambda kv: self._sort(kv[0])) if v}

    @staticmethod
    def _key(key):
        raise NotImplementedError

    @staticmethod
    def _sort(key):
        raise NotImplementedError

    @classmethod
    def _raw(cls, terms: dict):
        obj = cls.__new__(cls)
        obj._terms = {k: v for k, v in sorted(terms.items(), key=lambda kv: cls._sort(kv[0])) if v}
        return obj

    def items(self):
        return self._terms.items()

    def support(self):
        return list(self._terms)

    def coefficient(self, key) -> Fraction:
        return self._terms.get(self._key(key), Fraction(0))

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def __iter__(self):
        return iter(self._terms)

    def __eq__(self, other):
        return type(self) is type(other) and self._terms == other._terms

    def __hash__(self):
        return hash((type(self).__name__, tuple(self._terms.items())))

    def __add__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        acc = dict(self._terms)
        for k, v in other._terms.items():
            acc[k] = acc.get(k, 0) + v
        return self._raw(acc)

    def __neg__(self):
        return self._raw({k: -v for k, v in self._terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, s):
        s = _frac(s)
        return self._raw({k: s * v for k, v in self._terms.items()})

    __rmul__ = __mul__

    def l1_norm(self) -> Fraction:
        return sum((abs(v) for v in self._terms.values()), Fraction(0))

    def denominator_lcm(self) -> int:
        return math.lcm(1, *(v.denominator for v in self._terms.values()))

    def is_integral(self) -> bool:
        return all(v.denominator == 1 for v in self._terms.values())


class Chain1(_Chain):
    """Rational 1-chain: a finite formal combination of group elements."""

    __slots__ = ()

    @staticmethod
    def _key(key):
        return key if isinstance(key, Word) else Word(key)

    @staticmethod
    def _sort(key):
        return shortlex_key(key)

    @classmethod
    def of(cls, *pairs) -> "Chain1":
        """``Chain1.of((w1, c1), (w2, c2), ...)``; a bare word means coefficient 1."""
        return cls([(p, 1) if isinstance(p, Word) else p for p in pairs])

    def to_dict(self, m: Marking | None = None) -> dict:
        fmt = m.format if m else (lambda w: str(w) or "e")
        return {"terms": [{"word": fmt(w), "coeff": str(c)} for w, c in self.items()]}

    @classmethod
    def from_dict(cls, data: Mapping, m: Marking) -> "Chain1":
        return cls((m.parse(t["word"]), Fraction(str(t["coeff"]))) for t in data["terms"])

    def format(self, m: Marking | None = None) -> str:
        fmt = m.format if m else (lambda w: str(w) or "e")
        if not self:
            return "0"
        return " + ".join(f"{c}*{fmt(w)}" for w, c in self.items())

    def __repr__(self):
        return f"Chain1({self.format()})"


class Chain2(_Chain):
    """Rational 2-chain on pairs (g1, g2)."""

    __slots__ = ()

    @staticmethod
    def _key(key):
        g1, g2 = key
        return (g1 if isinstance(g1, Word) else Word(g1), g2 if isinstance(g2, Word) else Word(g2))

    @staticmethod
    def _sort(key):
        return (shortlex_key(key[0]), shortlex_key(key[1]))

    def to_dict(self, m: Marking | None = None) -> dict:
        fmt = m.format if m else (lambda w: str(w) or "e")
        return {"terms": [{"pair": [fmt(g1), fmt(g2)], "coeff": str(c)} for (g1, g2), c in self.items()]}

    @classmethod
    def from_dict(cls, data: Mapping, m: Marking) -> "Chain2":
        return cls(((m.parse(t["pair"][0]), m.parse(t["pair"][1])), Fraction(str(t["coeff"])))
                   for t in data["terms"])

    def __repr__(self):
        body = " + ".join(f"{c}*({g1 or 'e'},{g2 or 'e'})" for (g1, g2), c in self.items())
        return f"Chain2({body or '0'})"


def boundary(c2: Chain2) -> Chain1:
    acc: dict = {}
    for (g1, g2), c in c2.items():
        for w, s in ((g2, 1), (multiply(g1, g2), -1), (g1, 1)):
            acc[w] = acc.get(w, 0) + s * c
    return Chain1._raw(acc)


def validate_mixed_support(m: Marking, c2: Chain2) -> bool:
    return all(in_N(m, g1) or in_N(m, g2) for g1, g2 in c2)


def h_normal_form(c: Chain1) -> Chain1:
    acc: dict = {}
    for w, coeff in c.items():
        r = primitive_root(w)
        if r.exponent:
            acc[r.root] = acc.get(r.root, 0) + r.exponent * coeff
    return Chain1._raw(acc)


def h_generator(x: Word, k: int) -> Chain1:
    """x^k - k x."""
    return Chain1([(power(x, k), 1), (x, -k)])


def clear_denominators(c: Chain1) -> tuple[int, Chain1]:
    l = c.denominator_lcm()
    return l, c * l


def in_CQ(m: Marking, c: Chain1) -> bool:
    """Whether ``c`` lies in the rational mixed chain space, via integral multiples."""
    return chain_in_CZ(m, clear_denominators(c)[1])


@dataclass(frozen=True)
class ScaledWord:
    k: int
    y: Word
    l: int
    t: int
    count: int  # m + m'

    def meta(self) -> dict:
        return {"l": self.l, "t": self.t, "m_plus_m_prime": self.count}


def scale_approximate(m: Marking, c: Chain1, eps, certificates: Iterable = ()) -> ScaledWord:
    """Replace a rational chain by one word ``y`` and a scale ``k`` with kc close to y.

    Every quasimorphism in ``certificates`` is checked against the
    approximation inequality; a violation raises ``AssertionError``.
    """
    eps = _frac(eps)
    if eps <= 0:
        raise ChainError("eps must be positive")
    for w in c:
        if not in_N(m, w):
            raise ChainError(f"support word {m.format(w)} is not in N")
    l, lc = clear_denominators(c)
    if not chain_in_CZ(m, lc):
        raise ChainError("chain is not in the rational mixed chain space")
    pos: list[Word] = []
    neg: list[Word] = []
    for w, coeff in lc.items():
        n = int(coeff)
        (pos if n > 0 else neg).extend([w] * abs(n))
    count = len(pos) + len(neg)
    if count == 0:
        return ScaledWord(1, EMPTY, l, 1, 0)
    # least t with count <= eps * l * t
    t = max(1, math.ceil(Fraction(count) / (eps * l)))
    k = l * t
    y = product([power(x, t) for x in pos] + [power(inverse(x), t) for x in neg])
    assert in_mixed_commutator(m, y), "scaled product left the mixed commutator subgroup"
    kc = c * k
    for q in certificates:
        gap = abs(evaluate_chain(q, kc) - homogenized_value(q, y))
        assert gap <= count * q.defect_bound, (q, gap)
    return ScaledWord(k, y, l, t, count)
