"""Pairs (G, N) with G free and N the kernel of a map onto a lattice.

A :class:`Marking` fixes the free group ``F_n`` and an integer matrix
``p`` (k x n).  ``N = ker(F_n -> Z^n -> Z^k)``.  With ``k = 0`` we get the
ordinary pair (G, G).

For such pairs, ``w in N`` lies in ``[G, N]`` exactly when its exponent-sum
vector vanishes and every signed lattice area of the loop traced by
``p`` of its prefixes vanishes.  The pair (abelianization, areas) is a
homomorphism from ``N`` onto ``N / [G, N]``, so chain membership reduces to
summing classes.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Mapping, Sequence

from .word import ALPHABET, Word, format_word, parse_word


class MarkingError(ValueError):
    pass


class NotInN(MarkingError):
    """A word was required to lie in N but does not."""


@dataclass(frozen=True)
class MixedClass:
    abelian_part: tuple[int, ...]
    area_part: tuple[Fraction, ...]

    def is_zero(self) -> bool:
        return not any(self.abelian_part) and not any(self.area_part)

    def __add__(self, other: "MixedClass") -> "MixedClass":
        return MixedClass(
            tuple(a + b for a, b in zip(self.abelian_part, other.abelian_part)),
            tuple(a + b for a, b in zip(self.area_part, other.area_part)),
        )

    def scale(self, c) -> "MixedClass":
        return MixedClass(
            tuple(c * a for a in self.abelian_part),
            tuple(c * a for a in self.area_part),
        )


def _det(rows) -> Fraction:
    a = [[Fraction(v) for v in r] for r in rows]
    n, det = len(a), Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if a[r][c]), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            det = -det
        det *= a[c][c]
        for r in range(c + 1, n):
            f = a[r][c] / a[c][c]
            if f:
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return det


def _maximal_minor_gcd(rows) -> int:
    # p is onto Z^k iff the k x k minors are coprime
    k, n = len(rows), len(rows[0])
    g = 0
    for cols in combinations(range(n), k):
        g = math.gcd(g, int(_det([[r[j] for j in cols] for r in rows])))
        if g == 1:
            break
    return g


@dataclass(frozen=True)
class Marking:
    rank: int
    quotient_matrix: tuple[tuple[int, ...], ...] = ()
    labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if self.rank < 1:
            raise MarkingError("rank must be positive")
        rows = tuple(tuple(r) for r in self.quotient_matrix)
        for r in rows:
            if len(r) != self.rank:
                raise MarkingError(f"quotient row {r} has length {len(r)}, expected {self.rank}")
            for v in r:
                if not isinstance(v, int) or isinstance(v, bool):
                    raise MarkingError(f"quotient matrix entries must be integers, got {v!r}")
        object.__setattr__(self, "quotient_matrix", rows)
        labels = tuple(self.labels) or tuple(ALPHABET[: self.rank])
        if len(labels) != self.rank or len(set(labels)) != self.rank:
            raise MarkingError("need one distinct label per generator")
        for name in labels:
            if len(name) != 1 or not name.islower():
                raise MarkingError(f"generator labels must be single lower-case letters, got {name!r}")
        object.__setattr__(self, "labels", labels)
        if rows and _maximal_minor_gcd(rows) != 1:
            raise MarkingError("quotient matrix must map the generators onto Z^k")

    # -- constructors -------------------------------------------------------
    @classmethod
    def ordinary_pair(cls, rank: int) -> "Marking":
        return cls(rank, ())

    @classmethod
    def full_abelianization(cls, rank: int) -> "Marking":
        return cls(rank, tuple(tuple(int(i == j) for j in range(rank)) for i in range(rank)))

    @classmethod
    def from_dict(cls, data: Mapping) -> "Marking":
        if "torsion" in data and any(data["torsion"]):
            raise MarkingError("torsion quotients are not supported; the quotient must be a lattice Z^k")
        rank = int(data["rank"])
        labels = tuple(data.get("generators") or ALPHABET[:rank])
        matrix = tuple(tuple(r) for r in data.get("quotient_matrix", ()))
        return cls(rank, matrix, labels)

    @classmethod
    def load(cls, path) -> "Marking":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return {
            "rank": self.rank,
            "generators": list(self.labels),
            "quotient_matrix": [list(r) for r in self.quotient_matrix],
        }

    def ordinary(self) -> "Marking":
        """The pair (G, G) on the same free group."""
        return Marking(self.rank, (), self.labels)

    @property
    def k(self) -> int:
        return len(self.quotient_matrix)

    @property
    def is_ordinary(self) -> bool:
        return self.k == 0 or not any(any(r) for r in self.quotient_matrix)

    def parse(self, text: str) -> Word:
        return parse_word(text, self.rank, self.labels)

    def format(self, w: Sequence[int]) -> str:
        return format_word(w, self.labels) or "e"

    def check(self, w: Sequence[int]) -> None:
        for x in w:
            if not 1 <= abs(x) <= self.rank:
                raise MarkingError(f"generator index {x} outside rank {self.rank}")

    # -- oracles ----------------------------------------------------------
    def project(self, v: Sequence[int]) -> tuple[int, ...]:
        return tuple(sum(r[i] * v[i] for i in range(self.rank)) for r in self.quotient_matrix)

    def step(self, x: int) -> tuple[int, ...]:
        col = abs(x) - 1
        s = 1 if x > 0 else -1
        return tuple(s * r[col] for r in self.quotient_matrix)


def abelianize(m: Marking, w: Sequence[int]) -> tuple[int, ...]:
    m.check(w)
    v = [0] * m.rank
    for x in w:
        v[abs(x) - 1] += 1 if x > 0 else -1
    return tuple(v)


def in_N(m: Marking, w: Sequence[int]) -> bool:
    m.check(w)
    if m.k == 0:
        return True
    return not any(m.project(abelianize(m, w)))


def twice_area(m: Marking, w: Sequence[int]) -> tuple[int, ...]:
    """Doubled signed areas, one per coordinate plane (i < j) of Z^k."""
    k = m.k
    planes = list(combinations(range(k), 2))
    acc = [0] * len(planes)
    pos = [0] * k
    for x in w:
        d = m.step(x)
        for t, (i, j) in enumerate(planes):
            acc[t] += pos[i] * d[j] - pos[j] * d[i]
        for i in range(k):
            pos[i] += d[i]
    if any(pos):
        raise NotInN(f"{m.format(w)} is not in N: its image in Z^k is {tuple(pos)}")
    return tuple(acc)


def area_class(m: Marking, w: Sequence[int]) -> tuple[Fraction, ...]:
    """Signed shoelace areas of the closed lattice loop ``p(prefixes of w)``.

    Integral whenever ``w`` lies in ``[G, G]``; words of N outside ``[G, G]``
    may enclose half-integral areas when some generator maps to a non-axis
    vector.
    """
    m.check(w)
    doubled = twice_area(m, w)
    areas = tuple(Fraction(a, 2) for a in doubled)
    if not any(abelianize(m, w)):
        # commutator-subgroup loops are sums of parallelograms
        assert all(a.denominator == 1 for a in areas), areas
    return areas


def mixed_class(m: Marking, w: Sequence[int]) -> MixedClass:
    return MixedClass(abelianize(m, w), area_class(m, w))


def in_mixed_commutator(m: Marking, w: Sequence[int]) -> bool:
    if any(abelianize(m, w)):
        return False
    return not any(twice_area(m, w))


def in_commutator_subgroup(m: Marking, w: Sequence[int]) -> bool:
    return not any(abelianize(m, w))


def chain_class(m: Marking, terms) -> MixedClass:
    """Coefficient-weighted sum of classes; ``terms`` yields (word, coeff)."""
    total = MixedClass((0,) * m.rank, (Fraction(0),) * (m.k * (m.k - 1) // 2))
    for w, c in terms:
        if not in_N(m, w):
            raise NotInN(f"support word {m.format(w)} is not in N")
        total = total + mixed_class(m, w).scale(c)
    return total


def chain_in_CZ(m: Marking, c) -> bool:
    """Membership of an integral 1-chain supported in N, by summing classes."""
    items = list(c.items()) if hasattr(c, "items") else list(c)
    for _, coeff in items:
        if Fraction(coeff).denominator != 1:
            raise MarkingError("chain_in_CZ needs integer coefficients")
    return chain_class(m, items).is_zero()
