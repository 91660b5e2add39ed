"""Reduced words in a free group.

Letters are nonzero integers: ``i`` is the i-th generator (1-based), ``-i``
its inverse.  A :class:`Word` is a tuple subclass that is always freely
reduced, so equality of words is equality of group elements.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence

ALPHABET = "abcdefghijklmnopqrstuvwxyz"


class WordError(ValueError):
    pass


def _reduce_letters(letters: Iterable[int]) -> list[int]:
    out: list[int] = []
    for x in letters:
        if x == 0:
            raise WordError("letter 0 is not a generator")
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return out


class Word(tuple):
    """A freely reduced word; immutable and hashable."""

    __slots__ = ()

    def __new__(cls, letters: Iterable[int] = ()):
        return tuple.__new__(cls, _reduce_letters(letters))

    @classmethod
    def _trusted(cls, letters: Iterable[int]) -> "Word":
        # caller guarantees the letters are already reduced
        return tuple.__new__(cls, letters)

    # -- group operations -------------------------------------------------
    def __mul__(self, other: "Word") -> "Word":
        return multiply(self, other)

    def inverse(self) -> "Word":
        return Word._trusted(-x for x in reversed(self))

    def __invert__(self) -> "Word":
        return self.inverse()

    def __pow__(self, k: int) -> "Word":
        return power(self, k)

    def conjugate(self, g: "Word") -> "Word":
        """Return ``g * self * g^-1``."""
        return multiply(multiply(g, self), g.inverse())

    # -- presentation -----------------------------------------------------
    def rank_needed(self) -> int:
        return max((abs(x) for x in self), default=0)

    def __str__(self) -> str:
        return format_word(self)

    def __repr__(self) -> str:
        return f"Word({format_word(self) or 'e'!r})"

    def __getitem__(self, item):
        r = tuple.__getitem__(self, item)
        if isinstance(item, slice):
            return Word(r)
        return r


EMPTY = Word()


def reduce(letters: Sequence[int], rank: int | None = None) -> Word:
    """Freely reduce a raw letter sequence, checking generator range."""
    if rank is not None:
        for x in letters:
            if not 1 <= abs(x) <= rank:
                raise WordError(f"generator index {x} outside rank {rank}")
    return Word(letters)


def multiply(u: Sequence[int], v: Sequence[int]) -> Word:
    i = len(u)
    j = 0
    n = len(v)
    while i > 0 and j < n and u[i - 1] == -v[j]:
        i -= 1
        j += 1
    return Word._trusted(tuple(u[:i]) + tuple(v[j:]))


def inverse(w: Sequence[int]) -> Word:
    return Word._trusted(-x for x in reversed(w))


def power(w: Word, k: int) -> Word:
    if k < 0:
        w, k = inverse(w), -k
    if k == 0 or not w:
        return EMPTY
    core, conj = cyclic_reduce(w)
    body = tuple(core) * k
    return multiply(multiply(conj, Word._trusted(body)), inverse(conj))


def product(words: Iterable[Sequence[int]]) -> Word:
    out: list[int] = []
    for w in words:
        for x in w:
            if out and out[-1] == -x:
                out.pop()
            else:
                out.append(x)
    return Word._trusted(out)


def commutator(g: Sequence[int], x: Sequence[int]) -> Word:
    """[g, x] = g x g^-1 x^-1."""
    return product((g, x, inverse(g), inverse(x)))


def cyclic_reduce(w: Sequence[int]) -> tuple[Word, Word]:
    """Split ``w = conj * core * conj^-1`` with ``core`` cyclically reduced."""
    n = len(w)
    s = 0
    while 2 * s + 1 < n and w[s] == -w[n - 1 - s]:
        s += 1
    return Word._trusted(w[s:n - s]), Word._trusted(w[:s])


def conjugator(u: Sequence[int], v: Sequence[int]) -> Word | None:
    """Some g with u = g v g^-1, or None when u and v are not conjugate."""
    cu, au = cyclic_reduce(u)
    cv, av = cyclic_reduce(v)
    if len(cu) != len(cv):
        return None
    n = len(cu)
    if n == 0:
        return EMPTY
    tu, tv = tuple(cu), tuple(cv)
    for i in range(n):
        # cu = P^-1 cv P with cv = P Q, cu = Q P, P = cv[:i]
        if tv[i:] + tv[:i] == tu:
            return product((au, inverse(tv[:i]), inverse(av)))
    return None


def letter_key(x: int) -> tuple[int, int]:
    return (abs(x), 0 if x > 0 else 1)


def word_key(w: Sequence[int]) -> tuple:
    return tuple(letter_key(x) for x in w)


def shortlex_key(w: Sequence[int]) -> tuple:
    return (len(w), word_key(w))


@dataclass(frozen=True)
class RootDecomposition:
    root: Word
    exponent: int


def primitive_root(w: Word) -> RootDecomposition:
    """Maximal root of ``w``, oriented so that ``root <= root^-1`` lexicographically."""
    if not w:
        return RootDecomposition(EMPTY, 0)
    core, conj = cyclic_reduce(w)
    n = len(core)
    root_core = core
    exponent = 1
    # smallest period d dividing n with core == core[:d] repeated
    for d in range(1, n + 1):
        if n % d == 0 and tuple(core[:d]) * (n // d) == tuple(core):
            root_core = Word._trusted(core[:d])
            exponent = n // d
            break
    root = multiply(multiply(conj, root_core), inverse(conj))
    inv = inverse(root)
    if word_key(inv) < word_key(root):
        root, exponent = inv, -exponent
    return RootDecomposition(root, exponent)


def is_proper_power(w: Word) -> bool:
    return abs(primitive_root(w).exponent) > 1


# -- text format ------------------------------------------------------------

def letter_name(x: int, labels: Sequence[str] | None = None) -> str:
    labels = labels or ALPHABET
    name = labels[abs(x) - 1]
    return name if x > 0 else name.upper()


def format_word(w: Sequence[int], labels: Sequence[str] | None = None) -> str:
    return "".join(letter_name(x, labels) for x in w)


_TOKEN = re.compile(r"\s*(\[|\]|\(|\)|,|\^-?\d+|[A-Za-z]|[eε1](?![\d]))")


def parse_word(text: str, rank: int | None = None, labels: Sequence[str] | None = None) -> Word:
    """Parse words such as ``abAB``, ``a^-3 b``, ``(ab)^2`` or ``[a,b^8]^3``.

    Lower case letters are generators, upper case their inverses; ``e`` or
    an empty string is the identity when ``e`` is not itself a generator.
    """
    labels = list(labels or ALPHABET[: rank or 26])
    index = {name: i + 1 for i, name in enumerate(labels)}
    tokens: list[str] = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise WordError(f"cannot parse word {text!r} at position {pos}")
        tokens.append(m.group(1))
        pos = m.end()
    tokens = [t for t in tokens if t]

    def letter(tok: str) -> Word:
        if tok in index:
            return Word((index[tok],))
        if tok.lower() in index and tok.isupper():
            return Word((-index[tok.lower()],))
        if tok in ("e", "ε", "1"):
            return EMPTY
        raise WordError(f"unknown generator {tok!r}")

    def parse_seq(i: int, stop: tuple[str, ...]) -> tuple[Word, int]:
        acc = EMPTY
        while i < len(tokens) and tokens[i] not in stop:
            atom, i = parse_atom(i)
            while i < len(tokens) and tokens[i].startswith("^"):
                atom = power(atom, int(tokens[i][1:]))
                i += 1
            acc = multiply(acc, atom)
        return acc, i

    def parse_atom(i: int) -> tuple[Word, int]:
        tok = tokens[i]
        if tok == "(":
            w, i = parse_seq(i + 1, (")",))
            if i >= len(tokens):
                raise WordError("unbalanced parenthesis")
            return w, i + 1
        if tok == "[":
            g, i = parse_seq(i + 1, (",",))
            if i >= len(tokens):
                raise WordError("commutator needs a comma")
            x, i = parse_seq(i + 1, ("]",))
            if i >= len(tokens):
                raise WordError("unbalanced bracket")
            return commutator(g, x), i + 1
        if tok in (")", "]", ","):
            raise WordError(f"unexpected {tok!r}")
        return letter(tok), i + 1

    w, i = parse_seq(0, ())
    if rank is not None:
        reduce(w, rank)
    return w
