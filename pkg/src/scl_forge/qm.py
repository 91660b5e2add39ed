"""Brooks counting quasimorphisms on free groups.

An atom ``w`` stands for ``C_w - C_{w^-1}`` where ``C_w(y)`` counts (possibly
overlapping) occurrences of ``w`` in the reduced word ``y``.  Values are
homogenized exactly: occurrence counts in ``y^m`` become affine in ``m`` once
the power is long compared to the atoms, and the slope is the homogenization.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .word import Word, cyclic_reduce, format_word, inverse, power, shortlex_key


class QuasimorphismError(ValueError):
    pass


class Disqualified(QuasimorphismError):
    """The certificate failed its defect window check."""


def default_atom_bound(w: Sequence[int]) -> Fraction:
    return Fraction(2 * (len(w) - 1))


@dataclass(frozen=True)
class BrooksCombination:
    atoms: tuple[tuple[Word, Fraction], ...]
    defect_bound: Fraction
    window: int = 6
    name: str = field(default="", compare=False)

    def __post_init__(self):
        atoms = []
        for w, c in self.atoms:
            w = w if isinstance(w, Word) else Word(w)
            if not w:
                raise QuasimorphismError("atoms must be nonempty words")
            atoms.append((w, Fraction(c)))
        atoms.sort(key=lambda a: shortlex_key(a[0]))
        object.__setattr__(self, "atoms", tuple(atoms))
        object.__setattr__(self, "defect_bound", Fraction(self.defect_bound))
        if self.defect_bound < 0:
            raise QuasimorphismError("defect bound must be nonnegative")
        if self.window < self.max_len:
            raise QuasimorphismError("window too small: it must be at least the longest atom")

    @classmethod
    def atom(cls, w: Word, weight=1, window: int = 6, defect_bound=None) -> "BrooksCombination":
        weight = Fraction(weight)
        bound = abs(weight) * default_atom_bound(w) if defect_bound is None else defect_bound
        return cls(((w, weight),), bound, window)

    @classmethod
    def combine(cls, terms: Iterable[tuple[Word, object]], window: int = 6) -> "BrooksCombination":
        terms = [(w, Fraction(c)) for w, c in terms]
        bound = sum((abs(c) * default_atom_bound(w) for w, c in terms), Fraction(0))
        return cls(tuple(terms), bound, window)

    @property
    def max_len(self) -> int:
        return max((len(w) for w, _ in self.atoms), default=0)

    def label(self, labels=None) -> str:
        if self.name:
            return self.name
        return " + ".join(f"{c}*H[{format_word(w, labels)}]" for w, c in self.atoms)

    def to_dict(self, labels=None) -> dict:
        return {
            "atoms": [{"word": format_word(w, labels), "weight": str(c)} for w, c in self.atoms],
            "defect_bound": str(self.defect_bound),
            "window": self.window,
        }

    @classmethod
    def from_dict(cls, data, parse) -> "BrooksCombination":
        atoms = tuple((parse(a["word"]), Fraction(str(a["weight"]))) for a in data["atoms"])
        return cls(atoms, Fraction(str(data["defect_bound"])), int(data.get("window", 6)))


# -- evaluation -------------------------------------------------------------

def count_occurrences(pattern: Sequence[int], w: Sequence[int]) -> int:
    n, k = len(w), len(pattern)
    pattern = tuple(pattern)
    w = tuple(w)
    return sum(1 for i in range(n - k + 1) if w[i:i + k] == pattern)


def raw_value(q: BrooksCombination, y: Sequence[int]) -> Fraction:
    total = Fraction(0)
    for w, c in q.atoms:
        total += c * (count_occurrences(w, y) - count_occurrences(inverse(w), y))
    return total


def homogenized_value(q: BrooksCombination, y: Word) -> Fraction:
    """Exact homogenization via the slope of raw values on long powers."""
    core, _ = cyclic_reduce(y)
    if not core:
        return Fraction(0)
    m0 = math.ceil(2 * q.max_len / len(core)) + 2
    r0, r1, r2 = (raw_value(q, power(y, m)) for m in (m0, m0 + 1, m0 + 2))
    s1, s2 = r1 - r0, r2 - r1
    if s1 != s2:
        raise AssertionError(f"counts did not stabilize for {y!r}: slopes {s1} and {s2}")
    return s1


def cyclic_count(pattern: Sequence[int], core: Sequence[int]) -> int:
    """Occurrences of ``pattern`` read around the cyclic word ``core``."""
    n, k = len(core), len(pattern)
    if n == 0:
        return 0
    return sum(1 for i in range(n) if all(core[(i + j) % n] == pattern[j] for j in range(k)))


def cyclic_value(q: BrooksCombination, y: Word) -> Fraction:
    """Same number as :func:`homogenized_value`, read off the cyclic core."""
    core, _ = cyclic_reduce(y)
    total = Fraction(0)
    for w, c in q.atoms:
        total += c * (cyclic_count(w, core) - cyclic_count(inverse(w), core))
    return total


def evaluate_chain(q: BrooksCombination, c) -> Fraction:
    return sum((coeff * homogenized_value(q, w) for w, coeff in c.items()), Fraction(0))


# -- window validation ------------------------------------------------------

@lru_cache(maxsize=None)
def ball(rank: int, n: int) -> tuple[Word, ...]:
    """All reduced words of length <= n in shortlex order."""
    letters = [x for i in range(1, rank + 1) for x in (i, -i)]
    out = [Word()]
    layer = [Word()]
    for _ in range(n):
        nxt = []
        for w in layer:
            for x in letters:
                if not w or w[-1] != -x:
                    nxt.append(Word._trusted(tuple(w) + (x,)))
        out.extend(nxt)
        layer = nxt
    return tuple(out)


def default_window(rank: int, cap: int = 2000, longest: int = 3) -> int:
    n = 6
    while n > longest and len(ball(rank, n)) > cap:
        n -= 1
    return n


def _pack(words: Sequence[Sequence[int]], width: int) -> tuple[np.ndarray, np.ndarray]:
    arr = np.zeros((len(words), width), dtype=np.int8)
    lens = np.zeros(len(words), dtype=np.int64)
    for i, w in enumerate(words):
        arr[i, : len(w)] = w
        lens[i] = len(w)
    return arr, lens


def _multiply_rows(a, la, b, lb):
    """Row-wise reduced products of padded words."""
    rows, wa = a.shape
    wb = b.shape[1]
    idx = np.arange(rows)
    lim = np.minimum(la, lb)
    cancel = np.zeros(rows, dtype=np.int64)
    alive = np.ones(rows, dtype=bool)
    for k in range(min(wa, wb)):
        pos = la - 1 - k
        ok = alive & (k < lim)
        ea = a[idx, np.clip(pos, 0, wa - 1)]
        eb = b[:, k]
        ok &= ea == -eb
        cancel += ok
        alive = ok
    keep = la - cancel
    out_len = keep + lb - cancel
    width = wa + wb
    t = np.arange(width)[None, :]
    from_a = t < keep[:, None]
    src_b = t - keep[:, None] + cancel[:, None]
    valid_b = (~from_a) & (t < out_len[:, None])
    out = np.zeros((rows, width), dtype=np.int8)
    ga = a[idx[:, None], np.clip(t, 0, wa - 1)]
    gb = b[idx[:, None], np.clip(src_b, 0, wb - 1)]
    out[from_a] = ga[from_a]
    out[valid_b] = gb[valid_b]
    return out, out_len


def _strip_conjugator(arr, lens):
    rows, width = arr.shape
    idx = np.arange(rows)
    s = np.zeros(rows, dtype=np.int64)
    alive = np.ones(rows, dtype=bool)
    for k in range(width // 2 + 1):
        ok = alive & (2 * k + 1 < lens)
        first = arr[idx, min(k, width - 1)]
        last = arr[idx, np.clip(lens - 1 - k, 0, width - 1)]
        ok &= first == -last
        s += ok
        alive = ok
    return s, lens - 2 * s


class _Codebook:
    """Integer codes for all words of length 1..longest over a rank-r alphabet."""

    def __init__(self, rank: int, longest: int):
        self.rank = rank
        self.longest = longest
        self.base = 2 * rank
        self.offset = [sum(self.base ** i for i in range(1, l)) for l in range(1, longest + 1)]
        self.size = sum(self.base ** l for l in range(1, longest + 1))

    def code(self, w: Sequence[int]) -> int:
        c = 0
        for j, x in enumerate(w):
            c += ((abs(x) - 1) * 2 + (x < 0)) * self.base ** j
        return self.offset[len(w) - 1] + c

    def weights(self, qs: Sequence["BrooksCombination"]) -> tuple[np.ndarray, list[int]]:
        mat = np.zeros((self.size, len(qs)), dtype=np.int64)
        dens = []
        for col, q in enumerate(qs):
            den = math.lcm(1, *(c.denominator for _, c in q.atoms))
            dens.append(den)
            for w, c in q.atoms:
                n = int(c * den)
                mat[self.code(w), col] += n
                mat[self.code(inverse(w)), col] -= n
        return mat, dens

    def counts(self, arr, lens) -> np.ndarray:
        """Cyclic occurrence counts of every coded word, one row per input word."""
        rows, width = arr.shape
        idx = np.arange(rows)
        s, core_len = _strip_conjugator(arr, lens)
        safe = np.maximum(core_len, 1)
        i = np.arange(width)[None, :]
        live = i < core_len[:, None]
        sym = np.where(arr > 0, (arr.astype(np.int64) - 1) * 2, (-arr.astype(np.int64) - 1) * 2 + 1)
        out = np.zeros((rows, self.size), dtype=np.int64)
        code = np.zeros((rows, width), dtype=np.int64)
        row_base = (idx * self.size)[:, None]
        for j in range(self.longest):
            pos = s[:, None] + (i + j) % safe[:, None]
            code += sym[idx[:, None], np.clip(pos, 0, width - 1)] * self.base ** j
            full = self.offset[j] + code
            flat = (row_base + full)[live]
            out += np.bincount(flat, minlength=rows * self.size).reshape(rows, self.size)
        return out


def _batch_values(qs, arr, lens, book: _Codebook, wmat) -> np.ndarray:
    return book.counts(arr, lens) @ wmat


def window_values(q: BrooksCombination, words: Sequence[Word], rank: int | None = None) -> list[Fraction]:
    """Vectorized homogenized values (via cyclic counts) for many words."""
    rank = rank or max(2, max((abs(x) for w, _ in q.atoms for x in w), default=1),
                       max((abs(x) for w in words for x in w), default=1))
    width = max((len(w) for w in words), default=1) or 1
    arr, lens = _pack(words, width)
    book = _Codebook(rank, q.max_len)
    wmat, dens = book.weights([q])
    vals = _batch_values([q], arr, lens, book, wmat)[:, 0]
    return [Fraction(int(v), dens[0]) for v in vals]


@dataclass(frozen=True)
class WindowResult:
    empirical_max: Fraction
    passed: bool
    witness: tuple[Word, Word] | None
    rank: int

    def __iter__(self):
        return iter((self.empirical_max, self.passed))


_WINDOW_CACHE: dict = {}


def _atom_rank(q: BrooksCombination) -> int:
    return max(abs(x) for w, _ in q.atoms for x in w)


def validate_window(qs: Sequence[BrooksCombination], rank: int, chunk: int = 1 << 16) -> list[WindowResult]:
    """Exhaustive defect scan over all g1, g2 of length <= window, many certificates at once.

    Certificates sharing a window share the pair products; results are cached.
    """
    out: dict[int, WindowResult] = {}
    todo: dict[int, list[int]] = {}
    for n, q in enumerate(qs):
        if _atom_rank(q) > rank:
            raise QuasimorphismError("atom uses a generator outside the rank")
        if q.window < q.max_len:
            raise QuasimorphismError("window too small")
        hit = _WINDOW_CACHE.get((q, rank))
        if hit is not None:
            out[n] = hit
        else:
            todo.setdefault(q.window, []).append(n)
    for window, members in todo.items():
        group = [qs[n] for n in members]
        book = _Codebook(rank, max(q.max_len for q in group))
        wmat, dens = book.weights(group)
        words = ball(rank, window)
        arr, lens = _pack(words, window)
        base = _batch_values(group, arr, lens, book, wmat)
        size = len(words)
        best = np.full(len(group), -1, dtype=np.int64)
        wit = [None] * len(group)
        per = max(1, chunk // size)
        for start in range(0, size, per):
            i1 = np.repeat(np.arange(start, min(size, start + per)), size)
            i2 = np.tile(np.arange(size), len(i1) // size)
            prod, plen = _multiply_rows(arr[i1], lens[i1], arr[i2], lens[i2])
            d = np.abs(_batch_values(group, prod, plen, book, wmat) - base[i1] - base[i2])
            arg = d.argmax(axis=0)
            top = d[arg, np.arange(len(group))]
            for col in np.nonzero(top > best)[0]:
                best[col] = top[col]
                wit[col] = (words[i1[arg[col]]], words[i2[arg[col]]])
        for col, n in enumerate(members):
            emp = Fraction(int(max(best[col], 0)), dens[col])
            res = WindowResult(emp, emp <= qs[n].defect_bound, wit[col], rank)
            _WINDOW_CACHE[(qs[n], rank)] = res
            out[n] = res
    return [out[n] for n in range(len(qs))]


def defect_window_check(q: BrooksCombination, rank: int | None = None) -> WindowResult:
    return validate_window([q], rank or max(2, _atom_rank(q)))[0]


def bavard_lower_bound(q: BrooksCombination, c, m) -> Fraction:
    """Duality lower bound |q(c)| / (2 D) for a chain in the mixed chain space."""
    from .chains import in_CQ  # chains imports this module

    if not defect_window_check(q, m.rank).passed:
        raise Disqualified(f"{q.label(m.labels)} failed its defect window check")
    if not in_CQ(m, c):
        raise QuasimorphismError("chain is not in the rational mixed chain space")
    v = evaluate_chain(q, c)
    if v == 0:
        return Fraction(0)
    if q.defect_bound == 0:
        raise AssertionError("a homomorphism cannot be nonzero on the mixed chain space")
    return abs(v) / (2 * q.defect_bound)


def default_certificates(rank: int, max_len: int = 3, window: int | None = None) -> list[BrooksCombination]:
    """One antisymmetrized atom per pair {w, w^-1} of length 1..max_len."""
    window = window or default_window(rank, longest=max_len)
    out = []
    seen = set()
    for w in ball(rank, max_len):
        if not w:
            continue
        inv = inverse(w)
        if inv in seen:
            continue
        seen.add(w)
        out.append(BrooksCombination.atom(w, 1, window))
    return out
