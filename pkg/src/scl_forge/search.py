"""Upper bounds for (mixed) commutator length by explicit decomposition.

Two engines produce certificates ``y = [g1, x1] ... [gn, xn]``:

* ``surface``: pairs every letter of the cyclic core of ``y`` with an
  inverse letter.  Each such pairing glues a disc into an oriented surface
  whose genus is read off the vertex count, and the minimum over pairings is
  the ordinary commutator length.  A genus-n pairing is turned into n
  explicit commutators by repeatedly splitting off an interleaved pair of
  the resulting quadratic word, then shortened by commutator-preserving
  moves.  In mixed mode each handle is moved into the form [g, x] with
  ``x in N`` when its two images in Z^k are parallel.
* ``table``: iterative deepening over a table of simple commutators
  (deduplicated by value), with a meet-in-the-middle final step.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Sequence

from .marking import Marking, abelianize, in_N, in_mixed_commutator, mixed_class
from .qm import ball
from .word import (
    EMPTY,
    Word,
    commutator,
    cyclic_reduce,
    inverse,
    multiply,
    power,
    product,
    shortlex_key,
)

ORDINARY = "ordinary"
MIXED = "mixed"
MODES = (ORDINARY, MIXED)


class NotInSubgroup(ValueError):
    """The target is not in the subgroup where the requested length is defined."""


class SearchError(ValueError):
    pass


@dataclass(frozen=True)
class SearchBudget:
    max_terms: int = 3
    gen_len: int = 6
    node_limit: int = 200_000  # pairing-search nodes
    pairings: int = 64  # minimal pairings tried for extraction
    table_limit: int = 250_000  # simple commutators kept in the table
    beam: int = 12  # branching of the table search above depth 2
    conj_len: int = 2
    arrangements: int = 24

    def to_dict(self) -> dict:
        return {
            "max_terms": self.max_terms,
            "gen_len": self.gen_len,
            "node_limit": self.node_limit,
            "pairings": self.pairings,
            "table_limit": self.table_limit,
            "beam": self.beam,
            "conj_len": self.conj_len,
            "arrangements": self.arrangements,
        }


@dataclass(frozen=True)
class ClCertificate:
    pairs: tuple[tuple[Word, Word], ...]
    mode: str
    target: Word
    engine: str = field(default="", compare=False)

    @property
    def terms(self) -> int:
        return len(self.pairs)

    @property
    def max_len(self) -> int:
        return max((max(len(g), len(x)) for g, x in self.pairs), default=0)

    def conjugate(self, h: Word) -> "ClCertificate":
        pairs = tuple((g.conjugate(h), x.conjugate(h)) for g, x in self.pairs)
        return ClCertificate(pairs, self.mode, self.target.conjugate(h), self.engine)

    def to_dict(self, m: Marking) -> dict:
        return {
            "mode": self.mode,
            "target": m.format(self.target),
            "terms": self.terms,
            "pairs": [[m.format(g), m.format(x)] for g, x in self.pairs],
        }

    @classmethod
    def from_dict(cls, data, m: Marking) -> "ClCertificate":
        pairs = tuple((m.parse(g), m.parse(x)) for g, x in data["pairs"])
        return cls(pairs, data["mode"], m.parse(data["target"]))


def _context(m: Marking, mode: str) -> Marking:
    if mode not in MODES:
        raise SearchError(f"unknown mode {mode!r}")
    return m if mode == MIXED else m.ordinary()


def verify_cl_certificate(m: Marking, cert: ClCertificate) -> bool:
    try:
        ctx = _context(m, cert.mode)
        for g, x in cert.pairs:
            ctx.check(g)
            ctx.check(x)
            if not in_N(ctx, x):
                return False
        return product(commutator(g, x) for g, x in cert.pairs) == cert.target
    except (ValueError, TypeError):
        return False


# -- commutator-preserving moves -------------------------------------------

def _moves(g: Word, h: Word):
    # these eight replacements keep [g, h] fixed exactly
    yield multiply(g, h), h
    yield multiply(g, inverse(h)), h
    yield g, multiply(h, g)
    yield g, multiply(h, inverse(g))
    yield multiply(h, g), h
    yield multiply(inverse(h), g), h
    yield g, multiply(g, h)
    yield g, multiply(inverse(g), h)


def shorten_pair(g: Word, h: Word) -> tuple[Word, Word]:
    """Greedy descent on |g| + |h| through moves that fix the commutator."""
    c = commutator(g, h)
    while True:
        best = (len(g) + len(h), shortlex_key(g), g, h)
        for ng, nh in _moves(g, h):
            cand = (len(ng) + len(nh), shortlex_key(ng), ng, nh)
            if cand[:2] < best[:2] and commutator(ng, nh) == c:
                best = cand
        if best[2] == g and best[3] == h:
            return g, h
        g, h = best[2], best[3]


def _euclid_into_N(ctx: Marking, g: Word, h: Word) -> tuple[Word, Word] | None:
    """Move a handle (g, h) to (g', x) with x in N, possible when p(g), p(h) are parallel."""
    u = ctx.project(abelianize(ctx, g))
    v = ctx.project(abelianize(ctx, h))
    if not any(v):
        return g, h
    for i in range(len(u)):
        for j in range(i + 1, len(u)):
            if u[i] * v[j] - u[j] * v[i]:
                return None
    w0 = u if any(u) else v
    d = math.gcd(*w0)
    i = next(t for t in range(len(w0)) if w0[t])
    e = w0[i] // d
    a, b = u[i] // e, v[i] // e
    # [g h^q, h] = [g, h] = [g, h g^q]: Euclid on the scalar images (a, b)
    while b:
        if a == 0:
            # (0, b) -> (b, b) -> (b, 0)
            g, a = multiply(g, h), b
            h, b = multiply(h, inverse(g)), 0
        elif abs(a) >= abs(b):
            q = a // b
            g, a = multiply(g, power(h, -q)), a - q * b
        else:
            q = b // a
            h, b = multiply(h, power(g, -q)), b - q * a
    return g, h


def shorten_mixed(ctx: Marking, g: Word, x: Word) -> tuple[Word, Word]:
    """Shorten a simple mixed commutator keeping the second entry in N."""
    c = commutator(g, x)
    while True:
        best = (len(g) + len(x), shortlex_key(g), g, x)
        for ng, nx in _moves(g, x):
            cand = (len(ng) + len(nx), shortlex_key(ng), ng, nx)
            if cand[:2] < best[:2] and in_N(ctx, nx) and commutator(ng, nx) == c:
                best = cand
        if best[2] == g and best[3] == x:
            return g, x
        g, x = best[2], best[3]


# -- surface engine --------------------------------------------------------

@dataclass
class PairingResult:
    genus: int | None
    pairings: list[list[int]]
    exhaustive: bool
    nodes: int


def minimal_pairings(core: Sequence[int], max_genus: int, node_limit: int, keep: int) -> PairingResult:
    """Branch and bound over orientable letter pairings of a cyclic word.

    Returns the least genus found (None if every pairing exceeds
    ``max_genus``) and up to ``keep`` pairings realising it.
    """
    L = len(core)
    if L == 0:
        return PairingResult(0, [[]], True, 0)
    if L % 2:
        return PairingResult(None, [], True, 0)
    sigma = [-1] * L
    head = list(range(L))  # head[end] = start of the open path ending at end
    tail = list(range(L))  # tail[start] = end of the open path starting at start
    state = {"cycles": 0, "edges": 0, "nodes": 0, "bound": max_genus}
    found: list[list[int]] = []
    best = [None]
    partners = {}
    for i, x in enumerate(core):
        partners.setdefault(-x, []).append(i)

    def add_edge(u, v, undo):
        s = head[u]
        if s == v:
            state["cycles"] += 1
            undo.append(("c",))
        else:
            e = tail[v]
            undo.append(("m", e, head[e], s, tail[s]))
            head[e] = s
            tail[s] = e
        state["edges"] += 1

    def undo_all(undo):
        for rec in reversed(undo):
            if rec[0] == "c":
                state["cycles"] -= 1
            else:
                _, e, he, s, ts = rec
                head[e] = he
                tail[s] = ts
            state["edges"] -= 1

    def lower_genus():
        vmax = state["cycles"] + L - state["edges"]
        return (1 + L // 2 - vmax + 1) // 2  # ceil of (1 + L/2 - vmax)/2

    def rec(start):
        if state["nodes"] >= node_limit:
            return
        state["nodes"] += 1
        i = start
        while i < L and sigma[i] != -1:
            i += 1
        if i == L:
            v = state["cycles"]
            g = (1 + L // 2 - v) // 2
            if best[0] is None or g < best[0]:
                best[0] = g
                found.clear()
                state["bound"] = min(state["bound"], g)
            if g == best[0] and len(found) < keep:
                found.append(list(sigma))
            return
        cands = []
        for j in partners.get(core[i], ()):
            if j <= i or sigma[j] != -1:
                continue
            undo = []
            sigma[i], sigma[j] = j, i
            add_edge(i, (j + 1) % L, undo)
            add_edge(j, (i + 1) % L, undo)
            cands.append((-state["cycles"], abs(j - i), j))
            undo_all(undo)
            sigma[i] = sigma[j] = -1
        cands.sort()
        for _, _, j in cands:
            undo = []
            sigma[i], sigma[j] = j, i
            add_edge(i, (j + 1) % L, undo)
            add_edge(j, (i + 1) % L, undo)
            lb = lower_genus()
            if lb <= state["bound"] and not (best[0] is not None and lb == best[0] and len(found) >= keep):
                rec(i + 1)
            undo_all(undo)
            sigma[i] = sigma[j] = -1
            if state["nodes"] >= node_limit:
                return

    rec(0)
    return PairingResult(best[0], found, state["nodes"] < node_limit, state["nodes"])


def _quadratic_word(core: Sequence[int], sigma: Sequence[int]):
    """Relabel a pairing as a quadratic word over band letters.

    Returns (rotation, W, sub): ``core`` rotated left by ``rotation`` reads
    as W with band letter t standing for the word ``sub[t]``.
    """
    L = len(core)

    def same_band(i):  # do positions i-1, i belong to one parallel band?
        p = (i - 1) % L
        return sigma[i] == (sigma[p] - 1) % L

    rot = next((i for i in range(L) if not same_band(i)), 0)
    pos = [(rot + t) % L for t in range(L)]
    label = {}
    W = []
    sub = {}
    t = 0
    n = 0
    while t < L:
        start = t
        t += 1
        while t < L and same_band(pos[t]):
            t += 1
        seg = [pos[k] for k in range(start, t)]
        if seg[0] in label:
            W.append(-label[seg[0]])
        else:
            n += 1
            for q in seg:
                label[sigma[q]] = n
            W.append(n)
            sub[n] = Word([core[q] for q in seg])
    return rot, W, sub


def _split_handles(W: list[int], sub: dict, score) -> list[tuple[Word, Word]] | None:
    """Peel interleaved pairs off a quadratic word; returns commutator pairs in order."""

    def phi(u):
        return product(sub[x] if x > 0 else inverse(sub[-x]) for x in u)

    W = list(Word(W))
    front: list[tuple[Word, Word]] = []
    back: list[tuple[Word, Word]] = []
    while W:
        pos = {x: i for i, x in enumerate(W)}
        letters = sorted(x for x in W if x > 0)
        best = None
        for x, y in itertools.permutations(letters, 2):
            for X, Y in ((x, y), (-x, -y), (x, -y), (-x, y)):
                p, q, r, s = pos[X], pos[Y], pos[-X], pos[-Y]
                if not p < q < r < s:
                    continue
                A, B, C, D, E = W[:p], W[p + 1:q], W[q + 1:r], W[r + 1:s], W[s + 1:]
                # A X B Y C X^-1 D Y^-1 E = A [X C^-1 D^-1, D C B Y D^-1] D C B E
                xh = product(([X], inverse(C), inverse(D)))
                yh = product((D, C, B, [Y], inverse(D)))
                rest = list(product((A, D, C, B, E)))
                a_w = Word(A)
                r2 = Word(D + C + B + E)
                for where, conj in (("front", a_w), ("back", inverse(r2))):
                    g = phi(xh.conjugate(conj))
                    h = phi(yh.conjugate(conj))
                    g, h = shorten_pair(g, h)
                    cand = (score(g, h), where, g, h, rest)
                    if best is None or cand[0] < best[0]:
                        best = cand
        if best is None:
            return None
        _, where, g, h, rest = best
        if where == "front":
            front.append((g, h))
        else:
            back.insert(0, (g, h))
        W = list(Word(rest))
    return front + back


def surface_certificates(core: Word, genus_cap: int, budget: SearchBudget, score=None):
    """Yield (pairs, exhaustive, genus) for minimal pairings of the cyclic word ``core``."""
    score = score or (lambda g, h: (max(len(g), len(h)), len(g) + len(h)))
    res = minimal_pairings(core, genus_cap, budget.node_limit, budget.pairings)
    if res.genus is None:
        return res, []
    out = []
    for sigma in res.pairings:
        if not core:
            out.append([])
            break
        rot, W, sub = _quadratic_word(core, sigma)
        pairs = _split_handles(W, sub, score)
        if pairs is None:
            continue
        # core rotated left by rot equals the product; undo the rotation
        r = Word(core[:rot])
        pairs = [shorten_pair(g.conjugate(r), h.conjugate(r)) for g, h in pairs]
        assert product(commutator(g, h) for g, h in pairs) == core
        out.append(pairs)
    return res, out


# -- table engine ----------------------------------------------------------

@lru_cache(maxsize=16)
def commutator_table(ctx: Marking, gen_len: int, limit: int) -> tuple[dict, int]:
    """Map reduced [g, x] -> (g, x) with |g|, |x| <= L and x in N; L <= gen_len shrinks to fit ``limit``."""
    L = gen_len
    while L > 1:
        gs = ball(ctx.rank, L)
        xs = [x for x in gs if x and in_N(ctx, x)]
        if (len(gs) - 1) * len(xs) <= limit:
            break
        L -= 1
    gs = ball(ctx.rank, L)
    xs = [x for x in gs if x and in_N(ctx, x)]
    table: dict = {}
    for g in gs[1:]:
        for x in xs:
            c = commutator(g, x)
            if c and c not in table:
                table[c] = (g, x)
    return table, L


def _table_search(ctx: Marking, y: Word, budget: SearchBudget, depth_cap: int):
    """Iterative deepening with a meet-in-the-middle last step; returns pairs or None.

    Work is capped by ``budget.node_limit`` word multiplications.
    """
    table, _ = commutator_table(ctx, budget.gen_len, budget.table_limit)
    if not y:
        return []
    if y in table:
        return [table[y]]
    by_suffix = _suffix_index(ctx, budget.gen_len, budget.table_limit)
    values = list(table)
    max_c = max((len(c) for c in values), default=0)
    work = [0]

    def finish2(z):
        for c2 in values:
            if work[0] >= budget.node_limit:
                return None
            work[0] += 1
            c1 = multiply(z, inverse(c2))
            if c1 in table:
                return [table[c1], table[c2]]
        return None

    def rec(z, d):
        # z must be a product of at most d table entries
        if not z:
            return []
        if z in table:
            return [table[z]]
        if d < 2 or len(z) > d * max_c or work[0] >= budget.node_limit:
            return None
        hit = finish2(z)
        if hit is not None or d == 2:
            return hit
        # peel the last factor among those cancelling against the end of z
        pool = by_suffix.get(tuple(z[-2:]), ())
        ranked = sorted(pool, key=lambda c: (len(multiply(z, inverse(c))), shortlex_key(c)))
        work[0] += len(pool)
        for c in ranked[: budget.beam]:
            rest = rec(multiply(z, inverse(c)), d - 1)
            if rest is not None:
                return rest + [table[c]]
        return None

    for d in range(2, depth_cap + 1):
        got = rec(y, d)
        if got is not None:
            return got
    return None


@lru_cache(maxsize=16)
def _suffix_index(ctx: Marking, gen_len: int, limit: int) -> dict:
    table, _ = commutator_table(ctx, gen_len, limit)
    idx: dict = {}
    for c in table:
        idx.setdefault(tuple(c[-2:]), []).append(c)
    return idx


# -- driver -----------------------------------------------------------------

def _check_target(m: Marking, y: Word, mode: str) -> Marking:
    ctx = _context(m, mode)
    ctx.check(y)
    if not in_N(ctx, y) or not in_mixed_commutator(ctx, y):
        cls = mixed_class(ctx, y) if in_N(ctx, y) else None
        raise NotInSubgroup(f"{m.format(y)} is not in the {'mixed ' if mode == MIXED else ''}commutator subgroup"
                            + (f" (class {cls})" if cls else ""))
    return ctx


def _mixed_from_pairs(ctx: Marking, pairs) -> list[tuple[Word, Word]] | None:
    out = []
    for g, h in pairs:
        got = _euclid_into_N(ctx, g, h)
        if got is None:
            return None
        out.append(shorten_mixed(ctx, *got))
    return out


def cl_upper_search(m: Marking, y: Word, mode: str = ORDINARY, budget: SearchBudget | None = None) -> ClCertificate | None:
    """Find y as a product of at most ``max_terms`` simple commutators, or None."""
    budget = budget or SearchBudget()
    ctx = _check_target(m, y, mode)
    if not y:
        return ClCertificate((), mode, y, "trivial")
    core, conj = cyclic_reduce(y)

    def finish(pairs, engine):
        pairs = [(g.conjugate(conj), x.conjugate(conj)) for g, x in pairs]
        if mode == MIXED:
            pairs = [shorten_mixed(ctx, g, x) for g, x in pairs]
        else:
            pairs = [shorten_pair(g, x) for g, x in pairs]
        cert = ClCertificate(tuple(pairs), mode, y, engine)
        if cert.terms <= budget.max_terms and cert.max_len <= budget.gen_len and verify_cl_certificate(m, cert):
            return cert
        return None

    best = None
    res, surfaces = surface_certificates(core, budget.max_terms, budget)
    for pairs in surfaces:
        if mode == MIXED and not ctx.is_ordinary:
            pairs = _mixed_from_pairs(ctx, pairs)
            if pairs is None:
                continue
        cert = finish(pairs, "surface")
        if cert and (best is None or (cert.terms, cert.max_len) < (best.terms, best.max_len)):
            best = cert
    if best is not None and (mode == ORDINARY or ctx.is_ordinary) and res.exhaustive:
        return best  # minimal genus is the ordinary length
    cap = budget.max_terms if best is None else best.terms - 1
    if cap >= 1:
        pairs = _table_search(ctx, core, budget, cap)
        if pairs is not None:
            cert = finish(pairs, "table")
            if cert and (best is None or cert.terms < best.terms):
                best = cert
    return best


def conjugate_certificate(cert: ClCertificate, h: Word) -> ClCertificate:
    return cert.conjugate(h)


# -- chains -----------------------------------------------------------------

@dataclass(frozen=True)
class ChainArrangement:
    factors: tuple[Word, ...]  # expansion of the chain: w for +1, w^-1 for -1
    order: tuple[int, ...]
    conjugators: tuple[Word, ...]
    certificate: ClCertificate

    @property
    def terms(self) -> int:
        return self.certificate.terms

    def assembled(self) -> Word:
        return product(self.factors[i].conjugate(c) for i, c in zip(self.order, self.conjugators))

    def to_dict(self, m: Marking) -> dict:
        return {
            "terms": self.terms,
            "factors": [m.format(self.factors[i]) for i in self.order],
            "conjugators": [m.format(c) for c in self.conjugators],
            "certificate": self.certificate.to_dict(m),
        }


def _expand(c) -> list[Word]:
    out = []
    for w, coeff in c.items():
        if coeff.denominator != 1:
            raise SearchError("chain_cl_upper needs integer coefficients")
        n = int(coeff)
        out.extend([w if n > 0 else inverse(w)] * abs(n))
    return out


def _cyclic_key(w: Word):
    core, _ = cyclic_reduce(w)
    n = len(core)
    if n == 0:
        return ()
    t = tuple(core)
    return min(t[i:] + t[:i] for i in range(n))


def chain_cl_upper(m: Marking, c, mode: str = ORDINARY, budget: SearchBudget | None = None) -> ChainArrangement | None:
    """Search arrangements and conjugates of an integral chain's expansion."""
    from .marking import chain_in_CZ

    budget = budget or SearchBudget()
    ctx = _context(m, mode)
    if not chain_in_CZ(ctx, c):
        raise NotInSubgroup("chain is not in the integral mixed chain space")
    factors = _expand(c)
    if not factors:
        return ChainArrangement((), (), (), ClCertificate((), mode, EMPTY, "trivial"))
    conjs = ball(m.rank, budget.conj_len)
    f = len(factors)
    seen = {}
    # the first slot needs no conjugator: cl is conjugation invariant
    for rest in itertools.permutations(range(1, f)):
        order = (0,) + rest
        for cs in itertools.product(conjs, repeat=f - 1):
            cj = (EMPTY,) + cs
            z = product(factors[i].conjugate(g) for i, g in zip(order, cj))
            key = _cyclic_key(z)
            if key not in seen or (len(z), order, cj) < (len(seen[key][0]), seen[key][1], seen[key][2]):
                seen[key] = (z, order, cj)
        if len(seen) > 50_000:
            break
    ranked = sorted(seen.values(), key=lambda t: (len(t[0]), shortlex_key(t[0])))
    best = None
    for z, order, cj in ranked[: budget.arrangements]:
        if best is not None and best.terms == 0:
            break
        sub = budget if best is None else replace(budget, max_terms=best.terms - 1)
        if sub.max_terms < 0:
            break
        cert = cl_upper_search(m, z, mode, sub) if z else ClCertificate((), mode, z, "trivial")
        if cert is not None and (best is None or cert.terms < best.terms):
            best = ChainArrangement(tuple(factors), order, cj, cert)
    return best


def verify_chain_arrangement(m: Marking, c, arr: ChainArrangement) -> bool:
    if sorted(_expand(c)) != sorted(arr.factors):
        return False
    if sorted(arr.order) != list(range(len(arr.factors))):
        return False
    return arr.assembled() == arr.certificate.target and verify_cl_certificate(m, arr.certificate)
