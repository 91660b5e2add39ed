"""Truncated filling norms by exact linear programming.

The filling norm of a 1-chain ``c`` is the least l1 norm of a 2-chain with
boundary ``c``, using only cells (g1, g2) with g1 or g2 in N.  Restricting the
cells to a finite dictionary gives an LP whose optimum is an upper bound.
Modulo h (the span of x^k - k x, x in N) every word of N is replaced by its
primitive root with the exponent as weight, which is an exact quotient.

The solver is a revised simplex over ``Fraction`` with Bland's rule.  A
floating-point solve may suggest the starting basis; optimality and the
dual certificate are always established in exact arithmetic.
"""
from __future__ import annotations

import itertools
import logging
from contextlib import contextmanager
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .chains import Chain1, Chain2, boundary, h_normal_form, in_CQ, validate_mixed_support
from .marking import Marking, in_N
from .qm import ball
from .word import EMPTY, Word, conjugator, cyclic_reduce, multiply, power, primitive_root, shortlex_key

log = logging.getLogger(__name__)


class LPError(ValueError):
    pass


# -- exact simplex ----------------------------------------------------------

@dataclass
class LPResult:
    status: str  # "optimal" or "infeasible"
    x: list[Fraction]
    value: Fraction | None
    dual: list[Fraction]
    dual_value: Fraction | None
    pivots: int
    warm_started: bool

    @property
    def strong_duality(self) -> bool:
        return self.status == "optimal" and self.value == self.dual_value


def _invert(mat: list[list[Fraction]]) -> list[list[Fraction]] | None:
    n = len(mat)
    a = [row[:] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(mat)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            return None
        a[col], a[piv] = a[piv], a[col]
        p = a[col][col]
        a[col] = [v / p for v in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                rc = a[col]
                a[r] = [v - f * w for v, w in zip(a[r], rc)]
    return [row[n:] for row in a]


def _float_basis_hint(cols, b, cost, m) -> list[int] | None:
    try:
        import numpy as np
        from scipy.optimize import linprog
        from scipy.sparse import csc_matrix
    except ImportError:  # pragma: no cover
        return None
    data, ri, ci = [], [], []
    for j, col in enumerate(cols):
        for r, v in col.items():
            data.append(float(v))
            ri.append(r)
            ci.append(j)
    A = csc_matrix((data, (ri, ci)), shape=(m, len(cols)))
    res = linprog(np.array([float(c) for c in cost]), A_eq=A, b_eq=np.array([float(v) for v in b]),
                  bounds=(0, None), method="highs-ds")
    if res.status != 0:
        return None
    order = sorted(range(len(cols)), key=lambda j: -res.x[j])
    return [j for j in order if res.x[j] > 1e-9]


_recorders: list[list] = []


@contextmanager
def record_instances():
    """Collect every LPResult solved inside the block (used by the duality audit)."""
    log_ = []
    _recorders.append(log_)
    try:
        yield log_
    finally:
        # by identity: two empty logs compare equal
        del _recorders[next(i for i, r in enumerate(_recorders) if r is log_)]


def simplex(cols: Sequence[dict], b: Sequence[Fraction], cost: Sequence[Fraction], warm: bool = True,
            max_pivots: int = 100_000) -> LPResult:
    """min cost.x subject to A x = b, x >= 0, with A given column-wise as {row: value}."""
    res = _simplex(cols, b, cost, warm, max_pivots)
    for r in _recorders:
        r.append(res)
    return res


def _simplex(cols, b, cost, warm, max_pivots) -> LPResult:
    m = len(b)
    n = len(cols)
    sign = [(-1 if v < 0 else 1) for v in b]
    b = [Fraction(abs(v)) for v in b]
    A = [{r: Fraction(v) * sign[r] for r, v in col.items() if v} for col in cols]
    # artificial column n + r is the unit vector of row r
    A += [{r: Fraction(1)} for r in range(m)]
    total = n + m

    basis = [n + r for r in range(m)]
    Binv = [[Fraction(int(i == j)) for j in range(m)] for i in range(m)]
    warm_used = False
    if warm and m and n:
        hint = _float_basis_hint(cols, [v * s for v, s in zip(b, sign)], cost, m)
        if hint:
            chosen = _independent(A, hint, m)
            if chosen:
                trial = list(chosen)
                used_rows = _complete_rows(A, trial, m)
                trial += [n + r for r in used_rows]
                B = [[A[j].get(i, Fraction(0)) for j in trial] for i in range(m)]
                inv = _invert(B)
                if inv is not None:
                    xb = [sum((inv[i][k] * b[k] for k in range(m) if b[k]), Fraction(0)) for i in range(m)]
                    if all(v >= 0 for v in xb):
                        basis, Binv, warm_used = trial, inv, True
    xB = [sum((Binv[i][k] * b[k] for k in range(m) if b[k]), Fraction(0)) for i in range(m)]
    pivots = 0

    def run(costs, allowed):
        nonlocal pivots
        while True:
            cb = [costs[j] for j in basis]
            y = [sum((cb[i] * Binv[i][k] for i in range(m) if cb[i] and Binv[i][k]), Fraction(0)) for k in range(m)]
            in_basis = set(basis)
            enter = None
            for j in range(total):
                if j in in_basis or not allowed(j):
                    continue
                d = costs[j] - sum((y[r] * v for r, v in A[j].items()), Fraction(0))
                if d < 0:
                    enter = j
                    break
            if enter is None:
                return y
            u = [sum((Binv[i][r] * v for r, v in A[enter].items() if Binv[i][r]), Fraction(0)) for i in range(m)]
            leave = None
            best = None
            for i in range(m):
                if u[i] > 0:
                    ratio = xB[i] / u[i]
                    if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                        best, leave = ratio, i
            if leave is None:
                raise LPError("unbounded LP (cannot happen for a norm minimization)")
            piv = u[leave]
            prow = [v / piv for v in Binv[leave]]
            Binv[leave] = prow
            xl = xB[leave] / piv
            for i in range(m):
                if i != leave and u[i]:
                    f = u[i]
                    Binv[i] = [v - f * w if w else v for v, w in zip(Binv[i], prow)]
                    xB[i] -= f * xl
            xB[leave] = xl
            basis[leave] = enter
            pivots += 1
            if pivots > max_pivots:
                raise LPError("pivot limit reached")

    # phase one: drive artificials to zero
    c1 = [Fraction(0)] * n + [Fraction(1)] * m
    if any(basis[i] >= n and xB[i] for i in range(m)):
        run(c1, lambda j: True)
    infeas = sum((xB[i] for i in range(m) if basis[i] >= n), Fraction(0))
    if infeas > 0:
        return LPResult("infeasible", [], None, [], None, pivots, warm_used)
    # pivot zero-level artificials out where possible
    for i in range(m):
        if basis[i] >= n:
            in_basis = set(basis)
            for j in range(n):
                if j in in_basis:
                    continue
                ui = sum((Binv[i][r] * v for r, v in A[j].items() if Binv[i][r]), Fraction(0))
                if ui:
                    u = [sum((Binv[t][r] * v for r, v in A[j].items() if Binv[t][r]), Fraction(0)) for t in range(m)]
                    prow = [v / ui for v in Binv[i]]
                    Binv[i] = prow
                    for t in range(m):
                        if t != i and u[t]:
                            Binv[t] = [v - u[t] * w if w else v for v, w in zip(Binv[t], prow)]
                    basis[i] = j
                    pivots += 1
                    break
    c2 = list(cost) + [Fraction(0)] * m
    y = run(c2, lambda j: j < n)
    x = [Fraction(0)] * n
    for i, j in enumerate(basis):
        if j < n:
            x[j] = xB[i]
    value = sum((cost[j] * x[j] for j in range(n) if x[j]), Fraction(0))
    dual = [y[r] * sign[r] for r in range(m)]
    b_orig = [v * s for v, s in zip(b, sign)]
    dual_value = sum((dual[r] * b_orig[r] for r in range(m)), Fraction(0))
    # exact dual feasibility of every real column
    for j in range(n):
        d = cost[j] - sum((dual[r] * Fraction(v) for r, v in cols[j].items()), Fraction(0))
        if d < 0:
            raise LPError("dual infeasible at termination")
    return LPResult("optimal", x, value, dual, dual_value, pivots, warm_used)


def _independent(A, hint, m):
    """Greedy exact selection of linearly independent columns from ``hint``."""
    rows_used: list[tuple[int, dict]] = []  # (pivot row, reduced vector)
    chosen = []
    for j in hint:
        v = dict(A[j])
        for pr, vec in rows_used:
            if pr in v and v[pr]:
                f = v[pr] / vec[pr]
                for r, val in vec.items():
                    v[r] = v.get(r, 0) - f * val
        v = {r: val for r, val in v.items() if val}
        if not v:
            continue
        pr = min(v)
        rows_used.append((pr, v))
        chosen.append(j)
        if len(chosen) == m:
            break
    return chosen


def _complete_rows(A, chosen, m) -> list[int]:
    """Rows whose unit vectors complete ``chosen`` to a basis."""
    rows_used: list[tuple[int, dict]] = []
    for j in chosen:
        v = dict(A[j])
        for pr, vec in rows_used:
            if pr in v and v[pr]:
                f = v[pr] / vec[pr]
                for r, val in vec.items():
                    v[r] = v.get(r, 0) - f * val
        v = {r: val for r, val in v.items() if val}
        rows_used.append((min(v), v))
    pivots = {pr for pr, _ in rows_used}
    # unit vectors of non-pivot rows complete a triangular system
    return [r for r in range(m) if r not in pivots]


# -- filling norm -----------------------------------------------------------

@dataclass(frozen=True)
class HTerm:
    x: Word
    k: int
    coeff: Fraction

    def chain(self) -> Chain1:
        return Chain1([(power(self.x, self.k), self.coeff), (self.x, -self.k * self.coeff)])


@dataclass
class FillingCertificate:
    filling: Chain2
    target: Chain1
    h_terms: tuple[HTerm, ...]
    value: Fraction
    L: int
    allow_h: bool
    dual_value: Fraction | None = None
    pivots: int = 0
    cells: int = 0
    rows: int = 0
    dual: dict = field(default_factory=dict, repr=False)

    @property
    def h_adjustment(self) -> Chain1:
        total = Chain1()
        for t in self.h_terms:
            total = total + t.chain()
        return total

    @property
    def strong_duality(self) -> bool:
        return self.dual_value is not None and self.dual_value == self.value

    def to_dict(self, m: Marking) -> dict:
        return {
            "value": str(self.value),
            "dual_value": None if self.dual_value is None else str(self.dual_value),
            "L": self.L,
            "allow_h": self.allow_h,
            "target": self.target.to_dict(m),
            "filling": self.filling.to_dict(m),
            "h_terms": [{"x": m.format(t.x), "k": t.k, "coeff": str(t.coeff)} for t in self.h_terms],
            "lp": {"cells": self.cells, "rows": self.rows, "pivots": self.pivots},
        }


def _row_key(m: Marking, w: Word, allow_h: bool):
    """Row index and weight of a word in the (possibly h-reduced) boundary space."""
    if allow_h and in_N(m, w):
        r = primitive_root(w)
        if r.exponent == 0:
            return None, 0
        return ("r", r.root), r.exponent
    return ("w", w), 1


def enumerate_cells(m: Marking, L: int, extra: Iterable[tuple[Word, Word]] = ()) -> list[tuple[Word, Word]]:
    words = ball(m.rank, L)
    inN = {w: in_N(m, w) for w in words}
    cells = []
    for g1 in words:
        for g2 in words:
            if len(g1) + len(g2) > L:
                break
            if inN[g1] or inN[g2]:
                cells.append((g1, g2))
    seen = set(cells)
    for g1, g2 in extra:
        if (g1, g2) not in seen and (in_N(m, g1) or in_N(m, g2)):
            seen.add((g1, g2))
            cells.append((g1, g2))
    return cells


def adjacent_cells(c: Chain1) -> list[tuple[Word, Word]]:
    """Cells assembled from the support: splittings of each word, pairs of words,
    and conjugation cells linking conjugate pieces."""
    words = [w for w in c if w]
    out = []
    pieces = set()
    for w in words:
        for i in range(1, len(w)):
            out.append((w[:i], w[i:]))
            pieces.update((w[:i], w[i:]))
    pool = words + [w.inverse() for w in words]
    for u, v in itertools.product(pool, repeat=2):
        out.append((u, v))
    pieces.update(pool)
    pieces |= {p.inverse() for p in pieces}
    by_len: dict = {}
    for p in sorted(pieces, key=shortlex_key):
        core = cyclic_reduce(p)[0]
        by_len.setdefault(len(core), []).append(p)
    for group in by_len.values():
        for u, v in itertools.permutations(group, 2):
            g = conjugator(u, v)
            if g:
                # boundary of (u, g) - (g, v) is u - v when u = g v g^-1
                out.extend([(u, g), (g, v)])
    return out


def truncated_filling_norm(m: Marking, c: Chain1, L: int, allow_h: bool = False, adjacent: bool = True,
                           extra_cells: Iterable[tuple[Word, Word]] = (), warm: bool = True) -> FillingCertificate | None:
    """Least l1 norm of a filling of ``c`` from a finite cell dictionary; None if infeasible.

    The dictionary holds every admissible (g1, g2) with |g1| + |g2| <= L,
    plus (when ``adjacent``) cells read off the support of ``c``.
    """
    if L < 0:
        raise LPError("L must be nonnegative")
    for w in c:
        m.check(w)
        if not in_N(m, w):
            raise LPError(f"support word {m.format(w)} is not in N")
    if not adjacent and any(len(w) > L for w in c):
        raise LPError("length budget too small to index the support")
    extra = list(extra_cells) + (adjacent_cells(c) if adjacent else [])
    cells = enumerate_cells(m, L, extra)
    rows: dict = {}
    uniq: dict = {}
    for cell in cells:
        g1, g2 = cell
        vec: dict = {}
        for w, s in ((g2, 1), (multiply(g1, g2), -1), (g1, 1)):
            key, wt = _row_key(m, w, allow_h)
            if key is not None:
                vec[key] = vec.get(key, 0) + s * wt
        vec = {k: v for k, v in vec.items() if v}
        if not vec:
            continue
        items = tuple(sorted(vec.items(), key=lambda kv: _key_sort(kv[0])))
        if items[0][1] < 0:
            items = tuple((k, -v) for k, v in items)
            sgn = -1
        else:
            sgn = 1
        if items not in uniq:
            uniq[items] = (cell, sgn)
    target: dict = {}
    for w, coeff in c.items():
        key, wt = _row_key(m, w, allow_h)
        if key is not None:
            target[key] = target.get(key, 0) + coeff * wt
    target = {k: v for k, v in target.items() if v}
    for items in uniq:
        for k, _ in items:
            rows.setdefault(k, None)
    for k in target:
        if k not in rows:
            return None  # no cell can produce this row
    row_list = sorted(rows, key=_key_sort)
    index = {k: i for i, k in enumerate(row_list)}
    cols = []
    meta = []
    for items, (cell, sgn) in uniq.items():
        col = {index[k]: v for k, v in items}
        cols.append(col)
        cols.append({r: -v for r, v in col.items()})
        meta.append((cell, sgn))
    b = [Fraction(0)] * len(row_list)
    for k, v in target.items():
        b[index[k]] = Fraction(v)
    cost = [Fraction(1)] * len(cols)
    if not target:
        filling = Chain2()
        return FillingCertificate(filling, c, _h_terms(m, boundary(filling) - c), Fraction(0), L, allow_h,
                                  Fraction(0), 0, len(meta), len(row_list))
    res = simplex(cols, b, cost, warm=warm)
    if res.status != "optimal":
        return None
    terms = {}
    for j, (cell, sgn) in enumerate(meta):
        v = (res.x[2 * j] - res.x[2 * j + 1]) * sgn
        if v:
            terms[cell] = terms.get(cell, 0) + v
    filling = Chain2(terms)
    residual = boundary(filling) - c
    dual = {row_list[i]: y for i, y in enumerate(res.dual) if y}
    cert = FillingCertificate(filling, c, _h_terms(m, residual), filling.l1_norm(), L, allow_h,
                              res.dual_value, res.pivots, len(meta), len(row_list), dual)
    if cert.value != res.value:
        raise LPError("filling norm disagrees with the LP optimum")
    return cert


def _key_sort(key):
    tag, w = key
    return (tag, shortlex_key(w))


def _h_terms(m: Marking, residual: Chain1) -> tuple[HTerm, ...]:
    """Write an h-trivial residual as a sum of coeff * (x^k - k x)."""
    out = []
    for w, d in residual.items():
        if not in_N(m, w):
            raise LPError(f"residual has a word outside N: {m.format(w)}")
        r = primitive_root(w)
        if r.exponent == 1:
            continue  # w is its own root; must cancel against the root terms below
        out.append(HTerm(r.root if r.exponent else EMPTY, r.exponent, d))
    terms = tuple(out)
    total = Chain1()
    for t in terms:
        total = total + t.chain()
    if total != residual:
        raise LPError("boundary residual is not in the span of x^k - kx")
    return terms


def verify_filling_certificate(m: Marking, cert: FillingCertificate) -> bool:
    try:
        if not validate_mixed_support(m, cert.filling):
            return False
        if cert.value != cert.filling.l1_norm():
            return False
        for t in cert.h_terms:
            if not isinstance(t.k, int) or not in_N(m, t.x):
                return False
        if not cert.allow_h and cert.h_terms:
            return False
        return boundary(cert.filling) == cert.target + cert.h_adjustment
    except (ValueError, AttributeError):
        return False


def verify_dual(m: Marking, cert: FillingCertificate) -> bool:
    """Check the dual function: |f(boundary of cell)| <= 1 on the dictionary and f(c) = value."""
    if cert.dual_value is None:
        return False
    f = cert.dual

    def ev(chain):
        tot = Fraction(0)
        for w, coeff in chain.items():
            key, wt = _row_key(m, w, cert.allow_h)
            if key is not None:
                tot += coeff * wt * f.get(key, 0)
        return tot

    if ev(cert.target) != cert.dual_value:
        return False
    extra = adjacent_cells(cert.target)
    for cell in enumerate_cells(m, cert.L, extra):
        if abs(ev(boundary(Chain2({cell: 1})))) > 1:
            return False
    return True


def scl_upper_from_filling(m: Marking, c: Chain1, L: int, **kw) -> tuple[Fraction, FillingCertificate] | None:
    """Half the h-relaxed truncated filling norm of ``c``: an upper bound for scl."""
    if not in_CQ(m, c):
        raise LPError("chain is not in the rational mixed chain space")
    cert = truncated_filling_norm(m, h_normal_form(c), L, allow_h=True, **kw)
    if cert is None:
        return None
    return cert.value / 2, cert
