"""Independent reference implementations used only by the tests."""
from fractions import Fraction
from itertools import product as iproduct

import numpy as np


def naive_reduce(letters):
    # repeated scanning, quadratic but obviously correct
    s = list(letters)
    changed = True
    while changed:
        changed = False
        for i in range(len(s) - 1):
            if s[i] == -s[i + 1]:
                del s[i:i + 2]
                changed = True
                break
    return tuple(s)


def exponent_sums(w, rank):
    v = [0] * rank
    for x in w:
        v[abs(x) - 1] += 1 if x > 0 else -1
    return v


def heisenberg_image(P, w):
    """Images of w in H3(Z) for each coordinate pair (s, t) of p, as 3x3 integer matrices.

    Every x in N is sent into the centre, so [g, x] maps to the identity:
    together with the exponent sums this detects non-membership in [G, N].
    """
    k = len(P)
    out = {}
    for s in range(k):
        for t in range(s + 1, k):
            M = np.eye(3, dtype=object)
            for x in w:
                i = abs(x) - 1
                e = np.eye(3, dtype=object)
                e[0, 1], e[1, 2] = P[s][i], P[t][i]
                if x < 0:
                    # inverse of [[1,a,0],[0,1,b],[0,0,1]] is [[1,-a,ab],[0,1,-b],[0,0,1]]
                    a, b = P[s][i], P[t][i]
                    e = np.array([[1, -a, a * b], [0, 1, -b], [0, 0, 1]], dtype=object)
                M = M.dot(e)
            out[s, t] = M
    return out


def in_GN_invariants_vanish(P, rank, w):
    if any(exponent_sums(w, rank)):
        return False
    ident = np.eye(3, dtype=object)
    return all((M == ident).all() for M in heisenberg_image(P, w).values())


def shoelace_twice_area(points):
    return sum(x0 * y1 - x1 * y0 for (x0, y0), (x1, y1) in zip(points, points[1:] + points[:1]))


def lattice_path(P, w):
    pos = [0] * len(P)
    pts = [tuple(pos)]
    for x in w:
        i = abs(x) - 1
        sgn = 1 if x > 0 else -1
        pos = [pos[r] + sgn * P[r][i] for r in range(len(P))]
        pts.append(tuple(pos))
    return pts


def count_naive(pattern, w):
    n, m = len(w), len(pattern)
    return sum(1 for i in range(n - m + 1) if tuple(w[i:i + m]) == tuple(pattern))


def slope_value(atoms, y, reducer, m0=6):
    """Homogenization by an explicit large-power difference quotient."""
    def raw(w):
        return sum(c * (count_naive(a, w) - count_naive(tuple(-x for x in reversed(a)), w)) for a, c in atoms)

    def pw(k):
        return reducer(list(y) * k)

    return Fraction(raw(pw(m0 + 1)) - raw(pw(m0)))


def all_words(rank, n):
    letters = [g * s for g in range(1, rank + 1) for s in (1, -1)]
    out = [()]
    for length in range(1, n + 1):
        for t in iproduct(letters, repeat=length):
            if all(t[i] != -t[i + 1] for i in range(length - 1)):
                out.append(t)
    return out
