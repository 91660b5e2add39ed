"""Finite-sample coarse geometry: d+, directed radii, asymptotic pairs, coarse homomorphism defects.

Nothing here says anything beyond the sample it was handed; every report
carries ``"scope": "within-sample"``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

INF = math.inf
HALF = Fraction(1, 2)
SCOPE = "within-sample"


class CoarseError(ValueError):
    pass


def ext(v):
    """Parse an extended nonnegative rational: a number, a Fraction string, or 'inf'."""
    if isinstance(v, str):
        s = v.strip().lower()
        if s in ("inf", "infinity", "∞"):
            return INF
        v = Fraction(s)
    elif isinstance(v, float):
        if v == INF:
            return INF
        raise CoarseError("finite distances must be exact rationals, not floats")
    else:
        v = Fraction(v)
    if v < 0:
        raise CoarseError(f"negative distance {v}")
    return v


def ext_str(v) -> str:
    return "inf" if v == INF else str(v)


def add(a, b):
    # saturating
    if a == INF or b == INF:
        return INF
    return a + b


def d_plus(scl_value, same_element: bool):
    if same_element:
        return Fraction(0)
    return add(ext(scl_value), HALF)


@dataclass(frozen=True)
class MetricSample:
    points: tuple[str, ...]
    dist: tuple[tuple, ...]

    def __post_init__(self):
        pts = tuple(self.points)
        n = len(pts)
        if len(set(pts)) != n:
            raise CoarseError("duplicate point labels")
        if len(self.dist) != n or any(len(r) != n for r in self.dist):
            raise CoarseError("distance matrix shape does not match the points")
        d = tuple(tuple(ext(v) for v in row) for row in self.dist)
        for i in range(n):
            if d[i][i] != 0:
                raise CoarseError(f"dist({pts[i]},{pts[i]}) = {ext_str(d[i][i])}, expected 0")
            for j in range(i):
                if d[i][j] != d[j][i]:
                    raise CoarseError(f"asymmetric at ({pts[i]},{pts[j]})")
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    if d[i][k] > add(d[i][j], d[j][k]):
                        raise CoarseError(f"triangle inequality fails at {pts[i]},{pts[j]},{pts[k]}")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "dist", d)

    def index(self, label: str) -> int:
        try:
            return self.points.index(label)
        except ValueError:
            raise CoarseError(f"unknown point {label!r}") from None

    def d(self, x: str, y: str):
        return self.dist[self.index(x)][self.index(y)]

    @classmethod
    def from_dict(cls, data: Mapping) -> "MetricSample":
        return cls(tuple(data["points"]), tuple(tuple(r) for r in data["dist"]))

    def to_dict(self) -> dict:
        return {"points": list(self.points), "dist": [[ext_str(v) for v in r] for r in self.dist]}

    @classmethod
    def from_function(cls, points: Sequence[str], f) -> "MetricSample":
        return cls(tuple(points), tuple(tuple(f(x, y) for y in points) for x in points))


def directed_radius(sample: MetricSample, A: Iterable[str], B: Iterable[str]):
    """Least R with A inside the closed R-neighbourhood of B."""
    A, B = list(A), list(B)
    if not A or not B:
        raise CoarseError("directed_radius needs nonempty A and B")
    ia = [sample.index(a) for a in A]
    ib = [sample.index(b) for b in B]
    return max(min(sample.dist[i][j] for j in ib) for i in ia)


def asymptotic_check(sample: MetricSample, A, B) -> tuple:
    A, B = list(A), list(B)
    return directed_radius(sample, A, B), directed_radius(sample, B, A)


def asymptotic_report(sample: MetricSample, A, B) -> dict:
    r1, r2 = asymptotic_check(sample, A, B)
    return {
        "scope": SCOPE,
        "A": list(A),
        "B": list(B),
        "radius_A_to_B": ext_str(r1),
        "radius_B_to_A": ext_str(r2),
        "asymptotic": r1 != INF and r2 != INF,
    }


def coarse_hom_defect(samples: Iterable) -> Fraction:
    """Largest observed defect among ``(g1, g2, defect)`` samples (0 for none)."""
    worst = Fraction(0)
    for s in samples:
        v = ext(s[-1])
        if v > worst:
            worst = v
    return worst


def embedding_defect_samples(m, pairs, L: int = 2):
    """Bound scl(y1 + y2 - y1 y2) by a filling for each pair; yields (y1, y2, bound, certificate)."""
    from .chains import Chain1
    from .lp import scl_upper_from_filling
    from .word import multiply

    for y1, y2 in pairs:
        c = Chain1([(y1, 1), (y2, 1), (multiply(y1, y2), -1)])
        got = scl_upper_from_filling(m, c, L)
        if got is None:
            yield y1, y2, INF, None
        else:
            yield y1, y2, got[0], got[1]
