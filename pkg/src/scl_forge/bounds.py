"""Certified scl intervals.

Upper bounds come from explicit commutator decompositions of powers
(cl(y^k)/k bounds scl from above by subadditivity) and from truncated
filling norms.  Lower bounds come from counting quasimorphisms through
Bavard duality.  Any interval with lower > upper is a soundness failure
somewhere in the certificate stack and is raised, never clamped.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .chains import Chain1, clear_denominators, h_normal_form, in_CQ
from .lp import FillingCertificate, LPError, scl_upper_from_filling, verify_filling_certificate
from .marking import Marking, in_mixed_commutator
from .qm import BrooksCombination, bavard_lower_bound, default_certificates, validate_window
from .search import (
    MIXED,
    ORDINARY,
    ChainArrangement,
    ClCertificate,
    NotInSubgroup,
    SearchBudget,
    _context,
    chain_cl_upper,
    cl_upper_search,
    verify_chain_arrangement,
    verify_cl_certificate,
)
from .word import Word, power

INF = float("inf")


class SoundnessError(AssertionError):
    """A lower bound exceeded an upper bound."""


@dataclass(frozen=True)
class Budgets:
    k_max: int = 5
    L: int = 4
    search: SearchBudget = field(default_factory=SearchBudget)
    use_lp: bool = True

    def to_dict(self) -> dict:
        return {"k_max": self.k_max, "L": self.L, "use_lp": self.use_lp, "search": self.search.to_dict()}


@dataclass(frozen=True)
class StabEntry:
    k: int
    value: Fraction | None  # None: budget exhausted
    certificate: ClCertificate | ChainArrangement | None


@dataclass
class BoundInterval:
    lower: Fraction
    upper: Fraction | float
    mode: str
    lower_cert: tuple[BrooksCombination, Fraction] | None
    upper_cert: dict | None
    sequence: list[StabEntry] = field(default_factory=list)
    lp_value: Fraction | None = None

    @property
    def width(self):
        return self.upper - self.lower

    def contains(self, v) -> bool:
        return self.lower <= v <= self.upper

    def intersects(self, other: "BoundInterval") -> bool:
        return self.lower <= other.upper and other.lower <= self.upper

    def to_dict(self, m: Marking) -> dict:
        up = self.upper_cert
        if up is None:
            upper_cert = None
        elif up["kind"] == "filling":
            upper_cert = {"kind": "filling", "certificate": up["certificate"].to_dict(m)}
        else:
            upper_cert = {"kind": "stabilization", "k": up["k"], "certificate": up["certificate"].to_dict(m)}
        lower_cert = None
        if self.lower_cert is not None:
            q, v = self.lower_cert
            lower_cert = {"quasimorphism": q.to_dict(m.labels), "value": str(v)}
        return {
            "mode": self.mode,
            "lower": str(self.lower),
            "upper": _fmt(self.upper),
            "lower_decimal": f"{float(self.lower):.6f}",
            "upper_decimal": "inf" if self.upper == INF else f"{float(self.upper):.6f}",
            "sequence": [{"k": e.k, "value": _fmt(e.value)} for e in self.sequence],
            "lp_upper": _fmt(self.lp_value),
            "lower_certificate": lower_cert,
            "upper_certificate": upper_cert,
        }


def _fmt(v):
    if v is None:
        return None
    if v == INF:
        return "inf"
    return str(v)


@lru_cache(maxsize=8)
def default_certificate_set(rank: int) -> tuple[BrooksCombination, ...]:
    """Atoms of length <= 3 whose configured defect bounds survive the window scan."""
    qs = default_certificates(rank)
    results = validate_window(qs, rank)
    return tuple(q for q, r in zip(qs, results) if r.passed)


def _as_chain(target) -> Chain1:
    return target if isinstance(target, Chain1) else Chain1([(target, 1)])


def chain_stab_value(terms: int, factors: int, k: int, l: int) -> Fraction:
    """scl bound from a genus-``terms`` surface whose ``factors`` boundary loops wrap k*l times in total.

    A single loop keeps the word convention cl/k; with several loops the
    Euler characteristic charges (factors - 2) / 2 on top of the genus.
    """
    if factors <= 1:
        return Fraction(terms, k * l)
    return Fraction(2 * terms + factors - 2, 2 * k * l)


def stabilization_sequence(m: Marking, y: Word, mode: str = ORDINARY, k_max: int = 5,
                           budget: SearchBudget | None = None) -> list[StabEntry]:
    ctx = _context(m, mode)
    if not in_mixed_commutator(ctx, y):
        raise NotInSubgroup(f"{m.format(y)} is not in the {mode} commutator subgroup")
    out = []
    for k in range(1, k_max + 1):
        cert = cl_upper_search(m, power(y, k), mode, budget)
        out.append(StabEntry(k, None if cert is None else Fraction(cert.terms, k), cert))
    return out


def chain_stabilization_sequence(m: Marking, c: Chain1, mode: str = ORDINARY, k_max: int = 5,
                                 budget: SearchBudget | None = None) -> list[StabEntry]:
    ctx = _context(m, mode)
    l, lc = clear_denominators(c)
    if not in_CQ(ctx, c):
        raise NotInSubgroup("chain is not in the rational mixed chain space")
    out = []
    for k in range(1, k_max + 1):
        ck = Chain1([(power(w, k), coeff) for w, coeff in lc.items()])
        arr = chain_cl_upper(m, ck, mode, budget)
        out.append(StabEntry(k, None if arr is None else chain_stab_value(arr.terms, len(arr.factors), k, l), arr))
    return out


def _best_lower(ctx: Marking, hc: Chain1, certificates):
    lower, cert = Fraction(0), None
    for q in certificates:
        v = bavard_lower_bound(q, hc, ctx)
        if v > lower:
            lower, cert = v, (q, v)
    return lower, cert


def scl_lower(m: Marking, target, mode: str = ORDINARY,
              certificates: Sequence[BrooksCombination] | None = None) -> Fraction:
    """Only the quasimorphism lower bound; no search or LP."""
    ctx = _context(m, mode)
    c = _as_chain(target)
    if not in_CQ(ctx, c):
        raise NotInSubgroup("target is not in the rational mixed chain space")
    if certificates is None:
        certificates = default_certificate_set(m.rank)
    return _best_lower(ctx, h_normal_form(c), certificates)[0]


def scl_interval(m: Marking, target, mode: str = ORDINARY, budgets: Budgets | None = None,
                 certificates: Sequence[BrooksCombination] | None = None) -> BoundInterval:
    """Certified [lower, upper] for scl of a word or rational chain in the given mode."""
    budgets = budgets or Budgets()
    ctx = _context(m, mode)
    c = _as_chain(target)
    is_word = isinstance(target, Word)
    if is_word:
        if not in_mixed_commutator(ctx, target):
            raise NotInSubgroup(f"{m.format(target)} is not in the {mode} commutator subgroup")
    elif not in_CQ(ctx, c):
        raise NotInSubgroup("chain is not in the rational mixed chain space")
    hc = h_normal_form(c)
    if certificates is None:
        certificates = default_certificate_set(m.rank)

    lower, lower_cert = _best_lower(ctx, hc, certificates)

    upper, upper_cert = INF, None
    if not hc:
        upper, seq = Fraction(0), []
    elif is_word:
        seq = stabilization_sequence(m, target, mode, budgets.k_max, budgets.search)
    else:
        seq = chain_stabilization_sequence(m, c, mode, budgets.k_max, budgets.search)
    for e in seq:
        if e.value is not None and e.value < upper:
            upper, upper_cert = e.value, {"kind": "stabilization", "k": e.k, "certificate": e.certificate}
    lp_value = None
    if budgets.use_lp and hc:
        try:
            got = scl_upper_from_filling(ctx, hc, budgets.L)
        except LPError:
            got = None
        if got is not None:
            lp_value, cert = got
            if lp_value < upper:
                upper, upper_cert = lp_value, {"kind": "filling", "certificate": cert}
    if lower > upper:
        raise SoundnessError(f"lower bound {lower} exceeds upper bound {upper} for {c.format(m)} ({mode})")
    return BoundInterval(lower, upper, mode, lower_cert, upper_cert, seq, lp_value)


def verify_interval(m: Marking, target, iv: BoundInterval) -> bool:
    """Re-check both certificates of an interval independently of how they were found."""
    ctx = _context(m, iv.mode)
    c = h_normal_form(_as_chain(target))
    if iv.lower_cert is not None:
        q, v = iv.lower_cert
        if bavard_lower_bound(q, c, ctx) != v or v != iv.lower:
            return False
    elif iv.lower != 0:
        return False
    up = iv.upper_cert
    if up is None:
        return iv.upper == INF or (iv.upper == 0 and not c)
    if up["kind"] == "filling":
        cert: FillingCertificate = up["certificate"]
        return verify_filling_certificate(ctx, cert) and cert.target == c and cert.value / 2 == iv.upper
    k = up["k"]
    cert = up["certificate"]
    if isinstance(cert, ClCertificate):
        return (verify_cl_certificate(m, cert) and cert.target == power(target, k)
                and Fraction(cert.terms, k) == iv.upper)
    l, lc = clear_denominators(_as_chain(target))
    ck = Chain1([(power(w, k), coeff) for w, coeff in lc.items()])
    return verify_chain_arrangement(m, ck, cert) and \
        chain_stab_value(cert.terms, len(cert.factors), k, l) == iv.upper


@dataclass
class ModeComparison:
    ordinary: BoundInterval
    mixed: BoundInterval
    checks: dict

    def to_dict(self, m: Marking) -> dict:
        return {
            "ordinary": self.ordinary.to_dict(m),
            "mixed": self.mixed.to_dict(m),
            "checks": self.checks,
        }


def compare_modes(m: Marking, y: Word, budgets: Budgets | None = None,
                  certificates: Sequence[BrooksCombination] | None = None) -> ModeComparison:
    if not in_mixed_commutator(m, y):
        raise NotInSubgroup(f"{m.format(y)} is not in the mixed commutator subgroup")
    og = scl_interval(m, y, ORDINARY, budgets, certificates)
    mx = scl_interval(m, y, MIXED, budgets, certificates)
    checks = {
        "lower_G <= upper_GN": og.lower <= mx.upper,
        "intervals_intersect": og.intersects(mx),
        "lower_GN <= 2 upper_G": mx.lower <= 2 * og.upper,
    }
    return ModeComparison(og, mx, checks)
