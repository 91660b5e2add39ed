"""Check suites: the telescoping filling for [a, b^(2^n)] and the randomized property suite.

Every check produces a status and, on failure, a small witness.  Failures
never abort a suite.  Reports carry no timings, so a fixed seed and
configuration give byte-identical JSON.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable

from .bounds import Budgets, compare_modes, default_certificate_set, scl_interval, scl_lower, verify_interval
from .chains import Chain1, Chain2, boundary, h_generator, h_normal_form, scale_approximate
from .coarse import INF, CoarseError, MetricSample, add, asymptotic_check, coarse_hom_defect, d_plus, directed_radius, embedding_defect_samples
from .lp import record_instances, verify_filling_certificate
from .marking import Marking, abelianize, chain_in_CZ, in_N, in_mixed_commutator
from .qm import BrooksCombination, default_certificates, evaluate_chain, homogenized_value, validate_window
from .search import MIXED, ORDINARY
from .word import (
    EMPTY,
    Word,
    commutator,
    cyclic_reduce,
    inverse,
    multiply,
    power,
    primitive_root,
    product,
    reduce,
)

SCHEMA = "scl-forge/v1"
PASS, FAIL, SKIP = "pass", "fail", "skip"


@dataclass
class Check:
    name: str
    status: str
    witness: dict = field(default_factory=dict)


@dataclass
class SuiteReport:
    checks: list[Check]
    seed: int | None
    config: dict

    @property
    def passed(self) -> bool:
        return all(c.status != FAIL for c in self.checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if c.status == FAIL]

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "seed": self.seed,
            "config": self.config,
            "status": PASS if self.passed else FAIL,
            "checks": [asdict(c) for c in sorted(self.checks, key=lambda c: c.name)],
        }


# -- telescoping filling ------------------------------------------------------

def iotakernel_step(n: int) -> dict:
    """Fill 2^(n+1) (c_{n+1} - c_n) with three cells, where c_n = [a, b^(2^n)] / 2^n."""
    m = Marking.full_abelianization(2)
    a, b = Word((1,)), Word((2,))
    B = power(b, 2 ** n)
    u = commutator(a, B)
    v = product([B, u, inverse(B)])
    w = multiply(u, v)
    identity_ok = commutator(a, power(b, 2 ** (n + 1))) == w
    # -(u, v) has boundary w - u - v; (v, B) - (B, u) has boundary v - u
    filling = Chain2([((u, v), -1), ((v, B), 1), ((B, u), -1)])
    target = Chain1([(w, 1), (u, -2)])
    residual = boundary(filling) - target
    support_ok = all(in_N(m, g1) or in_N(m, g2) for g1, g2 in filling)
    scale = Fraction(1, 2 ** (n + 1))
    # the target scaled down is exactly c_{n+1} - c_n
    diff = Chain1([(w, Fraction(1, 2 ** (n + 1))), (u, -Fraction(1, 2 ** n))])
    return {
        "n": n,
        "identity": identity_ok,
        "l1_norm": filling.l1_norm(),
        "residual_zero": not residual,
        "mixed_support": support_ok,
        "scaled_target_ok": target * scale == diff,
        "bound": filling.l1_norm() * scale,
        "filling": filling,
    }


def run_iotakernel(n_max: int) -> SuiteReport:
    if n_max < 0:
        raise ValueError("n_max must be nonnegative")
    checks = []
    for n in range(n_max + 1):
        st = iotakernel_step(n)
        expected = Fraction(3, 2 ** (n + 1))
        ok = (st["identity"] and st["residual_zero"] and st["mixed_support"] and st["scaled_target_ok"]
              and st["l1_norm"] == 3 and st["bound"] == expected)
        checks.append(Check(f"iotakernel/n={n:02d}", PASS if ok else FAIL, {
            "identity": st["identity"],
            "l1_norm": str(st["l1_norm"]),
            "boundary_residual_zero": st["residual_zero"],
            "mixed_support": st["mixed_support"],
            "bound": str(st["bound"]),
            "expected": str(expected),
            "filling": st["filling"].to_dict(Marking.full_abelianization(2)),
        }))
    return SuiteReport(checks, None, {"n_max": n_max})


# -- sampling -----------------------------------------------------------------

def random_word(rng: random.Random, rank: int, length: int) -> Word:
    letters = [g * s for g in range(1, rank + 1) for s in (1, -1)]
    w = EMPTY
    while len(w) < length:
        w = multiply(w, Word((rng.choice(letters),)))
    return w


def _lifts(m: Marking) -> list[tuple[int, ...]]:
    # integer vectors u_j with p(u_j) = e_j, found in a small box
    box = range(-2, 3)
    out = []
    for j in range(m.k):
        e = tuple(int(i == j) for i in range(m.k))
        for u in itertools.product(box, repeat=m.rank):
            if tuple(sum(r[i] * u[i] for i in range(m.rank)) for r in m.quotient_matrix) == e:
                out.append(u)
                break
        else:
            raise ValueError("no small lift for the quotient map")
    return out


def random_N_word(rng: random.Random, m: Marking, length: int) -> Word:
    """A random word pushed into N by appending a correction; may be empty."""
    w = random_word(rng, m.rank, length)
    if m.k == 0:
        return w
    pv = m.project(abelianize(m, w))
    fix = [0] * m.rank
    for j, u in enumerate(_lifts(m)):
        for i in range(m.rank):
            fix[i] -= pv[j] * u[i]
    tail = product([power(Word((i + 1,)), e) for i, e in enumerate(fix)])
    return multiply(w, tail)


def random_mixed_commutator_word(rng: random.Random, m: Marking, max_len: int = 12,
                                 terms: tuple[int, ...] = (1, 1, 2)) -> Word:
    """A nontrivial product of one or two [g, x] with x in N, of length <= max_len."""
    for _ in range(10_000):
        parts = []
        for _ in range(rng.choice(terms)):
            g = random_word(rng, m.rank, rng.randint(1, 2))
            if m.k == m.rank or m.k == 0:
                # N contains [G, G]: use a conjugated commutator
                x = commutator(random_word(rng, m.rank, 1), random_word(rng, m.rank, rng.randint(1, 2)))
                h = random_word(rng, m.rank, rng.randint(0, 1))
                x = product([h, x, inverse(h)])
            else:
                x = random_N_word(rng, m, rng.randint(1, 3))
            parts.append(commutator(g, x))
        y = product(parts)
        if 0 < len(y) <= max_len:
            return y
    raise ValueError(f"no mixed commutator word of length <= {max_len} found")


def random_CQ_chain(rng: random.Random, m: Marking, max_len: int = 8) -> Chain1:
    """A random rational chain in the mixed chain space: scaled [G,N] words plus
    terms x1 + x2 - x1 x2 with x1, x2 in N."""
    acc = Chain1()
    for _ in range(rng.randint(1, 3)):
        if rng.random() < 0.5:
            y = random_mixed_commutator_word(rng, m, max_len, (1,))
            acc = acc + Chain1([(y, Fraction(rng.randint(-3, 3) or 1, rng.choice((1, 2, 3))))])
        else:
            x1 = random_N_word(rng, m, rng.randint(1, 3)) or Word((1,))
            x2 = random_N_word(rng, m, rng.randint(1, 3)) or Word((2,))
            if not (in_N(m, x1) and in_N(m, x2)):
                continue
            s = Fraction(rng.randint(1, 2), rng.choice((1, 2)))
            acc = acc + Chain1([(x1, s), (x2, s), (multiply(x1, x2), -s)])
    return acc


def arrangement_oracle(m: Marking, c: Chain1, rng: random.Random | None = None, conj_len: int = 1) -> bool:
    """Integer chain membership via one product of its terms (with multiplicity, negative
    terms inverted), optionally conjugating factors at random."""
    words = []
    for w, coeff in c.items():
        n = int(coeff)
        words.extend([w if n > 0 else inverse(w)] * abs(n))
    if rng is not None:
        rng.shuffle(words)
        words = [product([h, w, inverse(h)]) for w, h in ((w, random_word(rng, m.rank, conj_len)) for w in words)]
    return in_mixed_commutator(m, product(words))


# -- property suite -------------------------------------------------------------

@dataclass(frozen=True)
class SuiteCounts:
    words: int = 1000
    boundary: int = 100
    hnf: int = 1000
    qm: int = 200
    oracle: int = 200
    scaling: int = 20
    gamma3: int = 50
    triangle: int = 30
    semihom: int = 3
    embedding: int = 20
    coarse: int = 20


def _run(name: str, fn: Callable[[], tuple[str, dict]]) -> Check:
    try:
        status, witness = fn()
    except Exception as exc:  # a crash is a failure with the message as witness
        status, witness = FAIL, {"error": f"{type(exc).__name__}: {exc}"}
    return Check(name, status, witness)


def _first_failure(items, pred, show) -> tuple[str, dict]:
    count = 0
    for it in items:
        count += 1
        if not pred(it):
            return FAIL, {"witness": show(it), "checked": count}
    return PASS, {"checked": count}


def run_property_suite(seed: int = 0, counts: SuiteCounts | None = None, budgets: Budgets | None = None,
                       mutate: str | None = None) -> SuiteReport:
    """Randomized invariants over every module.

    ``mutate="defect_bound"`` halves the configured defect bounds of the
    default certificate set, which must make the window check fail.
    """
    counts = counts or SuiteCounts()
    budgets = budgets or Budgets(k_max=2)
    rng = random.Random(seed)
    full = Marking.full_abelianization(2)
    half = Marking(2, ((1, 0),))
    fmt = full.format
    checks: list[Check] = []

    def add_check(name, fn):
        checks.append(_run(name, fn))

    # word
    words = [random_word(rng, 2, rng.randint(0, 64)) for _ in range(counts.words)]
    add_check("word/reduce_idempotent", lambda: _first_failure(
        words, lambda w: reduce(list(w) + [1, -1]) == w and reduce(reduce(list(w))) == w, fmt))
    add_check("word/inverse", lambda: _first_failure(words, lambda w: multiply(w, inverse(w)) == EMPTY, fmt))
    add_check("word/commutator_abelianizes_to_zero", lambda: _first_failure(
        zip(words, words[1:]), lambda p: not any(abelianize(full, commutator(*p))), lambda p: [fmt(p[0]), fmt(p[1])]))

    def root_ok(w):
        r = primitive_root(w)
        return power(r.root, r.exponent) == w

    def cyc_ok(w):
        core, h = cyclic_reduce(w)
        return product([h, core, inverse(h)]) == w and (len(core) < 2 or core[0] != -core[-1])

    powered = [power(w, rng.randint(1, 4)) for w in words[:200]]
    add_check("word/root_roundtrip", lambda: _first_failure(words + powered, root_ok, fmt))
    add_check("word/cyclic_roundtrip", lambda: _first_failure(words, cyc_ok, fmt))

    # chains
    pairs = [(random_word(rng, 2, rng.randint(0, 8)), random_word(rng, 2, rng.randint(0, 8)))
             for _ in range(counts.boundary)]

    def bd_ok(p):
        g1, g2 = p
        expect: dict = {}
        for w, s in ((g2, 1), (multiply(g1, g2), -1), (g1, 1)):
            expect[w] = expect.get(w, 0) + s
        return boundary(Chain2([(p, 1)])) == Chain1(expect)

    add_check("chains/boundary_formula", lambda: _first_failure(pairs, bd_ok, lambda p: [fmt(p[0]), fmt(p[1])]))

    hcases = []
    for _ in range(counts.hnf):
        x = random_word(rng, 2, rng.randint(1, 6))
        k = rng.randint(-4, 4)
        hcases.append((x, k, random_CQ_chain(rng, full) if len(hcases) % 10 == 0 else Chain1([(x, k)])))

    def hnf_ok(case):
        x, k, c = case
        once = h_normal_form(c)
        return h_normal_form(once) == once and not h_normal_form(h_generator(x, k)) and \
            h_normal_form(c + h_generator(x, k)) == once

    add_check("chains/h_normal_form", lambda: _first_failure(hcases, hnf_ok, lambda c: [fmt(c[0]), c[1]]))

    def oracle_cases():
        for _ in range(counts.oracle):
            mk = rng.choice([half, full, Marking(2, ((1, 1),))])
            terms = []
            for _ in range(rng.randint(1, 3)):
                w = random_N_word(rng, mk, rng.randint(1, 4))
                if w:
                    terms.append((w, rng.choice((-2, -1, 1, 2))))
            yield mk, Chain1(terms)

    def oracle_ok(case):
        mk, c = case
        got = chain_in_CZ(mk, c)
        return got == arrangement_oracle(mk, c) == arrangement_oracle(mk, c, rng)

    add_check("marking/chain_membership_oracle", lambda: _first_failure(
        oracle_cases(), oracle_ok, lambda case: {"marking": case[0].to_dict(), "chain": case[1].to_dict(case[0])}))

    # quasimorphisms
    certs = default_certificate_set(2)
    if mutate == "defect_bound":
        bad = [BrooksCombination(q.atoms, q.defect_bound / 2, q.window, q.name) for q in default_certificates(2)]
        res = validate_window(bad, 2)

        def mutated():
            for q, r in zip(bad, res):
                if not r.passed:
                    return FAIL, {"quasimorphism": q.label(full.labels), "empirical_defect": str(r.empirical_max),
                                  "declared": str(q.defect_bound), "witness_pair": [fmt(w) for w in r.witness]}
            return PASS, {}

        add_check("qm/window_defect", mutated)
    else:
        def window():
            qs = default_certificates(2)
            res = validate_window(qs, 2)
            for q, r in zip(qs, res):
                if not r.passed:
                    return FAIL, {"quasimorphism": q.label(full.labels), "witness_pair": [fmt(w) for w in r.witness]}
            return PASS, {"certificates": len(qs)}

        add_check("qm/window_defect", window)

    qsamples = [(rng.choice(certs), random_word(rng, 2, rng.randint(1, 10)), random_word(rng, 2, rng.randint(0, 4)),
                 rng.randint(2, 4)) for _ in range(counts.qm)]

    def qm_ok(s):
        q, y, h, k = s
        v = homogenized_value(q, y)
        return homogenized_value(q, power(y, k)) == k * v and homogenized_value(q, product([h, y, inverse(h)])) == v \
            and homogenized_value(q, inverse(y)) == -v

    add_check("qm/homogeneous_and_invariant", lambda: _first_failure(
        qsamples, qm_ok, lambda s: {"q": s[0].label(full.labels), "y": fmt(s[1]), "h": fmt(s[2]), "k": s[3]}))

    def scaling():
        done = 0
        for _ in range(counts.scaling):
            c = random_CQ_chain(rng, full)
            for eps in (Fraction(1), Fraction(1, 2), Fraction(1, 4)):
                sw = scale_approximate(full, c, eps, certs)
                for q in certs:
                    gap = abs(evaluate_chain(q, c * sw.k) - homogenized_value(q, sw.y))
                    if not (gap <= sw.count * q.defect_bound <= eps * sw.k * q.defect_bound):
                        return FAIL, {"chain": c.to_dict(full), "eps": str(eps), "q": q.label(full.labels),
                                      "gap": str(gap), **sw.meta()}
                done += 1
        return PASS, {"checked": done}

    add_check("chains/scale_approximation", scaling)

    # bounds and LP, recorded for the duality audit
    with record_instances() as lp_log:
        sample = [random_mixed_commutator_word(rng, full) for _ in range(counts.gamma3)]
        comparisons = {}

        def gamma3():
            mono, inter, factor2 = [], [], []
            for y in sample:
                r = compare_modes(full, y, budgets, certs)
                comparisons[y] = r
                if not r.checks["lower_G <= upper_GN"]:
                    mono.append(fmt(y))
                if not r.checks["intervals_intersect"]:
                    inter.append(fmt(y))
                if not r.checks["lower_GN <= 2 upper_G"]:
                    factor2.append(fmt(y))
                for iv in (r.ordinary, r.mixed):
                    if not verify_interval(full, y, iv):
                        return FAIL, {"unverified_interval": fmt(y), "mode": iv.mode}
            return PASS if not (mono or inter or factor2) else FAIL, {
                "checked": len(sample), "monotonicity_violations": mono,
                "intersection_violations": inter, "factor_two_violations": factor2}

        add_check("bounds/mode_comparison", gamma3)

        def triangle():
            bad = []
            n = 0
            for _ in range(counts.triangle):
                y1, y2 = rng.choice(sample), rng.choice(sample)
                u1 = _upper(comparisons, full, y1, budgets, certs)
                u2 = _upper(comparisons, full, y2, budgets, certs)
                lo = scl_lower(full, multiply(y1, y2), MIXED, certs)
                n += 1
                if lo > add(add(u1, u2), Fraction(1, 2)):
                    bad.append([fmt(y1), fmt(y2), str(lo)])
            return (FAIL if bad else PASS), {"checked": n, "violations": bad}

        add_check("bounds/weak_triangle", triangle)

        def semihom():
            small = Budgets(k_max=1, L=2, search=budgets.search)
            n = 0
            for y in sample[: counts.semihom]:
                base = scl_interval(full, y, MIXED, small, certs)
                for k in (1, 2, 3):
                    iv = scl_interval(full, power(y, k), MIXED, small, certs)
                    lo, hi = k * base.lower, base.upper if base.upper == INF else k * base.upper
                    n += 1
                    if not (iv.lower <= hi and lo <= iv.upper):
                        return FAIL, {"y": fmt(y), "k": k, "interval": [str(iv.lower), str(iv.upper)]}
            return PASS, {"checked": n}

        add_check("bounds/semi_homogeneity", semihom)

        def embedding():
            prs = [(rng.choice(sample), rng.choice(sample)) for _ in range(counts.embedding)]
            got = list(embedding_defect_samples(full, prs))
            worst = coarse_hom_defect((y1, y2, v) for y1, y2, v, _ in got)
            for y1, y2, v, cert in got:
                if v == INF or v > Fraction(1, 2) or not verify_filling_certificate(full, cert):
                    return FAIL, {"pair": [fmt(y1), fmt(y2)], "bound": str(v)}
            return PASS, {"checked": len(got), "max_defect": str(worst)}

        add_check("coarse/embedding_defect", embedding)

    def duality():
        bad = [i for i, r in enumerate(lp_log) if r.status == "optimal" and not r.strong_duality]
        opt = sum(r.status == "optimal" for r in lp_log)
        return (FAIL if bad else PASS), {"instances": len(lp_log), "optimal": opt, "violations": bad}

    add_check("lp/strong_duality", duality)

    # coarse geometry
    def metric_tables():
        for _ in range(counts.coarse):
            n = rng.randint(2, 6)
            pts = [(rng.randint(-5, 5), rng.randint(-5, 5), rng.random() < 0.2) for _ in range(n)]

            def dist(i, j):
                if i == j:
                    return Fraction(0)
                if pts[i][2] != pts[j][2]:
                    return INF
                return d_plus(Fraction(abs(pts[i][0] - pts[j][0]) + abs(pts[i][1] - pts[j][1]), 2), False)

            labels = [f"p{i}" for i in range(n)]
            yield MetricSample(tuple(labels), tuple(tuple(dist(i, j) for j in range(n)) for i in range(n)))

    def coarse_ok():
        n = 0
        for s in metric_tables():
            pts = list(s.points)
            A = rng.sample(pts, rng.randint(1, len(pts)))
            B = rng.sample(pts, rng.randint(1, len(pts)))
            C = rng.sample(pts, rng.randint(1, len(pts)))
            r1, r2 = asymptotic_check(s, A, B)
            if (r2, r1) != asymptotic_check(s, B, A):
                return FAIL, {"sample": s.to_dict(), "A": A, "B": B}
            if directed_radius(s, A, C) > add(directed_radius(s, A, B), directed_radius(s, B, C)):
                return FAIL, {"sample": s.to_dict(), "A": A, "B": B, "C": C}
            if directed_radius(s, A, A) != 0:
                return FAIL, {"sample": s.to_dict(), "A": A}
            n += 1
        return PASS, {"checked": n}

    add_check("coarse/radii", coarse_ok)

    def dplus_table():
        pts = sample[:6] + [Word((1,))]
        upper = {}
        for y in pts:
            for z in pts:
                g = multiply(inverse(y), z)
                if y == z:
                    upper[y, z] = Fraction(0)
                elif not in_mixed_commutator(full, g):
                    upper[y, z] = INF
                else:
                    upper[y, z] = scl_interval(full, g, MIXED, Budgets(k_max=1, L=2, search=budgets.search), certs).upper
        D = {(y, z): min(upper[y, z], upper[z, y]) for y in pts for z in pts}
        D = {(y, z): d_plus(v, y == z) for (y, z), v in D.items()}
        # shortest-path closure keeps every entry an upper bound for the true d+
        for mid in pts:
            for y in pts:
                for z in pts:
                    via = add(D[y, mid], D[mid, z])
                    if via < D[y, z]:
                        D[y, z] = via
        try:
            MetricSample.from_function([fmt(p) for p in pts], lambda s, t: D[full.parse(s), full.parse(t)])
        except CoarseError as exc:
            return FAIL, {"error": str(exc)}
        return PASS, {"points": len(pts)}

    add_check("coarse/d_plus_metric", dplus_table)

    config = {"counts": asdict(counts), "budgets": budgets.to_dict(), "mutate": mutate}
    return SuiteReport(checks, seed, config)


def _upper(cache, m, y, budgets, certs):
    if y in cache:
        return cache[y].mixed.upper
    iv = scl_interval(m, y, MIXED, budgets, certs)
    return iv.upper


# -- reference checks -----------------------------------------------------------

def run_reference_checks(budgets: Budgets | None = None) -> SuiteReport:
    """The fixed worked examples: [a,b] in F2, the d+ values, the embedding defect,
    the telescoping filling, and the mode comparison on [F2, [F2, F2]]."""
    budgets = budgets or Budgets()
    F2 = Marking.ordinary_pair(2)
    full = Marking.full_abelianization(2)
    half = Marking(2, ((1, 0),))
    checks = []
    ab = F2.parse("abAB")

    def comm_ab():
        iv = scl_interval(F2, ab, ORDINARY, budgets)
        ok = iv.contains(Fraction(1, 2)) and verify_interval(F2, ab, iv)
        return (PASS if ok else FAIL), {"interval": [str(iv.lower), str(iv.upper)], "width": str(iv.width)}

    def monotone():
        y = half.parse("abAB")
        r = compare_modes(half, y, budgets)
        return (PASS if all(r.checks.values()) else FAIL), {k: v for k, v in r.checks.items()}

    def solvable():
        y = commutator(full.parse("a"), full.parse("abAB"))
        r = compare_modes(full, y, Budgets(k_max=2, L=budgets.L, search=budgets.search))
        ok = r.checks["intervals_intersect"] and r.checks["lower_G <= upper_GN"]
        return (PASS if ok else FAIL), {"ordinary": [str(r.ordinary.lower), str(r.ordinary.upper)],
                                        "mixed": [str(r.mixed.lower), str(r.mixed.upper)]}

    def embedding():
        y1 = commutator(full.parse("a"), full.parse("abAB"))
        y2 = commutator(full.parse("b"), full.parse("abAB"))
        got = list(embedding_defect_samples(full, [(y1, y2), (y2, y1), (y1, y1)]))
        v = coarse_hom_defect((y1, y2, v) for y1, y2, v, _ in got)
        return (PASS if v <= Fraction(1, 2) else FAIL), {"bound": str(v)}

    def dplus():
        ok = d_plus(0, False) == Fraction(1, 2) and d_plus(5, True) == 0 and d_plus("inf", False) == INF
        return (PASS if ok else FAIL), {}

    def iota():
        rep = run_iotakernel(8)
        return (PASS if rep.passed else FAIL), {"bounds": [c.witness["bound"] for c in rep.checks]}

    for name, fn in (("reference/commutator_ab", comm_ab), ("reference/mode_monotonicity", monotone),
                     ("reference/solvable_quotient", solvable), ("reference/embedding_defect", embedding),
                     ("reference/d_plus", dplus), ("reference/telescoping_filling", iota)):
        checks.append(_run(name, fn))
    return SuiteReport(checks, None, {"budgets": budgets.to_dict()})
