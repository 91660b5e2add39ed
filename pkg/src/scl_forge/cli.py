"""``scl-forge`` command line.

Exit codes: 0 success / all checks pass, 1 a check or search failed,
2 usage or input error, 3 chain-norm LP infeasible.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import fields

from . import __version__
from .bounds import Budgets, SoundnessError, compare_modes, scl_interval, verify_interval
from .chains import Chain1, ChainError
from .coarse import CoarseError, MetricSample, asymptotic_report
from .harness import SCHEMA, SuiteCounts, run_iotakernel, run_property_suite, run_reference_checks
from .lp import LPError, truncated_filling_norm, verify_dual, verify_filling_certificate
from .marking import Marking, MarkingError
from .qm import BrooksCombination, Disqualified, QuasimorphismError
from .search import MIXED, ORDINARY, NotInSubgroup, SearchBudget, cl_upper_search, verify_cl_certificate
from .word import WordError

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INFEASIBLE = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _globals(parser: argparse.ArgumentParser, suppress: bool) -> None:
    d = argparse.SUPPRESS if suppress else None
    parser.add_argument("--pair", metavar="FILE", default=d,
                        help="marking JSON (default: F2 with its full abelianization)")
    parser.add_argument("--json-out", metavar="PATH", default=d, help="write the JSON report here")
    parser.add_argument("--threads", type=int, default=d if suppress else 1,
                        help="worker count (recorded; computations are sequential)")
    parser.add_argument("--seed", type=int, default=d if suppress else 0)


def _search_flags(p):
    p.add_argument("--max-terms", type=int, default=SearchBudget.max_terms)
    p.add_argument("--gen-len", type=int, default=SearchBudget.gen_len)
    p.add_argument("--node-limit", type=int, default=SearchBudget.node_limit)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="scl-forge", description="Certified scl bounds in free groups.")
    ap.add_argument("--version", action="version", version=f"scl-forge {__version__}")
    _globals(ap, suppress=False)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cl-upper", help="search for a short commutator decomposition")
    _globals(p, suppress=True)
    p.add_argument("--word", required=True)
    p.add_argument("--mode", choices=[ORDINARY, MIXED], default=ORDINARY)
    _search_flags(p)

    p = sub.add_parser("chain-norm", help="truncated filling norm of a chain by exact LP")
    _globals(p, suppress=True)
    p.add_argument("--chain", metavar="FILE", required=True)
    p.add_argument("--L", type=int, default=4)
    p.add_argument("--h", action="store_true", help="work modulo h (x^k - k x)")
    p.add_argument("--mode", choices=[ORDINARY, MIXED], default=MIXED)

    p = sub.add_parser("scl", help="certified scl interval for a word or chain")
    _globals(p, suppress=True)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--word")
    g.add_argument("--chain", metavar="FILE")
    p.add_argument("--mode", choices=[ORDINARY, MIXED, "both"], default=MIXED)
    p.add_argument("--kmax", type=int, default=5)
    p.add_argument("--L", type=int, default=4)
    p.add_argument("--no-lp", action="store_true")
    p.add_argument("--certificates", metavar="FILE", help="JSON list of quasimorphism certificates")
    _search_flags(p)

    p = sub.add_parser("coarse", help="directed radii within a metric sample")
    _globals(p, suppress=True)
    p.add_argument("--sample", metavar="FILE", required=True)
    p.add_argument("--A", nargs="+", required=True)
    p.add_argument("--B", nargs="+", required=True)

    p = sub.add_parser("paper-checks", help="run the fixed reference checks")
    _globals(p, suppress=True)
    p.add_argument("--kmax", type=int, default=5)
    p.add_argument("--L", type=int, default=4)

    p = sub.add_parser("iotakernel", help="telescoping filling bounds for [a, b^(2^n)]")
    _globals(p, suppress=True)
    p.add_argument("--n", type=int, default=8)

    p = sub.add_parser("properties", help="randomized property suite")
    _globals(p, suppress=True)
    p.add_argument("--count", action="append", default=[], metavar="NAME=N",
                   help="override a sample count, e.g. gamma3=10")
    p.add_argument("--kmax", type=int, default=2)
    p.add_argument("--L", type=int, default=4)
    p.add_argument("--mutate", choices=["defect_bound"])
    return ap


def _marking(args) -> Marking:
    if args.pair:
        return Marking.load(args.pair)
    return Marking.full_abelianization(2)


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc


def _budgets(args) -> Budgets:
    search = SearchBudget(max_terms=args.max_terms, gen_len=args.gen_len, node_limit=args.node_limit) \
        if hasattr(args, "max_terms") else SearchBudget()
    return Budgets(k_max=args.kmax, L=args.L, search=search, use_lp=not getattr(args, "no_lp", False))


def _counts(items) -> SuiteCounts:
    names = {f.name for f in fields(SuiteCounts)}
    kw = {}
    for item in items:
        key, _, val = item.partition("=")
        if key not in names or not val.isdigit():
            raise UsageError(f"bad --count {item!r}; names: {', '.join(sorted(names))}")
        kw[key] = int(val)
    return SuiteCounts(**kw)


def cmd_cl_upper(args, m):
    y = m.parse(args.word)
    budget = SearchBudget(max_terms=args.max_terms, gen_len=args.gen_len, node_limit=args.node_limit)
    cert = cl_upper_search(m, y, args.mode, budget)
    ok = cert is not None and verify_cl_certificate(m, cert)
    out = {"command": "cl-upper", "marking": m.to_dict(), "word": m.format(y), "mode": args.mode,
           "budget": budget.to_dict(), "found": cert is not None,
           "cl_upper": cert.terms if cert else None,
           "certificate": cert.to_dict(m) if cert else None, "verified": ok}
    return out, EXIT_OK if ok else EXIT_FAIL


def cmd_chain_norm(args, m):
    ctx = m.ordinary() if args.mode == ORDINARY else m
    c = Chain1.from_dict(_load_json(args.chain), m)
    cert = truncated_filling_norm(ctx, c, args.L, allow_h=args.h)
    out = {"command": "chain-norm", "marking": m.to_dict(), "mode": args.mode, "chain": c.to_dict(m),
           "L": args.L, "modulo_h": args.h}
    if cert is None:
        out.update({"status": "infeasible", "certificate": None})
        return out, EXIT_INFEASIBLE
    ok = verify_filling_certificate(ctx, cert) and verify_dual(ctx, cert)
    out.update({"status": "optimal", "norm": str(cert.value), "certificate": cert.to_dict(m), "verified": ok})
    return out, EXIT_OK if ok else EXIT_FAIL


def cmd_scl(args, m):
    budgets = _budgets(args)
    certs = None
    if args.certificates:
        data = _load_json(args.certificates)
        items = data["certificates"] if isinstance(data, dict) else data
        certs = [BrooksCombination.from_dict(d, m.parse) for d in items]
    target = m.parse(args.word) if args.word else Chain1.from_dict(_load_json(args.chain), m)
    out = {"command": "scl", "marking": m.to_dict(), "budgets": budgets.to_dict(),
           "target": m.format(target) if args.word else target.to_dict(m)}
    if args.mode == "both":
        if not args.word:
            raise UsageError("--mode both needs --word")
        r = compare_modes(m, target, budgets, certs)
        ok = all(verify_interval(m, target, iv) for iv in (r.ordinary, r.mixed)) and all(r.checks.values())
        out.update(r.to_dict(m))
    else:
        iv = scl_interval(m, target, args.mode, budgets, certs)
        ok = verify_interval(m, target, iv)
        out["interval"] = iv.to_dict(m)
    out["verified"] = ok
    return out, EXIT_OK if ok else EXIT_FAIL


def cmd_coarse(args, m):
    s = MetricSample.from_dict(_load_json(args.sample))
    return {"command": "coarse", **asymptotic_report(s, args.A, args.B)}, EXIT_OK


def _suite(name, rep, args):
    out = {"command": name, "threads": args.threads, **rep.to_dict()}
    return out, EXIT_OK if rep.passed else EXIT_FAIL


def cmd_paper_checks(args, m):
    return _suite("paper-checks", run_reference_checks(_budgets(args)), args)


def cmd_iotakernel(args, m):
    if args.n < 0:
        raise UsageError("--n must be nonnegative")
    return _suite("iotakernel", run_iotakernel(args.n), args)


def cmd_properties(args, m):
    rep = run_property_suite(args.seed, _counts(args.count), _budgets(args), args.mutate)
    return _suite("properties", rep, args)


COMMANDS = {
    "cl-upper": cmd_cl_upper,
    "chain-norm": cmd_chain_norm,
    "scl": cmd_scl,
    "coarse": cmd_coarse,
    "paper-checks": cmd_paper_checks,
    "iotakernel": cmd_iotakernel,
    "properties": cmd_properties,
}


def _emit(out: dict, args) -> None:
    text = json.dumps({"schema": SCHEMA, **out}, indent=2) + "\n"
    if args.json_out:
        with open(args.json_out, "w") as fh:
            fh.write(text)
        status = out.get("status")
        print(f"{out['command']}: {status or 'done'} -> {args.json_out}")
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads is not None and args.threads < 1:
        parser.error("--threads must be positive")
    try:
        m = _marking(args)
        out, code = COMMANDS[args.command](args, m)
    except (Disqualified, SoundnessError) as exc:
        print(f"scl-forge: check failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (UsageError, MarkingError, WordError, ChainError, CoarseError, NotInSubgroup,
            QuasimorphismError, LPError, KeyError, TypeError, ValueError) as exc:
        print(f"scl-forge: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _emit(out, args)
    return code


if __name__ == "__main__":
    sys.exit(main())
