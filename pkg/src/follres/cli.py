"""Command-line interface: pattern enumeration and counting, schema
inspection, theorem proving, and sentence parsing.

Exit codes: 0 derivable / at least one parse, 1 not derivable / no parse,
2 usage error, 3 formula or lexicon parse error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict, dataclass

from .order import Inconsistent, store_from_facts
from .patterns import (
    Pattern,
    PatternError,
    count_patterns,
    count_wellnested,
    enumerate_patterns,
    is_well_nested,
    pattern_label,
    schema,
)
from .prover import prove
from .proofnet import net_search, structure_dot, unfold
from .syntax import ParseError, parse_lexicon, parse_order_facts, parse_sequent
from .translate import (
    LexEntry,
    TranslationError,
    UnknownWordError,
    sentence_readings,
)


@dataclass
class RunReport:
    outcome: str
    proofs: int
    matchings_explored: int
    backtracks: int
    elapsed: int  # milliseconds


def _emit(report: RunReport, as_json: bool):
    if as_json:
        print(json.dumps(asdict(report)))
    else:
        print(
            f"{report.outcome}: {report.proofs} proof(s), "
            f"{report.matchings_explored} matching(s) explored, "
            f"{report.backtracks} backtrack(s), {report.elapsed} ms"
        )


def _cmd_enumerate(args) -> int:
    patterns = enumerate_patterns(args.segments, well_nested_only=args.well_nested)
    for i, p in enumerate(patterns):
        wn = "y" if is_well_nested(p) else "n"
        print(f"{pattern_label(args.segments, i)}\t{p}\t{wn}")
        if args.schemas:
            _print_schema(p, indent="\t")
    return 0


def _cmd_count(args) -> int:
    if args.well_nested:
        counts = [count_wellnested(k) for k in range(1, args.max + 1)]
    else:
        counts = [count_patterns(k) for k in range(1, args.max + 1)]
    print(",".join(str(c) for c in counts))
    return 0


def _print_schema(p: Pattern, indent: str = ""):
    sch = schema(p)
    def tup(t):
        return "(" + ",".join(f"x{i}" for i in t) + ")"
    def vset(s):
        return "{" + ",".join(f"x{i}" for i in sorted(s)) + "}"
    print(f"{indent}A: {tup(sch.tuple_a)}  B: {tup(sch.tuple_b)}  C: {tup(sch.tuple_c)}")
    print(f"{indent}exists: {vset(sch.exist_vars)}  under: {vset(sch.under_vars)}"
          f"  over: {vset(sch.over_vars)}")
    for role in ("product", "under", "over"):
        facts = sch.required_facts[role]
        shown = ", ".join(f"x{i}<=x{j}" for i, j in facts) if facts else "(none)"
        print(f"{indent}required[{role}]: {shown}")


def _cmd_schema(args) -> int:
    p = Pattern.parse(args.pattern)
    print(f"{p}\twell-nested: {'y' if is_well_nested(p) else 'n'}")
    _print_schema(p)
    return 0


def _cmd_prove(args) -> int:
    seq = parse_sequent(args.sequent)
    store, eqs = store_from_facts(parse_order_facts(args.order or ""))
    if eqs:
        print("order facts force equalities; refusing", file=sys.stderr)
        return 2
    start = time.monotonic()
    matchings = backtracks = 0
    results = {}
    if args.method in ("sequent", "both"):
        results["sequent"] = prove(seq, store) is not None
    if args.method in ("net", "both"):
        nets, stats = net_search(seq, store=store, first_only=not args.all)
        results["net"] = bool(nets)
        matchings, backtracks = stats.explored, stats.backtracks
        if args.dot:
            ps = unfold(seq)
            m = nets[0].matching if nets else None
            with open(args.dot, "w") as fh:
                fh.write(structure_dot(ps, m.pairs if m else None, m.subst if m else None))
        if args.trace and nets:
            for kind, nv, ne in nets[0].contraction.trace:
                print(f"contract {kind}: {nv} vertices, {ne} edges", file=sys.stderr)
    elapsed = int((time.monotonic() - start) * 1000)
    if len(results) == 2 and results["sequent"] != results["net"]:
        print(
            f"DISCREPANCY: sequent prover says {results['sequent']}, "
            f"proof net engine says {results['net']}",
            file=sys.stderr,
        )
        return 1
    derivable = all(results.values())
    report = RunReport(
        outcome="derivable" if derivable else "not-derivable",
        proofs=1 if derivable else 0,
        matchings_explored=matchings,
        backtracks=backtracks,
        elapsed=elapsed,
    )
    _emit(report, args.json)
    return 0 if derivable else 1


def _cmd_parse(args) -> int:
    with open(args.lexicon) as fh:
        entries = [LexEntry(w, c) for w, c in parse_lexicon(fh.read())]
    words = args.sentence.split()
    start = time.monotonic()
    parses = 0
    matchings = backtracks = 0
    first_dot = None
    for inst in sentence_readings(entries, words, args.goal):
        nets, stats = net_search(inst.sequent, store=inst.store)
        matchings += stats.explored
        backtracks += stats.backtracks
        parses += len(nets)
        if nets and first_dot is None and args.dot:
            ps = unfold(inst.sequent)
            m = nets[0].matching
            first_dot = structure_dot(ps, m.pairs, m.subst)
        if args.all:
            for net in nets:
                pairs = ", ".join(
                    f"{a}<->{b}" for a, b in sorted(net.matching.pairs.items())
                )
                print(f"parse: {pairs}")
    if args.dot and first_dot is not None:
        with open(args.dot, "w") as fh:
            fh.write(first_dot)
    elapsed = int((time.monotonic() - start) * 1000)
    report = RunReport(
        outcome="parse-count",
        proofs=parses,
        matchings_explored=matchings,
        backtracks=backtracks,
        elapsed=elapsed,
    )
    if args.stats or args.json:
        _emit(report, args.json)
    else:
        print(f"{parses} parse(s)")
    return 0 if parses else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="follres",
        description="Residuated connective families over first-order linear logic: "
                    "pattern catalogs, a sequent prover, and a proof-net parser.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p_enum = sub.add_parser("enumerate", help="list patterns with k segments")
    p_enum.add_argument("--segments", type=int, required=True)
    p_enum.add_argument("--well-nested", action="store_true")
    p_enum.add_argument("--schemas", action="store_true")
    p_enum.set_defaults(fn=_cmd_enumerate)

    p_count = sub.add_parser("count", help="pattern counts for k = 1..max")
    p_count.add_argument("--max", type=int, required=True)
    p_count.add_argument("--well-nested", action="store_true")
    p_count.set_defaults(fn=_cmd_count)

    p_schema = sub.add_parser("schema", help="tuples, quantifiers and facts of a pattern")
    p_schema.add_argument("pattern")
    p_schema.set_defaults(fn=_cmd_schema)

    p_prove = sub.add_parser("prove", help="decide a sequent")
    p_prove.add_argument("sequent")
    p_prove.add_argument("--order", default="")
    p_prove.add_argument("--method", choices=("net", "sequent", "both"), default="both")
    p_prove.add_argument("--dot")
    p_prove.add_argument("--trace", action="store_true")
    p_prove.add_argument("--all", action="store_true")
    p_prove.add_argument("--json", action="store_true")
    p_prove.set_defaults(fn=_cmd_prove)

    p_parse = sub.add_parser("parse", help="parse a sentence against a lexicon")
    p_parse.add_argument("sentence")
    p_parse.add_argument("--lexicon", required=True)
    p_parse.add_argument("--goal", required=True)
    p_parse.add_argument("--all", action="store_true")
    p_parse.add_argument("--dot")
    p_parse.add_argument("--stats", action="store_true")
    p_parse.add_argument("--deterministic", action="store_true")
    p_parse.add_argument("--json", action="store_true")
    p_parse.set_defaults(fn=_cmd_parse)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except (ParseError, PatternError, UnknownWordError, TranslationError, Inconsistent) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
