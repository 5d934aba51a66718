"""Command-line interface.

Commands: prove, eval, discover, construct, corpus, graph.
Exit codes are a contract: 0 proved/success, 1 refuted/mismatch/not-found,
2 usage error or unsupported input.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from typing import Optional, Sequence

from .closure import Recurrence
from .corpus import (
    BUILTIN_CORPUS,
    EntryResult,
    RunReport,
    load_corpus_file,
    run_corpus,
)
from .discovery import DEFAULT_GUARD, DEFAULT_MAX_ORDER, TermWindow, find_min_recurrence
from .expr import Identity, eval_expr, format_expr, format_identity, free_vars
from .parser import ParseError, parse, parse_expression, parse_identity
from .prover import (
    Proved,
    Refuted,
    Unsupported,
    Verdict,
    certificate_to_dict,
    check_certificate,
    construct_identity,
    prove,
)
from .trigraph import (
    CANONICAL_SEED,
    Triple,
    Vec3,
    expand_graph,
    f_sequence,
    graph_to_dict,
    graph_to_dot,
    is_f_triple,
    scan_observations,
)

EXIT_OK = 0
EXIT_REFUTED = 1
EXIT_USAGE = 2

CORPUS_ENV_VAR = "FIBID_CORPUS"


class _Output:
    def __init__(self, quiet: bool):
        self.quiet = quiet

    def say(self, *lines: str) -> None:
        if not self.quiet:
            for line in lines:
                print(line)

    def always(self, line: str) -> None:
        print(line)


def _emit_json(payload: dict) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True))


def _split_vars(text: Optional[str]) -> Optional[tuple[str, ...]]:
    if text is None:
        return None
    parts = tuple(v.strip() for v in text.split(",") if v.strip())
    return parts


def _recurrence_text(rec: Recurrence) -> str:
    desc = ", ".join(str(c) for c in rec.descending_coeffs())
    return f"order {rec.order}: {rec}   [descending coefficients: {desc}]"


def _verdict_payload(verdict: Verdict) -> dict:
    if isinstance(verdict, Proved):
        return {"verdict": "proved", "certificate": certificate_to_dict(verdict.certificate)}
    if isinstance(verdict, Refuted):
        cex = verdict.counterexample
        return {
            "verdict": "refuted",
            "counterexample": {
                "assignment": dict(cex.assignment),
                "lhs": str(cex.lhs_value),
                "rhs": str(cex.rhs_value),
            },
        }
    return {"verdict": "unsupported", "reason": verdict.reason}


# ---------------------------------------------------------------------------
# prove


def _cmd_prove(args, out: _Output) -> int:
    try:
        identity = parse_identity(args.identity, _split_vars(args.vars))
    except ParseError as exc:
        out.always(f"parse error: {exc}")
        return EXIT_USAGE
    verdict = prove(identity, minimize=args.minimize)
    if args.json:
        _emit_json(_verdict_payload(verdict))
    if isinstance(verdict, Proved):
        cert = verdict.certificate
        if not args.json:
            out.say(
                f"Proved: {format_identity(identity)}",
                f"  variable '{cert.variable}', {_recurrence_text(cert.recurrence)}",
                f"  coverage: {cert.coverage}, base cases: {len(cert.base_cases)}",
            )
        if args.certificate_out:
            with open(args.certificate_out, "w", encoding="utf-8") as fh:
                json.dump(certificate_to_dict(cert), fh, indent=2, sort_keys=True)
            out.say(f"  certificate written to {args.certificate_out}")
        return EXIT_OK
    if isinstance(verdict, Refuted):
        cex = verdict.counterexample
        if not args.json:
            assign = ", ".join(f"{k}={v}" for k, v in cex.assignment) or "(no variables)"
            out.say(
                f"Refuted: {format_identity(identity)}",
                f"  at {assign}: lhs = {cex.lhs_value}, rhs = {cex.rhs_value}",
            )
        return EXIT_REFUTED
    if not args.json:
        out.say(f"Unsupported: {verdict.reason}")
    return EXIT_USAGE


# ---------------------------------------------------------------------------
# eval


def _parse_assignment(text: Optional[str]) -> dict[str, int]:
    if not text:
        return {}
    out: dict[str, int] = {}
    for piece in text.split(","):
        piece = piece.strip()
        if not piece:
            continue
        if "=" not in piece:
            raise ValueError(f"assignments look like var=value, got {piece!r}")
        key, value = piece.split("=", 1)
        out[key.strip()] = int(value.strip())
    return out


def _cmd_eval(args, out: _Output) -> int:
    try:
        assignment = _parse_assignment(args.at)
        parsed = parse(args.text, _split_vars(args.vars))
    except (ParseError, ValueError) as exc:
        out.always(f"error: {exc}")
        return EXIT_USAGE
    try:
        if isinstance(parsed, Identity):
            lv = eval_expr(parsed.lhs, assignment)
            rv = eval_expr(parsed.rhs, assignment)
            if args.json:
                _emit_json(
                    {"lhs": str(lv), "rhs": str(rv), "equal": lv == rv,
                     "assignment": assignment}
                )
            else:
                out.say(f"lhs = {lv}", f"rhs = {rv}", f"equal: {lv == rv}")
            return EXIT_OK if lv == rv else EXIT_REFUTED
        value = eval_expr(parsed, assignment)
    except ValueError as exc:
        out.always(f"error: {exc}")
        return EXIT_USAGE
    if args.json:
        _emit_json({"value": str(value), "assignment": assignment})
    else:
        out.say(str(value))
    return EXIT_OK


# ---------------------------------------------------------------------------
# discover


def _discover_terms(args, out: _Output) -> Optional[list[Fraction]]:
    if args.terms_file:
        values = []
        try:
            with open(args.terms_file, "r", encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if line and not line.startswith("#"):
                        values.append(Fraction(line))
        except (OSError, ValueError) as exc:
            out.always(f"error reading terms: {exc}")
            return None
        return values
    try:
        expr = parse_expression(args.expression)
    except ParseError as exc:
        out.always(f"parse error: {exc}")
        return None
    variables = sorted(free_vars(expr))
    if len(variables) > 1:
        out.always(f"error: expression must have at most one variable, got {variables}")
        return None
    var = variables[0] if variables else "n"
    count = 2 * args.max_order + DEFAULT_GUARD
    return [eval_expr(expr, {var: t}) for t in range(count)]


def _cmd_discover(args, out: _Output) -> int:
    if bool(args.expression) == bool(args.terms_file):
        out.always("error: provide exactly one of EXPRESSION or --terms-file")
        return EXIT_USAGE
    values = _discover_terms(args, out)
    if values is None:
        return EXIT_USAGE
    window = TermWindow.of(values)
    try:
        found = find_min_recurrence(window, args.max_order, DEFAULT_GUARD)
    except ValueError as exc:
        out.always(f"error: {exc}")
        return EXIT_USAGE
    if args.json:
        payload = {
            "terms": [str(v) for v in values],
            "maxOrder": args.max_order,
        }
        if found is not None:
            payload["recurrence"] = {
                "order": found.order,
                "coeffs": [str(c) for c in found.coeffs],
                "descendingCoeffs": [str(c) for c in found.descending_coeffs()],
            }
        else:
            payload["recurrence"] = None
        _emit_json(payload)
        return EXIT_OK if found is not None else EXIT_REFUTED
    if found is None:
        out.say(f"none up to maxOrder {args.max_order}")
        return EXIT_REFUTED
    out.say(_recurrence_text(found))
    return EXIT_OK


# ---------------------------------------------------------------------------
# construct


def _cmd_construct(args, out: _Output) -> int:
    try:
        target = parse_expression(args.target)
        basis = [parse_expression(b) for b in args.basis]
    except ParseError as exc:
        out.always(f"parse error: {exc}")
        return EXIT_USAGE
    try:
        result = construct_identity(target, basis, args.var)
    except ValueError as exc:
        out.always(f"error: {exc}")
        return EXIT_USAGE
    if result is None:
        if args.json:
            _emit_json({"found": False})
        else:
            out.say("no integer-linear combination")
        return EXIT_REFUTED
    coeffs, certificate = result
    if args.json:
        _emit_json(
            {
                "found": True,
                "coefficients": [str(c) for c in coeffs],
                "identity": format_identity(certificate.identity),
                "certificate": certificate_to_dict(certificate),
            }
        )
    else:
        out.say(
            "coefficients: " + ", ".join(str(c) for c in coeffs),
            f"proved: {format_identity(certificate.identity)}",
        )
    return EXIT_OK


# ---------------------------------------------------------------------------
# corpus


def _result_line(result: EntryResult) -> str:
    mark = "ok " if result.matched else "FAIL"
    detail = result.verdict_kind
    if isinstance(result.verdict, Refuted):
        cex = result.verdict.counterexample
        assign = ", ".join(f"{k}={v}" for k, v in cex.assignment)
        detail += f" at {assign} ({cex.lhs_value} != {cex.rhs_value})"
    elif isinstance(result.verdict, Unsupported):
        detail += f" ({result.verdict.reason})"
    elif result.certificate_ok is not None:
        detail += ", certificate " + ("ok" if result.certificate_ok else "BAD")
    return (
        f"[{mark}] {result.entry.name}: {detail} "
        f"(expected {result.entry.expected}, {result.millis:.0f} ms)"
    )


def _report_payload(report: RunReport) -> dict:
    return {
        "entries": [
            {
                "name": r.entry.name,
                "expected": r.entry.expected,
                "verdict": r.verdict_kind,
                "matched": r.matched,
                "millis": round(r.millis, 3),
                "certificateOk": r.certificate_ok,
                "certificatePath": r.certificate_path,
            }
            for r in report.results
        ],
        "counts": report.counts,
        "totalMillis": round(report.total_millis, 3),
    }


def _cmd_corpus(args, out: _Output) -> int:
    entries = list(BUILTIN_CORPUS)
    extra_path = os.environ.get(CORPUS_ENV_VAR)
    if extra_path:
        try:
            entries.extend(load_corpus_file(extra_path))
        except (OSError, ValueError) as exc:
            out.always(f"error loading {CORPUS_ENV_VAR} corpus: {exc}")
            return EXIT_USAGE
    report = run_corpus(
        entries,
        name_filter=args.filter,
        minimize=args.minimize,
        parallel=args.parallel,
    )
    results = list(report.results)
    if args.certificates_dir:
        os.makedirs(args.certificates_dir, exist_ok=True)
        for i, result in enumerate(results):
            if isinstance(result.verdict, Proved):
                path = os.path.join(args.certificates_dir, f"{result.entry.name}.json")
                with open(path, "w", encoding="utf-8") as fh:
                    json.dump(
                        certificate_to_dict(result.verdict.certificate),
                        fh,
                        indent=2,
                        sort_keys=True,
                    )
                results[i] = EntryResult(
                    result.entry,
                    result.verdict,
                    result.matched,
                    result.millis,
                    result.certificate_ok,
                    path,
                )
        report = RunReport(tuple(results), report.total_millis)
    if args.json:
        _emit_json(_report_payload(report))
    else:
        for result in report.results:
            out.say(_result_line(result))
        counts = report.counts
        out.say(
            f"total: {len(report.results)} entries, {counts['proved']} proved, "
            f"{counts['refuted']} refuted, {counts['unsupported']} unsupported, "
            f"{counts['mismatched']} mismatched, {report.total_millis:.0f} ms"
        )
    return EXIT_OK if not report.mismatches else EXIT_REFUTED


# ---------------------------------------------------------------------------
# graph


def _parse_seed(text: str) -> Triple:
    vectors = []
    for chunk in text.split(";"):
        parts = [p.strip() for p in chunk.split(",")]
        if len(parts) != 3:
            raise ValueError(f"seed vector needs 3 integers, got {chunk!r}")
        vectors.append(Vec3(int(parts[0]), int(parts[1]), int(parts[2])))
    if len(vectors) != 3:
        raise ValueError("seed needs exactly 3 vectors separated by ';'")
    return Triple(*vectors)


def _observation_payload(report) -> dict:
    return {
        "entriesAreFibProducts": report.entries_are_fib_products,
        "fibProductFormFirstBreak": report.fib_product_form_first_break,
        "normEqualsSum": report.norm_equals_sum,
        "halfStepDifferencesAreFib": report.half_step_differences_are_fib,
        "firstEntryPrefixSumsAreNegFibSquares": report.first_entry_prefix_sums_are_neg_fib_squares,
        "negSquarePrefixMatchingStarts": list(report.neg_square_prefix_matching_starts),
        "secondEntryPrefixSumsAreFibProducts": report.second_entry_prefix_sums_are_fib_products,
        "alternatingSumIsUnit": report.alternating_sum_is_unit,
        "halfStepDifferencesTelescope": report.half_step_differences_telescope,
        "firstThirdProductsAreFibFourthMinusOne": report.first_third_products_are_fib_fourth_minus_one,
        "firstThirdProducts": [list(p) for p in report.first_third_products],
    }


def _cmd_graph(args, out: _Output) -> int:
    try:
        seed = _parse_seed(args.seed) if args.seed else CANONICAL_SEED
    except ValueError as exc:
        out.always(f"error: {exc}")
        return EXIT_USAGE
    if not is_f_triple(seed):
        out.always(f"error: seed {seed} is not an F-triple")
        return EXIT_USAGE
    e1, e2, e3 = seed.vectors()
    seq = f_sequence(e1, e2, e3, max(args.terms, 3))
    nodes = expand_graph(seed, args.depth)
    payload: dict = {
        "seed": [list(v.as_tuple()) for v in seed.vectors()],
        "sequence": [list(v.as_tuple()) for v in seq],
    }
    payload.update(graph_to_dict(nodes))
    scan = scan_observations(seq, args.seed_table_size) if args.scan else None
    if scan is not None:
        payload["observations"] = _observation_payload(scan)
    if args.json:
        _emit_json(payload)
        return EXIT_OK
    if args.dot:
        out.always(graph_to_dot(nodes))
        return EXIT_OK
    for i, vec in enumerate(seq, start=1):
        out.say(f"e{i} = {vec}")
    if args.depth > 0:
        out.say(f"expansion: {len(nodes)} nodes to depth {args.depth}")
    if scan is not None:
        for key, value in _observation_payload(scan).items():
            if key == "firstThirdProducts":
                for a, big_a, prod, base in scan.first_third_products:
                    out.say(f"  product {a}*{big_a} = {prod} = {base}^4 - 1")
            else:
                out.say(f"{key}: {value}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fibid",
        description=(
            "Prove, refute, discover and construct identities among "
            "Fibonacci/Lucas-type sequences with exact arithmetic."
        ),
    )
    parser.add_argument("--json", action="store_true", help="machine-readable output")
    parser.add_argument("--quiet", action="store_true", help="suppress informational output")
    parser.add_argument(
        "--seed-table-size",
        type=int,
        default=90,
        dest="seed_table_size",
        help="Fibonacci table cap used by the observation scanner",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prove", help="prove or refute an identity")
    p.add_argument("identity", help='e.g. "F[n-1]*F[n+1] - F[n]^2 = (-1)^(n)"')
    p.add_argument("--vars", help="comma-separated declared variable order")
    p.add_argument("--minimize", action="store_true", help="minimize the certificate recurrence")
    p.add_argument("--certificate-out", help="write the certificate JSON here")
    p.set_defaults(func=_cmd_prove)

    p = sub.add_parser("eval", help="evaluate an expression or identity exactly")
    p.add_argument("text")
    p.add_argument("--at", help="assignment, e.g. n=7,r=3")
    p.add_argument("--vars", help="declared variable order (optional)")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("discover", help="find the minimal recurrence of a term stream")
    p.add_argument("expression", nargs="?", help="single-variable expression")
    p.add_argument("--terms-file", help="file of exact rationals, one per line")
    p.add_argument("--max-order", type=int, default=DEFAULT_MAX_ORDER)
    p.set_defaults(func=_cmd_discover)

    p = sub.add_parser("construct", help="express a target in a basis of expressions")
    p.add_argument("target")
    p.add_argument("basis", nargs="+")
    p.add_argument("--var", required=True, help="the shared variable")
    p.set_defaults(func=_cmd_construct)

    p = sub.add_parser("corpus", help="run the built-in identity corpus")
    p.add_argument("--filter", default="", help="run only entries whose name contains this")
    p.add_argument("--minimize", action="store_true")
    p.add_argument("--parallel", action="store_true")
    p.add_argument("--certificates-dir", help="write per-entry certificate JSON files here")
    p.set_defaults(func=_cmd_corpus)

    p = sub.add_parser("graph", help="generate and scan the trivalent vector graph")
    p.add_argument("--seed", help='three vectors, e.g. "1,0,0;0,1,0;0,0,1"')
    p.add_argument("--terms", type=int, default=9, help="zigzag sequence length")
    p.add_argument("--depth", type=int, default=0, help="breadth-first expansion depth")
    p.add_argument("--scan", action="store_true", help="report observations on the sequence")
    p.add_argument("--dot", action="store_true", help="emit Graphviz text for the expansion")
    p.set_defaults(func=_cmd_graph)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_arg_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors, matching our contract
        return int(exc.code) if exc.code else EXIT_OK
    out = _Output(args.quiet)
    return args.func(args, out)


if __name__ == "__main__":
    sys.exit(main())
