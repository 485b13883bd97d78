"""Command-line front end."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .equivalence import type_equiv
from .errors import Diagnostic
from .matching import DEFAULT_BUDGET, MatchFail, match_types
from .reduction import DEFAULT_FUEL, RedexSet
from .syntax import ParseError, parse_program, parse_type, print_program
from .typer import check_program
from .types import MatchConflict, NameSupply, subst_str

EXIT_OK, EXIT_DIAGNOSTICS, EXIT_USAGE = 0, 1, 2


def _positive(text: str) -> int:
    n = int(text)
    if n <= 0:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return n


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--fuel", type=_positive, default=DEFAULT_FUEL,
                        help="equivalence / normalisation step limit (default %(default)s)")
    common.add_argument("--budget", type=_positive, default=DEFAULT_BUDGET,
                        help="type matching rule-application limit (default %(default)s)")
    common.add_argument("--trace", action="store_true", help="print matching traces")
    common.add_argument("--no-quick-look", dest="quick_look", action="store_false",
                        help="disable the quick-look pass over arguments")
    common.add_argument("--strict-match", action="store_true",
                        help="fail matching early on inequivalent variable-free subterms")
    common.add_argument("--json", action="store_true", help="machine-readable diagnostics")

    p = argparse.ArgumentParser(
        prog="cfst",
        description="Local type inference for System F with context-free session types.")
    sub = p.add_subparsers(dest="command", required=True)
    c = sub.add_parser("check", parents=[common], help="type-check programs")
    c.add_argument("paths", nargs="+")
    e = sub.add_parser("elaborate", parents=[common], help="print the elaborated program")
    e.add_argument("paths", nargs=1)
    m = sub.add_parser("match", parents=[common], help="match two types")
    m.add_argument("types", nargs=2, metavar="TYPE")
    q = sub.add_parser("equiv", parents=[common], help="decide type equivalence")
    q.add_argument("types", nargs=2, metavar="TYPE")
    k = sub.add_parser("corpus", parents=[common], help="run the annotation-erasure experiment")
    k.add_argument("paths", nargs=1, metavar="DIR")
    return p


def _emit_diagnostics(diags, args, out):
    if args.json:
        for d in diags:
            out.write(json.dumps(d.to_json(), ensure_ascii=False) + "\n")
        return
    for d in diags:
        out.write(str(d) + "\n")
        if args.trace and d.trace:
            for line in d.trace:
                out.write("    " + line + "\n")


def _check_files(args, out, elaborate: bool) -> int:
    status = EXIT_OK
    for path in args.paths:
        try:
            src = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            sys.stderr.write(f"cfst: {exc}\n")
            return EXIT_USAGE
        try:
            program = parse_program(src)
        except ParseError as exc:
            _emit_diagnostics([Diagnostic(path, exc.line, exc.col, "E010", exc.message)], args, out)
            status = EXIT_DIAGNOSTICS
            continue
        result = check_program(program, path, args.fuel, args.budget, args.quick_look,
                               args.strict_match, keep_traces=args.trace)
        _emit_diagnostics(result.diagnostics, args, out)
        if result.diagnostics:
            status = EXIT_DIAGNOSTICS
        elif elaborate:
            out.write(print_program(result.program))
        if args.trace and not args.json:
            for rec in result.app_records:
                line, col = rec.loc or (0, 0)
                out.write(f"-- {path}:{line}:{col}: {rec.expected} ≐ {rec.instantiated}  "
                          f"Θ = {subst_str(rec.theta)}\n")
                for step in rec.trace.render().splitlines():
                    out.write("   " + step + "\n")
    return status


def _parse_types(args):
    try:
        return [parse_type(t, allow_instvars=True) for t in args.types]
    except ParseError as exc:
        sys.stderr.write(f"cfst: cannot parse type: {exc}\n")
        return None


def _match(args, out) -> int:
    types = _parse_types(args)
    if types is None:
        return EXIT_USAGE
    t1, t2 = types
    equiv = (lambda a, b: bool(type_equiv(a, b, args.fuel))) if args.strict_match else None
    try:
        theta, trace = match_types(RedexSet(), t1, t2, NameSupply(), args.budget,
                                   args.strict_match, equiv)
    except (MatchFail, MatchConflict) as exc:
        if args.json:
            out.write(json.dumps({"error": str(exc)}, ensure_ascii=False) + "\n")
        else:
            out.write(f"error: {exc}\n")
            trace = getattr(exc, "trace", None)
            if args.trace and trace is not None:
                out.write(trace.render() + "\n")
        return EXIT_DIAGNOSTICS
    if args.json:
        payload = {"theta": {k: str(v) for k, v in sorted(theta.items())}}
        if args.trace:
            payload["trace"] = trace.render().splitlines()
        out.write(json.dumps(payload, ensure_ascii=False) + "\n")
        return EXIT_OK
    out.write(f"Θ = {subst_str(theta)}\n")
    if args.trace:
        out.write(trace.render() + "\n")
    return EXIT_OK


def _equiv(args, out) -> int:
    types = _parse_types(args)
    if types is None:
        return EXIT_USAGE
    res = type_equiv(types[0], types[1], args.fuel)
    if args.json:
        out.write(json.dumps({"verdict": res.verdict.value, "fuel_used": res.fuel_used}) + "\n")
    else:
        out.write(f"{res}\n")
    return EXIT_OK


def _corpus(args, out) -> int:
    from .corpus import run_corpus
    directory = Path(args.paths[0])
    if not directory.is_dir():
        sys.stderr.write(f"cfst: not a directory: {directory}\n")
        return EXIT_USAGE
    summary = run_corpus(directory, args.fuel, args.budget, args.quick_look)
    if args.json:
        out.write(json.dumps({
            "total": summary.total,
            "pass_annotated": summary.pass_annotated,
            "pass_erased": summary.pass_erased,
            "equiv_reinserted": summary.equiv_reinserted,
            "programs": [{"path": e.path, "annotated": e.annotated_ok, "erased": e.erased_ok,
                          "sites": e.sites, "equivalent_sites": e.equivalent_sites,
                          "diagnostics": e.diagnostics} for e in summary.entries],
        }) + "\n")
    else:
        out.write(summary.table() + "\n")
        for e in summary.entries:
            for d in e.diagnostics:
                out.write(d + "\n")
    ok = summary.pass_annotated == summary.pass_erased == summary.equiv_reinserted == summary.total
    return EXIT_OK if ok else EXIT_DIAGNOSTICS


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 20_000))
    if args.command == "check":
        return _check_files(args, out, elaborate=False)
    if args.command == "elaborate":
        return _check_files(args, out, elaborate=True)
    if args.command == "match":
        return _match(args, out)
    if args.command == "equiv":
        return _equiv(args, out)
    return _corpus(args, out)


if __name__ == "__main__":
    sys.exit(main())
