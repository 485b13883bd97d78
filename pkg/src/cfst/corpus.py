"""Annotation-erasure experiment over a directory of programs.

Each program is checked as written, then every ``@T`` argument is stripped
and the program is checked again.  Types re-inserted by elaboration must be
equivalent to the ones the fully elaborated original carries at the same
sites.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .equivalence import Verdict, type_equiv
from .syntax import Decl, ParseError, Program, parse_program
from .typer import check_program
from .types import Abs, App, TAbs, TypeArg


def erase(e):
    """Drop every type argument from an expression."""
    if isinstance(e, Abs):
        return Abs(e.param, e.annot, erase(e.body), e.loc)
    if isinstance(e, TAbs):
        return TAbs(e.var, e.kind, erase(e.body), e.loc)
    if isinstance(e, App):
        head = erase(e.head) if isinstance(e.head, (Abs, TAbs)) else e.head
        return App(head, tuple(erase(a) for a in e.args if not isinstance(a, TypeArg)), e.loc)
    return e


def erase_program(p: Program) -> Program:
    return Program([Decl(d.name, d.signature, erase(d.body), d.loc, d.def_loc, d.params)
                    for d in p.decls])


def type_args(e) -> list:
    """Type arguments in a fixed traversal order."""
    out = []
    stack = [e]
    while stack:
        x = stack.pop()
        if isinstance(x, (Abs, TAbs)):
            stack.append(x.body)
        elif isinstance(x, App):
            stack.extend(reversed(x.args))
            if isinstance(x.head, (Abs, TAbs)):
                stack.append(x.head)
        elif isinstance(x, TypeArg):
            out.append(x.type)
    return out


def count_type_args(p: Program) -> int:
    return sum(len(type_args(d.body)) for d in p.decls)


@dataclass
class CorpusEntry:
    path: str
    annotated_ok: bool
    erased_ok: bool
    sites: int = 0
    equivalent_sites: int = 0
    diagnostics: list = field(default_factory=list)

    @property
    def reinserted_ok(self) -> bool:
        return self.erased_ok and self.sites == self.equivalent_sites


@dataclass
class CorpusSummary:
    entries: list

    @property
    def total(self) -> int:
        return len(self.entries)

    @property
    def pass_annotated(self) -> int:
        return sum(e.annotated_ok for e in self.entries)

    @property
    def pass_erased(self) -> int:
        return sum(e.erased_ok for e in self.entries)

    @property
    def equiv_reinserted(self) -> int:
        return sum(e.reinserted_ok for e in self.entries)

    def table(self) -> str:
        rows = [("program", "annotated", "erased", "sites", "equivalent")]
        for e in self.entries:
            rows.append((Path(e.path).name, _mark(e.annotated_ok), _mark(e.erased_ok),
                         str(e.sites), str(e.equivalent_sites)))
        rows.append(("TOTAL", f"{self.pass_annotated}/{self.total}",
                     f"{self.pass_erased}/{self.total}",
                     "", f"{self.equiv_reinserted}/{self.total}"))
        widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
        lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows]
        lines.insert(1, "  ".join("-" * w for w in widths))
        lines.insert(len(lines) - 1, "  ".join("-" * w for w in widths))
        return "\n".join(lines)


def _mark(ok: bool) -> str:
    return "pass" if ok else "FAIL"


def run_file(path, fuel: int, budget: int, quick_look: bool = True) -> CorpusEntry:
    name = str(path)
    try:
        program = parse_program(Path(path).read_text(encoding="utf-8"))
    except ParseError as exc:
        return CorpusEntry(name, False, False, diagnostics=[f"{name}:{exc}"])
    first = check_program(program, name, fuel, budget, quick_look)
    erased = erase_program(program)
    second = check_program(erased, name, fuel, budget, quick_look)
    entry = CorpusEntry(name, first.ok, second.ok,
                        diagnostics=[str(d) for d in first.diagnostics + second.diagnostics])
    if first.ok and second.ok:
        for d1, d2 in zip(first.program.decls, second.program.decls):
            ts1, ts2 = type_args(d1.body), type_args(d2.body)
            entry.sites += max(len(ts1), len(ts2))
            if len(ts1) != len(ts2):
                continue
            entry.equivalent_sites += sum(
                type_equiv(a, b, fuel).verdict is Verdict.EQUIVALENT for a, b in zip(ts1, ts2))
    return entry


def run_corpus(directory, fuel: int, budget: int, quick_look: bool = True) -> CorpusSummary:
    files = sorted(Path(directory).glob("*.fst"))
    return CorpusSummary([run_file(f, fuel, budget, quick_look) for f in files])
