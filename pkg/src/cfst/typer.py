"""Bidirectional typing with linear contexts, and whole-program checking.

``synth`` and ``check`` thread a typing context in and out.  Application
nodes go through base instantiation and, when an expected type is known,
type matching followed by an equivalence check.  Solutions for
instantiation variables found anywhere in a declaration are kept in a
per-declaration store so that elaboration can insert ``@T`` arguments.
"""

from __future__ import annotations

import contextlib
import itertools
from dataclasses import dataclass, field, replace
from typing import Optional

from . import prelude
from .equivalence import Verdict, terminates, type_equiv
from .errors import (
    Ambiguous, CannotSynthesize, Diagnostic, EquivUndecided, IllFormed,
    LinearityViolation, MatchError, TypeCheckError, TypeMismatch, UnboundVariable,
)
from .formation import FormationError, check_well_formed, is_lin
from .instantiation import check_type_arg, instantiate
from .matching import DEFAULT_BUDGET, MatchFail, Matcher
from .reduction import DEFAULT_FUEL, RedexSet
from .syntax import Decl, Program
from .types import (
    LIN, SKIP, UN, Abs, App, Arrow, Forall, InstVar, Lit, MatchConflict,
    NameSupply, Seq, TAbs, Type, TypeArg, TypeVar, Var, alpha_eq, apply_subst,
    fiv, lit_type, subst_tvar, Choice, Message, Rec,
)


# --------------------------------------------------------------------------
# Typing contexts

_uids = itertools.count()


@dataclass(frozen=True)
class Entry:
    name: str
    type: Type
    lin: Optional[bool]  # None while the type still has instantiation variables
    uses: int = 0
    uid: int = field(default_factory=lambda: next(_uids))

    @property
    def consumed(self) -> bool:
        return bool(self.lin) and self.uses > 0


class TypingCtx:
    """Immutable ordered context; the last entry for a name shadows earlier ones."""

    __slots__ = ("entries",)

    def __init__(self, entries=()):
        self.entries = tuple(entries)

    @classmethod
    def of(cls, bindings, delta=None) -> "TypingCtx":
        ctx = cls()
        for name, t in bindings:
            ctx, _ = ctx.extend(name, t, _lin_of(delta or {}, t))
        return ctx

    def lookup(self, name: str) -> Optional[Entry]:
        for e in reversed(self.entries):
            if e.name == name:
                return e
        return None

    def extend(self, name: str, t: Type, lin: Optional[bool]):
        e = Entry(name, t, lin)
        return TypingCtx(self.entries + (e,)), e.uid

    def get(self, uid: int) -> Entry:
        for e in self.entries:
            if e.uid == uid:
                return e
        raise KeyError(uid)

    def use(self, uid: int) -> "TypingCtx":
        return TypingCtx(replace(e, uses=e.uses + 1) if e.uid == uid else e
                         for e in self.entries)

    def remove(self, uid: int) -> "TypingCtx":
        return TypingCtx(e for e in self.entries if e.uid != uid)

    def live(self) -> dict:
        """Entries still available, by uid."""
        return {e.uid: e for e in self.entries if not e.consumed}

    def names(self) -> list:
        return [e.name for e in self.entries if not e.consumed]

    def __eq__(self, other):
        return isinstance(other, TypingCtx) and self.entries == other.entries

    def __repr__(self) -> str:
        inner = ", ".join(f"{e.name}:{e.type}{'' if not e.consumed else ' (used)'}"
                          for e in self.entries)
        return f"TypingCtx[{inner}]"


def _lin_of(delta, t: Type) -> Optional[bool]:
    if fiv(t):
        return None
    return is_lin(delta, t)


# --------------------------------------------------------------------------


@dataclass
class AppRecord:
    """One C-App judgment, kept for ``--trace`` output."""
    loc: object
    expected: Type
    instantiated: Type
    theta: dict
    trace: object


class Typer:
    def __init__(self, fuel: int = DEFAULT_FUEL, budget: int = DEFAULT_BUDGET,
                 quick_look: bool = True, strict: bool = False, infer: bool = True,
                 supply: Optional[NameSupply] = None, keep_traces: bool = False):
        self.fuel = fuel
        self.budget = budget
        self.quick_look = quick_look
        self.strict = strict
        self.infer = infer
        self.supply = supply or NameSupply()
        self.keep_traces = keep_traces
        self.app_records: list = []
        self.solution: dict = {}
        # instantiation variable -> (binder, bound kind, type context) per I-All site
        self.site_kinds: dict = {}

    # -- solution store
    def resolve(self, t: Type) -> Type:
        for _ in range(len(self.solution) + 1):
            if not (fiv(t) & self.solution.keys()):
                break
            t = apply_subst(self.solution, t)
        return t

    def record(self, theta: dict, loc=None):
        for x, img in theta.items():
            self._bind(x, img, loc)

    def _bind(self, x: str, img: Type, loc):
        img = self.resolve(img)
        cur = self.resolve(InstVar(x))
        if isinstance(cur, InstVar):
            if img == cur:
                return
            if cur.name in fiv(img):
                raise MatchError(f"infinite instantiation {cur.name} = {img}", loc)
            self.solution[cur.name] = img
            return
        if isinstance(img, InstVar):
            if img.name in fiv(cur):
                raise MatchError(f"infinite instantiation {img.name} = {cur}", loc)
            self.solution[img.name] = cur
            return
        if alpha_eq(cur, img):
            return
        if not fiv(cur) and not fiv(img) and type_equiv(cur, img, self.fuel):
            return
        raise MatchError(f"conflicting instantiations for {x}: {cur} and {img}", loc)

    @contextlib.contextmanager
    def speculation(self):
        saved = dict(self.solution)
        saved_records = len(self.app_records)
        try:
            yield
        finally:
            self.solution = saved
            del self.app_records[saved_records:]

    # -- helpers
    def match(self, xi, t1: Type, t2: Type):
        m = Matcher(self.supply, self.budget, self.strict,
                    equiv=lambda a, b: type_equiv(a, b, self.fuel).verdict is not Verdict.NOT_EQUIVALENT)
        theta = m.match(xi, t1, t2)
        return theta, m.trace

    def equiv(self, expected: Type, actual: Type, loc, theta=None, trace=None):
        res = type_equiv(expected, actual, self.fuel)
        if res.verdict is Verdict.EQUIVALENT:
            return
        extra = f" (with {_subst_text(theta)})" if theta else ""
        rendered = trace.render().splitlines() if trace is not None else None
        if res.verdict is Verdict.UNKNOWN:
            raise EquivUndecided(
                f"equivalence undecided at fuel {self.fuel}: {expected} and {actual}{extra}",
                loc, rendered)
        raise TypeMismatch(f"expected {expected}, found {actual}{extra}", loc, rendered)

    def well_formed(self, delta, t: Type, loc) -> None:
        try:
            check_well_formed(delta, t)
        except FormationError as exc:
            raise IllFormed(str(exc), loc) from None

    # -- heads
    def _var(self, gamma: TypingCtx, h: Var, consume: bool):
        entry = gamma.lookup(h.name)
        if entry is None:
            raise UnboundVariable(f"unbound variable {h.name}", h.loc)
        if entry.lin and entry.uses > 0:
            raise LinearityViolation(f"linear variable {h.name} used more than once", h.name, h.loc)
        if consume and entry.lin is not False:
            gamma = gamma.use(entry.uid)
        return entry.type, gamma

    def synth_head(self, delta, gamma: TypingCtx, h):
        if isinstance(h, Var):
            t, gamma = self._var(gamma, h, consume=True)
            return t, gamma, h
        return self.synth(delta, gamma, h)

    def peek_head(self, delta, gamma: TypingCtx, h) -> Type:
        """Type of a head without committing any resource use."""
        if isinstance(h, Var):
            entry = gamma.lookup(h.name)
            if entry is None:
                raise UnboundVariable(f"unbound variable {h.name}", h.loc)
            return entry.type
        return self.synth(delta, gamma, h)[0]

    # -- synthesis
    def synth(self, delta, gamma: TypingCtx, e):
        """``(type, output context, elaborated expression)``."""
        if isinstance(e, Lit):
            return lit_type(e), gamma, e
        if isinstance(e, Abs):
            if e.annot is None:
                raise CannotSynthesize(f"cannot synthesize a type for \\{e.param} without an annotation", e.loc)
            self.well_formed(delta, e.annot, e.loc)
            gamma2, uid = gamma.extend(e.param, e.annot, _lin_of(delta, e.annot))
            body_t, gamma3, body = self.synth(delta, gamma2, e.body)
            out = self._close_scope(delta, gamma3, uid, e.loc)
            mult = LIN if self._captured_lin(delta, gamma, out) else UN
            return Arrow(mult, e.annot, body_t), out, Abs(e.param, e.annot, body, e.loc)
        if isinstance(e, TAbs):
            delta2 = dict(delta)
            delta2[e.var] = e.kind
            body_t, gamma2, body = self.synth(delta2, gamma, e.body)
            return Forall(e.var, e.kind, body_t), gamma2, TAbs(e.var, e.kind, body, e.loc)
        if isinstance(e, App):
            return self._synth_app(delta, gamma, e)
        raise TypeError(f"not an expression: {e!r}")

    def _synth_app(self, delta, gamma, e: App):
        head_t, gamma1, head = self.synth_head(delta, gamma, e.head)
        inst = self._instantiate(delta, gamma1, head_t, e)
        gamma_out, args = self._check_args(delta, gamma1, e, inst)
        result = self.resolve(inst.result_type)
        residual = fiv(result)
        if residual:
            dead = residual - reachable_ivars(result)
            self.record({x: SKIP for x in sorted(dead)}, e.loc)
            result = self.resolve(result)
            if fiv(result):
                names = ", ".join(sorted(fiv(result)))
                raise Ambiguous(f"ambiguous instantiation: cannot determine {names} in {result}", e.loc)
        return result, gamma_out, App(head, args, e.loc)

    def _instantiate(self, delta, gamma1, head_t, e: App):
        try:
            inst = instantiate(self, delta, gamma1, head_t, e.args)
        except TypeCheckError as exc:
            if exc.loc is None:
                exc.loc = e.loc
            raise
        except MatchConflict as exc:
            raise MatchError(str(exc), e.loc) from None
        self.record(inst.theta, e.loc)
        return inst

    def _check_args(self, delta, gamma, e: App, inst):
        values = [a for a in e.args if not isinstance(a, TypeArg)]
        elab_values = []
        for arg, u in zip(values, inst.arg_types):
            gamma, a2 = self.check(delta, gamma, arg, u)
            elab_values.append(a2)
        # rebuild the argument list with placeholders at the I-All sites
        sites: dict = {}
        for i, x in inst.sites:
            sites.setdefault(i, []).append(x)
        out = []
        it = iter(elab_values)
        for i, a in enumerate(e.args):
            out.extend(TypeArg(x) for x in sites.get(i, ()))
            out.append(a if isinstance(a, TypeArg) else next(it))
        return gamma, tuple(out)

    # -- checking
    def check(self, delta, gamma: TypingCtx, e, expected: Type):
        """``(output context, elaborated expression)``."""
        expected = self.resolve(expected)
        if isinstance(e, App):
            return self._check_app(delta, gamma, e, expected)
        if isinstance(e, Abs):
            if isinstance(expected, Arrow):
                return self._check_abs(delta, gamma, e, expected.mult, expected.dom, expected.cod)
            if isinstance(expected, InstVar):
                dom, cod = self.supply.fresh_instvar(), self.supply.fresh_instvar()
                return self._check_abs(delta, gamma, e, None, dom, cod, expected)
            if isinstance(expected, Forall):
                return self._skolemize(delta, gamma, e, expected)
        if isinstance(e, TAbs) and isinstance(expected, Forall):
            if e.kind != expected.kind:
                raise TypeMismatch(f"type abstraction over {e.var}:{e.kind} checked against {expected}", e.loc)
            delta2 = dict(delta)
            delta2[e.var] = e.kind
            body_t = subst_tvar(expected.body, expected.var, TypeVar(e.var))
            gamma2, body = self.check(delta2, gamma, e.body, body_t)
            return gamma2, TAbs(e.var, e.kind, body, e.loc)
        return self._subsume(delta, gamma, e, expected)

    def _subsume(self, delta, gamma, e, expected: Type):
        actual, gamma2, e2 = self.synth(delta, gamma, e)
        loc = getattr(e, "loc", None)
        theta = None
        if fiv(expected) or fiv(actual):
            theta = self._match_record(expected, actual, loc)
            expected, actual = self.resolve(expected), self.resolve(actual)
        self.equiv(expected, actual, loc, theta)
        return gamma2, e2

    def _match_record(self, expected, actual, loc):
        try:
            theta, trace = self.match(RedexSet(), expected, actual)
        except MatchFail as exc:
            rendered = exc.trace.render().splitlines() if exc.trace else None
            raise MatchError(str(exc), loc, rendered) from None
        except MatchConflict as exc:
            raise MatchError(str(exc), loc) from None
        self.record(theta, loc)
        return theta

    def _skolemize(self, delta, gamma, e, expected: Forall):
        name = expected.var
        if name in delta:
            name = self.supply.fresh_tvar()
        delta2 = dict(delta)
        delta2[name] = expected.kind
        body_t = subst_tvar(expected.body, expected.var, TypeVar(name))
        return self.check(delta2, gamma, e, body_t)

    def _check_abs(self, delta, gamma, e: Abs, mult, dom, cod, solve=None):
        dom = self.resolve(dom)
        param_t = dom
        if e.annot is not None:
            self.well_formed(delta, e.annot, e.loc)
            if fiv(dom):
                self._match_record(dom, e.annot, e.loc)
            self.equiv(self.resolve(dom), e.annot, e.loc)
            param_t = e.annot
        gamma2, uid = gamma.extend(e.param, param_t, _lin_of(delta, param_t))
        gamma3, body = self.check(delta, gamma2, e.body, cod)
        out = self._close_scope(delta, gamma3, uid, e.loc)
        captured = self._captured_lin(delta, gamma, out)
        if mult == UN and captured:
            names = ", ".join(captured)
            raise LinearityViolation(
                f"unrestricted function captures linear variable(s) {names}", captured[0], e.loc)
        if solve is not None:
            fn = Arrow(LIN if captured else UN, dom, cod)
            self.record({solve.name: fn}, e.loc)
        return out, Abs(e.param, e.annot, body, e.loc)

    def _close_scope(self, delta, gamma: TypingCtx, uid: int, loc) -> TypingCtx:
        entry = gamma.get(uid)
        lin = entry.lin
        if lin is None:
            t = self.resolve(entry.type)
            lin = None if fiv(t) else is_lin(delta, t)
        if lin and entry.uses == 0:
            raise LinearityViolation(f"linear variable {entry.name} is never used", entry.name, loc)
        if lin and entry.uses > 1:
            raise LinearityViolation(f"linear variable {entry.name} used more than once", entry.name, loc)
        return gamma.remove(uid)

    def _captured_lin(self, delta, before: TypingCtx, after: TypingCtx) -> list:
        """Names of linear outer variables consumed between two contexts."""
        out = []
        now = {e.uid: e for e in after.entries}
        for e in before.entries:
            e2 = now.get(e.uid)
            if e2 is None or e2.uses == e.uses:
                continue
            lin = e.lin
            if lin is None:
                t = self.resolve(e.type)
                lin = True if fiv(t) else is_lin(delta, t)
            if lin:
                out.append(e.name)
        return out

    def _check_app(self, delta, gamma, e: App, expected: Type):
        head_t, gamma1, head = self.synth_head(delta, gamma, e.head)
        inst = self._instantiate(delta, gamma1, head_t, e)
        found = self.resolve(inst.result_type)
        try:
            theta, trace = self.match(RedexSet(), expected, found)
        except MatchFail as exc:
            rendered = exc.trace.render().splitlines() if exc.trace else None
            raise MatchError(str(exc), e.loc, rendered) from None
        except MatchConflict as exc:
            raise MatchError(str(exc), e.loc) from None
        if self.keep_traces:
            self.app_records.append(AppRecord(e.loc, expected, found, theta, trace))
        self.record(theta, e.loc)
        self.equiv(self.resolve(expected), self.resolve(found), e.loc, theta, trace)
        gamma_out, args = self._check_args(delta, gamma1, e, inst)
        return gamma_out, App(head, args, e.loc)

    # -- elaboration
    def finish(self, e):
        """Replace solved placeholders; unsolved ones are ambiguous."""
        if isinstance(e, Abs):
            return Abs(e.param, e.annot, self.finish(e.body), e.loc)
        if isinstance(e, TAbs):
            return TAbs(e.var, e.kind, self.finish(e.body), e.loc)
        if isinstance(e, App):
            head = e.head if isinstance(e.head, Var) else self.finish(e.head)
            args = []
            for a in e.args:
                if isinstance(a, TypeArg):
                    t = self.resolve(a.type)
                    if fiv(t):
                        names = ", ".join(sorted(fiv(t)))
                        raise Ambiguous(f"ambiguous instantiation: cannot determine {names}", e.loc)
                    if isinstance(a.type, InstVar) and a.type.name in self.site_kinds:
                        var, kind, delta = self.site_kinds[a.type.name]
                        check_type_arg(delta, var, kind, t, e.loc)
                    args.append(TypeArg(t))
                else:
                    args.append(self.finish(a))
            return App(head, tuple(args), e.loc)
        return e


def _subst_text(theta) -> str:
    from .types import subst_str
    return "Θ = " + subst_str(theta)


def reachable_ivars(t: Type) -> frozenset:
    """Instantiation variables of ``t`` that a run of the protocol can reach.

    Continuations after Close/Wait or after a recursive type with no exit are
    unreachable.
    """
    out: set = set()

    def walk(t, reach):
        if isinstance(t, InstVar):
            if reach:
                out.add(t.name)
        elif isinstance(t, Seq):
            walk(t.lhs, reach)
            walk(t.rhs, reach and terminates(t.lhs))
        elif isinstance(t, Message):
            walk(t.payload, reach)
        elif isinstance(t, Choice):
            for _, b in t.branches:
                walk(b, reach)
        elif isinstance(t, Arrow):
            walk(t.dom, reach)
            walk(t.cod, reach)
        elif isinstance(t, (Rec, Forall)):
            walk(t.body, reach)

    walk(t, True)
    return frozenset(out)


# --------------------------------------------------------------------------
# Programs


@dataclass
class CheckResult:
    diagnostics: list
    program: Program                 # elaborated
    contexts: dict = field(default_factory=dict)   # name -> output context
    app_records: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.diagnostics


def initial_context(program: Program) -> TypingCtx:
    bindings = list(prelude.builtins().items())
    bindings += [(d.name, d.signature) for d in program.decls]
    ctx = TypingCtx()
    for name, t in bindings:
        ctx, _ = ctx.extend(name, t, False)
    return ctx


def check_program(program: Program, filename: str = "<input>", fuel: int = DEFAULT_FUEL,
                  budget: int = DEFAULT_BUDGET, quick_look: bool = True,
                  strict: bool = False, infer: bool = True,
                  keep_traces: bool = False) -> CheckResult:
    """Check every declaration against its signature and elaborate it."""
    supply = NameSupply()
    gamma0 = initial_context(program)
    diagnostics = []
    decls = []
    contexts = {}
    records = []
    for d in program.decls:
        typer = Typer(fuel, budget, quick_look, strict, infer, supply, keep_traces)
        try:
            try:
                check_well_formed({}, d.signature)
            except FormationError as exc:
                raise IllFormed(f"signature of {d.name}: {exc}", d.loc) from None
            gamma_out, body = typer.check({}, gamma0, d.body, d.signature)
            body = typer.finish(body)
            decls.append(Decl(d.name, d.signature, body, d.loc, d.def_loc, d.params))
            contexts[d.name] = gamma_out
        except TypeCheckError as exc:
            line, col = exc.loc or d.def_loc
            diagnostics.append(Diagnostic(filename, line, col, exc.code, exc.message,
                                          trace=exc.trace))
            decls.append(d)
        except RecursionError:
            line, col = d.def_loc
            diagnostics.append(Diagnostic(filename, line, col, "E006",
                                          f"checking {d.name} exceeded the recursion limit"))
            decls.append(d)
        records += typer.app_records
    return CheckResult(diagnostics, Program(decls), contexts, records)
