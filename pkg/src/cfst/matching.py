"""Type matching modulo the monoidal laws of sequential composition.

``match_types(xi, t1, t2)`` produces a substitution for the instantiation
variables of both types.  Rules are tried in a fixed order; the visited
mu-redexes in ``xi`` stop recursive types from being unfolded forever, and
continuations reached again after a full cycle are unreachable, so their
instantiation variables are mapped to Skip.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .reduction import RedexSet, mu_redex, reduce_rule
from .types import (
    SKIP, Arrow, Base, Choice, End, Forall, InstVar, MatchConflict, Message,
    NameSupply, Seq, Skip, Type, TypeVar, apply_subst, compose_subst, fiv, free_tvars,
    subst_str, subst_tvar,
)

DEFAULT_BUDGET = 100_000


class MatchFail(Exception):
    def __init__(self, t1: Type, t2: Type, reason: str, trace: Optional["MatchTrace"] = None):
        super().__init__(f"cannot match {t1} with {t2}: {reason}")
        self.t1 = t1
        self.t2 = t2
        self.reason = reason
        self.trace = trace


class BudgetExceeded(MatchFail):
    def __init__(self, t1, t2, budget, trace=None):
        super().__init__(t1, t2, f"rule budget of {budget} applications exceeded", trace)
        self.budget = budget


@dataclass
class Step:
    rule: str
    lhs: Type
    rhs: Type
    xi: tuple
    closed: bool = False
    # bindings introduced by this step (M-VarL, M-VarR, M-Redex)
    binds: dict = field(default_factory=dict)

    def render(self) -> str:
        if self.rule == "M-Redex":
            body = (f"μ-redex[{self.lhs}] ⊆ Ξ  μ-redex[{self.rhs}] ⊆ Ξ  "
                    f"{subst_str(self.binds)}")
        else:
            body = f"{self.lhs} ≐ {self.rhs}"
            if self.binds:
                body += f"  {subst_str(self.binds)}"
        xi = "Ξ={" + ", ".join(str(t) for t in self.xi) + "}"
        mark = "  ✓" if self.closed else ""
        return f"{self.rule:<10} {body}  {xi}{mark}"


@dataclass
class MatchTrace:
    steps: list = field(default_factory=list)

    def rules(self) -> list:
        return [s.rule for s in self.steps]

    def render(self) -> str:
        return "\n".join(s.render() for s in self.steps)

    def replay(self) -> dict:
        """Rebuild the substitution from the binding steps, in order."""
        theta: dict = {}
        for s in self.steps:
            if s.rule in ("M-VarL", "M-VarR", "M-Redex"):
                theta = compose_subst(theta, _rule_binding(s.rule, s.lhs, s.rhs))
        return theta


def _rule_binding(rule: str, lhs: Type, rhs: Type) -> dict:
    if rule == "M-VarL":
        return {lhs.name: rhs} if lhs != rhs else {}
    if rule == "M-VarR":
        return {rhs.name: lhs} if lhs != rhs else {}
    return {x: SKIP for x in sorted(fiv(lhs, rhs))}


class Matcher:
    """One matching run: rule budget, trace and fresh names for M-All."""

    def __init__(self, supply: Optional[NameSupply] = None, budget: int = DEFAULT_BUDGET,
                 strict: bool = False, equiv=None):
        self.supply = supply or NameSupply()
        self.budget = budget
        self.used = 0
        self.trace = MatchTrace()
        self.strict = strict
        self._equiv = equiv
        self._top = None

    def match(self, xi: RedexSet, t1: Type, t2: Type) -> dict:
        self._top = (t1, t2)
        try:
            return self._match(xi, t1, t2)
        except MatchFail as exc:
            if exc.trace is None:
                exc.trace = self.trace
            raise
        except MatchConflict as exc:
            exc.trace = self.trace
            raise

    # -- trace helpers
    def _log(self, rule, lhs, rhs, xi, binds=None) -> Step:
        step = Step(rule, lhs, rhs, tuple(xi), binds=dict(binds or {}))
        self.trace.steps.append(step)
        return step

    def _close(self, rule, lhs, rhs, xi):
        last = self.trace.steps[-1] if self.trace.steps else None
        if last is not None and not last.closed and last.lhs == lhs and last.rhs == rhs:
            last.closed = True
        else:
            self._log(rule, lhs, rhs, xi).closed = True

    def _tick(self, t1, t2):
        self.used += 1
        if self.used > self.budget:
            raise BudgetExceeded(t1, t2, self.budget, self.trace)

    # -- rules
    def _match(self, xi: RedexSet, t1: Type, t2: Type) -> dict:
        self._tick(t1, t2)

        # M-fiv
        if not fiv(t1, t2):
            if self.strict and self._equiv is not None and not self._equiv(t1, t2):
                raise MatchFail(t1, t2, "types without instantiation variables are not equivalent")
            self._close("M-fiv", t1, t2, xi)
            return {}

        r1, r2 = mu_redex(t1), mu_redex(t2)

        # M-Redex: both heads are visited recursive types
        if r1 and r2 and xi.issuperset(r1 | r2):
            theta = {x: SKIP for x in sorted(fiv(t1, t2))}
            self._log("M-Redex", t1, t2, xi, theta)
            return theta

        # M-ReduceL / M-ReduceR
        if xi.isdisjoint(r1):
            red = reduce_rule(t1)
            if red is not None:
                xi2 = xi.union(r1)
                self._log("M-ReduceL", red[1], t2, xi2)
                return self._match(xi2, red[1], t2)
        if xi.isdisjoint(r2):
            red = reduce_rule(t2)
            if red is not None:
                xi2 = xi.union(r2)
                self._log("M-ReduceR", t1, red[1], xi2)
                return self._match(xi2, t1, red[1])

        # M-VarL / M-VarR
        if isinstance(t1, InstVar):
            theta = {t1.name: t2} if t1 != t2 else {}
            self._log("M-VarL", t1, t2, xi, theta)
            return theta
        if isinstance(t2, InstVar):
            theta = {t2.name: t1}
            self._log("M-VarR", t1, t2, xi, theta)
            return theta

        # M-Skip, M-End, M-Var (and base types)
        if isinstance(t1, Skip) and isinstance(t2, Skip):
            self._close("M-Skip", t1, t2, xi)
            return {}
        if isinstance(t1, End) and isinstance(t2, End) and t1.which == t2.which:
            self._close("M-End", t1, t2, xi)
            return {}
        if isinstance(t1, TypeVar) and isinstance(t2, TypeVar) and t1.name == t2.name:
            self._close("M-Var", t1, t2, xi)
            return {}
        if isinstance(t1, Base) and isinstance(t2, Base) and t1.which == t2.which:
            self._close("M-Base", t1, t2, xi)
            return {}

        # M-Msg
        if isinstance(t1, Message) and isinstance(t2, Message):
            if t1.pol != t2.pol:
                raise MatchFail(t1, t2, "polarity mismatch")
            self._log("M-Msg", t1.payload, t2.payload, xi)
            return self._match(xi, t1.payload, t2.payload)

        # M-SemiL / M-SemiR: a continuation on one side only must be Skip
        if (isinstance(t1, Seq) and isinstance(t1.lhs, Message) and isinstance(t2, Message)
                and t1.lhs.pol == t2.pol):
            return self._pair("M-SemiL", xi, t1.lhs.payload, t2.payload, t1.rhs, SKIP)
        if (isinstance(t2, Seq) and isinstance(t2.lhs, Message) and isinstance(t1, Message)
                and t1.pol == t2.lhs.pol):
            return self._pair("M-SemiR", xi, t1.payload, t2.lhs.payload, SKIP, t2.rhs)

        # M-Semi
        if isinstance(t1, Seq) and isinstance(t2, Seq):
            return self._pair("M-Semi", xi, t1.lhs, t2.lhs, t1.rhs, t2.rhs)

        # M-Choice
        if isinstance(t1, Choice) and isinstance(t2, Choice):
            if t1.view != t2.view:
                raise MatchFail(t1, t2, "choice view mismatch")
            if t1.labels != t2.labels:
                raise MatchFail(t1, t2, "choice label sets differ")
            theta: dict = {}
            other = t2.branch_map()
            for lbl, b1 in t1.branches:
                l, r = apply_subst(theta, b1), apply_subst(theta, other[lbl])
                self._log("M-Choice", l, r, xi)
                theta = compose_subst(theta, self._match(xi, l, r))
            return theta

        # M-Arrow
        if isinstance(t1, Arrow) and isinstance(t2, Arrow):
            if t1.mult != t2.mult:
                raise MatchFail(t1, t2, "arrow multiplicity mismatch")
            return self._pair("M-Arrow", xi, t1.dom, t2.dom, t1.cod, t2.cod)

        # M-All
        if isinstance(t1, Forall) and isinstance(t2, Forall):
            g = TypeVar(self.supply.fresh_tvar())
            b1 = subst_tvar(t1.body, t1.var, g)
            b2 = subst_tvar(t2.body, t2.var, g)
            self._log("M-All", b1, b2, xi)
            theta = self._match(xi, b1, b2)
            for x, img in theta.items():
                if g.name in free_tvars(img):
                    raise MatchFail(t1, t2, f"bound variable {t1.var} would escape through {x}")
            return theta

        raise MatchFail(t1, t2, "no matching rule")

    def _pair(self, rule, xi, a1, a2, b1, b2) -> dict:
        self._log(rule, a1, a2, xi)
        theta1 = self._match(xi, a1, a2)
        b1, b2 = apply_subst(theta1, b1), apply_subst(theta1, b2)
        self._log(rule, b1, b2, xi)
        theta2 = self._match(xi, b1, b2)
        return compose_subst(theta1, theta2)


def match_types(xi, t1: Type, t2: Type, supply: Optional[NameSupply] = None,
                budget: int = DEFAULT_BUDGET, strict: bool = False, equiv=None):
    """Match ``t1`` against ``t2`` under visited redexes ``xi``.

    Returns ``(theta, trace)``.  Raises :class:`MatchFail` (including
    :class:`BudgetExceeded`) or :class:`MatchConflict`.
    """
    if not isinstance(xi, RedexSet):
        xi = RedexSet(xi)
    m = Matcher(supply, budget, strict, equiv)
    theta = m.match(xi, t1, t2)
    return theta, m.trace
