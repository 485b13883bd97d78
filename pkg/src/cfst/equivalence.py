"""Bounded bisimulation check for type equivalence.

Both sides are head-normalised with the reduction relation and their exposed
constructors compared; pairs already visited are assumed equivalent
(coinduction).  Obligations live on an explicit worklist, so a ``NOT``
verdict always comes with a concrete distinguishing observation, while
running out of fuel yields ``UNKNOWN`` rather than a guess.

Instantiation variables are treated as opaque atoms equal only to
themselves.
"""

from __future__ import annotations

import collections
import enum
import itertools
from dataclasses import dataclass
from typing import Optional

from .reduction import DEFAULT_FUEL, reduce_rule
from .types import (
    SKIP, Arrow, Base, Choice, End, Forall, InstVar, Message, Rec, Seq, Skip,
    Type, TypeVar, alpha_key, free_tvars, subst_tvar,
)


class Verdict(enum.Enum):
    EQUIVALENT = "Equivalent"
    NOT_EQUIVALENT = "NotEquivalent"
    UNKNOWN = "Unknown"

    def __str__(self) -> str:
        return self.value


@dataclass
class EquivResult:
    verdict: Verdict
    fuel_used: int = 0
    # distinguishing pair when NOT_EQUIVALENT
    witness: Optional[tuple] = None

    def __bool__(self) -> bool:
        return self.verdict is Verdict.EQUIVALENT

    def __str__(self) -> str:
        if self.verdict is Verdict.UNKNOWN:
            return f"Unknown (fuel exhausted after {self.fuel_used} steps)"
        return str(self.verdict)


# --------------------------------------------------------------------------
# Normalising simplification that preserves equivalence


def terminates(t: Type, nonterm: frozenset = frozenset()) -> bool:
    """Whether some run of session type ``t`` can finish and pass control on.

    Close/Wait absorb their continuation; a recursion variable assumed not to
    terminate (least fixed point) does not.  Unknown shapes count as
    terminating, which only makes callers more conservative.
    """
    if isinstance(t, End):
        return False
    if isinstance(t, Seq):
        return terminates(t.lhs, nonterm) and terminates(t.rhs, nonterm)
    if isinstance(t, Choice):
        return any(terminates(b, nonterm) for _, b in t.branches)
    if isinstance(t, Rec):
        return terminates(t.body, nonterm | {t.var})
    if isinstance(t, TypeVar):
        return t.name not in nonterm
    return True


def simplify(t: Type) -> Type:
    """Drop Skip units and continuations that can never be reached."""
    if isinstance(t, Seq):
        parts = []
        for p in _flatten(t):
            p = simplify(p)
            for q in _flatten(p):
                if isinstance(q, Skip):
                    continue
                parts.append(q)
                if not terminates(q):
                    break
            else:
                continue
            break
        if not parts:
            return SKIP
        out = parts[-1]
        for p in reversed(parts[:-1]):
            out = Seq(p, out)
        return out
    if isinstance(t, Rec):
        body = simplify(t.body)
        if t.var not in free_tvars(body):
            return body
        return Rec(t.var, t.kind, body)
    if isinstance(t, Message):
        return Message(t.pol, simplify(t.payload))
    if isinstance(t, Choice):
        return Choice(t.view, tuple((lbl, simplify(b)) for lbl, b in t.branches))
    if isinstance(t, Arrow):
        return Arrow(t.mult, simplify(t.dom), simplify(t.cod))
    if isinstance(t, Forall):
        return Forall(t.var, t.kind, simplify(t.body))
    return t


def _flatten(t: Type) -> list:
    out = []
    stack = [t]
    while stack:
        x = stack.pop()
        if isinstance(x, Seq):
            stack += (x.rhs, x.lhs)
        else:
            out.append(x)
    return out


# --------------------------------------------------------------------------


class _OutOfFuel(Exception):
    pass


class _Checker:
    def __init__(self, fuel: int):
        self.fuel = fuel
        self.used = 0
        self.fresh = itertools.count()

    def spend(self, n: int = 1):
        self.used += n
        if self.used > self.fuel:
            raise _OutOfFuel

    def normalize(self, t: Type) -> Type:
        while True:
            r = reduce_rule(t)
            if r is None:
                return t
            self.spend()
            t = r[1]

    def observe(self, t: Type) -> tuple:
        """Head-normal form of ``t`` as an observation tuple."""
        t = self.normalize(t)
        if isinstance(t, Seq):
            head, cont = t.lhs, t.rhs
            if isinstance(head, End):
                return ("end", head.which)
            if isinstance(head, Message):
                return ("msg", head.pol, head.payload, cont)
            if isinstance(head, TypeVar):
                return ("var", head.name, cont)
            if isinstance(head, InstVar):
                return ("ivar", head.name, cont)
            return ("other", t)
        if isinstance(t, Skip):
            return ("skip",)
        if isinstance(t, End):
            return ("end", t.which)
        if isinstance(t, Message):
            return ("msg", t.pol, t.payload, SKIP)
        if isinstance(t, TypeVar):
            return ("var", t.name, SKIP)
        if isinstance(t, InstVar):
            return ("ivar", t.name, SKIP)
        if isinstance(t, Choice):
            return ("choice", t.view, t.labels, t.branch_map())
        if isinstance(t, Base):
            return ("base", t.which)
        if isinstance(t, Arrow):
            return ("arrow", t.mult, t.dom, t.cod)
        if isinstance(t, Forall):
            return ("forall", t.kind, t)
        return ("other", t)

    def run(self, t1: Type, t2: Type) -> EquivResult:
        visited: set = set()
        # breadth first, so a short distinguishing run is found before fuel
        # is spent unfolding one branch of a non-regular protocol
        work = collections.deque([(t1, t2)])
        try:
            while work:
                a, b = work.popleft()
                ka, kb = alpha_key(a), alpha_key(b)
                if ka == kb or (ka, kb) in visited:
                    continue
                visited.add((ka, kb))
                self.spend()
                a, b = simplify(a), simplify(b)
                ka, kb = alpha_key(a), alpha_key(b)
                if ka == kb:
                    continue
                visited.add((ka, kb))
                oa, ob = self.observe(a), self.observe(b)
                sub = self.compare(oa, ob)
                if sub is None:
                    return EquivResult(Verdict.NOT_EQUIVALENT, self.used, (a, b))
                work.extend(sub)
        except _OutOfFuel:
            return EquivResult(Verdict.UNKNOWN, self.used)
        return EquivResult(Verdict.EQUIVALENT, self.used)

    def compare(self, oa: tuple, ob: tuple) -> Optional[list]:
        """Sub-obligations for two observations, or None when they differ."""
        if oa[0] != ob[0]:
            return None
        tag = oa[0]
        if tag in ("skip",):
            return []
        if tag in ("end", "base"):
            return [] if oa[1] == ob[1] else None
        if tag == "msg":
            if oa[1] != ob[1]:
                return None
            return [(oa[2], ob[2]), (oa[3], ob[3])]
        if tag in ("var", "ivar"):
            if oa[1] != ob[1]:
                return None
            return [(oa[2], ob[2])]
        if tag == "choice":
            if oa[1] != ob[1] or oa[2] != ob[2]:
                return None
            return [(oa[3][lbl], ob[3][lbl]) for lbl in oa[2]]
        if tag == "arrow":
            if oa[1] != ob[1]:
                return None
            return [(oa[2], ob[2]), (oa[3], ob[3])]
        if tag == "forall":
            fa, fb = oa[2], ob[2]
            if fa.kind != fb.kind:
                return None
            g = TypeVar(f"%eq{next(self.fresh)}")
            return [(subst_tvar(fa.body, fa.var, g), subst_tvar(fb.body, fb.var, g))]
        # stuck shapes are only related to alpha-equal ones, handled earlier
        return None


def type_equiv(t1: Type, t2: Type, fuel: int = DEFAULT_FUEL) -> EquivResult:
    """Decide ``t1 ≡ t2`` with at most ``fuel`` units of work."""
    checker = _Checker(fuel)
    try:
        return checker.run(t1, t2)
    except RecursionError:
        # types nested deeper than the interpreter stack; treat like fuel
        return EquivResult(Verdict.UNKNOWN, checker.used)
