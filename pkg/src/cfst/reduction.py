"""One-step type reduction, mu-redexes and head normalisation."""

from __future__ import annotations

from typing import Iterable, Optional

from .types import Choice, Rec, Seq, Skip, Type, alpha_key, subst_tvar

DEFAULT_FUEL = 10_000


class FuelExhausted(Exception):
    def __init__(self, last: Type, steps: int):
        super().__init__(f"head normalisation ran out of fuel after {steps} steps")
        self.last = last
        self.steps = steps


def unfold(t: Rec) -> Type:
    return subst_tvar(t.body, t.var, t)


def reduce_rule(t: Type) -> Optional[tuple]:
    """``(rule name, contractum)`` for the first applicable rule, or ``None``.

    Rules are tried in the order R-Skip, R-Assoc, R-Distrib, R-Rec, R-Semi.
    """
    if isinstance(t, Seq):
        lhs = t.lhs
        if isinstance(lhs, Skip):
            return "R-Skip", t.rhs
        if isinstance(lhs, Seq):
            return "R-Assoc", Seq(lhs.lhs, Seq(lhs.rhs, t.rhs))
        if isinstance(lhs, Choice):
            return "R-Distrib", Choice(lhs.view, tuple(
                (lbl, Seq(b, t.rhs)) for lbl, b in lhs.branches))
        inner = reduce_rule(lhs)
        if inner is None:
            return None
        return "R-Semi", Seq(inner[1], t.rhs)
    if isinstance(t, Rec):
        return "R-Rec", unfold(t)
    return None


def reduce_step(t: Type) -> Optional[Type]:
    r = reduce_rule(t)
    return None if r is None else r[1]


def mu_redex(t: Type) -> frozenset:
    """The recursive type exposed at the head of ``t``, as a set of size 0 or 1."""
    if isinstance(t, Rec):
        return frozenset((t,))
    if isinstance(t, Seq) and isinstance(t.lhs, Rec):
        return frozenset((t.lhs,))
    return frozenset()


def head_normalize(t: Type, fuel: int = DEFAULT_FUEL, trace: Optional[list] = None):
    """Reduce until no rule applies or ``fuel`` steps were taken.

    Returns ``(form, exhausted)``; ``exhausted`` is True when fuel ran out
    before a normal form was reached.  Rule names are appended to ``trace``.
    """
    steps = 0
    while True:
        r = reduce_rule(t)
        if r is None:
            return t, False
        if steps >= fuel:
            return t, True
        rule, t = r
        steps += 1
        if trace is not None:
            trace.append(rule)


def head_normalize_strict(t: Type, fuel: int = DEFAULT_FUEL) -> Type:
    form, exhausted = head_normalize(t, fuel)
    if exhausted:
        raise FuelExhausted(form, fuel)
    return form


class RedexSet:
    """Set of visited mu-redexes with membership up to alpha-equivalence."""

    def __init__(self, items: Iterable[Type] = ()):
        self._keys: dict = {}
        for t in items:
            self._keys.setdefault(alpha_key(t), t)

    def __contains__(self, t: Type) -> bool:
        return alpha_key(t) in self._keys

    def __iter__(self):
        return iter(self._keys.values())

    def __len__(self) -> int:
        return len(self._keys)

    def union(self, ts: Iterable[Type]) -> "RedexSet":
        out = RedexSet(self)
        for t in ts:
            out._keys.setdefault(alpha_key(t), t)
        return out

    def issuperset(self, ts: Iterable[Type]) -> bool:
        return all(t in self for t in ts)

    def isdisjoint(self, ts: Iterable[Type]) -> bool:
        return not any(t in self for t in ts)

    def __repr__(self) -> str:
        return f"RedexSet({list(self)!r})"
