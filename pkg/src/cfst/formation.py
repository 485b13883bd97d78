"""Type formation: kinding against a kind context and contractiveness."""

from __future__ import annotations

from typing import Mapping

from .types import (
    FUNCTIONAL, KIND_S, KIND_SU, KIND_T, LIN, SESSION, UN, Arrow, Base, Choice,
    End, Forall, InstVar, Kind, Message, Rec, Seq, Skip, Type, TypeVar,
)


class FormationError(Exception):
    code = "E009"


class UnboundTypeVar(FormationError):
    def __init__(self, name: str):
        super().__init__(f"unbound type variable {name}")
        self.name = name


class KindMismatch(FormationError):
    def __init__(self, t: Type, found: Kind, expected: str):
        super().__init__(f"type {t} has kind {found}, expected a {expected} kind")
        self.type = t
        self.found = found


class NotContractive(FormationError):
    def __init__(self, t: Type):
        super().__init__(f"recursive type {t} is not contractive")
        self.type = t


KindCtx = Mapping[str, Kind]


def check_well_formed(delta: KindCtx, t: Type) -> Kind:
    """Kind of ``t`` under ``delta``; raises a :class:`FormationError` otherwise."""
    if isinstance(t, Skip):
        return KIND_SU
    if isinstance(t, End):
        return KIND_S
    if isinstance(t, Message):
        check_well_formed(delta, t.payload)
        return KIND_S
    if isinstance(t, Choice):
        for _, b in t.branches:
            _expect_session(delta, b)
        return KIND_S
    if isinstance(t, Seq):
        k1 = _expect_session(delta, t.lhs)
        k2 = _expect_session(delta, t.rhs)
        return Kind(SESSION, LIN if LIN in (k1.mult, k2.mult) else UN)
    if isinstance(t, Rec):
        if not t.kind.is_session:
            raise KindMismatch(t, t.kind, "session")
        inner = dict(delta)
        inner[t.var] = t.kind
        k = _expect_session(inner, t.body)
        if not k <= t.kind:
            raise KindMismatch(t.body, k, str(t.kind))
        if not contractive(t):
            raise NotContractive(t)
        return t.kind
    if isinstance(t, TypeVar):
        if t.name not in delta:
            raise UnboundTypeVar(t.name)
        return delta[t.name]
    if isinstance(t, Arrow):
        check_well_formed(delta, t.dom)
        check_well_formed(delta, t.cod)
        return Kind(FUNCTIONAL, t.mult)
    if isinstance(t, Forall):
        inner = dict(delta)
        inner[t.var] = t.kind
        k = check_well_formed(inner, t.body)
        return Kind(FUNCTIONAL, k.mult)
    if isinstance(t, Base):
        return KIND_T
    if isinstance(t, InstVar):
        raise FormationError(f"instantiation variable {t.name} in a source type")
    raise TypeError(f"not a type: {t!r}")


def _expect_session(delta, t) -> Kind:
    k = check_well_formed(delta, t)
    if not k.is_session:
        raise KindMismatch(t, k, "session")
    return k


# Guardedness of a recursion variable along the leading Seq spine.
_GUARDED, _EMPTY, _UNGUARDED = "guarded", "empty", "unguarded"


def _guard(t: Type, name: str) -> str:
    if isinstance(t, Skip):
        return _EMPTY
    if isinstance(t, TypeVar):
        return _UNGUARDED if t.name == name else _GUARDED
    if isinstance(t, Seq):
        left = _guard(t.lhs, name)
        return _guard(t.rhs, name) if left == _EMPTY else left
    if isinstance(t, Rec):
        if t.var == name:
            return _GUARDED
        return _guard(t.body, name)
    return _GUARDED


def contractive(t: Rec) -> bool:
    """Whether unfolding ``t`` exposes a proper constructor; Skip does not count."""
    return _guard(t.body, t.var) != _UNGUARDED


def is_lin(delta: KindCtx, t: Type) -> bool:
    """Multiplicity of values of type ``t``; unknown shapes default to linear."""
    if isinstance(t, (Base, Skip)):
        return False
    if isinstance(t, Arrow):
        return t.mult == LIN
    if isinstance(t, Forall):
        inner = dict(delta)
        inner[t.var] = t.kind
        return is_lin(inner, t.body)
    if isinstance(t, TypeVar):
        k = delta.get(t.name)
        return k is None or k.mult == LIN
    if isinstance(t, Seq):
        return is_lin(delta, t.lhs) or is_lin(delta, t.rhs)
    if isinstance(t, Rec):
        return t.kind.mult == LIN
    return True
