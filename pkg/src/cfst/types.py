"""Abstract syntax of types and expressions, substitutions and name supply."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Union


# --------------------------------------------------------------------------
# Kinds

SESSION = "session"
FUNCTIONAL = "functional"
LIN = "lin"
UN = "un"


@dataclass(frozen=True)
class Kind:
    proper: str = SESSION
    mult: str = LIN

    def __post_init__(self):
        if self.proper not in (SESSION, FUNCTIONAL):
            raise ValueError(f"bad proper kind {self.proper!r}")
        if self.mult not in (LIN, UN):
            raise ValueError(f"bad multiplicity {self.mult!r}")

    def __le__(self, other: Kind) -> bool:
        # session <= functional, un <= lin
        proper_ok = self.proper == other.proper or (
            self.proper == SESSION and other.proper == FUNCTIONAL)
        mult_ok = self.mult == other.mult or (self.mult == UN and other.mult == LIN)
        return proper_ok and mult_ok

    @property
    def is_session(self) -> bool:
        return self.proper == SESSION

    def __str__(self) -> str:
        if self == KIND_S:
            return "S"
        if self == KIND_T:
            return "T"
        prefix = "1" if self.mult == LIN else "*"
        return prefix + ("S" if self.proper == SESSION else "T")


KIND_S = Kind(SESSION, LIN)
KIND_SU = Kind(SESSION, UN)
KIND_T = Kind(FUNCTIONAL, UN)
KIND_TL = Kind(FUNCTIONAL, LIN)
ALL_KINDS = (KIND_S, KIND_SU, KIND_T, KIND_TL)

OUT = "!"
IN = "?"
INTERNAL = "+"
EXTERNAL = "&"
CLOSE = "Close"
WAIT = "Wait"
BASES = ("Int", "Bool", "Unit", "String")


# --------------------------------------------------------------------------
# Types


class Type:
    """Base class of type syntax; all nodes are immutable."""

    __slots__ = ()

    def __str__(self) -> str:
        from .syntax import print_type
        return print_type(self)


@dataclass(frozen=True)
class Skip(Type):
    pass


@dataclass(frozen=True)
class End(Type):
    which: str = CLOSE

    def __post_init__(self):
        if self.which not in (CLOSE, WAIT):
            raise ValueError(self.which)


@dataclass(frozen=True)
class Message(Type):
    pol: str
    payload: Type

    def __post_init__(self):
        if self.pol not in (OUT, IN):
            raise ValueError(self.pol)


@dataclass(frozen=True)
class Choice(Type):
    view: str
    branches: tuple  # of (label, Type), sorted by label

    def __post_init__(self):
        if self.view not in (INTERNAL, EXTERNAL):
            raise ValueError(self.view)
        labels = [lbl for lbl, _ in self.branches]
        if not labels:
            raise ValueError("choice with no branches")
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate labels in choice: {labels}")
        object.__setattr__(self, "branches", tuple(sorted(self.branches)))

    @property
    def labels(self) -> tuple:
        return tuple(lbl for lbl, _ in self.branches)

    def branch_map(self) -> dict:
        return dict(self.branches)


@dataclass(frozen=True)
class Seq(Type):
    lhs: Type
    rhs: Type


@dataclass(frozen=True)
class Rec(Type):
    var: str
    kind: Kind
    body: Type


@dataclass(frozen=True)
class TypeVar(Type):
    name: str


@dataclass(frozen=True)
class InstVar(Type):
    name: str


@dataclass(frozen=True)
class Arrow(Type):
    mult: str
    dom: Type
    cod: Type

    def __post_init__(self):
        if self.mult not in (LIN, UN):
            raise ValueError(self.mult)


@dataclass(frozen=True)
class Forall(Type):
    var: str
    kind: Kind
    body: Type


@dataclass(frozen=True)
class Base(Type):
    which: str

    def __post_init__(self):
        if self.which not in BASES:
            raise ValueError(self.which)


SKIP = Skip()
INT = Base("Int")
BOOL = Base("Bool")
UNIT = Base("Unit")
STRING = Base("String")


def choice(view: str, branches: Mapping[str, Type] | Iterable) -> Choice:
    items = branches.items() if isinstance(branches, Mapping) else branches
    return Choice(view, tuple(items))


def seq(*parts: Type) -> Type:
    """Right-nested sequential composition of ``parts``."""
    if not parts:
        return SKIP
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = Seq(p, out)
    return out


# --------------------------------------------------------------------------
# Expressions

Loc = Optional[tuple]  # (line, col)


@dataclass(frozen=True)
class Var:
    """Term variable; only ever used as an application head."""
    name: str
    loc: Loc = field(default=None, compare=False)


@dataclass(frozen=True)
class Abs:
    param: str
    annot: Optional[Type]
    body: "Expr"
    loc: Loc = field(default=None, compare=False)


@dataclass(frozen=True)
class TAbs:
    var: str
    kind: Kind
    body: "Expr"
    loc: Loc = field(default=None, compare=False)


@dataclass(frozen=True)
class App:
    head: "Head"
    args: tuple  # of Arg
    loc: Loc = field(default=None, compare=False)


@dataclass(frozen=True)
class Lit:
    value: object
    base: str
    loc: Loc = field(default=None, compare=False)


@dataclass(frozen=True)
class TypeArg:
    """A type in argument position (written ``@T``)."""
    type: Type


Expr = Union[Abs, TAbs, App, Lit]
Head = Union[Var, Abs, TAbs]
Arg = Union[Abs, TAbs, App, Lit, TypeArg]


def var(name: str, loc: Loc = None) -> App:
    return App(Var(name, loc), (), loc)


def value_args(args: Iterable) -> list:
    return [a for a in args if not isinstance(a, TypeArg)]


def lit_type(lit: Lit) -> Type:
    return Base(lit.base)


# --------------------------------------------------------------------------
# Free variables


def free_tvars(t: Type) -> frozenset:
    if isinstance(t, TypeVar):
        return frozenset((t.name,))
    if isinstance(t, (Rec, Forall)):
        return free_tvars(t.body) - {t.var}
    if isinstance(t, Message):
        return free_tvars(t.payload)
    if isinstance(t, Seq):
        return free_tvars(t.lhs) | free_tvars(t.rhs)
    if isinstance(t, Arrow):
        return free_tvars(t.dom) | free_tvars(t.cod)
    if isinstance(t, Choice):
        return frozenset().union(*(free_tvars(b) for _, b in t.branches))
    return frozenset()


def fiv(*ts: Type) -> frozenset:
    """Free instantiation variables of the given types."""
    out: set = set()
    stack = list(ts)
    while stack:
        t = stack.pop()
        if isinstance(t, InstVar):
            out.add(t.name)
        elif isinstance(t, Message):
            stack.append(t.payload)
        elif isinstance(t, Seq):
            stack += (t.lhs, t.rhs)
        elif isinstance(t, Arrow):
            stack += (t.dom, t.cod)
        elif isinstance(t, (Rec, Forall)):
            stack.append(t.body)
        elif isinstance(t, Choice):
            stack += [b for _, b in t.branches]
    return frozenset(out)


def _avoiding(name: str, taken: Iterable[str]) -> str:
    taken = set(taken)
    cand = name + "'"
    while cand in taken:
        cand += "'"
    return cand


# --------------------------------------------------------------------------
# Substitution of type variables


def subst_tvar(t: Type, name: str, repl: Type) -> Type:
    """Capture-avoiding ``[repl/name] t``."""
    return _subst(t, name, repl, free_tvars(repl))


def _subst(t: Type, name: str, repl: Type, repl_free: frozenset) -> Type:
    if isinstance(t, TypeVar):
        return repl if t.name == name else t
    if isinstance(t, (Rec, Forall)):
        if t.var == name:
            return t
        body_free = free_tvars(t.body)
        if name not in body_free:
            return t
        v, body = t.var, t.body
        if v in repl_free:
            v = _avoiding(v, repl_free | body_free | {name})
            body = _subst(body, t.var, TypeVar(v), frozenset((v,)))
        return type(t)(v, t.kind, _subst(body, name, repl, repl_free))
    if isinstance(t, Message):
        return Message(t.pol, _subst(t.payload, name, repl, repl_free))
    if isinstance(t, Seq):
        return Seq(_subst(t.lhs, name, repl, repl_free),
                   _subst(t.rhs, name, repl, repl_free))
    if isinstance(t, Arrow):
        return Arrow(t.mult, _subst(t.dom, name, repl, repl_free),
                     _subst(t.cod, name, repl, repl_free))
    if isinstance(t, Choice):
        return Choice(t.view, tuple((lbl, _subst(b, name, repl, repl_free))
                                    for lbl, b in t.branches))
    return t


def rename_binder(t: Rec | Forall, new: str) -> Type:
    """Body of a binder with its bound variable renamed to ``new``."""
    return subst_tvar(t.body, t.var, TypeVar(new))


# --------------------------------------------------------------------------
# Substitutions on instantiation variables
#
# A substitution is a plain ``dict`` from instantiation-variable names to
# types.  Identity bindings are never stored.


class MatchConflict(Exception):
    """Two substitutions disagree on the image of a variable."""

    def __init__(self, name: str, left: Type, right: Type):
        super().__init__(f"conflicting instantiations for {name}: {left} and {right}")
        self.name = name
        self.left = left
        self.right = right


def make_subst(bindings: Mapping[str, Type]) -> dict:
    return {k: v for k, v in bindings.items()
            if not (isinstance(v, InstVar) and v.name == k)}


def apply_subst(theta: Mapping[str, Type], t: Type) -> Type:
    """Replace every bound instantiation variable in one simultaneous pass."""
    if not theta:
        return t
    return _apply(theta, t)


def _apply(theta, t):
    if isinstance(t, InstVar):
        return theta.get(t.name, t)
    if isinstance(t, Message):
        return Message(t.pol, _apply(theta, t.payload))
    if isinstance(t, Seq):
        return Seq(_apply(theta, t.lhs), _apply(theta, t.rhs))
    if isinstance(t, Arrow):
        return Arrow(t.mult, _apply(theta, t.dom), _apply(theta, t.cod))
    if isinstance(t, Choice):
        return Choice(t.view, tuple((lbl, _apply(theta, b)) for lbl, b in t.branches))
    if isinstance(t, (Rec, Forall)):
        inner = fiv(t.body)
        if not inner & theta.keys():
            return t
        range_free = frozenset().union(
            *(free_tvars(theta[x]) for x in inner if x in theta))
        v, body = t.var, t.body
        if v in range_free:
            v = _avoiding(v, range_free | free_tvars(body))
            body = subst_tvar(body, t.var, TypeVar(v))
        return type(t)(v, t.kind, _apply(theta, body))
    return t


def compose_subst(theta1: Mapping[str, Type], theta2: Mapping[str, Type]) -> dict:
    """``theta1`` then ``theta2``: apply(result, t) == apply(theta2, apply(theta1, t)).

    Raises :class:`MatchConflict` when both bind a variable to images that are
    not alpha-equal.
    """
    out = {}
    for x, t in theta1.items():
        out[x] = apply_subst(theta2, t)
    for y, t in theta2.items():
        if y in out:
            if not alpha_eq(out[y], t):
                raise MatchConflict(y, out[y], t)
            continue
        out[y] = t
    return make_subst(out)


def subst_str(theta: Mapping[str, Type]) -> str:
    inner = ", ".join(f"{k} ↦ {v}" for k, v in sorted(theta.items()))
    return "{" + inner + "}"


# --------------------------------------------------------------------------
# Alpha equivalence


def alpha_key(t: Type, env: tuple = ()) -> tuple:
    """Hashable key identifying ``t`` up to renaming of bound variables."""
    if isinstance(t, TypeVar):
        for i, v in enumerate(reversed(env)):
            if v == t.name:
                return ("bv", i)
        return ("tv", t.name)
    if isinstance(t, InstVar):
        return ("iv", t.name)
    if isinstance(t, Skip):
        return ("skip",)
    if isinstance(t, End):
        return ("end", t.which)
    if isinstance(t, Base):
        return ("base", t.which)
    if isinstance(t, Message):
        return ("msg", t.pol, alpha_key(t.payload, env))
    if isinstance(t, Seq):
        return ("seq", alpha_key(t.lhs, env), alpha_key(t.rhs, env))
    if isinstance(t, Arrow):
        return ("arrow", t.mult, alpha_key(t.dom, env), alpha_key(t.cod, env))
    if isinstance(t, Choice):
        return ("choice", t.view,
                tuple((lbl, alpha_key(b, env)) for lbl, b in t.branches))
    if isinstance(t, Rec):
        return ("rec", t.kind, alpha_key(t.body, env + (t.var,)))
    if isinstance(t, Forall):
        return ("forall", t.kind, alpha_key(t.body, env + (t.var,)))
    raise TypeError(f"not a type: {t!r}")


def alpha_eq(t1: Type, t2: Type) -> bool:
    return t1 == t2 or alpha_key(t1) == alpha_key(t2)


# --------------------------------------------------------------------------
# Fresh names


class NameSupply:
    """Issues ``%``-prefixed names, which the parser never accepts from source."""

    def __init__(self):
        self._tvars = itertools.count()
        self._ivars = itertools.count()

    def fresh_tvar(self) -> str:
        return f"%γ{next(self._tvars)}"

    def fresh_ivar(self) -> str:
        return f"%X{next(self._ivars)}"

    def fresh_instvar(self) -> InstVar:
        return InstVar(self.fresh_ivar())
