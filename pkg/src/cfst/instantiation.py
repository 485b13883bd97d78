"""Base instantiation of a head type along an argument list, and quick look."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import Ambiguous, IllFormed, LinearityViolation, TooManyArguments, TypeArgumentMismatch, TypeCheckError
from .formation import FormationError, check_well_formed
from .matching import MatchFail
from .reduction import RedexSet
from .types import (
    UN, App, Arrow, Kind, Forall, InstVar, MatchConflict, Type, TypeArg, Var, Abs,
    apply_subst, compose_subst, fiv, subst_tvar,
)


@dataclass
class InstResult:
    arg_types: list      # one per value argument
    result_type: Type
    theta: dict          # accumulated substitution
    # (index into the argument list, instantiation variable) per I-All
    sites: list = field(default_factory=list)
    rules: list = field(default_factory=list)


def instantiate(typer, delta, gamma, t: Type, args) -> InstResult:
    """Peel binders and arrows off ``t`` guided by ``args``.

    ``typer`` supplies fresh names, the matcher configuration and quick look.
    """
    theta: dict = {}
    arg_types: list = []
    sites: list = []
    rules: list = []
    i = 0
    while i < len(args):
        arg = args[i]
        if isinstance(t, Forall):
            if isinstance(arg, TypeArg):
                if not fiv(arg.type):
                    check_type_arg(delta, t.var, t.kind, arg.type)
                t = subst_tvar(t.body, t.var, arg.type)
                rules.append("I-TArg")
                i += 1
            else:
                if not typer.infer:
                    raise Ambiguous(f"missing type argument for {t.var} (inference disabled)")
                x = typer.supply.fresh_instvar()
                sites.append((i, x))
                typer.site_kinds[x.name] = (t.var, t.kind, delta)
                t = subst_tvar(t.body, t.var, x)
                rules.append("I-All")
        elif isinstance(t, Arrow):
            if isinstance(arg, TypeArg):
                raise TypeArgumentMismatch(f"type argument @{arg.type} given to non-polymorphic type {t}")
            th = quick_look(typer, delta, gamma, arg, t.dom)
            theta = compose_subst(theta, th)
            arg_types = [apply_subst(th, u) for u in arg_types]
            arg_types.append(apply_subst(th, t.dom))
            t = apply_subst(th, t.cod)
            rules.append("I-Arg")
            i += 1
        elif isinstance(t, InstVar):
            if isinstance(arg, TypeArg):
                raise TypeArgumentMismatch(f"type argument @{arg.type} given to unknown type {t}")
            if not typer.infer:
                raise Ambiguous(f"unknown function type {t} (inference disabled)")
            fn = Arrow(UN, typer.supply.fresh_instvar(), typer.supply.fresh_instvar())
            th = {t.name: fn}
            theta = compose_subst(theta, th)
            arg_types = [apply_subst(th, u) for u in arg_types]
            t = fn
            rules.append("I-Var")
        else:
            extra = len(args) - i
            raise TooManyArguments(f"type {t} cannot be applied to {extra} more argument(s)")
    arg_types = [apply_subst(theta, u) for u in arg_types]
    return InstResult(arg_types, t, theta, sites, rules)


def check_type_arg(delta, var: str, kind, u: Type, loc=None):
    """``u`` must be well formed and fit the bound of ``var``.

    A lin type for an un bound is reported as a linearity violation, since
    it would let a linear value be duplicated or dropped.
    """
    try:
        k = check_well_formed(delta, u)
    except FormationError as exc:
        raise IllFormed(str(exc), loc) from None
    if k <= kind:
        return
    if Kind(k.proper, kind.mult) <= kind:
        raise LinearityViolation(
            f"linear type {u} instantiates unrestricted type variable {var}:{kind}", var, loc)
    raise IllFormed(f"type argument {u} has kind {k}, not within {var}:{kind}", loc)


def cheap_head(e) -> bool:
    """QL-App applies to variables and annotated abstractions in head position."""
    if not isinstance(e, App):
        return False
    h = e.head
    return isinstance(h, Var) or (isinstance(h, Abs) and h.annot is not None)


def quick_look(typer, delta, gamma, e, expected: Type) -> dict:
    """Speculative evidence for the instantiation variables of ``expected``.

    Never fails and never changes ``gamma`` or the typer's solution store:
    any error collapses to the empty substitution.
    """
    if not typer.quick_look or not fiv(expected):
        return {}
    wanted = fiv(expected)
    with typer.speculation():
        try:
            if cheap_head(e):
                head_t = typer.peek_head(delta, gamma, e.head)
                inst = instantiate(typer, delta, gamma, head_t, e.args)
                found = inst.result_type
            else:
                found = typer.synth(delta, gamma, e)[0]
            theta, _ = typer.match(RedexSet(), expected, found)
        except (TypeCheckError, MatchFail, MatchConflict, FormationError, RecursionError):
            return {}
    # drop bindings that mention variables invented during speculation
    return {x: t for x, t in theta.items() if x in wanted and fiv(t) <= wanted}
