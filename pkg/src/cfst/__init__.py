"""Local type inference for System F with context-free session types."""

from .equivalence import EquivResult, Verdict, type_equiv
from .formation import check_well_formed
from .matching import MatchFail, MatchTrace, match_types
from .reduction import head_normalize, mu_redex, reduce_step
from .syntax import parse_expr, parse_program, parse_type, print_expr, print_program, print_type
from .typer import check_program

__all__ = [
    "EquivResult", "MatchFail", "MatchTrace", "Verdict", "check_program",
    "check_well_formed", "head_normalize", "match_types", "mu_redex",
    "parse_expr", "parse_program", "parse_type", "print_expr", "print_program",
    "print_type", "reduce_step", "type_equiv",
]
