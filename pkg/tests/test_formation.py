import pytest
from hypothesis import given

from cfst.formation import (
    KindMismatch, NotContractive, UnboundTypeVar, check_well_formed, contractive, is_lin,
)
from cfst.syntax import parse_type
from cfst.types import KIND_S, KIND_SU, KIND_T, KIND_TL, InstVar, Seq, Skip, Arrow, INT

from strategies import functional_types, session_types

T = parse_type


def test_skip_loop_is_not_contractive():
    with pytest.raises(NotContractive):
        check_well_formed({}, T("rec a:S . Skip ; a"))


def test_guarded_loop_is_session():
    assert check_well_formed({}, T("rec a:S . !Int ; a")) == KIND_S


def test_seq_over_functional_type():
    with pytest.raises(KindMismatch):
        check_well_formed({}, Seq(Skip(), Arrow("un", INT, INT)))


def test_unbound_variable():
    with pytest.raises(UnboundTypeVar):
        check_well_formed({}, T("!Int ; a"))


def test_instantiation_variables_are_not_source_types():
    with pytest.raises(Exception):
        check_well_formed({}, InstVar("X"))


@pytest.mark.parametrize("src, kind", [
    ("Skip", KIND_SU),
    ("Close", KIND_S),
    ("!Int ; Close", KIND_S),
    ("+{l: Skip, r: Close}", KIND_S),
    ("Int", KIND_T),
    ("Int -> Int", KIND_T),
    ("Close -o Unit", KIND_TL),
    ("forall a:S . a -> a", KIND_T),
])
def test_kinds(src, kind):
    assert check_well_formed({}, T(src)) == kind


def test_variable_kind_from_context():
    assert check_well_formed({"a": KIND_S}, T("!Int ; a")) == KIND_S
    with pytest.raises(KindMismatch):
        check_well_formed({"a": KIND_T}, T("!Int ; a"))


@pytest.mark.parametrize("src", [
    "rec a:S . a",
    "rec a:S . Skip ; Skip ; a",
    "rec a:S . rec b:S . a",
    "rec a:S . (rec b:S . Skip) ; a",
])
def test_unguarded(src):
    assert not contractive(T(src))


@pytest.mark.parametrize("src", [
    "rec a:S . +{l: a, r: Skip}",
    "rec a:S . (Skip ; !Int) ; a",
    "rec a:S . (rec b:S . !Int ; b) ; a",
    "rec a:S . Close ; a",
])
def test_guarded(src):
    assert contractive(T(src))


def test_linearity():
    assert is_lin({}, T("!Int ; Close"))
    assert is_lin({}, T("Close -o Unit"))
    assert not is_lin({}, T("Skip"))
    assert not is_lin({}, T("Int -> Close"))


@given(session_types())
def test_generated_sessions_are_session_kinded(t):
    assert check_well_formed({}, t).is_session


@given(functional_types())
def test_generated_types_are_well_formed(t):
    check_well_formed({}, t)
