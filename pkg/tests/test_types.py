import pytest
from hypothesis import given

from cfst.syntax import parse_program, parse_type
from cfst.types import (
    KIND_S, SKIP, Forall, InstVar, MatchConflict, Message, NameSupply, Rec, Seq, Skip,
    TypeVar, alpha_eq, apply_subst, compose_subst, fiv, free_tvars, make_subst,
    subst_str, subst_tvar, INT, BOOL,
)

from strategies import well_formed_types


def T(src):
    return parse_type(src, allow_instvars=True)


S1 = T("rec a:S . (!Int ; a) ; X")
S2 = T("rec b:S . !Int ; b")


class TestSubstTvar:
    def test_direct_hit(self):
        assert subst_tvar(TypeVar("a"), "a", SKIP) == SKIP

    def test_shadowed_binder(self):
        t = T("rec a:S . !Int ; a")
        assert subst_tvar(t, "a", T("?Bool")) == t

    def test_one_unfolding_of_s1(self):
        assert subst_tvar(S1.body, "a", S1) == Seq(Seq(Message("!", INT), S1), InstVar("X"))

    def test_capture_avoiding(self):
        # substituting a free b under a binder named b renames the binder
        out = subst_tvar(T("forall b:T . a -> b"), "a", TypeVar("b"))
        assert isinstance(out, Forall) and out.var != "b"
        assert alpha_eq(out, T("forall c:T . b -> c"))


class TestApplySubst:
    def test_single_binding(self):
        assert apply_subst({"X": SKIP}, T("!Int ; X")) == T("!Int ; Skip")

    def test_identity(self):
        assert apply_subst({}, S1) == S1

    def test_s1_result(self):
        assert apply_subst({"X": SKIP}, S1) == T("rec a:S . (!Int ; a) ; Skip")

    def test_simultaneous(self):
        # images are not re-substituted
        assert apply_subst({"X": InstVar("Y"), "Y": INT}, T("X -> Y")) == T("Y -> Int")


class TestCompose:
    def test_disjoint(self):
        assert compose_subst({"X": T("?Bool")}, {"Y": SKIP}) == {"X": T("?Bool"), "Y": SKIP}

    def test_left_identity(self):
        theta = {"X": INT}
        assert compose_subst({}, theta) == theta

    def test_chained(self):
        composed = compose_subst({"X": InstVar("Y")}, {"Y": SKIP})
        assert composed == {"X": SKIP, "Y": SKIP}
        t = T("X ; Y")
        assert apply_subst(composed, t) == apply_subst({"Y": SKIP}, apply_subst({"X": InstVar("Y")}, t))

    def test_conflict(self):
        with pytest.raises(MatchConflict):
            compose_subst({"X": INT}, {"X": BOOL})

    def test_agreeing_overlap(self):
        assert compose_subst({"X": S2}, {"X": T("rec c:S . !Int ; c")}) == {"X": S2}

    def test_make_subst_drops_identity(self):
        assert make_subst({"X": InstVar("X"), "Y": INT}) == {"Y": INT}

    def test_rendering(self):
        assert subst_str({"X": SKIP}) == "{X ↦ Skip}"
        assert subst_str({}) == "{}"


class TestFiv:
    def test_none(self):
        assert fiv(T("!Int ; Close")) == frozenset()

    def test_s1(self):
        assert fiv(S1) == {"X"}

    def test_arrow(self):
        assert fiv(T("X -> Y")) == {"X", "Y"}


class TestAlpha:
    def test_rec_renaming(self):
        assert alpha_eq(T("rec a:S . !Int ; a"), T("rec b:S . !Int ; b"))

    def test_syntactic(self):
        assert not alpha_eq(Skip(), Seq(Skip(), Skip()))

    def test_forall_renaming(self):
        assert alpha_eq(T("forall a:T . a -> a"), T("forall b:T . b -> b"))

    def test_kind_matters(self):
        assert not alpha_eq(T("forall a:T . a -> a"), T("forall a:1T . a -> a"))

    def test_free_vs_bound(self):
        assert not alpha_eq(Rec("a", KIND_S, Seq(Message("!", INT), TypeVar("b"))),
                            Rec("b", KIND_S, Seq(Message("!", INT), TypeVar("b"))))

    @given(well_formed_types)
    def test_reflexive_and_closed(self, t):
        assert alpha_eq(t, t)
        assert free_tvars(t) == frozenset()


class TestNameSupply:
    def test_counter_start(self):
        assert NameSupply().fresh_tvar() == "%γ0"

    def test_distinct(self):
        s = NameSupply()
        assert [s.fresh_tvar(), s.fresh_tvar()] == ["%γ0", "%γ1"]
        assert [s.fresh_ivar(), s.fresh_ivar()] == ["%X0", "%X1"]

    def test_never_collides_with_source_names(self):
        parse_program("gamma : Int\ngamma = 1\n")
        s = NameSupply()
        names = {s.fresh_tvar() for _ in range(50)} | {s.fresh_ivar() for _ in range(50)}
        assert "gamma" not in names
        assert all(n.startswith("%") for n in names)
