from hypothesis import assume, given, settings
from hypothesis import strategies as st

from cfst.equivalence import Verdict, simplify, terminates, type_equiv
from cfst.reduction import reduce_step
from cfst.syntax import parse_type
from cfst.types import SKIP, Choice, End, Message, Rec, Seq, Skip, apply_subst, subst_tvar

from strategies import ground_prefixes, session_types, well_formed_types


def T(src):
    return parse_type(src, allow_instvars=True)


EQ, NEQ, UNKNOWN = Verdict.EQUIVALENT, Verdict.NOT_EQUIVALENT, Verdict.UNKNOWN


def verdict(a, b, fuel=10_000):
    return type_equiv(T(a) if isinstance(a, str) else a, T(b) if isinstance(b, str) else b, fuel).verdict


# -- an independent oracle: bounded traces of the labelled transition system

def traces(t, depth):
    """Action sequences of length <= depth; complete runs end in "done"."""
    out = set()

    def go(stack, acc):
        while stack:
            top, rest = stack[0], stack[1:]
            if isinstance(top, Skip):
                stack = rest
            elif isinstance(top, Seq):
                stack = (top.lhs, top.rhs) + rest
            elif isinstance(top, Rec):
                stack = (subst_tvar(top.body, top.var, top),) + rest
            else:
                break
        if not stack:
            out.add(acc + ("done",))
            return
        if len(acc) >= depth:
            out.add(acc)
            return
        top, rest = stack[0], stack[1:]
        if isinstance(top, Message):
            go(rest, acc + (top.pol + str(top.payload),))
        elif isinstance(top, End):
            out.add(acc + (top.which,))
        elif isinstance(top, Choice):
            for lbl, b in top.branches:
                go((b,) + rest, acc + (top.view + lbl,))
        else:
            out.add(acc + (f"atom {top}",))

    go((t,), ())
    return frozenset(out)


class TestExamples:
    def test_unfolding_pair(self):
        t = "rec a:S . (!Int ; ?Bool) ; a"
        assert verdict(t, f"!Int ; ?Bool ; {t}", 1000) is EQ

    def test_skip_neutral(self):
        assert verdict("Skip ; Close", "Close", 10) is EQ

    def test_polarity_clash(self):
        assert verdict("!Int ; Close", "?Int ; Close", 10) is NEQ

    def test_visited_redex_result(self):
        s1 = apply_subst({"X": SKIP}, T("rec a:S . (!Int ; a) ; X"))
        assert verdict(s1, "rec b:S . !Int ; b", 1000) is EQ

    def test_associativity(self):
        assert verdict("(!Int ; ?Bool) ; Close", "!Int ; (?Bool ; Close)") is EQ

    def test_distribution(self):
        assert verdict("+{l: !Int, r: Skip} ; Close", "+{l: !Int ; Close, r: Close}") is EQ

    def test_close_absorbs(self):
        assert verdict("Close ; !Int", "Close") is EQ

    def test_unreachable_after_infinite_loop(self):
        loop = "(rec a:S . !Int ; a)"
        assert verdict(f"{loop} ; ?Bool", loop) is EQ

    def test_context_free_pair(self):
        # the same non-regular protocol written two ways
        a = "rec x:S . +{l: Skip, r: !Int ; x ; ?Int}"
        b = "rec y:S . +{l: Skip, r: !Int ; (rec z:S . +{l: Skip, r: !Int ; z ; ?Int}) ; ?Int}"
        assert verdict(a, b) is EQ

    def test_context_free_difference(self):
        a = "rec x:S . +{l: Skip, r: !Int ; x ; ?Int}"
        b = "rec x:S . +{l: Skip, r: !Int ; x ; ?Bool}"
        assert verdict(a, b) is NEQ

    def test_functional(self):
        assert verdict("Int -> Skip ; Close", "Int -> Close") is EQ
        assert verdict("Int -> Int", "Int -o Int") is NEQ
        assert verdict("forall a:T . a -> a", "forall b:T . b -> b") is EQ
        assert verdict("forall a:T . a -> a", "forall b:1T . b -> b") is NEQ

    def test_instantiation_variables_are_opaque(self):
        assert verdict("!Int ; X", "!Int ; Skip ; X") is EQ
        assert verdict("X", "Y") is NEQ
        assert verdict("X", "Skip") is NEQ

    def test_fuel_exhaustion_is_unknown(self):
        a = "rec x:S . +{l: Skip, r: !Int ; x ; ?Int}"
        b = "rec y:S . +{l: Skip, r: !Int ; (rec z:S . +{l: Skip, r: !Int ; z ; ?Int}) ; ?Int}"
        res = type_equiv(T(a), T(b), fuel=1)
        assert res.verdict is UNKNOWN and not res

    def test_result_truthiness(self):
        assert type_equiv(T("Skip"), T("Skip ; Skip"))
        assert not type_equiv(T("Skip"), T("Close"))


class TestHelpers:
    def test_terminates(self):
        assert terminates(T("!Int ; Skip"))
        assert not terminates(T("Close"))
        assert not terminates(T("rec a:S . !Int ; a"))
        assert terminates(T("rec a:S . +{l: Skip, r: !Int ; a}"))

    def test_simplify_drops_unreachable(self):
        assert verdict(simplify(T("Close ; !Int")), "Close") is EQ


@settings(max_examples=300, deadline=None)
@given(well_formed_types)
def test_reflexive(t):
    assert type_equiv(t, t).verdict is EQ


@settings(max_examples=300, deadline=None)
@given(session_types())
def test_reduction_preserves_equivalence(t):
    r = reduce_step(t)
    assume(r is not None)
    assert type_equiv(t, r).verdict is EQ


@settings(max_examples=200, deadline=None)
@given(session_types(), session_types())
def test_symmetric(a, b):
    assert type_equiv(a, b).verdict is type_equiv(b, a).verdict


@settings(max_examples=300, deadline=None)
@given(ground_prefixes(3), ground_prefixes(3))
def test_agrees_with_traces_on_finite_types(a, b):
    expected = EQ if traces(a, 50) == traces(b, 50) else NEQ
    assert type_equiv(a, b).verdict is expected


@settings(max_examples=300, deadline=None)
@given(session_types(), session_types())
def test_equivalent_types_have_the_same_traces(a, b):
    v = type_equiv(a, b).verdict
    if v is EQ:
        assert traces(a, 8) == traces(b, 8)
    if traces(a, 8) != traces(b, 8):
        assert v is NEQ


@settings(max_examples=200, deadline=None)
@given(session_types(), st.sampled_from(["Skip", "Close", "!Int", "?Bool"]))
def test_skip_is_a_unit(t, tail):
    assert type_equiv(Seq(SKIP, t), t).verdict is EQ
    assert type_equiv(Seq(t, SKIP), t).verdict is EQ
    u = T(tail)
    assert type_equiv(Seq(Seq(t, u), u), Seq(t, Seq(u, u))).verdict is EQ
