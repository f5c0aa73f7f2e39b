"""Formula syntax, finite-trace semantics, and the determinization oracle."""

import itertools

import pytest
from hypothesis import given, settings, strategies as st

from procmon.ltlf import (
    And, Atom, Eventually, FALSE, Globally, Iff, Implies, LtlfSyntaxError,
    Next, Not, Or, TRUE, Until, WeakNext,
    all_traces, atoms, dfa_accepts, dfa_equivalent, evaluate, format_dfa,
    minimize_dfa, normalize, parse, pretty, to_dfa, trace,
)


def formulas(atom_names=("a", "b"), max_leaves=8):
    leaf = st.one_of(
        st.sampled_from([Atom(n) for n in atom_names]),
        st.just(TRUE),
        st.just(FALSE),
    )
    unary = [Not, Next, WeakNext, Eventually, Globally]
    binary = [And, Or, Implies, Iff, Until]
    return st.recursive(
        leaf,
        lambda inner: st.one_of(
            st.builds(lambda op, x: op(x), st.sampled_from(unary), inner),
            st.builds(
                lambda op, x, y: op(x, y), st.sampled_from(binary), inner, inner
            ),
        ),
        max_leaves=max_leaves,
    )


class TestParser:
    def test_atom_shapes(self):
        assert parse("robot_at_loc_l1") == Atom("robot_at_loc_l1")
        assert parse("check-grape_g1") == Atom("check-grape_g1")
        with pytest.raises(LtlfSyntaxError):
            parse("Robot")
        with pytest.raises(LtlfSyntaxError):
            parse("-a")

    def test_keywords_not_atoms(self):
        assert parse("X a") == Next(Atom("a"))
        assert parse("WX a") == WeakNext(Atom("a"))
        assert parse("F a") == Eventually(Atom("a"))
        assert parse("G a") == Globally(Atom("a"))
        # identifier starting with a keyword letter is still one atom
        assert parse("grape") == Atom("grape")

    def test_precedence(self):
        assert parse("!a & b") == And(Not(Atom("a")), Atom("b"))
        assert parse("a & b | c") == Or(And(Atom("a"), Atom("b")), Atom("c"))
        assert parse("a | b -> c") == Implies(Or(Atom("a"), Atom("b")), Atom("c"))
        assert parse("a U b & c") == And(Until(Atom("a"), Atom("b")), Atom("c"))
        assert parse("G a -> b") == Implies(Globally(Atom("a")), Atom("b"))
        assert parse("a -> b -> c") == Implies(
            Atom("a"), Implies(Atom("b"), Atom("c"))
        )
        assert parse("a U b U c") == Until(Atom("a"), Until(Atom("b"), Atom("c")))
        assert parse("a & b & c") == And(And(Atom("a"), Atom("b")), Atom("c"))

    def test_error_position(self):
        with pytest.raises(LtlfSyntaxError) as e:
            parse("a & ")
        assert e.value.position == 4
        with pytest.raises(LtlfSyntaxError):
            parse("(a | b")
        with pytest.raises(LtlfSyntaxError):
            parse("a b")
        with pytest.raises(LtlfSyntaxError):
            parse("")

    def test_example_formula(self):
        f = parse("G (b <-> X a)")
        assert f == Globally(Iff(Atom("b"), Next(Atom("a"))))

    @given(formulas())
    @settings(max_examples=300)
    def test_print_parse_round_trip(self, f):
        assert parse(pretty(f)) == normalize(f)

    @given(formulas())
    def test_normalize_keeps_meaning(self, f):
        g = normalize(f)
        for t in all_traces(("a", "b"), 3):
            assert evaluate(f, t) == evaluate(g, t)


class TestSemantics:
    def test_next_false_at_last_instant(self):
        assert not evaluate(parse("X a"), trace({"a"}))
        assert evaluate(parse("X a"), trace(set(), {"a"}))

    def test_weak_next_true_at_last_instant(self):
        assert evaluate(parse("WX a"), trace({"a"}))
        assert evaluate(parse("WX a"), trace(set(), {"a"}))
        assert not evaluate(parse("WX a"), trace(set(), set(), alphabet=("a",)))

    def test_until_needs_the_right_side(self):
        f = parse("a U b")
        ab = ("a", "b")
        assert evaluate(f, trace({"a"}, {"a"}, {"b"}, alphabet=ab))
        assert not evaluate(f, trace({"a"}, {"a"}, {"a"}, alphabet=ab))
        assert evaluate(f, trace({"b"}, alphabet=ab))

    def test_paired_condition_example(self):
        f = parse("G (b <-> X a)")
        assert evaluate(f, trace({"b"}, {"a", "b"}, {"a"}))
        assert not evaluate(f, trace({"b"}, {"b"}, {"a"}))

    def test_trace_rejects_unknown_atoms(self):
        with pytest.raises(ValueError):
            trace({"a"}, alphabet=("b",))
        with pytest.raises(ValueError):
            evaluate(parse("c"), trace({"a"}))

    def test_empty_trace_rejected(self):
        with pytest.raises(ValueError):
            trace()


class TestDeterminization:
    def test_eventually(self):
        d = to_dfa(parse("F a"))
        assert dfa_accepts(d, trace(set(), {"a"}))
        assert dfa_accepts(d, trace({"a"}, set()))
        assert not dfa_accepts(d, trace(set(), set()))

    def test_guarded_listing_mentions_states(self):
        text = format_dfa(to_dfa(parse("F a")))
        assert "initial q0" in text
        assert "-->" in text

    def test_wider_alphabet(self):
        d = to_dfa(parse("F a"), alphabet=("a", "b", "c"))
        assert set(d.alphabet) == {"a", "b", "c"}
        assert dfa_accepts(d, trace({"b"}, {"a", "c"}))

    def test_trace_outside_alphabet_rejected(self):
        d = to_dfa(parse("F a"))
        with pytest.raises(ValueError):
            dfa_accepts(d, trace({"zzz"}))

    def test_minimize_preserves_language(self):
        f = parse("F (a & F b) | F (a & F b)")
        d = to_dfa(f)
        m = minimize_dfa(d)
        assert m.n_states <= d.n_states
        for t in all_traces(("a", "b"), 4):
            assert dfa_accepts(m, t) == dfa_accepts(d, t)

    def test_equivalence_check(self):
        assert dfa_equivalent(to_dfa(parse("F (a & b)")), to_dfa(parse("F (b & a)")))
        assert not dfa_equivalent(to_dfa(parse("F a")), to_dfa(parse("G a")))
        assert dfa_equivalent(
            to_dfa(parse("!(F a)")), to_dfa(parse("G !a"))
        )

    @given(formulas(max_leaves=6))
    @settings(max_examples=60, deadline=None)
    def test_matches_direct_evaluation(self, f):
        d = to_dfa(f, alphabet=("a", "b"))
        for t in all_traces(("a", "b"), 3):
            assert dfa_accepts(d, t) == evaluate(f, t), pretty(f)
