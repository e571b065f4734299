import io

import pytest

from notcontains.automata import FlatPattern
from notcontains.constraints import Instance, Lit, Var, make_term, parse_instance
from notcontains.errors import InputError
from notcontains.flatsolver import (
    FlatInstance,
    emit_smtlib,
    length_abstraction,
    min_word_of_length,
    pattern_length_set,
    solve_flat,
)
from notcontains.words import Alphabet, is_factor

from _helpers import AB, ABC, w


def flat(alphabet, needle, haystack, **patterns):
    return FlatInstance(alphabet, make_term(needle), make_term(haystack), patterns)


def pat(literals, loops):
    return FlatPattern(tuple(literals), tuple(loops))


class TestPatternLengths:
    def test_single_loop(self):
        ls = pattern_length_set([pat(["", ""], [w("ab", AB)])])
        assert all(ls.contains(2 * k) for k in range(12))
        assert not any(ls.contains(2 * k + 1) for k in range(12))

    def test_literal_only(self):
        ls = pattern_length_set([pat([w("abc")], [])])
        assert ls.is_finite() and set(ls.finite) == {3}

    def test_two_loops(self):
        target = pat(["", "", ""], [w("aa", AB), w("aaa", AB)])
        ls = pattern_length_set([target])
        achievable = {2 * i + 3 * j for i in range(30) for j in range(30) if 2 * i + 3 * j <= 40}
        for n in range(41):
            assert ls.contains(n) == (n in achievable)

    def test_min_word(self):
        patterns = [pat([w("b", AB), ""], [w("ab", AB)]), pat(["", ""], [w("ba", AB)])]
        # length 3: candidates "bab" (first) and none from second (even lengths)
        assert min_word_of_length(patterns, 3) == w("bab", AB)
        # length 2: "ba" from the second pattern only
        assert min_word_of_length(patterns, 2) == w("ba", AB)
        assert min_word_of_length(patterns, 5) == w("babab", AB)


class TestLengthAbstraction:
    def test_needle_can_beat_haystack(self):
        inst = parse_instance({
            "alphabet": "ab",
            "vars": [{"name": "x", "regex": "(ab)*"}],
            "needle": [{"var": "x"}],
            "haystack": [{"lit": "ab"}],
        })
        model = length_abstraction(inst)
        assert model == {"x": w("abab", AB)}

    def test_unit_needle_never_wins(self):
        # the haystack variable never takes the empty word, so a one-letter
        # needle can never be strictly longer
        inst = parse_instance({
            "alphabet": "ab",
            "vars": [{"name": "x", "regex": "aa*"}],
            "needle": [{"lit": "a"}],
            "haystack": [{"var": "x"}],
        })
        assert length_abstraction(inst) is None

    def test_shared_variable_cancels(self):
        inst = parse_instance({
            "alphabet": "abc",
            "vars": [{"name": "x", "regex": "a*"}],
            "needle": [{"var": "x"}, {"lit": "c"}],
            "haystack": [{"var": "x"}],
        })
        model = length_abstraction(inst)
        assert model is not None and model["x"] == ""


class TestSolveFlat:
    def test_sat_simple(self):
        inst = flat(
            AB,
            [Lit(w("aa", AB))],
            [Var("x")],
            x=(pat([w("ab", AB), ""], [w("ab", AB)]),),
        )
        result = solve_flat(inst, 8)
        assert result.status == "sat"
        assert result.model == {"x": w("ab", AB)}

    def test_unsat_finite_exhaustion(self):
        inst = flat(
            AB,
            [Lit(w("a", AB))],
            [Var("x")],
            x=(pat([w("a", AB)], []), pat([w("aa", AB)], [])),
        )
        assert solve_flat(inst, 8).status == "unsat"

    def test_unknown_infinite(self):
        inst = flat(
            AB,
            [Lit(w("a", AB))],
            [Var("x")],
            x=(pat([w("ab", AB), ""], [w("ab", AB)]),),
        )
        result = solve_flat(inst, 8)
        assert result.status == "unknown"
        assert result.reason == "iter-bound"

    def test_sat_model_verifies(self):
        inst = flat(
            AB,
            [Lit(w("bb", AB)), Var("x")],
            [Var("x"), Var("y")],
            x=(pat(["", ""], [w("ab", AB)]),),
            y=(pat(["", ""], [w("b", AB)]),),
        )
        result = solve_flat(inst, 8)
        assert result.status == "sat"
        for name, word in result.model.items():
            assert any(p.matches(word) for p in inst.patterns[name])
        needle = w("bb", AB) + result.model["x"]
        haystack = result.model["x"] + result.model["y"]
        assert not is_factor(needle, haystack)

    def test_deterministic_first_hit(self):
        inst = flat(
            AB,
            [Lit(w("aa", AB))],
            [Var("x")],
            x=(pat(["", ""], [w("b", AB)]), pat(["", ""], [w("a", AB)])),
        )
        first = solve_flat(inst, 4)
        second = solve_flat(inst, 4)
        assert first.status == "sat" and first.model == second.model


class TestEmitSmtlib:
    def doc(self):
        return {
            "alphabet": "abc",
            "vars": [
                {"name": "x", "regex": "(ab)+"},
                {"name": "z", "regex": "(a(b|c)c)*"},
            ],
            "needle": [{"lit": "ab"}, {"var": "x"}],
            "haystack": [{"var": "x"}, {"var": "z"}],
        }

    def test_structure(self):
        sink = io.StringIO()
        emit_smtlib(parse_instance(self.doc()), sink)
        text = sink.getvalue()
        lines = text.strip().splitlines()
        assert lines[0] == "(set-logic QF_S)"
        assert lines[-2] == "(check-sat)"
        assert lines[-1] == "(get-model)"
        assert text.count("str.in_re") == 2
        assert text.count("(declare-const") == 2
        assert '(assert (not (str.contains (str.++ x z) (str.++ "ab" x))))' in text

    def test_variable_free(self):
        sink = io.StringIO()
        emit_smtlib(
            parse_instance({
                "alphabet": "ab",
                "vars": [],
                "needle": [{"lit": "a"}],
                "haystack": [{"lit": "b"}],
            }),
            sink,
        )
        text = sink.getvalue()
        assert "declare-const" not in text
        assert '(assert (not (str.contains "b" "a")))' in text

    def test_deterministic(self):
        a, b = io.StringIO(), io.StringIO()
        emit_smtlib(parse_instance(self.doc()), a)
        emit_smtlib(parse_instance(self.doc()), b)
        assert a.getvalue() == b.getvalue()
