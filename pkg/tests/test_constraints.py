import itertools
import random

import pytest

from notcontains.automata import Dfa, canonical_dfa, enumerate_words, parse_regex
from notcontains.constraints import (
    Bounds,
    Instance,
    Lit,
    Var,
    base_word,
    classify,
    compute_bounds,
    eval_term,
    make_term,
    normalize,
    parse_instance,
    subst_var,
    term_vars,
)
from notcontains.errors import InputError
from notcontains.words import Alphabet

from _helpers import AB, ABC, w


def build(alphabet, needle, haystack, **regexes) -> Instance:
    doc = {
        "alphabet": alphabet,
        "vars": [{"name": k, "regex": v} for k, v in regexes.items()],
        "needle": needle,
        "haystack": haystack,
    }
    return parse_instance(doc)


SECT5 = dict(
    alphabet="abc",
    needle=[{"lit": "ab"}, {"var": "x"}],
    haystack=[{"var": "x"}, {"var": "z"}],
    x="(ab)+",
    z="(a(b|c)c)*",
)


class TestTerms:
    def test_make_term_merges(self):
        term = make_term([Lit(w("a")), Lit(w("b")), Lit(""), Var("x"), Lit(w("c"))])
        assert term == (Lit(w("ab")), Var("x"), Lit(w("c")))

    def test_subst(self):
        term = make_term([Lit(w("a")), Var("x"), Var("y")])
        out = subst_var(term, "x", (Lit(w("b")), Var("q")))
        assert out == (Lit(w("ab")), Var("q"), Var("y"))

    def test_eval(self):
        term = make_term([Lit(w("a")), Var("x")])
        assert eval_term(term, {"x": w("bc")}) == w("abc")


class TestParseInstance:
    def test_section5_document(self):
        inst = build(**SECT5)
        assert term_vars(inst.needle) == ["x"]
        assert term_vars(inst.haystack) == ["x", "z"]
        assert inst.langs["z"].n_states == 3

    def test_undeclared_variable(self):
        with pytest.raises(InputError):
            build("ab", [{"var": "q"}], [{"lit": "a"}])

    def test_reserved_hash(self):
        with pytest.raises(InputError):
            build("ab#", [{"lit": "a"}], [{"lit": "a"}])

    def test_duplicate_letters(self):
        with pytest.raises(InputError):
            build("aba", [{"lit": "a"}], [{"lit": "a"}])

    def test_bad_item(self):
        with pytest.raises(InputError):
            build("ab", [{"oops": "a"}], [{"lit": "a"}])


def assignments_up_to(inst, bound):
    """All (needle, haystack) word pairs realizable with values <= bound."""
    names = sorted(inst.occurring_vars())
    values = [enumerate_words(inst.langs[x], bound) for x in names]
    pairs = set()
    for combo in itertools.product(*values):
        model = dict(zip(names, combo))
        pairs.add((eval_term(inst.needle, model), eval_term(inst.haystack, model)))
    return pairs


class TestNormalize:
    def test_union_language_splits(self):
        inst = build("ab", [{"var": "x"}], [{"lit": "b"}], x="a*|ba*")
        disjuncts = normalize(inst)
        assert len(disjuncts) >= 2
        for d in disjuncts:
            for name, dfa in d.instance.langs.items():
                from notcontains.automata import is_decomposed, is_finite_dfa

                assert is_decomposed(dfa)
                assert not is_finite_dfa(dfa)
            assert d.instance.occurring_vars()

    def test_language_equality_up_to_six(self):
        self._check_equisatisfiable_decomposition(
            build("ab", [{"var": "x"}], [{"lit": "b"}], x="a*|ba*"), 6
        )

    def test_trivially_sat_short_circuit(self):
        inst = build("ab", [{"lit": "a"}], [{"lit": "bb"}])
        disjuncts = normalize(inst)
        assert len(disjuncts) == 1 and disjuncts[0].trivially_sat

    def test_false_variable_free_dropped(self):
        inst = build("ab", [{"lit": "a"}], [{"lit": "ab"}])
        assert normalize(inst) == []

    @staticmethod
    def _check_equisatisfiable_decomposition(inst, bound):
        """Model sets agree: every satisfying original assignment at the
        bound is realizable by some disjunct at the bound (fresh values are
        subwords of the original value), and every disjunct assignment maps
        through the reconstruction terms to a valid original assignment."""
        from notcontains.words import is_factor

        disjuncts = normalize(inst)
        if any(d.trivially_sat for d in disjuncts):
            d = disjuncts[0]
            rebuilt = {orig: eval_term(term, {}) for orig, term in d.recon.items()}
            for orig, word in rebuilt.items():
                assert inst.langs[orig].accepts(word)
            assert not is_factor(
                eval_term(inst.needle, rebuilt), eval_term(inst.haystack, rebuilt)
            )
            return
        unioned = set()
        for d in disjuncts:
            names = sorted(d.instance.occurring_vars())
            values = [enumerate_words(d.instance.langs[x], bound) for x in names]
            for combo in itertools.product(*values):
                model = dict(zip(names, combo))
                pair = (
                    eval_term(d.instance.needle, model),
                    eval_term(d.instance.haystack, model),
                )
                unioned.add(pair)
                rebuilt = {
                    orig: eval_term(term, model) for orig, term in d.recon.items()
                }
                for orig, word in rebuilt.items():
                    assert inst.langs[orig].accepts(word)
                assert pair == (
                    eval_term(inst.needle, rebuilt),
                    eval_term(inst.haystack, rebuilt),
                )
        satisfying = {
            pair for pair in assignments_up_to(inst, bound)
            if not is_factor(pair[0], pair[1])
        }
        assert satisfying <= unioned

    def test_random_instances_language_equality(self):
        rng = random.Random(99)
        regexes = ["a*", "(ab)*", "a|aa", "(a|b)b*", "b?a*", "(ba)+", "a*|ba*"]
        for trial in range(100):
            inst = build(
                "ab",
                [{"var": "x"}],
                [{"lit": rng.choice(["", "a", "b", "ab"])}, {"var": "x"}],
                x=rng.choice(regexes),
            )
            self._check_equisatisfiable_decomposition(inst, 6)


class TestClassify:
    def test_length_abstraction_first(self):
        inst = build("ab", [{"var": "x"}], [{"lit": "ab"}], x="(ab)*")
        disjuncts = normalize(inst)
        result = classify(disjuncts[0].instance)
        assert result.kind == "easy-length-sat"
        model = result.model
        needle_len = len(eval_term(disjuncts[0].instance.needle, model))
        haystack_len = len(eval_term(disjuncts[0].instance.haystack, model))
        assert needle_len > haystack_len

    def test_two_sided_nonflat(self):
        inst = build(
            "abc",
            [{"var": "z"}, {"lit": "a"}],
            [{"lit": "b"}, {"var": "z"}],
            z="(a(b|c)c)*",
        )
        for d in normalize(inst):
            kind = classify(d.instance).kind
            assert kind in ("hard-two-sided", "easy-length-sat")

    def test_needle_only(self):
        inst = build(
            "abc",
            [{"var": "z"}],
            [{"lit": "abc"}, {"lit": "a"}],
            z="(a(b|c)c)*",
        )
        d = normalize(inst)[0]
        result = classify(d.instance)
        assert result.kind in ("easy-length-sat", "needle-only-sat")
        assert result.model is not None


class TestBounds:
    def test_formulas(self):
        inst = build(
            "ab",
            [{"lit": "ab"}, {"var": "x"}],
            [{"var": "x"}, {"var": "z"}],
            x="(ab)*",
            z="(a|b)*",
        )
        bounds = compute_bounds(inst)
        # recomputed by hand from the defining formulas:
        # base(x) = ab (length 2); butterfly of (a|b)* has loops a, b;
        # the pump word must beat length 2, so a a a b b wait: a^(2+k) b^2
        # with minimal k s.t. 2+k+2 > 2 gives k=0, length 4.
        assert bounds.p_lit == 2
        assert bounds.p_aut == 2
        assert bounds.p_prim == 4
        assert bounds.k0 == 2 * 4 * 2 + 2
        assert bounds.n0 == bounds.k0 + 4 * 4 + 2
        assert bounds.g == bounds.n0 + 2 * 4 + 2 * 2
        assert bounds.k0 < bounds.n0 < bounds.g

    def test_no_nonflat(self):
        inst = build("ab", [{"var": "x"}], [{"lit": "b"}], x="(ab)*")
        bounds = compute_bounds(inst)
        assert bounds.p_prim == 2  # base of x only

    def test_no_needle_vars(self):
        inst = build("ab", [{"lit": "a"}], [{"var": "z"}], z="(a|b)*")
        bounds = compute_bounds(inst)
        assert bounds.p_prim == 4  # pump word a a b b only

    def test_scaled_keeps_order(self):
        inst = build(
            "ab",
            [{"lit": "ab"}, {"var": "x"}],
            [{"var": "x"}, {"var": "z"}],
            x="(ab)*",
            z="(a|b)*",
        )
        bounds = compute_bounds(inst).scaled(0.05)
        assert 2 <= bounds.k0 < bounds.n0 < bounds.g


class TestBase:
    def test_simple(self):
        inst = build("ab", [{"var": "x"}], [{"lit": "a"}], x="(ab)*")
        assert base_word(inst, "x") == w("ab", AB)

    def test_power_root(self):
        inst = build("ab", [{"var": "x"}], [{"lit": "a"}], x="(abab)*")
        assert base_word(inst, "x") == w("ab", AB)

    def test_nonflat_rejected(self):
        inst = build("abc", [{"var": "z"}], [{"lit": "a"}], z="(a(b|c)c)*")
        with pytest.raises(InputError):
            base_word(inst, "z")
