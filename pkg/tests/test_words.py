import math
import random

import pytest

from notcontains.words import (
    Alignment,
    Alphabet,
    WordError,
    alignment_conflict,
    is_aligned,
    is_factor,
    is_primitive,
    pick_core_power,
    primitive_pair,
    primitive_root,
    pump_word,
    rigid_core,
)

from _helpers import AB, ABC, all_words, w


class TestAlphabet:
    def test_encode_decode_roundtrip(self):
        assert ABC.decode(ABC.encode("abcab")) == "abcab"

    def test_ids_follow_declaration_order(self):
        odd = Alphabet("ba")
        assert odd.encode("b") < odd.encode("a")

    def test_unknown_letter(self):
        with pytest.raises(WordError):
            ABC.encode("x")

    def test_separators_sort_after_letters(self):
        ext, sep = ABC.with_separator()
        assert sep > ext.encode("c")
        assert ext.decode(sep) == "#"
        ext2, sep2 = ext.with_separator()
        assert ext2.decode(sep + sep2) == "##2"

    def test_has_separator(self):
        ext, sep = AB.with_separator()
        assert ext.has_separator(w("ab", AB) + sep)
        assert not ext.has_separator(w("ab", AB))


class TestPrimitivity:
    def test_two_distinct_letters(self):
        assert is_primitive(w("ab"))

    def test_square_is_not_primitive(self):
        assert not is_primitive(w("abab"))

    def test_aab_by_divisor_scan(self):
        # independent oracle: no proper divisor period of 3
        word = w("aab")
        assert all(word != word[:d] * (3 // d) for d in (1,)) and is_primitive(word)

    def test_empty_word_rejected(self):
        with pytest.raises(WordError):
            is_primitive("")
        with pytest.raises(WordError):
            primitive_root("")

    def test_root_examples(self):
        assert primitive_root(w("ababab")) == (w("ab"), 3)
        assert primitive_root(w("a")) == (w("a"), 1)
        assert primitive_root(w("aabaab")) == (w("aab"), 2)

    def test_root_reconstructs_word(self):
        for word in all_words(AB, 7):
            if not word:
                continue
            root, k = primitive_root(word)
            assert root * k == word
            assert is_primitive(root)
            assert is_primitive(word) == (k == 1)


class TestFactor:
    def test_plain(self):
        assert is_factor(w("ab"), w("aabb"))

    def test_dead_end_example(self):
        ext, sep = ABC.with_separator()
        assert is_factor(w("abab"), w("ababca") + sep)

    def test_empty_needle(self):
        assert is_factor("", w("a"))
        assert is_factor("", "")


class TestAlignment:
    def test_perfect_match(self):
        a = Alignment(w("abab"), w("ab"), 2)
        assert a.overlap_size() == 2
        assert not alignment_conflict(a)

    def test_interior_match(self):
        assert not alignment_conflict(Alignment(w("abab"), w("ba"), 1))

    def test_conflict(self):
        assert alignment_conflict(Alignment(w("abab"), w("aa"), 1))

    def test_negative_shift_and_disjoint(self):
        assert Alignment(w("ab"), w("ba"), -1).overlap_size() == 1
        assert Alignment(w("ab"), w("ba"), 5).overlap_size() == 0
        assert not alignment_conflict(Alignment(w("ab"), w("ba"), 5))


class TestAligned:
    def test_abaa_is_2_aligned(self):
        assert is_aligned(w("abaa"), 2)

    def test_abaa_not_1_aligned(self):
        assert not is_aligned(w("abaa"), 1)

    def test_aaaa_not_3_aligned(self):
        assert not is_aligned(w("aaaa"), 3)

    def test_bound_too_large(self):
        with pytest.raises(WordError):
            is_aligned(w("ab"), 3)

    def test_brute_force_agreement(self):
        # every p with 1 <= |p| <= |w|-bound, over all words p, not just prefixes
        for word in all_words(AB, 6):
            if not word:
                continue
            for bound in range(len(word) + 1):
                expected = True
                for p in all_words(AB, len(word) - bound):
                    if 1 <= len(p) <= len(word) - bound and (p + word).startswith(word):
                        expected = False
                        break
                assert is_aligned(word, bound) == expected


class TestConstructions:
    def test_primitive_pair_ab_aab(self):
        alpha, beta = primitive_pair(w("ab"), w("aab"))
        assert alpha == w("ab") * 5 + w("aab") * 2
        assert beta == w("ab") * 2 + w("aab") * 4
        assert len(alpha) == len(beta) == 16

    def test_primitive_pair_unit_blocks(self):
        alpha, beta = primitive_pair(w("a"), w("b"))
        assert alpha == w("aaabb") and beta == w("aabbb")
        assert len(alpha) == 5

    def test_primitive_pair_is_primitive(self):
        alpha, _ = primitive_pair(w("ab"), w("ba"))
        assert alpha == w("ab") * 3 + w("ba") * 2
        assert is_primitive(alpha)

    def test_primitive_pair_rejects_shared_root(self):
        with pytest.raises(WordError):
            primitive_pair(w("ab"), w("abab"))

    def test_rigid_core_length(self):
        core = rigid_core(w("aaabb"), w("aabbb"), 2)
        assert len(core) == 8 * 2 * 5

    def test_rigid_core_alignment(self):
        alpha, beta = primitive_pair(w("a"), w("b"))
        core = rigid_core(alpha, beta, 2)
        assert is_aligned(core, 3 * len(alpha))

    def test_rigid_core_rejects_small_power(self):
        alpha, beta = primitive_pair(w("a"), w("b"))
        with pytest.raises(WordError):
            rigid_core(alpha, beta, 1)

    def test_pick_core_power(self):
        assert pick_core_power(w("a") * 15, 1, "", "") == 2
        assert pick_core_power(w("ab"), 10, w("a"), "") == 6
        assert pick_core_power(w("aaabb"), 0, "", "") == 2

    def test_pump_word_examples(self):
        assert pump_word(w("bca"), w("cca"), 2) == w("bcabcaccacca")
        # minimal-k oracle: scan k upward and pick the first length beyond the bound
        u, v = w("a"), w("b")
        expected = next(
            u * (2 + k) + v * 2
            for k in range(10)
            if (2 + k) * len(u) + 2 * len(v) > 2
        )
        assert pump_word(u, v, 2) == expected

    def test_pump_word_primitive(self):
        rng = random.Random(7)
        words = [word for word in all_words(ABC, 3) if word]
        for _ in range(50):
            u, v = rng.choice(words), rng.choice(words)
            if primitive_root(u)[0] == primitive_root(v)[0]:
                continue
            assert is_primitive(pump_word(u, v, rng.randrange(0, 12)))


class TestToolboxProperties:
    """Exhaustive desk-scale suites for the word lemmas the pipeline rests on."""

    def test_rotations_of_primitive_words_are_primitive(self):
        for word in all_words(AB, 10):
            if not word or not is_primitive(word):
                continue
            for i in range(1, len(word)):
                assert is_primitive(word[i:] + word[:i])

    def test_fine_wilf(self):
        words = [x for x in all_words(AB, 5) if x]
        for x in words:
            for y in words:
                threshold = len(x) + len(y) - math.gcd(len(x), len(y))
                xk = x * (threshold // len(x) + 1)
                yl = y * (threshold // len(y) + 1)
                if xk[:threshold] == yl[:threshold]:
                    assert primitive_root(x)[0] == primitive_root(y)[0]

    def test_power_overlaps_conflict(self):
        prim = [x for x in all_words(AB, 4) if x and is_primitive(x)]
        for alpha in prim:
            for beta in prim:
                if len(alpha) == len(beta):
                    continue
                threshold = len(alpha) + len(beta) - math.gcd(len(alpha), len(beta))
                u = alpha * (24 // len(alpha))
                v = beta * (24 // len(beta))
                for shift in range(-len(v) + 1, len(u)):
                    a = Alignment(u, v, shift)
                    if a.overlap_size() >= threshold:
                        assert alignment_conflict(a)

    def test_power_products_are_primitive(self):
        words = [x for x in all_words(AB, 3) if x]
        for u in words:
            for v in words:
                if primitive_root(u)[0] == primitive_root(v)[0]:
                    continue
                for big_l in (2, 3):
                    for big_m in (2, 3):
                        assert is_primitive(u * big_l + v * big_m)

    def test_square_contains_root_only_at_borders(self):
        for alpha in all_words(AB, 6):
            if not alpha or not is_primitive(alpha):
                continue
            square = alpha * 2
            occurrences = [
                i
                for i in range(len(square) - len(alpha) + 1)
                if square[i:i + len(alpha)] == alpha
            ]
            assert occurrences == [0, len(alpha)]
