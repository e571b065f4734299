"""Word-combinatorics kernel.

Primitivity, roots, factors, overlaps, self-overlap rigidity, and the
power-word constructions that drive variable elimination.

A word is a plain Python string whose characters are symbol ids
(``chr(id)``).  Substring search, slicing, repetition and lexicographic
comparison then all follow symbol-id order courtesy of ``str`` itself.
Ids at or above the base alphabet size denote separator symbols that the
solver allocates internally; they never occur in user input or in models.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

Word = str


class WordError(ValueError):
    """A precondition on words was violated (empty word, shared root, ...)."""


@dataclass(frozen=True)
class Alphabet:
    """Symbol table: base letters plus a count of allocated separators.

    Ids are assigned by declaration order, so lexicographic order on words
    is the declared letter order (stable under renaming), and separators
    sort after every base letter.
    """

    letters: str
    n_separators: int = 0

    @property
    def size(self) -> int:
        return len(self.letters) + self.n_separators

    def encode(self, text: str) -> Word:
        out = []
        for c in text:
            i = self.letters.find(c)
            if i < 0:
                raise WordError(f"letter {c!r} is not in the alphabet {self.letters!r}")
            out.append(chr(i))
        return "".join(out)

    def decode(self, word: Word) -> str:
        """Render a word with user letters; separators render as '#', '#2', ..."""
        out = []
        for ch in word:
            sid = ord(ch)
            if sid < len(self.letters):
                out.append(self.letters[sid])
            elif sid < self.size:
                k = sid - len(self.letters)
                out.append("#" if k == 0 else f"#{k + 1}")
            else:
                raise WordError(f"symbol id {sid} is not registered in this alphabet")
        return "".join(out)

    def has_separator(self, word: Word) -> bool:
        return any(ord(ch) >= len(self.letters) for ch in word)

    def with_separator(self) -> tuple["Alphabet", Word]:
        """Allocate a fresh separator; returns the extended table and the symbol."""
        return Alphabet(self.letters, self.n_separators + 1), chr(self.size)

    def base_symbols(self) -> list[Word]:
        return [chr(i) for i in range(len(self.letters))]


def is_factor(needle: Word, haystack: Word) -> bool:
    """True iff haystack = u . needle . v for some u, v; the empty word
    is a factor of everything."""
    return needle in haystack


def is_primitive(w: Word) -> bool:
    """True iff w cannot be written as v^i with i > 1.  Exact divisor scan."""
    n = len(w)
    if n == 0:
        raise WordError("primitivity is undefined for the empty word")
    for d in range(1, n // 2 + 1):
        if n % d == 0 and w == w[:d] * (n // d):
            return False
    return True


def primitive_root(w: Word) -> tuple[Word, int]:
    """The unique primitive root and maximal exponent with w = root^exponent."""
    n = len(w)
    if n == 0:
        raise WordError("the empty word has no primitive root")
    for d in range(1, n + 1):
        if n % d == 0 and w == w[:d] * (n // d):
            return w[:d], n // d
    raise AssertionError("unreachable: w is always w^1")


@dataclass(frozen=True)
class Alignment:
    """Two words placed on a shared position axis.

    ``shift`` is the position of right[0] relative to left[0]; it may be
    negative.  The overlap is the set of positions covered by both words.
    """

    left: Word
    right: Word
    shift: int

    def overlap_size(self) -> int:
        lo = max(0, self.shift)
        hi = min(len(self.left), self.shift + len(self.right))
        return max(0, hi - lo)


def alignment_conflict(a: Alignment) -> bool:
    """True iff some shared position holds different letters."""
    lo = max(0, a.shift)
    hi = min(len(a.left), a.shift + len(a.right))
    if hi <= lo:
        return False
    return a.left[lo:hi] != a.right[lo - a.shift:hi - a.shift]


def is_aligned(w: Word, bound: int) -> bool:
    """True iff w cannot overlap itself on bound or more positions, except
    fully: for every p with 1 <= |p| <= |w| - bound, w is not a prefix of pw.

    Only prefixes of w itself can witness a failure, so the brute check
    ranges over shifts of w against itself.
    """
    if bound > len(w):
        raise WordError("alignment bound exceeds the word length")
    n = len(w)
    for k in range(1, n - bound + 1):
        if w == (w[:k] + w)[:n]:
            return False
    return True


def _require_distinct_roots(u: Word, v: Word) -> None:
    if not u or not v:
        raise WordError("loop words must be non-empty")
    if primitive_root(u)[0] == primitive_root(v)[0]:
        raise WordError("loop words share a primitive root")


def primitive_pair(u: Word, v: Word) -> tuple[Word, Word]:
    """Two equal-length primitive words built from loop words with distinct
    roots: u^(2+k) v^2 and u^2 v^(2+l) with k = lcm(|u|,|v|)/|u| and
    l = lcm(|u|,|v|)/|v|."""
    _require_distinct_roots(u, v)
    m = math.lcm(len(u), len(v))
    k = m // len(u)
    l = m // len(v)
    alpha = u * (2 + k) + v * 2
    beta = u * 2 + v * (2 + l)
    assert len(alpha) == len(beta)
    return alpha, beta


def rigid_core(alpha: Word, beta: Word, r: int) -> Word:
    """The word alpha^r beta^r alpha^r beta^r alpha^2r beta^2r of length
    8*r*|alpha|; for r >= 2 it is (r+1)|alpha|-aligned."""
    if len(alpha) != len(beta):
        raise WordError("rigid core needs equal-length building blocks")
    if r < 2:
        raise WordError("rigid core needs a power of at least 2")
    return (alpha * r + beta * r) * 2 + alpha * (2 * r) + beta * (2 * r)


def pick_core_power(alpha: Word, max_context: int, prefix: Word, suffix: Word) -> int:
    """Minimal r >= 2 with r*|alpha| > max_context + |prefix| + |suffix|."""
    if not alpha:
        raise WordError("core block must be non-empty")
    need = max_context + len(prefix) + len(suffix)
    return max(2, need // len(alpha) + 1)


def pump_word(u: Word, v: Word, longer_than: int) -> Word:
    """The primitive word u^(2+k) v^2 for the minimal k with length beyond
    ``longer_than``; u and v must have distinct primitive roots."""
    _require_distinct_roots(u, v)
    base = 2 * len(u) + 2 * len(v)
    k = 0 if base > longer_than else (longer_than - base) // len(u) + 1
    return u * (2 + k) + v * 2
