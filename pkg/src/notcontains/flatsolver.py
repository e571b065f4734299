"""Terminal decision for all-flat instances.

A length-abstraction satisfiability shortcut, a bounded-complete
iteration-count enumeration backend, and SMT-LIB export for external
cross-checking.  The enumeration backend is deliberately pluggable-shaped:
it answers Unsat only with a finite-exhaustion certificate and degrades to
Unknown otherwise.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from . import automata
from .automata import Dfa, FlatPattern, LengthSet, length_set
from .constraints import Instance, Lit, Term, Var, eval_term, term_vars
from .errors import InputError
from .words import Alphabet, Word, is_factor

_COMBO_GUARD = 2_000_000  # enumeration truncates past this many assignments


@dataclass
class FlatInstance:
    """Needle/haystack terms with every variable's language given as a
    finite union of flat patterns."""

    alphabet: Alphabet
    needle: Term
    haystack: Term
    patterns: dict[str, tuple[FlatPattern, ...]]


@dataclass
class FlatResult:
    status: str  # sat | unsat | unknown
    model: dict[str, Word] | None = None
    reason: str | None = None


# ---------------------------------------------------------------------------
# length abstraction


def _length_profile(term: Term) -> tuple[dict[str, int], int]:
    coeff: dict[str, int] = {}
    const = 0
    for item in term:
        if isinstance(item, Lit):
            const += len(item.word)
        else:
            coeff[item.name] = coeff.get(item.name, 0) + 1
    return coeff, const


def _length_witness(
    needle: Term,
    haystack: Term,
    sets: dict[str, LengthSet],
    pick,
) -> dict[str, Word] | None:
    """Common search: lengths within each variable's set making the needle
    strictly longer than the haystack; ``pick(var, length)`` materializes
    the lex-least word of that length."""
    nc, nconst = _length_profile(needle)
    hc, hconst = _length_profile(haystack)
    names = sorted(sets)
    positions = len(needle) + len(haystack)
    lcm = 1
    for s in sets.values():
        lcm = math.lcm(lcm, s.periods_lcm())
    repeats = (positions + 1) * lcm
    candidates = [sets[x].candidates(repeats) for x in names]
    total = 1
    for c in candidates:
        total *= max(1, len(c))
    if total > 200_000:
        # keep the shortcut cheap; it only ever abstains, never refutes
        candidates = [c[:40] for c in candidates]
    combos = sorted(itertools.product(*candidates), key=lambda t: (sum(t), t))
    for combo in combos:
        lens = dict(zip(names, combo))
        n_len = nconst + sum(nc.get(x, 0) * lens[x] for x in names)
        h_len = hconst + sum(hc.get(x, 0) * lens[x] for x in names)
        if n_len > h_len:
            model = {}
            for x in names:
                word = pick(x, lens[x])
                if word is None:
                    break
                model[x] = word
            else:
                return model
    return None


def length_abstraction(inst: Instance) -> dict[str, Word] | None:
    """A model whenever some choice of per-variable lengths makes the needle
    longer than the haystack; None when the bounded search finds none.
    One-sided: never claims unsatisfiability."""
    names = inst.occurring_vars()
    sets = {x: length_set(inst.langs[x]) for x in names}
    return _length_witness(
        inst.needle,
        inst.haystack,
        sets,
        lambda x, n: automata.lex_min_word_of_length(inst.langs[x], n),
    )


# ---------------------------------------------------------------------------
# pattern lengths and words


def pattern_length_set(patterns) -> LengthSet:
    """Exact ultimately periodic length set of a finite pattern union."""
    finite: set[int] = set()
    cycles: set[tuple[int, int]] = set()
    for pat in patterns:
        base = pat.base_length()
        if not pat.loops:
            finite.add(base)
            continue
        lens = [len(l) for l in pat.loops]
        g = math.gcd(*lens)
        width = min(lens) * max(lens)
        # every multiple of g at or past width is achievable
        bits = 1
        mask = (1 << (width + 1)) - 1
        changed = True
        while changed:
            changed = False
            for l in lens:
                new = bits | ((bits << l) & mask)
                if new != bits:
                    bits = new
                    changed = True
        for s in range(width):
            if (bits >> s) & 1:
                finite.add(base + s)
        offset = base + ((width + g - 1) // g) * g
        cycles.add((offset, g))
    return LengthSet(frozenset(finite), frozenset(cycles))


def min_word_of_length(patterns, length: int) -> Word | None:
    """Lex-least word of the given length in the pattern union."""
    best: Word | None = None
    for pat in patterns:
        deficit = length - pat.base_length()
        if deficit < 0:
            continue
        lens = [len(l) for l in pat.loops]

        def rec(idx: int, counts: list[int], remaining: int):
            nonlocal best
            if idx == len(lens):
                if remaining == 0:
                    word = pat.instantiate(counts)
                    if best is None or word < best:
                        best = word
                return
            for k in range(remaining // lens[idx] + 1):
                counts.append(k)
                rec(idx + 1, counts, remaining - k * lens[idx])
                counts.pop()

        rec(0, [], deficit)
    return best


# ---------------------------------------------------------------------------
# the bounded-complete backend


def _variable_words(patterns, iter_bound: int) -> list[Word]:
    """Deterministic candidate order: pattern alternatives by their sort
    key, iteration-count vectors in colex order, duplicates dropped."""
    out: list[Word] = []
    seen: set[Word] = set()
    for pat in sorted(patterns, key=FlatPattern.sort_key):
        m = len(pat.loops)
        for rev in itertools.product(range(iter_bound + 1), repeat=m):
            word = pat.instantiate(rev[::-1])
            if word not in seen:
                seen.add(word)
                out.append(word)
    return out


def solve_flat(inst: FlatInstance, iter_bound: int = 8) -> FlatResult:
    """Length shortcut first, then exhaustive instantiation with every loop
    count at most ``iter_bound``.

    Sat on the first hit in deterministic order.  Unsat only when every
    variable's pattern union is loop-free, hence finite and fully covered.
    Otherwise Unknown("iter-bound").
    """
    names = sorted(set(term_vars(inst.needle)) | set(term_vars(inst.haystack)))
    for x in names:
        if x not in inst.patterns:
            raise InputError(f"no patterns for variable {x!r}")
        if not inst.patterns[x]:
            return FlatResult("unsat")

    sets = {x: pattern_length_set(inst.patterns[x]) for x in names}
    witness = _length_witness(
        inst.needle,
        inst.haystack,
        sets,
        lambda x, n: min_word_of_length(inst.patterns[x], n),
    )
    if witness is not None:
        return FlatResult("sat", witness)

    words = {x: _variable_words(inst.patterns[x], iter_bound) for x in names}
    total = 1
    for x in names:
        total *= max(1, len(words[x]))
    if total > _COMBO_GUARD:
        return FlatResult("unknown", reason="iter-bound")
    for combo in itertools.product(*[words[x] for x in names]):
        model = dict(zip(names, combo))
        if not is_factor(eval_term(inst.needle, model), eval_term(inst.haystack, model)):
            return FlatResult("sat", model)

    exhaustive = all(p.is_finite() for x in names for p in inst.patterns[x])
    if exhaustive:
        return FlatResult("unsat")
    return FlatResult("unknown", reason="iter-bound")


# ---------------------------------------------------------------------------
# SMT-LIB export


def _smt_regex(ast, alphabet: Alphabet) -> str:
    kind = ast[0]
    if kind == "eps":
        return '(str.to_re "")'
    if kind == "sym":
        return f'(str.to_re "{alphabet.decode(ast[1])}")'
    if kind == "cat":
        return "(re.++ " + " ".join(_smt_regex(n, alphabet) for n in ast[1]) + ")"
    if kind == "alt":
        return "(re.union " + " ".join(_smt_regex(n, alphabet) for n in ast[1]) + ")"
    if kind == "star":
        return f"(re.* {_smt_regex(ast[1], alphabet)})"
    if kind == "plus":
        return f"(re.+ {_smt_regex(ast[1], alphabet)})"
    if kind == "opt":
        return f"(re.opt {_smt_regex(ast[1], alphabet)})"
    raise AssertionError(kind)


def _smt_term(term: Term, alphabet: Alphabet) -> str:
    if not term:
        return '""'
    parts = []
    for item in term:
        if isinstance(item, Lit):
            parts.append(f'"{alphabet.decode(item.word)}"')
        else:
            parts.append(item.name)
    if len(parts) == 1:
        return parts[0]
    return "(str.++ " + " ".join(parts) + ")"


def emit_smtlib(inst: Instance, sink) -> None:
    """Standard strings-theory script: one constant per variable, regex
    memberships, the negated containment, check-sat, get-model."""
    lines = ["(set-logic QF_S)"]
    for name in inst.langs:
        lines.append(f"(declare-const {name} String)")
    for name in inst.langs:
        if name not in inst.regexes:
            raise InputError(f"variable {name!r} has no regex source to export")
        ast = automata.parse_regex_ast(inst.regexes[name], inst.alphabet)
        lines.append(f"(assert (str.in_re {name} {_smt_regex(ast, inst.alphabet)}))")
    haystack = _smt_term(inst.haystack, inst.alphabet)
    needle = _smt_term(inst.needle, inst.alphabet)
    lines.append(f"(assert (not (str.contains {haystack} {needle})))")
    lines.append("(check-sat)")
    lines.append("(get-model)")
    sink.write("\n".join(lines) + "\n")
