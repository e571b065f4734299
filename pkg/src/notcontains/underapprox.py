"""Flat underapproximation of non-flat haystack variables.

Builds, per variable, a prefix-side and a suffix-side cover: short complete
words, pump expansions of every bound-reaching path through the automaton's
choice structure, and (when the post-guess needle still carries a flat
variable) the band of words tracking that variable's base word.  The two
halves are glued around a long primitive pump block into a finite union of
flat patterns contained in the variable's language.
"""

from __future__ import annotations

from dataclasses import dataclass

from .automata import (
    Dfa,
    EMPTY,
    EmptyLanguage,
    Flat,
    FlatPattern,
    NonFlat,
    butterfly_at,
    canonical_dfa,
    classify_flatness,
    concat_patterns,
    connector,
    dfa_intersect,
    enumerate_words,
    nfa_factors_of_power,
    relocate_initial,
    with_finals,
)
from .constraints import Bounds, Instance, Lit, Var, base_word, eval_term
from .errors import CapExceeded, InputError, InternalError
from .words import Word, is_factor, pump_word


@dataclass(frozen=True)
class Caps:
    path_cap: int = 100_000
    pattern_cap: int = 50_000


@dataclass(frozen=True)
class PumpContext:
    """Per-variable expansion context: the butterfly loop state, the
    primitive pump word, and the pump power used by every expansion."""

    var: str
    dfa: Dfa
    butterfly: object
    pump: Word
    power: int

    @property
    def loop_state(self) -> int:
        return self.butterfly.state

    def key(self) -> tuple:
        return (self.pump, self.power, self.loop_state)


def make_context(inst: Instance, var: str, max_base: int, power: int) -> PumpContext:
    dfa = inst.langs[var]
    bfly = butterfly_at(dfa)
    return PumpContext(var, dfa, bfly, pump_word(bfly.loop_a, bfly.loop_b, max_base), power)


# ---------------------------------------------------------------------------
# choice structure


def _is_choice(dfa: Dfa, q: int) -> bool:
    return len(dfa.out(q)) > 1


def _is_rev_choice(dfa: Dfa, q: int) -> bool:
    return len(dfa.in_edges(q)) > 1


def forward_edges(dfa: Dfa, q: int) -> list[tuple[Word, int]]:
    """Edges of the prefix tree from a vertex at state q: one per outgoing
    transition, following the forced run until the next choice state.
    Runs that never meet another choice state yield no edge."""
    edges = []
    for a, r in dfa.out(q):
        label = [a]
        cur = r
        seen = set()
        while not _is_choice(dfa, cur):
            if not dfa.out(cur) or cur in seen:
                cur = None
                break
            seen.add(cur)
            b, cur = dfa.out(cur)[0]
            label.append(b)
        if cur is not None:
            edges.append(("".join(label), cur))
    edges.sort()
    return edges


def reverse_edges(dfa: Dfa, q: int) -> list[tuple[Word, int]]:
    """Suffix-side analogue on the reversed automaton.  The returned label
    is in walk order (rightmost letter first); the forward word readable
    from the returned state to q is the reversed label."""
    edges = []
    for a, p in dfa.in_edges(q):
        rlabel = [a]
        cur = p
        seen = set()
        while not _is_rev_choice(dfa, cur):
            if not dfa.in_edges(cur) or cur in seen:
                cur = None
                break
            seen.add(cur)
            b, cur = dfa.in_edges(cur)[0]
            rlabel.append(b)
        if cur is not None:
            edges.append(("".join(rlabel), cur))
    edges.sort()
    return edges


@dataclass(frozen=True)
class ReachingPath:
    """A tree path whose label first meets the bound at its last edge.
    The label is in reading order on both sides; ``states`` are the visited
    tree-vertex states in walk order."""

    label: Word
    states: tuple[int, ...]
    end_state: int


def reaching_paths(ctx: PumpContext, side: str, bound: int, path_cap: int) -> list[ReachingPath]:
    """All bound-reaching paths of the prefix (suffix) tree, depth first
    with lex edge order.  Raises CapExceeded("path-cap") past the cap."""
    dfa = ctx.dfa
    if side == "pref":
        root = 0
        edge_fn = forward_edges
    elif side == "suf":
        if len(dfa.finals) != 1:
            raise InputError("suffix tree needs a single final state")
        root = next(iter(dfa.finals))
        edge_fn = reverse_edges
    else:
        raise InputError(f"unknown side {side!r}")

    out: list[ReachingPath] = []

    def rec(state: int, walk: str, states: tuple[int, ...]):
        for wlabel, dst in edge_fn(dfa, state):
            new = walk + wlabel
            if len(new) >= bound:
                label = new if side == "pref" else new[::-1]
                out.append(ReachingPath(label, states + (dst,), dst))
                if len(out) > path_cap:
                    raise CapExceeded("path-cap")
            else:
                rec(dst, new, states + (dst,))

    rec(root, "", (root,))
    return out


# ---------------------------------------------------------------------------
# dead ends and expansions


def is_dead_end(inst: Instance, partial: dict[str, Word], var: str, prefix: Word) -> bool:
    """True iff assigning ``prefix`` (closed off by a fresh separator) to
    the variable already forces the needle into the haystack under the
    partial assignment of all other variables."""
    probe = chr(inst.alphabet.size)
    sigma = dict(partial)
    sigma[var] = prefix + probe
    return is_factor(eval_term(inst.needle, sigma), eval_term(inst.haystack, sigma))


def pump_expand(ctx: PumpContext, side: str, context: Word, state: int | None = None) -> Word:
    """Complete a prefix (suffix) context toward the pump loop:
    prefix side gives context . connector . pump^power, suffix side gives
    pump^power . connector . context."""
    dfa = ctx.dfa
    block = ctx.pump * ctx.power
    if side == "pref":
        q = dfa.run(context) if state is None else state
        if q is None:
            raise InputError("context is not a prefix of the language")
        return context + connector(dfa, q, ctx.loop_state) + block
    if side == "suf":
        if state is None:
            candidates = [
                q for q in range(dfa.n_states) if dfa.run(context, q) in dfa.finals
            ]
            if not candidates:
                raise InputError("context is not a suffix of the language")
            q = min(candidates)
        else:
            q = state
        return block + connector(dfa, ctx.loop_state, q) + context
    raise InputError(f"unknown side {side!r}")


# ---------------------------------------------------------------------------
# the alpha band (needle still has a flat variable)


def split_alpha_prefix(word: Word, alpha: Word) -> tuple[int, Word, Word]:
    """word = alpha^m . p . rest with the alpha-periodic prefix maximal;
    p is a proper prefix of alpha and rest is empty or diverges from alpha."""
    m = 0
    rest = word
    while rest.startswith(alpha):
        m += 1
        rest = rest[len(alpha):]
    k = 0
    while k < len(rest) and k < len(alpha) and rest[k] == alpha[k]:
        k += 1
    return m, rest[:k], rest[k:]


def split_alpha_suffix(word: Word, alpha: Word) -> tuple[int, Word, Word]:
    """word = rest . s . alpha^m with the alpha-periodic suffix maximal;
    s is a proper suffix of alpha and rest is empty or diverges leftwards."""
    m = 0
    rest = word
    while rest.endswith(alpha):
        m += 1
        rest = rest[: len(rest) - len(alpha)]
    k = 0
    while k < len(rest) and k < len(alpha) and rest[len(rest) - 1 - k] == alpha[len(alpha) - 1 - k]:
        k += 1
    cut = len(rest) - k
    return m, rest[cut:], rest[:cut]


def _factors_dfa(alpha: Word) -> Dfa:
    dfa = canonical_dfa(nfa_factors_of_power(alpha))
    assert isinstance(dfa, Dfa)
    return dfa


def _flat_patterns_of(dfa: Dfa | EmptyLanguage, what: str) -> tuple[FlatPattern, ...]:
    if isinstance(dfa, EmptyLanguage):
        return ()
    result = classify_flatness(dfa)
    if not isinstance(result, Flat):
        raise InternalError(f"{what} is unexpectedly non-flat")
    return result.patterns


def _append_literal(pattern: FlatPattern, word: Word) -> FlatPattern:
    return FlatPattern(pattern.literals[:-1] + (pattern.literals[-1] + word,), pattern.loops)


def _prepend_literal(word: Word, pattern: FlatPattern) -> FlatPattern:
    return FlatPattern((word + pattern.literals[0],) + pattern.literals[1:], pattern.loops)


def _rightmost_var(term) -> tuple[str | None, Word]:
    """Last variable of the term and the literal after it."""
    name = None
    tail: Word = ""
    for item in term:
        if isinstance(item, Var):
            name = item.name
            tail = ""
        else:
            tail += item.word
    return name, tail


def _leftmost_var(term) -> tuple[str | None, Word]:
    """First variable of the term and the literal before it."""
    head: Word = ""
    for item in term:
        if isinstance(item, Var):
            return item.name, head
        head += item.word
    return None, head


def _divergent_forward_exits(dfa: Dfa, alpha: Word) -> list[tuple[int, Word, int]]:
    """Choice edges whose first letter leaves the alpha-factor band at some
    product-reachable position; the sound enlargement used when the literal
    block after the rightmost flat needle variable is empty."""
    fdfa = _factors_dfa(alpha)
    reachable: set[tuple[int, int]] = {(0, 0)}
    stack = [(0, 0)]
    while stack:
        f, q = stack.pop()
        for a, r in dfa.out(q):
            f2 = fdfa.step(f, a)
            if f2 is None:
                continue
            if (f2, r) not in reachable:
                reachable.add((f2, r))
                stack.append((f2, r))
    by_state: dict[int, set[int]] = {}
    for f, q in reachable:
        by_state.setdefault(q, set()).add(f)
    exits = []
    for q in sorted(by_state):
        if not _is_choice(dfa, q):
            continue
        for label, r in forward_edges(dfa, q):
            if any(fdfa.step(f, label[0]) is None for f in by_state[q]):
                exits.append((q, label, r))
    return exits


def _divergent_reverse_exits(dfa: Dfa, alpha: Word) -> list[tuple[int, Word, int]]:
    """Mirror of the forward divergence rule, walking the automaton
    backwards from its final state against the reversed alpha band.
    Returns (end_state, forward_word, start_state) triples."""
    fdfa = _factors_dfa(alpha[::-1])
    final = next(iter(dfa.finals))
    reachable: set[tuple[int, int]] = {(0, final)}
    stack = [(0, final)]
    while stack:
        f, q = stack.pop()
        for a, p in dfa.in_edges(q):
            f2 = fdfa.step(f, a)
            if f2 is None:
                continue
            if (f2, p) not in reachable:
                reachable.add((f2, p))
                stack.append((f2, p))
    by_state: dict[int, set[int]] = {}
    for f, q in reachable:
        by_state.setdefault(q, set()).add(f)
    exits = []
    for q in sorted(by_state):
        if not _is_rev_choice(dfa, q):
            continue
        for rlabel, src in reverse_edges(dfa, q):
            if any(fdfa.step(f, rlabel[0]) is None for f in by_state[q]):
                exits.append((q, rlabel[::-1], src))
    return exits


# ---------------------------------------------------------------------------
# half covers and glue


@dataclass(frozen=True)
class HalfCover:
    """One side of the flat cover.  ``complete`` patterns denote full words
    of the language; ``partial`` patterns denote the context around the
    pump block: context . pump^power on the prefix side and
    pump^power . context on the suffix side."""

    side: str
    key: tuple
    complete: tuple[FlatPattern, ...]
    partial: tuple[FlatPattern, ...]


def flat_half(
    inst: Instance,
    ctx: PumpContext,
    side: str,
    bounds: Bounds,
    caps: Caps = Caps(),
) -> HalfCover:
    """Assemble one side of the flat underapproximation of ctx.var:

    short complete words, pump expansions of the bound-reaching tree paths,
    and, when the needle still carries a flat variable, the band of words
    following that variable's base plus the exit continuations diverging
    from it.  Raises CapExceeded when a cap is hit.
    """
    dfa = ctx.dfa
    complete: list[FlatPattern] = []
    partial: list[FlatPattern] = []

    for word in enumerate_words(dfa, bounds.k0 + bounds.p_aut - 1):
        complete.append(FlatPattern.literal(word))

    for path in reaching_paths(ctx, side, bounds.k0, caps.path_cap):
        if side == "pref":
            context = path.label + connector(dfa, path.end_state, ctx.loop_state)
        else:
            context = connector(dfa, ctx.loop_state, path.end_state) + path.label
        partial.append(FlatPattern.literal(context))

    if side == "pref":
        var, block = _rightmost_var(inst.needle)
    else:
        var, block = _leftmost_var(inst.needle)
    if var is not None:
        alpha = base_word(inst, var)
        if side == "pref":
            _, _, diverge = split_alpha_prefix(block, alpha)
        else:
            _, _, diverge = split_alpha_suffix(block, alpha)
        fdfa = _factors_dfa(alpha)
        complete.extend(_flat_patterns_of(dfa_intersect(fdfa, dfa), "alpha band"))

        if side == "pref":
            if diverge:
                exits = [
                    (q, label, r)
                    for q in range(dfa.n_states)
                    if _is_choice(dfa, q)
                    for label, r in forward_edges(dfa, q)
                    if label.startswith(diverge)
                ]
            else:
                exits = _divergent_forward_exits(dfa, alpha)
            for q, label, r in exits:
                tail = label + connector(dfa, r, ctx.loop_state)
                for pat in _flat_patterns_of(
                    dfa_intersect(fdfa, with_finals(dfa, {q})), "alpha band prefix"
                ):
                    partial.append(_append_literal(pat, tail))
        else:
            if diverge:
                exits = [
                    (q, rlabel[::-1], src)
                    for q in range(dfa.n_states)
                    if _is_rev_choice(dfa, q)
                    for rlabel, src in reverse_edges(dfa, q)
                    if rlabel[::-1].endswith(diverge)
                ]
            else:
                exits = _divergent_reverse_exits(dfa, alpha)
            for q, word, src in exits:
                head = connector(dfa, ctx.loop_state, src) + word
                for pat in _flat_patterns_of(
                    dfa_intersect(fdfa, relocate_initial(dfa, q)), "alpha band suffix"
                ):
                    partial.append(_prepend_literal(head, pat))

    if len(complete) + len(partial) > caps.pattern_cap:
        raise CapExceeded("pattern-cap")
    return HalfCover(
        side,
        ctx.key(),
        tuple(sorted(set(complete), key=FlatPattern.sort_key)),
        tuple(sorted(set(partial), key=FlatPattern.sort_key)),
    )


def glue(pref: HalfCover, suf: HalfCover, pattern_cap: int = 50_000) -> tuple[FlatPattern, ...]:
    """Full-word patterns from two compatible halves: both complete sets
    plus every partial prefix joined to every partial suffix around one
    pump block.  Every denoted word belongs to the variable's language."""
    if pref.side != "pref" or suf.side != "suf":
        raise InputError("glue needs a prefix half and a suffix half")
    if pref.key != suf.key:
        raise InputError("halves come from different pump contexts")
    pump_block = pref.key[0] * pref.key[1]
    out = set(pref.complete) | set(suf.complete)
    for pc in pref.partial:
        for sc in suf.partial:
            out.add(concat_patterns(pc, pump_block, sc))
            if len(out) > pattern_cap:
                raise CapExceeded("pattern-cap")
    return tuple(sorted(out, key=FlatPattern.sort_key))
