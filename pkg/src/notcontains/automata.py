"""Regex frontend and DFA machinery.

Thompson construction, subset construction, Moore minimization, trimming,
canonical breadth-first state numbering, SCC analysis, flatness
classification with butterfly certificates, connectors, length sets, and
the flat-pattern algebra.

All automata values are immutable after construction and every tie-break
is resolved by symbol-id or state-number order, so results are identical
across runs.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from .errors import CapExceeded, InputError, InternalError
from .words import Word, primitive_root

# ---------------------------------------------------------------------------
# regular expressions


class RegexError(InputError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


_POSTFIX = "*+?"


def parse_regex_ast(text: str, alphabet) -> tuple:
    """Parse ``union := concat ('|' concat)*; concat := repeat*;
    repeat := atom ('*'|'+'|'?')*; atom := letter | '(' union ')' |
    '[' letter+ ']'``.  An empty concat denotes the empty word; no escapes,
    whitespace forbidden."""
    pos = 0

    def peek():
        return text[pos] if pos < len(text) else None

    def union():
        nonlocal pos
        parts = [concat()]
        while peek() == "|":
            pos += 1
            parts.append(concat())
        return parts[0] if len(parts) == 1 else ("alt", tuple(parts))

    def concat():
        nonlocal pos
        items = []
        while peek() is not None and peek() not in "|)":
            items.append(repeat())
        if not items:
            return ("eps",)
        return items[0] if len(items) == 1 else ("cat", tuple(items))

    def repeat():
        nonlocal pos
        node = atom()
        while peek() in _POSTFIX if peek() else False:
            op = text[pos]
            pos += 1
            node = ({"*": "star", "+": "plus", "?": "opt"}[op], node)
        return node

    def atom():
        nonlocal pos
        c = peek()
        if c == "(":
            pos += 1
            node = union()
            if peek() != ")":
                raise RegexError("unbalanced '('", pos)
            pos += 1
            return node
        if c == "[":
            start = pos
            pos += 1
            letters = []
            while peek() is not None and peek() != "]":
                letters.append(letter())
            if peek() != "]":
                raise RegexError("unbalanced '['", start)
            if not letters:
                raise RegexError("empty character class", start)
            pos += 1
            if len(letters) == 1:
                return ("sym", letters[0])
            return ("alt", tuple(("sym", l) for l in letters))
        if c is None or c in "|)*+?]":
            raise RegexError("expected a letter, '(' or '['", pos)
        return ("sym", letter())

    def letter():
        nonlocal pos
        c = text[pos]
        if c not in alphabet.letters:
            raise RegexError(f"unknown letter {c!r}", pos)
        pos += 1
        return chr(alphabet.letters.index(c))

    node = union()
    if pos != len(text):
        raise RegexError(f"unexpected {text[pos]!r}", pos)
    return node


class Nfa:
    """Nondeterministic automaton with epsilon moves."""

    __slots__ = ("n_states", "edges", "eps", "initials", "finals")

    def __init__(self):
        self.n_states = 0
        self.edges: list[tuple[int, Word, int]] = []
        self.eps: list[tuple[int, int]] = []
        self.initials: set[int] = set()
        self.finals: set[int] = set()

    def new_state(self) -> int:
        self.n_states += 1
        return self.n_states - 1

    def add_edge(self, q: int, symbol: Word, r: int) -> None:
        self.edges.append((q, symbol, r))

    def add_eps(self, q: int, r: int) -> None:
        self.eps.append((q, r))

    def add_word_path(self, q: int, word: Word) -> int:
        """Chain of fresh states reading ``word`` from q; returns the end state."""
        for ch in word:
            r = self.new_state()
            self.add_edge(q, ch, r)
            q = r
        return q


def nfa_from_ast(ast: tuple) -> Nfa:
    nfa = Nfa()

    def build(node) -> tuple[int, int]:
        kind = node[0]
        if kind == "eps":
            s = nfa.new_state()
            e = nfa.new_state()
            nfa.add_eps(s, e)
            return s, e
        if kind == "sym":
            s = nfa.new_state()
            e = nfa.new_state()
            nfa.add_edge(s, node[1], e)
            return s, e
        if kind == "cat":
            first = build(node[1][0])
            cur = first
            for sub in node[1][1:]:
                nxt = build(sub)
                nfa.add_eps(cur[1], nxt[0])
                cur = (first[0], nxt[1])
            return cur
        if kind == "alt":
            s = nfa.new_state()
            e = nfa.new_state()
            for sub in node[1]:
                bs, be = build(sub)
                nfa.add_eps(s, bs)
                nfa.add_eps(be, e)
            return s, e
        if kind in ("star", "plus", "opt"):
            bs, be = build(node[1])
            s = nfa.new_state()
            e = nfa.new_state()
            nfa.add_eps(s, bs)
            nfa.add_eps(be, e)
            if kind != "plus":
                nfa.add_eps(s, e)
            if kind != "opt":
                nfa.add_eps(be, bs)
            return s, e
        raise AssertionError(f"unknown ast node {kind!r}")

    s, e = build(ast)
    nfa.initials = {s}
    nfa.finals = {e}
    return nfa


def parse_regex(text: str, alphabet) -> Nfa:
    """Thompson-style NFA for the regex over the declared alphabet."""
    return nfa_from_ast(parse_regex_ast(text, alphabet))


def nfa_from_parts(parts) -> Nfa:
    """NFA for a concatenation of parts ('lit', word) | ('star', word)."""
    nfa = Nfa()
    start = nfa.new_state()
    cur = start
    for kind, word in parts:
        if kind == "lit":
            cur = nfa.add_word_path(cur, word)
        elif kind == "star":
            if not word:
                raise InternalError("empty loop word in automaton construction")
            back = nfa.add_word_path(cur, word[:-1])
            nfa.add_edge(back, word[-1], cur)
        else:
            raise AssertionError(kind)
    nfa.initials = {start}
    nfa.finals = {cur}
    return nfa


def nfa_factors_of_power(alpha: Word) -> Nfa:
    """NFA accepting every factor of alpha^+ (equivalently of alpha^*),
    a cycle on |alpha| states with all states initial and final."""
    nfa = Nfa()
    n = len(alpha)
    if n == 0:
        raise InternalError("factor automaton needs a non-empty base word")
    for _ in range(n):
        nfa.new_state()
    for i, ch in enumerate(alpha):
        nfa.add_edge(i, ch, (i + 1) % n)
    nfa.initials = set(range(n))
    nfa.finals = set(range(n))
    return nfa


# ---------------------------------------------------------------------------
# canonical DFAs


class EmptyLanguage:
    """Distinguished marker for an automaton with no accepted word."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "EmptyLanguage"


EMPTY = EmptyLanguage()


class Dfa:
    """Deterministic trim automaton; state 0 is initial.

    Values built through :func:`canonical_dfa` are minimal with canonical
    breadth-first numbering, so equal languages compare equal.
    """

    initial = 0

    __slots__ = ("n_states", "finals", "_delta", "_out", "_in", "_key")

    def __init__(self, n_states: int, transitions, finals):
        self.n_states = n_states
        self.finals = frozenset(finals)
        self._delta = {}
        self._out = {q: [] for q in range(n_states)}
        self._in = {q: [] for q in range(n_states)}
        for q, a, r in transitions:
            self._delta[(q, a)] = r
            self._out[q].append((a, r))
            self._in[r].append((a, q))
        for q in range(n_states):
            self._out[q].sort()
            self._in[q].sort()
        self._key = (
            n_states,
            tuple(sorted(self._delta.items())),
            tuple(sorted(self.finals)),
        )

    def step(self, q: int, symbol: Word) -> int | None:
        return self._delta.get((q, symbol))

    def run(self, word: Word, start: int = 0) -> int | None:
        q = start
        for ch in word:
            q = self._delta.get((q, ch))
            if q is None:
                return None
        return q

    def accepts(self, word: Word) -> bool:
        return self.run(word) in self.finals

    def out(self, q: int) -> list[tuple[Word, int]]:
        return self._out[q]

    def in_edges(self, q: int) -> list[tuple[Word, int]]:
        return self._in[q]

    def transitions(self):
        for (q, a), r in sorted(self._delta.items()):
            yield q, a, r

    def symbols(self) -> list[Word]:
        return sorted({a for (_, a) in self._delta})

    def __eq__(self, other):
        return isinstance(other, Dfa) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        return f"Dfa(states={self.n_states}, finals={sorted(self.finals)})"


def membership(dfa: Dfa, word: Word) -> bool:
    return dfa.accepts(word)


def _canonicalize(delta: dict, initial, finals: set) -> Dfa | EmptyLanguage:
    """Trim + minimize + breadth-first renumber a raw deterministic map."""
    # forward reachability
    reach = {initial}
    stack = [initial]
    succs = {}
    for (q, a), r in delta.items():
        succs.setdefault(q, []).append(r)
    while stack:
        q = stack.pop()
        for r in succs.get(q, ()):
            if r not in reach:
                reach.add(r)
                stack.append(r)
    # backward reachability from finals
    preds = {}
    for (q, a), r in delta.items():
        preds.setdefault(r, []).append(q)
    co = set(f for f in finals if f in reach)
    stack = list(co)
    while stack:
        q = stack.pop()
        for p in preds.get(q, ()):
            if p in co:
                continue
            co.add(p)
            stack.append(p)
    live = reach & co
    if initial not in live:
        return EMPTY
    trimmed = {(q, a): r for (q, a), r in delta.items() if q in live and r in live}
    finals = {f for f in finals if f in live}

    # Moore minimization; a missing transition acts as a permanently dead class
    symbols = sorted({a for (_, a) in trimmed})
    states = sorted(live)
    part = {q: int(q in finals) for q in states}
    n_classes = len(set(part.values()))
    while True:
        sig = {
            q: (part[q], tuple(part.get(trimmed.get((q, a)), -1) for a in symbols))
            for q in states
        }
        classes: dict = {}
        for q in states:
            if sig[q] not in classes:
                classes[sig[q]] = len(classes)
        part = {q: classes[sig[q]] for q in states}
        if len(classes) == n_classes:
            break
        n_classes = len(classes)

    rep_delta = {(part[q], a): part[r] for (q, a), r in trimmed.items()}
    rep_finals = {part[f] for f in finals}
    rep_initial = part[initial]

    # canonical BFS numbering, symbol order
    number = {rep_initial: 0}
    order = [rep_initial]
    i = 0
    while i < len(order):
        state = order[i]
        i += 1
        for a in symbols:
            r = rep_delta.get((state, a))
            if r is not None and r not in number:
                number[r] = len(order)
                order.append(r)
    transitions = [
        (number[q], a, number[r])
        for (q, a), r in rep_delta.items()
        if q in number and r in number
    ]
    finals_out = {number[f] for f in rep_finals if f in number}
    return Dfa(len(order), transitions, finals_out)


def canonical_dfa(nfa: Nfa) -> Dfa | EmptyLanguage:
    """Minimal trim DFA with deterministic numbering, or EMPTY."""
    eps_next = {}
    for q, r in nfa.eps:
        eps_next.setdefault(q, []).append(r)

    def closure(states) -> frozenset:
        seen = set(states)
        stack = list(states)
        while stack:
            q = stack.pop()
            for r in eps_next.get(q, ()):
                if r not in seen:
                    seen.add(r)
                    stack.append(r)
        return frozenset(seen)

    by_symbol = {}
    for q, a, r in nfa.edges:
        by_symbol.setdefault((q, a), set()).add(r)
    symbols = sorted({a for (_, a, _) in nfa.edges})

    start = closure(nfa.initials)
    subset_id = {start: 0}
    worklist = [start]
    delta = {}
    finals = set()
    while worklist:
        subset = worklist.pop(0)
        sid = subset_id[subset]
        if subset & nfa.finals:
            finals.add(sid)
        for a in symbols:
            targets = set()
            for q in subset:
                targets |= by_symbol.get((q, a), set())
            if not targets:
                continue
            tgt = closure(targets)
            if tgt not in subset_id:
                subset_id[tgt] = len(subset_id)
                worklist.append(tgt)
            delta[(sid, a)] = subset_id[tgt]
    return _canonicalize(delta, 0, finals)


def dfa_from_parts(parts) -> Dfa | EmptyLanguage:
    return canonical_dfa(nfa_from_parts(parts))


def dfa_intersect(d1: Dfa, d2: Dfa) -> Dfa | EmptyLanguage:
    """Product construction, canonicalized."""
    pair_id = {(0, 0): 0}
    worklist = [(0, 0)]
    delta = {}
    finals = set()
    while worklist:
        q1, q2 = worklist.pop(0)
        sid = pair_id[(q1, q2)]
        if q1 in d1.finals and q2 in d2.finals:
            finals.add(sid)
        for a, r1 in d1.out(q1):
            r2 = d2.step(q2, a)
            if r2 is None:
                continue
            if (r1, r2) not in pair_id:
                pair_id[(r1, r2)] = len(pair_id)
                worklist.append((r1, r2))
            delta[(sid, a)] = pair_id[(r1, r2)]
    return _canonicalize(delta, 0, finals)


def with_finals(dfa: Dfa, finals) -> Dfa:
    """Same transition structure with a different final set (not canonical)."""
    return Dfa(dfa.n_states, list(dfa.transitions()), finals)


def sub_automaton(dfa: Dfa, states, initial: int, finals) -> Dfa | EmptyLanguage:
    """Canonical DFA of the runs of ``dfa`` confined to ``states``."""
    keep = set(states)
    delta = {
        (q, a): r for q, a, r in dfa.transitions() if q in keep and r in keep
    }
    return _canonicalize(delta, initial, set(finals))


def relocate_initial(dfa: Dfa, start: int) -> Dfa | EmptyLanguage:
    """Canonical DFA of the words readable from ``start`` to a final."""
    delta = {(q, a): r for q, a, r in dfa.transitions()}
    return _canonicalize(delta, start, set(dfa.finals))


# ---------------------------------------------------------------------------
# structure: SCCs, flatness, butterflies


def scc_partition(dfa: Dfa) -> tuple[list[int], list[tuple[int, ...]]]:
    """Tarjan SCCs, iterative; returns (scc index per state, scc member lists)."""
    index = {}
    low = {}
    on_stack = [False] * dfa.n_states
    stack = []
    sccs: list[tuple[int, ...]] = []
    scc_of = [-1] * dfa.n_states
    counter = itertools.count()

    for root in range(dfa.n_states):
        if root in index:
            continue
        work = [(root, iter([r for _, r in dfa.out(root)]))]
        index[root] = low[root] = next(counter)
        stack.append(root)
        on_stack[root] = True
        while work:
            q, it = work[-1]
            advanced = False
            for r in it:
                if r not in index:
                    index[r] = low[r] = next(counter)
                    stack.append(r)
                    on_stack[r] = True
                    work.append((r, iter([t for _, t in dfa.out(r)])))
                    advanced = True
                    break
                if on_stack[r]:
                    low[q] = min(low[q], index[r])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[q])
            if low[q] == index[q]:
                comp = []
                while True:
                    s = stack.pop()
                    on_stack[s] = False
                    comp.append(s)
                    if s == q:
                        break
                comp_t = tuple(sorted(comp))
                for s in comp_t:
                    scc_of[s] = len(sccs)
                sccs.append(comp_t)
    return scc_of, sccs


def _internal_degree(dfa: Dfa, scc: tuple[int, ...]) -> dict[int, int]:
    members = set(scc)
    return {q: sum(1 for _, r in dfa.out(q) if r in members) for q in scc}


def is_nontrivial_scc(dfa: Dfa, scc: tuple[int, ...]) -> bool:
    members = set(scc)
    return any(r in members for q in scc for _, r in dfa.out(q))


def is_finite_dfa(dfa: Dfa) -> bool:
    _, sccs = scc_partition(dfa)
    return not any(is_nontrivial_scc(dfa, s) for s in sccs)


def is_decomposed(dfa: Dfa) -> bool:
    """Single final state and one nontrivial SCC covering every state."""
    if len(dfa.finals) != 1:
        return False
    _, sccs = scc_partition(dfa)
    return len(sccs) == 1 and is_nontrivial_scc(dfa, sccs[0])


def cycle_word_at(dfa: Dfa, q: int, members: set[int]) -> Word:
    """Label of the unique in-SCC cycle through q in a simple-cycle SCC."""
    word = []
    cur = q
    while True:
        nxt = [(a, r) for a, r in dfa.out(cur) if r in members]
        assert len(nxt) == 1, "not a simple cycle"
        a, cur = nxt[0]
        word.append(a)
        if cur == q:
            return "".join(word)


def cycle_path(dfa: Dfa, q: int, target: int, members: set[int]) -> Word:
    """Label of the acyclic walk q -> target along a simple cycle."""
    word = []
    cur = q
    while cur != target:
        nxt = [(a, r) for a, r in dfa.out(cur) if r in members]
        assert len(nxt) == 1, "not a simple cycle"
        a, cur = nxt[0]
        word.append(a)
    return "".join(word)


def star_loop_word(dfa: Dfa) -> Word | None:
    """If the language is exactly w* (a single cycle through the initial,
    initial = final), return w; otherwise None."""
    if dfa.finals != frozenset({0}):
        return None
    word = []
    cur = 0
    visited = set()
    while True:
        if len(dfa.out(cur)) != 1:
            return None
        visited.add(cur)
        a, cur = dfa.out(cur)[0]
        word.append(a)
        if cur == 0:
            break
        if cur in visited:
            return None
    if len(visited) != dfa.n_states:
        return None
    return "".join(word)


# ---------------------------------------------------------------------------
# flat patterns


@dataclass(frozen=True)
class FlatPattern:
    """literal[0] loop[0]* literal[1] ... loop[-1]* literal[-1]."""

    literals: tuple[Word, ...]
    loops: tuple[Word, ...]

    def __post_init__(self):
        assert len(self.literals) == len(self.loops) + 1
        assert all(self.loops), "loops must be non-empty words"

    @staticmethod
    def literal(word: Word) -> "FlatPattern":
        return FlatPattern((word,), ())

    def base_length(self) -> int:
        return sum(len(l) for l in self.literals)

    def is_finite(self) -> bool:
        return not self.loops

    def instantiate(self, counts) -> Word:
        assert len(counts) == len(self.loops)
        out = [self.literals[0]]
        for loop, lit, k in zip(self.loops, self.literals[1:], counts):
            out.append(loop * k)
            out.append(lit)
        return "".join(out)

    def matches(self, word: Word) -> bool:
        positions = {0}
        positions = self._consume_literal(word, positions, self.literals[0])
        for loop, lit in zip(self.loops, self.literals[1:]):
            positions = self._consume_loop(word, positions, loop)
            positions = self._consume_literal(word, positions, lit)
            if not positions:
                return False
        return len(word) in positions

    @staticmethod
    def _consume_literal(word, positions, lit):
        if not lit:
            return positions
        n = len(lit)
        return {p + n for p in positions if word[p:p + n] == lit}

    @staticmethod
    def _consume_loop(word, positions, loop):
        out = set(positions)
        frontier = set(positions)
        n = len(loop)
        while frontier:
            nxt = {p + n for p in frontier if word[p:p + n] == loop} - out
            out |= nxt
            frontier = nxt
        return out

    def sort_key(self):
        return (self.literals, self.loops)


def concat_patterns(a: FlatPattern, mid: Word, b: FlatPattern) -> FlatPattern:
    """Pattern denoting a . mid . b."""
    literals = a.literals[:-1] + (a.literals[-1] + mid + b.literals[0],) + b.literals[1:]
    return FlatPattern(literals, a.loops + b.loops)


def restrict_min_length(pattern: FlatPattern, n: int) -> tuple[FlatPattern, ...]:
    """Finite union denoting exactly the pattern's words of length >= n,
    by unrolling loops minimally.

    A word qualifies iff its loop counts dominate some minimal count vector
    whose weighted total covers the missing length, so the union over
    minimal vectors (unroll before the kept loop) is exact.
    """
    base = pattern.base_length()
    deficit = n - base
    if deficit <= 0:
        return (pattern,)
    if not pattern.loops:
        return ()
    lens = [len(l) for l in pattern.loops]

    vectors: set[tuple[int, ...]] = set()

    def rec(idx: int, acc: list[int], total: int):
        if idx == len(lens):
            if total >= deficit:
                vectors.add(tuple(acc))
            return
        for k in range(deficit // lens[idx] + 2):
            acc.append(k)
            rec(idx + 1, acc, total + k * lens[idx])
            acc.pop()

    rec(0, [], 0)
    minimal = [
        vec
        for vec in vectors
        if all(
            vec[i] == 0
            or tuple(v - (1 if j == i else 0) for j, v in enumerate(vec)) not in vectors
            for i in range(len(vec))
        )
    ]

    patterns = []
    for vec in sorted(minimal):
        literals = [
            pattern.literals[i] + pattern.loops[i] * vec[i]
            for i in range(len(pattern.loops))
        ]
        literals.append(pattern.literals[-1])
        patterns.append(FlatPattern(tuple(literals), pattern.loops))
    return tuple(sorted(set(patterns), key=FlatPattern.sort_key))


# ---------------------------------------------------------------------------
# flatness classification


@dataclass(frozen=True)
class Butterfly:
    """Witness of non-flatness: prefix {loop_a, loop_b}* suffix is contained
    in the language, the loops start with different letters (hence have
    distinct primitive roots), and both loop at ``state``."""

    prefix: Word
    loop_a: Word
    loop_b: Word
    suffix: Word
    state: int


@dataclass(frozen=True)
class Flat:
    patterns: tuple[FlatPattern, ...]


@dataclass(frozen=True)
class NonFlat:
    butterfly: Butterfly


@dataclass(frozen=True)
class LitPiece:
    word: Word


@dataclass(frozen=True)
class LoopPiece:
    word: Word  # denotes word*


@dataclass(frozen=True)
class SubPiece:
    dfa: Dfa  # decomposed non-flat component


def decompose_paths(dfa: Dfa, cap: int = 1 << 20) -> list[tuple]:
    """All SCC-dag traversals of a trim DFA, as alternatives of pieces.

    Simple-cycle SCCs contribute a LoopPiece (the cycle word at the entry
    state) followed by the literal exit path; other nontrivial SCCs
    contribute a SubPiece holding the in-component language between entry
    and exit.  The union over alternatives denotes exactly the language.
    """
    scc_of, sccs = scc_partition(dfa)
    nontrivial = [is_nontrivial_scc(dfa, s) for s in sccs]
    simple = [
        nontrivial[i] and all(d == 1 for d in _internal_degree(dfa, s).values())
        for i, s in enumerate(sccs)
    ]

    alternatives: list[tuple] = []

    def emit(pieces: list, lit: Word):
        flat = list(pieces)
        if lit:
            flat.append(LitPiece(lit))
        alternatives.append(tuple(flat))
        if len(alternatives) > cap:
            raise CapExceeded("normalization-cap")

    def explore(q: int, pieces: list, lit: Word):
        comp = scc_of[q]
        members = set(sccs[comp])
        if nontrivial[comp]:
            if simple[comp]:
                loop = cycle_word_at(dfa, q, members)
                head = pieces + ([LitPiece(lit)] if lit else []) + [LoopPiece(loop)]
                for q2 in sccs[comp]:
                    path = cycle_path(dfa, q, q2, members)
                    if q2 in dfa.finals:
                        emit(head, path)
                    for a, r in dfa.out(q2):
                        if r not in members:
                            explore(r, head, path + a)
            else:
                for q2 in sccs[comp]:
                    sub = sub_automaton(dfa, members, q, {q2})
                    assert not isinstance(sub, EmptyLanguage)
                    head = pieces + ([LitPiece(lit)] if lit else []) + [SubPiece(sub)]
                    if q2 in dfa.finals:
                        emit(head, "")
                    for a, r in dfa.out(q2):
                        if r not in members:
                            explore(r, head, a)
        else:
            if q in dfa.finals:
                emit(pieces, lit)
            for a, r in dfa.out(q):
                explore(r, pieces, lit + a)

    explore(0, [], "")
    return alternatives


def classify_flatness(dfa: Dfa) -> Flat | NonFlat:
    """Flat with an exact pattern decomposition, or NonFlat with a canonical
    butterfly certificate.

    Non-flat iff some nontrivial SCC of the trim DFA has a state with two
    or more successors inside the SCC: determinism makes the two induced
    cycles start with different letters, so they are not powers of one word.
    """
    scc_of, sccs = scc_partition(dfa)
    for i, s in enumerate(sccs):
        if not is_nontrivial_scc(dfa, s):
            continue
        if any(d >= 2 for d in _internal_degree(dfa, s).values()):
            return NonFlat(butterfly_at(dfa))
    patterns = []
    for alt in decompose_paths(dfa):
        literals = [""]
        loops = []
        for piece in alt:
            if isinstance(piece, LitPiece):
                literals[-1] = literals[-1] + piece.word
            elif isinstance(piece, LoopPiece):
                loops.append(piece.word)
                literals.append("")
            else:
                raise InternalError("non-flat piece in a flat decomposition")
        patterns.append(FlatPattern(tuple(literals), tuple(loops)))
    return Flat(tuple(sorted(set(patterns), key=FlatPattern.sort_key)))


def _simple_cycles_through(dfa: Dfa, state: int, members: set[int], first: Word) -> list[Word]:
    """Labels of simple in-SCC cycles through ``state`` whose first letter
    is ``first``; no state except ``state`` repeats."""
    out: list[Word] = []

    def walk(cur: int, label: list[Word], seen: set[int]):
        for a, r in dfa.out(cur):
            if r not in members:
                continue
            if r == state:
                out.append("".join(label) + a)
            elif r not in seen:
                seen.add(r)
                label.append(a)
                walk(r, label, seen)
                label.pop()
                seen.remove(r)

    start = dfa.step(state, first)
    if start is None or start not in members:
        return out
    if start == state:
        return [first]
    walk(start, [first], {start})
    return sorted(out)


def butterfly_at(dfa: Dfa) -> Butterfly:
    """Canonical butterfly of a non-flat trim DFA: the lowest-numbered
    branching SCC state, its two smallest branching letters, the lex-least
    simple cycles with those first letters, and the shortest-lex connectors
    to the initial state and the lowest reachable final."""
    scc_of, sccs = scc_partition(dfa)
    loop_state = None
    members: set[int] = set()
    for i, s in enumerate(sccs):
        if not is_nontrivial_scc(dfa, s):
            continue
        degrees = _internal_degree(dfa, s)
        branching = sorted(q for q, d in degrees.items() if d >= 2)
        if branching and (loop_state is None or branching[0] < loop_state):
            loop_state = branching[0]
            members = set(s)
    if loop_state is None:
        raise InputError("flat language has no butterfly")
    letters = [a for a, r in dfa.out(loop_state) if r in members]
    first_a, first_b = letters[0], letters[1]
    u = _simple_cycles_through(dfa, loop_state, members, first_a)[0]
    v = _simple_cycles_through(dfa, loop_state, members, first_b)[0]
    prefix = connector(dfa, 0, loop_state)
    final = min(f for f in dfa.finals if _reachable(dfa, loop_state, f))
    suffix = connector(dfa, loop_state, final)
    return Butterfly(prefix, u, v, suffix, loop_state)


def _reachable(dfa: Dfa, q: int, r: int) -> bool:
    seen = {q}
    stack = [q]
    while stack:
        s = stack.pop()
        if s == r:
            return True
        for _, t in dfa.out(s):
            if t not in seen:
                seen.add(t)
                stack.append(t)
    return False


def connector(dfa: Dfa, q: int, r: int) -> Word:
    """Lexicographically smallest among the shortest words from q to r.

    Breadth-first with successors expanded in symbol order: the first word
    that reaches a state is its length-then-lex minimum.
    """
    if q == r:
        return ""
    best = {q: ""}
    frontier = [q]
    while frontier:
        nxt = []
        for s in frontier:
            for a, t in dfa.out(s):
                if t not in best:
                    best[t] = best[s] + a
                    if t == r:
                        return best[t]
                    nxt.append(t)
        frontier = nxt
    raise InputError(f"state {r} is not reachable from state {q}")


# ---------------------------------------------------------------------------
# lengths and enumeration


@dataclass(frozen=True)
class LengthSet:
    """Ultimately periodic set of achievable word lengths."""

    finite: frozenset[int]
    cycles: frozenset[tuple[int, int]]  # (offset, period)

    def contains(self, n: int) -> bool:
        if n in self.finite:
            return True
        return any(n >= off and (n - off) % per == 0 for off, per in self.cycles)

    def is_finite(self) -> bool:
        return not self.cycles

    def candidates(self, repeats: int) -> list[int]:
        """The finite part plus offset + j*period for j up to ``repeats``."""
        out = set(self.finite)
        for off, per in self.cycles:
            out.update(off + j * per for j in range(repeats + 1))
        return sorted(out)

    def min_value(self) -> int:
        vals = list(self.finite) + [off for off, _ in self.cycles]
        if not vals:
            raise InputError("empty length set")
        return min(vals)

    def first_greater(self, bound: int) -> int | None:
        best = None
        for n in self.finite:
            if n > bound and (best is None or n < best):
                best = n
        for off, per in self.cycles:
            n = off if off > bound else off + ((bound - off) // per + 1) * per
            if best is None or n < best:
                best = n
        return best

    def periods_lcm(self) -> int:
        out = 1
        for _, per in self.cycles:
            out = math.lcm(out, per)
        return out


def length_set(dfa: Dfa) -> LengthSet:
    """Exact ultimately periodic representation of achievable lengths,
    computed on the single-letter projection by iterating reachable state
    sets until the subset sequence cycles."""
    seen: dict[frozenset, int] = {}
    accepting: list[bool] = []
    current = frozenset({0})
    step = 0
    while current not in seen:
        seen[current] = step
        accepting.append(bool(current & dfa.finals))
        nxt = frozenset(r for q in current for _, r in dfa.out(q))
        current = nxt
        step += 1
        if not current:
            # no longer any word of this length or more
            finite = frozenset(n for n, ok in enumerate(accepting) if ok)
            return LengthSet(finite, frozenset())
    start = seen[current]
    period = step - start
    finite = frozenset(n for n in range(start) if accepting[n])
    cycles = frozenset(
        (n, period) for n in range(start, start + period) if accepting[n]
    )
    return LengthSet(finite, cycles)


def _coreach_table(dfa: Dfa, max_len: int) -> list[set[int]]:
    """reach[k] = states from which a final is reachable in exactly k steps."""
    table = [set(dfa.finals)]
    preds = {q: dfa.in_edges(q) for q in range(dfa.n_states)}
    for _ in range(max_len):
        prev = table[-1]
        table.append({p for r in prev for _, p in preds[r]})
    return table


def enumerate_words(dfa: Dfa, max_len: int) -> list[Word]:
    """All accepted words of length <= max_len in length-then-lex order."""
    table = _coreach_table(dfa, max_len)
    out: list[Word] = []

    def extend(q: int, remaining: int, acc: list[Word]):
        if remaining == 0:
            if q in dfa.finals:
                out.append("".join(acc))
            return
        for a, r in dfa.out(q):
            if r in table[remaining - 1]:
                acc.append(a)
                extend(r, remaining - 1, acc)
                acc.pop()

    for length in range(max_len + 1):
        if 0 in table[length]:
            extend(0, length, [])
    return out


def lex_min_word_of_length(dfa: Dfa, length: int) -> Word | None:
    table = _coreach_table(dfa, length)
    if 0 not in table[length]:
        return None
    acc = []
    q = 0
    for remaining in range(length, 0, -1):
        for a, r in dfa.out(q):
            if r in table[remaining - 1]:
                acc.append(a)
                q = r
                break
        else:
            return None
    return "".join(acc)


def lex_min_shortest_word(dfa: Dfa) -> Word:
    n = length_set(dfa).min_value()
    word = lex_min_word_of_length(dfa, n)
    assert word is not None
    return word


def max_word_length(dfa: Dfa) -> int | None:
    """Longest accepted word length for a finite language, else None."""
    if not is_finite_dfa(dfa):
        return None
    # longest path to a final in the DAG-like trim automaton
    order: list[int] = []
    seen = set()

    def topo(q: int):
        if q in seen:
            return
        seen.add(q)
        for _, r in dfa.out(q):
            topo(r)
        order.append(q)

    topo(0)
    longest = {q: (0 if q in dfa.finals else None) for q in range(dfa.n_states)}
    for q in order:
        for _, r in dfa.out(q):
            if longest[r] is not None:
                cand = longest[r] + 1
                if longest[q] is None or cand > longest[q]:
                    longest[q] = cand
    result = longest.get(0)
    if result is None:
        raise InternalError("trim automaton with unreachable final")
    return result
