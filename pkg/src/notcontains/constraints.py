"""Instance data model, normalization into decomposed disjuncts, fragment
classification, bound computation, and loop-base extraction."""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field

from . import automata
from .automata import (
    Dfa,
    EMPTY,
    EmptyLanguage,
    Flat,
    LitPiece,
    LoopPiece,
    NonFlat,
    SubPiece,
    butterfly_at,
    canonical_dfa,
    classify_flatness,
    decompose_paths,
    dfa_from_parts,
    is_finite_dfa,
    parse_regex,
    star_loop_word,
)
from .errors import CapExceeded, InputError, InternalError
from .words import Alphabet, Word, is_factor, primitive_root, pump_word

# ---------------------------------------------------------------------------
# terms


@dataclass(frozen=True)
class Lit:
    word: Word


@dataclass(frozen=True)
class Var:
    name: str


Term = tuple


def make_term(items) -> Term:
    """Normalize an item sequence: drop empty literals, merge adjacent ones."""
    out: list = []
    for item in items:
        if isinstance(item, Lit):
            if not item.word:
                continue
            if out and isinstance(out[-1], Lit):
                out[-1] = Lit(out[-1].word + item.word)
                continue
        out.append(item)
    return tuple(out)


def term_vars(term: Term) -> list[str]:
    """Variable names in occurrence order, deduplicated."""
    seen: list[str] = []
    for item in term:
        if isinstance(item, Var) and item.name not in seen:
            seen.append(item.name)
    return seen


def subst_var(term: Term, name: str, replacement: Term) -> Term:
    out: list = []
    for item in term:
        if isinstance(item, Var) and item.name == name:
            out.extend(replacement)
        else:
            out.append(item)
    return make_term(out)


def eval_term(term: Term, assignment: dict[str, Word]) -> Word:
    parts = []
    for item in term:
        if isinstance(item, Lit):
            parts.append(item.word)
        else:
            if item.name not in assignment:
                raise InternalError(f"assignment is missing variable {item.name!r}")
            parts.append(assignment[item.name])
    return "".join(parts)


def literal_lengths(term: Term) -> list[int]:
    return [len(item.word) for item in term if isinstance(item, Lit)]


# ---------------------------------------------------------------------------
# instances


@dataclass
class Instance:
    """A single not-contains constraint: needle, haystack, and one regular
    language per variable.  Treated as immutable after construction."""

    alphabet: Alphabet
    needle: Term
    haystack: Term
    langs: dict[str, Dfa]
    regexes: dict[str, str] = field(default_factory=dict)

    def occurring_vars(self) -> list[str]:
        seen = term_vars(self.needle)
        for name in term_vars(self.haystack):
            if name not in seen:
                seen.append(name)
        return seen

    def decode(self, word: Word) -> str:
        return self.alphabet.decode(word)


_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


def parse_instance(document: dict) -> Instance:
    """Build an Instance from the CLI document schema, with diagnostics."""
    if not isinstance(document, dict):
        raise InputError("instance document must be a JSON object")
    unknown = set(document) - {"alphabet", "vars", "needle", "haystack"}
    if unknown:
        raise InputError(f"unknown document keys: {sorted(unknown)}")
    letters = document.get("alphabet")
    if not isinstance(letters, str):
        raise InputError("'alphabet' must be a string of distinct letters")
    if "#" in letters:
        raise InputError("'#' is reserved and cannot be an alphabet letter")
    if len(set(letters)) != len(letters):
        raise InputError("alphabet letters must be distinct")
    alphabet = Alphabet(letters)

    langs: dict[str, Dfa] = {}
    regexes: dict[str, str] = {}
    for entry in document.get("vars", []):
        if not isinstance(entry, dict) or set(entry) != {"name", "regex"}:
            raise InputError("each vars entry must be {'name': ..., 'regex': ...}")
        name, regex = entry["name"], entry["regex"]
        if not isinstance(name, str) or not _NAME_RE.match(name):
            raise InputError(f"invalid variable name {name!r}")
        if name in langs:
            raise InputError(f"duplicate variable {name!r}")
        dfa = canonical_dfa(parse_regex(regex, alphabet))
        if isinstance(dfa, EmptyLanguage):
            raise InputError(f"variable {name!r} has an empty language")
        langs[name] = dfa
        regexes[name] = regex

    def read_term(key: str) -> Term:
        items: list = []
        raw = document.get(key)
        if not isinstance(raw, list):
            raise InputError(f"'{key}' must be a list of items")
        for item in raw:
            if not isinstance(item, dict) or len(item) != 1:
                raise InputError(f"'{key}' items must be {{'lit': ...}} or {{'var': ...}}")
            if "lit" in item:
                items.append(Lit(alphabet.encode(item["lit"])))
            elif "var" in item:
                if item["var"] not in langs:
                    raise InputError(f"'{key}' references undeclared variable {item['var']!r}")
                items.append(Var(item["var"]))
            else:
                raise InputError(f"'{key}' items must be {{'lit': ...}} or {{'var': ...}}")
        return make_term(items)

    return Instance(alphabet, read_term("needle"), read_term("haystack"), langs, regexes)


# ---------------------------------------------------------------------------
# normalization


@dataclass
class Disjunct:
    """One normalized disjunct plus the map back to the original variables."""

    instance: Instance
    recon: dict[str, Term]
    trivially_sat: bool = False


def _alternative_term(var: str, alt_index: int, pieces) -> tuple[Term, dict[str, Dfa]]:
    items: list = []
    fresh: dict[str, Dfa] = {}
    slot = 0
    for piece in pieces:
        if isinstance(piece, LitPiece):
            items.append(Lit(piece.word))
            continue
        name = f"{var}.{alt_index}.{slot}"
        slot += 1
        if isinstance(piece, LoopPiece):
            dfa = dfa_from_parts([("star", piece.word)])
        elif isinstance(piece, SubPiece):
            dfa = piece.dfa
        else:
            raise AssertionError(piece)
        assert isinstance(dfa, Dfa)
        fresh[name] = dfa
        items.append(Var(name))
    return make_term(items), fresh


def normalize(inst: Instance, cap: int = 4096) -> list[Disjunct]:
    """Equisatisfiable disjunction of normalized constraints.

    Every occurring variable is split over the SCC-dag traversals of its
    automaton; simple cycles become fresh w*-variables, other nontrivial
    components become fresh decomposed variables, finite stretches become
    literals.  Variable-free disjuncts are evaluated: false ones dropped,
    a true one short-circuits as a trivially satisfiable witness.

    Raises CapExceeded("normalization-cap") past ``cap`` disjuncts.
    """
    names = sorted(inst.occurring_vars())
    per_var: list[list] = []
    for name in names:
        alts = decompose_paths(inst.langs[name], cap)
        per_var.append([
            _alternative_term(name, i, pieces) for i, pieces in enumerate(alts)
        ])

    total = 1
    for alts in per_var:
        total *= len(alts)
        if total > cap:
            raise CapExceeded("normalization-cap")

    disjuncts: list[Disjunct] = []
    for combo in itertools.product(*per_var):
        needle, haystack = inst.needle, inst.haystack
        langs: dict[str, Dfa] = {}
        recon: dict[str, Term] = {}
        for name, (term, fresh) in zip(names, combo):
            needle = subst_var(needle, name, term)
            haystack = subst_var(haystack, name, term)
            recon[name] = term
            langs.update(fresh)
        occurring = set(term_vars(needle)) | set(term_vars(haystack))
        langs = {k: v for k, v in langs.items() if k in occurring}
        sub = Instance(inst.alphabet, needle, haystack, langs)
        if not occurring:
            if not is_factor(eval_term(needle, {}), eval_term(haystack, {})):
                return [Disjunct(sub, recon, trivially_sat=True)]
            continue
        disjuncts.append(Disjunct(sub, recon))
        if len(disjuncts) > cap:
            raise CapExceeded("normalization-cap")
    return disjuncts


# ---------------------------------------------------------------------------
# classification


def var_is_flat(inst: Instance, name: str) -> bool:
    return isinstance(classify_flatness(inst.langs[name]), Flat)


@dataclass(frozen=True)
class Classification:
    kind: str  # easy-length-sat | needle-only-sat | easy-all-flat |
    #            hard-two-sided | hard-haystack-only
    model: dict | None = None


def classify(inst: Instance) -> Classification:
    """First matching class, in order: a length-abstraction witness, an
    infinite variable occurring only in the needle (satisfiable by pumping),
    all variables flat, a two-sided non-flat variable, and otherwise
    non-flat variables confined to the haystack."""
    from .flatsolver import length_abstraction

    witness = length_abstraction(inst)
    if witness is not None:
        return Classification("easy-length-sat", witness)

    needle_vars = term_vars(inst.needle)
    haystack_vars = term_vars(inst.haystack)
    needle_only = [x for x in needle_vars if x not in haystack_vars]
    if needle_only:
        return Classification("needle-only-sat", _pump_needle_model(inst, needle_only[0]))

    flat = {x: var_is_flat(inst, x) for x in inst.occurring_vars()}
    if all(flat.values()):
        return Classification("easy-all-flat")
    two_sided = [
        x for x in needle_vars if x in haystack_vars and not flat[x]
    ]
    if two_sided:
        return Classification("hard-two-sided")
    return Classification("hard-haystack-only")


def _pump_needle_model(inst: Instance, pump_var: str) -> dict[str, Word]:
    """Model for a constraint with an infinite needle-only variable: every
    other variable takes its least word, then the needle-only variable is
    pumped past the haystack length."""
    model = {
        x: automata.lex_min_shortest_word(inst.langs[x])
        for x in inst.occurring_vars()
        if x != pump_var
    }
    haystack_len = len(eval_term(inst.haystack, model))
    target = automata.length_set(inst.langs[pump_var]).first_greater(haystack_len)
    if target is None:
        raise InternalError(f"variable {pump_var!r} is not infinite")
    word = automata.lex_min_word_of_length(inst.langs[pump_var], target)
    assert word is not None
    model[pump_var] = word
    return model


# ---------------------------------------------------------------------------
# bounds


@dataclass(frozen=True)
class Bounds:
    p_lit: int
    p_aut: int
    p_prim: int
    k0: int
    n0: int
    g: int

    def scaled(self, factor: float) -> "Bounds":
        """Desk-scale profile: shrink the three bounds, floored so that
        k0 < n0 < g still holds.  Theoretically incomplete; used for tests."""
        k0 = max(2, int(self.k0 * factor))
        n0 = max(k0 + 1, int(self.n0 * factor))
        g = max(n0 + 1, int(self.g * factor))
        return Bounds(self.p_lit, self.p_aut, self.p_prim, k0, n0, g)


def needle_bases(inst: Instance) -> dict[str, Word]:
    """Primitive base of every flat needle variable."""
    return {
        x: base_word(inst, x)
        for x in term_vars(inst.needle)
        if var_is_flat(inst, x)
    }


def compute_bounds(inst: Instance) -> Bounds:
    """The three enumeration bounds from the instance parameters:
    k0 = 2*p_prim*p_aut + p_lit, n0 = k0 + 4*p_prim + p_aut,
    g = n0 + 2*p_prim + 2*p_lit."""
    p_lit = max(
        literal_lengths(inst.needle) + literal_lengths(inst.haystack),
        default=0,
    )
    p_aut = max((d.n_states for d in inst.langs.values()), default=0)
    bases = [len(b) for b in needle_bases(inst).values()]
    max_base = max(bases, default=0)
    pumps = []
    for z in term_vars(inst.haystack):
        if not var_is_flat(inst, z):
            b = butterfly_at(inst.langs[z])
            pumps.append(len(pump_word(b.loop_a, b.loop_b, max_base)))
    p_prim = max(bases + pumps, default=0)
    k0 = 2 * p_prim * p_aut + p_lit
    n0 = k0 + 4 * p_prim + p_aut
    g = n0 + 2 * p_prim + 2 * p_lit
    return Bounds(p_lit, p_aut, p_prim, k0, n0, g)


def base_word(inst: Instance, name: str) -> Word:
    """Primitive root of the loop word of a decomposed flat variable, whose
    language must have the shape w*."""
    loop = star_loop_word(inst.langs[name])
    if loop is None:
        raise InputError(f"variable {name!r} does not have a w* language")
    return primitive_root(loop)[0]
