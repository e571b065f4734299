"""Elimination of two-sided non-flat variables by fresh separators, and the
reverse model lift through the recorded plan.

Replacing such a variable with a one-symbol separator is equisatisfiable:
a separator model lifts back by assigning the variable a long rigid word
``prefix . core . suffix`` built from its butterfly loops, sized so that
any partial self-overlap of the core forces a letter conflict.
"""

from __future__ import annotations

from dataclasses import dataclass

from .automata import Butterfly, butterfly_at
from .constraints import (
    Instance,
    Lit,
    Term,
    Var,
    eval_term,
    make_term,
    subst_var,
    term_vars,
)
from .errors import InternalError
from .words import Word, pick_core_power, primitive_pair, rigid_core


@dataclass(frozen=True)
class PlanEntry:
    var: str
    separator: Word
    butterfly: Butterfly
    alpha: Word
    beta: Word
    # term pieces around the variable's occurrences at elimination time
    needle_pieces: tuple[Term, ...]
    haystack_pieces: tuple[Term, ...]


def _pieces_around(term: Term, name: str) -> tuple[Term, ...]:
    pieces: list[list] = [[]]
    for item in term:
        if isinstance(item, Var) and item.name == name:
            pieces.append([])
        else:
            pieces[-1].append(item)
    return tuple(make_term(p) for p in pieces)


def _two_sided_nonflat(inst: Instance) -> list[str]:
    from .constraints import var_is_flat

    needle = term_vars(inst.needle)
    haystack = term_vars(inst.haystack)
    return sorted(
        x for x in needle if x in haystack and not var_is_flat(inst, x)
    )


def strip_two_sided(inst: Instance) -> tuple[Instance, list[PlanEntry]]:
    """Replace every two-sided non-flat variable (in lexicographic order)
    by a fresh separator literal, recording the lift data."""
    plan: list[PlanEntry] = []
    current = inst
    while True:
        pending = _two_sided_nonflat(current)
        if not pending:
            return current, plan
        z = pending[0]
        alphabet, sep = current.alphabet.with_separator()
        bfly = butterfly_at(current.langs[z])
        alpha, beta = primitive_pair(bfly.loop_a, bfly.loop_b)
        plan.append(
            PlanEntry(
                z,
                sep,
                bfly,
                alpha,
                beta,
                _pieces_around(current.needle, z),
                _pieces_around(current.haystack, z),
            )
        )
        replacement = (Lit(sep),)
        langs = {k: v for k, v in current.langs.items() if k != z}
        current = Instance(
            alphabet,
            subst_var(current.needle, z, replacement),
            subst_var(current.haystack, z, replacement),
            langs,
            {k: v for k, v in current.regexes.items() if k != z},
        )


def lift_model(inst: Instance, plan: list[PlanEntry], model: dict[str, Word]) -> dict[str, Word]:
    """Extend a model of the stripped instance to one of ``inst``.

    Entries are processed in reverse elimination order; each eliminated
    variable gets ``prefix . rigid_core(alpha, beta, r) . suffix`` with the
    minimal r making the core longer than every surrounding piece.  The
    result is verified against ``inst``; failure is an internal bug.
    """
    from .driver import verify_model

    sigma = dict(model)
    for entry in reversed(plan):
        pieces = entry.needle_pieces + entry.haystack_pieces
        longest = max((len(eval_term(p, sigma)) for p in pieces), default=0)
        bfly = entry.butterfly
        r = pick_core_power(entry.alpha, longest, bfly.prefix, bfly.suffix)
        core = rigid_core(entry.alpha, entry.beta, r)
        sigma[entry.var] = bfly.prefix + core + bfly.suffix
    lifted = {entry.var for entry in plan}
    for name, word in sigma.items():
        if name in lifted and inst.alphabet.has_separator(word):
            raise InternalError("separator leaked into a lifted value")
    if not verify_model(inst, sigma):
        raise InternalError("lifted assignment failed verification")
    return sigma
