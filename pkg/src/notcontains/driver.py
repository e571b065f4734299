"""Search orchestration.

Normalization, the easy solves, two-sided stripping, guess-frame
enumeration, flat underapproximation and gluing for the remaining non-flat
haystack variables, the terminal flat solve, model reconstruction, and
verification of every satisfying assignment against the original instance.
Also the brute-force enumeration oracle used by the test harness.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field

from . import automata
from .automata import EmptyLanguage, FlatPattern, restrict_min_length, star_loop_word
from .constraints import (
    Bounds,
    Disjunct,
    Instance,
    Lit,
    Term,
    Var,
    classify,
    compute_bounds,
    eval_term,
    make_term,
    needle_bases,
    normalize,
    subst_var,
    term_vars,
    var_is_flat,
)
from .errors import CapExceeded, InputError, InternalError
from .flatsolver import FlatInstance, FlatResult, solve_flat
from .twosided import lift_model, strip_two_sided
from .underapprox import Caps, flat_half, glue, make_context
from .words import Word, is_factor


@dataclass
class SolveConfig:
    bounds_profile: str = "paper"  # "paper" or "scaled:<factor>"
    iter_bound: int = 8
    max_paths: int = 100_000
    max_patterns: int = 50_000
    max_guesses: int = 512
    normalization_cap: int = 4096
    workers: int = 1
    seed: int = 0
    trace: object = None

    def caps(self) -> Caps:
        return Caps(self.max_paths, self.max_patterns)

    def scale_factor(self) -> float | None:
        if self.bounds_profile == "paper":
            return None
        if self.bounds_profile.startswith("scaled:"):
            try:
                factor = float(self.bounds_profile.split(":", 1)[1])
            except ValueError:
                raise InputError(f"bad bounds profile {self.bounds_profile!r}") from None
            if not 0 < factor <= 1:
                raise InputError("scale factor must be in (0, 1]")
            return factor
        raise InputError(f"bad bounds profile {self.bounds_profile!r}")


@dataclass
class Stats:
    disjuncts: int = 0
    guesses: int = 0
    paths: int = 0
    patterns: int = 0
    time_ms: int = 0

    def counters(self) -> dict:
        return {
            "disjuncts": self.disjuncts,
            "guesses": self.guesses,
            "paths": self.paths,
            "patterns": self.patterns,
        }


@dataclass
class Verdict:
    status: str  # sat | unsat | unknown
    model: dict[str, Word] | None = None
    reason: str | None = None
    stats: Stats = field(default_factory=Stats)


# ---------------------------------------------------------------------------
# syntactic refutation


def term_always_factor(needle: Term, haystack: Term) -> bool:
    """Sound (not complete) check that the needle term occurs inside the
    haystack term under every assignment: the needle's items match a window
    of haystack items, with literal containment allowed at the borders."""
    if not needle:
        return True
    n = list(needle)
    h = list(haystack)

    def border_ok(n_item, h_item, end: str) -> bool:
        if isinstance(n_item, Var) or isinstance(h_item, Var):
            return n_item == h_item
        if end == "left":
            return h_item.word.endswith(n_item.word)
        return h_item.word.startswith(n_item.word)

    if len(n) == 1:
        item = n[0]
        for h_item in h:
            if isinstance(item, Var):
                if item == h_item:
                    return True
            elif isinstance(h_item, Lit) and item.word in h_item.word:
                return True
        return False

    for i in range(len(h) - len(n) + 1):
        window = h[i:i + len(n)]
        if (
            border_ok(n[0], window[0], "left")
            and all(a == b for a, b in zip(n[1:-1], window[1:-1]))
            and border_ok(n[-1], window[-1], "right")
        ):
            return True
    return False


# ---------------------------------------------------------------------------
# oracle and verification


@dataclass
class OracleResult:
    status: str  # sat | none | exhausted
    model: dict[str, Word] | None = None


def brute_oracle(inst: Instance, len_bound: int) -> OracleResult:
    """Enumerate every assignment with |value| <= len_bound per variable,
    values drawn from the variable's language in length-then-lex order,
    variables in name order.  Sat on the first model; ``exhausted`` when
    every language is finite and fully covered at the bound."""
    names = sorted(inst.occurring_vars())
    values = []
    covered = True
    for x in names:
        dfa = inst.langs[x]
        if isinstance(dfa, EmptyLanguage):
            return OracleResult("exhausted")
        values.append(automata.enumerate_words(dfa, len_bound))
        top = automata.max_word_length(dfa)
        if top is None or top > len_bound:
            covered = False
    for combo in itertools.product(*values):
        model = dict(zip(names, combo))
        if not is_factor(eval_term(inst.needle, model), eval_term(inst.haystack, model)):
            return OracleResult("sat", model)
    return OracleResult("exhausted" if covered else "none")


def verify_model(inst: Instance, model: dict[str, Word]) -> bool:
    """Memberships plus the non-containment itself, against ``inst``."""
    for x in inst.occurring_vars():
        if x not in model:
            return False
    for x, word in model.items():
        dfa = inst.langs.get(x)
        if dfa is not None and not dfa.accepts(word):
            return False
    return not is_factor(
        eval_term(inst.needle, model), eval_term(inst.haystack, model)
    )


# ---------------------------------------------------------------------------
# the solve pipeline


def solve(inst: Instance, config: SolveConfig | None = None) -> Verdict:
    """Decide the instance; every Sat verdict carries a model that passed
    verification against the original instance."""
    config = config or SolveConfig()
    trace = config.trace or (lambda line: None)
    stats = Stats()
    started = time.perf_counter()

    def finish(status, model=None, reason=None) -> Verdict:
        stats.time_ms = int((time.perf_counter() - started) * 1000)
        return Verdict(status, model, reason, stats)

    if term_always_factor(inst.needle, inst.haystack):
        trace("refuted: needle occurs in haystack syntactically")
        return finish("unsat")

    try:
        disjuncts = normalize(inst, config.normalization_cap)
    except CapExceeded as cap:
        return finish("unknown", reason=cap.reason)
    stats.disjuncts = len(disjuncts)
    trace(f"normalize: {len(disjuncts)} disjunct(s)")

    unknown_reason = None
    for index, disjunct in enumerate(disjuncts):
        if disjunct.trivially_sat:
            status, model, reason = "sat", {}, None
        else:
            status, model, reason = _solve_normalized(
                disjunct.instance, config, stats, trace
            )
        trace(f"disjunct {index}: {status}")
        if status == "sat":
            full = _reconstruct(inst, disjunct, model)
            if not verify_model(inst, full):
                raise InternalError("model failed verification against the input")
            return finish("sat", model=full)
        if status == "unknown" and unknown_reason is None:
            unknown_reason = reason
    if unknown_reason is None:
        return finish("unsat")
    return finish("unknown", reason=unknown_reason)


def _reconstruct(inst: Instance, disjunct: Disjunct, model: dict[str, Word]) -> dict[str, Word]:
    full = {name: eval_term(term, model) for name, term in disjunct.recon.items()}
    for name, dfa in inst.langs.items():
        if name not in full:
            full[name] = automata.lex_min_shortest_word(dfa)
    for name, word in full.items():
        if inst.alphabet.has_separator(word):
            raise InternalError("separator symbol leaked into a model value")
    return full


def _solve_normalized(inst: Instance, config: SolveConfig, stats: Stats, trace):
    """Decide one normalized disjunct.  Returns (status, model, reason)."""
    occurring = inst.occurring_vars()
    if not occurring:
        holds = not is_factor(eval_term(inst.needle, {}), eval_term(inst.haystack, {}))
        return ("sat", {}, None) if holds else ("unsat", None, None)
    if any(isinstance(inst.langs[x], EmptyLanguage) for x in occurring):
        return ("unsat", None, None)
    if term_always_factor(inst.needle, inst.haystack):
        return ("unsat", None, None)

    probe = brute_oracle(inst, 3)
    if probe.status == "sat":
        return ("sat", probe.model, None)

    outcome = classify(inst)
    trace(f"  classified: {outcome.kind}")
    if outcome.kind in ("easy-length-sat", "needle-only-sat"):
        return ("sat", outcome.model, None)
    if outcome.kind == "easy-all-flat":
        result = _flat_route(inst, config)
        return (result.status, result.model, result.reason)
    if outcome.kind == "hard-two-sided":
        stripped, plan = strip_two_sided(inst)
        trace(f"  stripped {len(plan)} two-sided variable(s)")
        status, model, reason = _solve_normalized(stripped, config, stats, trace)
        if status == "sat":
            return ("sat", lift_model(inst, plan, model), None)
        return (status, model, reason)
    return _solve_haystack_only(inst, config, stats, trace)


def _w_star_patterns(inst: Instance, name: str) -> tuple[FlatPattern, ...]:
    loop = star_loop_word(inst.langs[name])
    if loop is None:
        raise InternalError(f"flat variable {name!r} is not in w* shape")
    return (FlatPattern(("", ""), (loop,)),)


def _flat_route(inst: Instance, config: SolveConfig) -> FlatResult:
    patterns = {}
    for x in inst.occurring_vars():
        result = automata.classify_flatness(inst.langs[x])
        assert isinstance(result, automata.Flat)
        patterns[x] = result.patterns
    flat = FlatInstance(inst.alphabet, inst.needle, inst.haystack, patterns)
    return solve_flat(flat, config.iter_bound)


def _scaled_bounds(inst: Instance, config: SolveConfig) -> Bounds:
    bounds = compute_bounds(inst)
    factor = config.scale_factor()
    return bounds if factor is None else bounds.scaled(factor)


def _solve_haystack_only(inst: Instance, config: SolveConfig, stats: Stats, trace):
    bounds = _scaled_bounds(inst, config)
    trace(f"  bounds: k0={bounds.k0} n0={bounds.n0} g={bounds.g}")
    occurring = inst.occurring_vars()
    flat_vars = sorted(x for x in occurring if var_is_flat(inst, x))
    hard_vars = sorted(x for x in occurring if not var_is_flat(inst, x))
    bases = needle_bases(inst)
    max_base = max((len(b) for b in bases.values()), default=0)
    contexts = {
        z: make_context(inst, z, max_base, bounds.g) for z in hard_vars
    }

    shorts = {
        x: automata.enumerate_words(inst.langs[x], bounds.n0 - 1) for x in flat_vars
    }

    unknown_reason = None
    guesses = 0
    for size in range(len(flat_vars) + 1):
        for long_vars in itertools.combinations(flat_vars, size):
            short_vars = [x for x in flat_vars if x not in long_vars]
            for values in itertools.product(*[shorts[x] for x in short_vars]):
                guesses += 1
                stats.guesses += 1
                if guesses > config.max_guesses:
                    return ("unknown", None, unknown_reason or "guess-cap")
                sigma = dict(zip(short_vars, values))
                status, model, reason = _solve_frame(
                    inst, config, stats, bounds, contexts, long_vars, sigma
                )
                if status == "sat":
                    return ("sat", model, None)
                if status == "unknown" and unknown_reason is None:
                    unknown_reason = reason
    if unknown_reason is None:
        return ("unsat", None, None)
    return ("unknown", None, unknown_reason)


def _solve_frame(inst, config, stats, bounds, contexts, long_vars, sigma):
    """One guess frame: short flat variables fixed to words, long ones
    restricted to length >= n0, non-flat haystack variables replaced by
    their glued flat covers."""
    needle, haystack = inst.needle, inst.haystack
    for x, word in sigma.items():
        needle = subst_var(needle, x, (Lit(word),))
        haystack = subst_var(haystack, x, (Lit(word),))
    if term_always_factor(needle, haystack):
        return ("unsat", None, None)

    survivors = set(term_vars(needle)) | set(term_vars(haystack))
    frame = Instance(
        inst.alphabet,
        needle,
        haystack,
        {x: inst.langs[x] for x in survivors},
    )

    patterns: dict = {}
    for x in long_vars:
        if x not in survivors:
            continue
        restricted: list[FlatPattern] = []
        for pat in _w_star_patterns(inst, x):
            restricted.extend(restrict_min_length(pat, bounds.n0))
        if not restricted:
            return ("unsat", None, None)
        patterns[x] = tuple(restricted)

    try:
        for z, ctx in contexts.items():
            if z not in survivors:
                continue
            pref = flat_half(frame, ctx, "pref", bounds, config.caps())
            suf = flat_half(frame, ctx, "suf", bounds, config.caps())
            stats.paths += len(pref.partial) + len(suf.partial)
            glued = glue(pref, suf, config.max_patterns)
            stats.patterns += len(glued)
            patterns[z] = glued
    except CapExceeded as cap:
        return ("unknown", None, cap.reason)

    flat = FlatInstance(inst.alphabet, needle, haystack, patterns)
    result = solve_flat(flat, config.iter_bound)
    if result.status == "sat":
        model = dict(result.model)
        model.update(sigma)
        return ("sat", model, None)
    return (result.status, None, result.reason)
