"""Command-line front end: ``solve`` for one instance, ``bench`` for a
directory of instances."""

from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .constraints import Instance, parse_instance
from .driver import SolveConfig, Verdict, solve
from .errors import InputError, InternalError
from .flatsolver import emit_smtlib


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--input", required=True, help="instance file or directory")
    parser.add_argument("--bounds-profile", default="paper",
                        help="paper (exact bounds) or scaled:F with 0 < F <= 1")
    parser.add_argument("--iter-bound", type=int, default=8)
    parser.add_argument("--max-paths", type=int, default=100_000)
    parser.add_argument("--oracle-check", type=int, default=None, metavar="L",
                        help="also run the brute-force oracle up to length L")
    parser.add_argument("--emit-smt", default=None, metavar="PATH",
                        help="write an SMT-LIB script (solve: file, bench: directory)")
    parser.add_argument("--trace", action="store_true",
                        help="stage-by-stage log on standard error")
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--seed", type=int, default=0,
                        help="reserved for randomized generation; no semantic effect")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="notcontains",
        description="decide a single not-contains string constraint",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    _add_common_flags(sub.add_parser("solve", help="solve one instance file"))
    _add_common_flags(sub.add_parser("bench", help="solve every instance in a directory"))
    return parser


def _config_from(args) -> SolveConfig:
    return SolveConfig(
        bounds_profile=args.bounds_profile,
        iter_bound=args.iter_bound,
        max_paths=args.max_paths,
        workers=args.workers,
        seed=args.seed,
        trace=(lambda line: print(line, file=sys.stderr)) if args.trace else None,
    )


def _load_instance(path: Path) -> Instance:
    try:
        raw = path.read_text()
    except OSError as err:
        raise InputError(f"cannot read {path}: {err}") from None
    try:
        document = json.loads(raw)
    except json.JSONDecodeError as err:
        raise InputError(f"{path}: not valid JSON ({err})") from None
    return parse_instance(document)


def _result_document(inst: Instance, verdict: Verdict, profile: str) -> dict:
    doc: dict = {"status": verdict.status}
    if verdict.status == "sat":
        doc["model"] = {
            name: inst.decode(word) for name, word in sorted(verdict.model.items())
        }
    if verdict.status == "unknown":
        doc["reason"] = verdict.reason
    doc["profile"] = profile
    doc["stats"] = verdict.stats.counters()
    return doc


def _run_oracle_check(inst: Instance, verdict: Verdict, bound: int) -> dict:
    from .driver import brute_oracle

    oracle = brute_oracle(inst, bound)
    if verdict.status == "sat":
        long_model = verdict.model and max(
            (len(w) for w in verdict.model.values()), default=0
        ) > bound
        agrees = oracle.status == "sat" or bool(long_model)
    elif verdict.status == "unsat":
        agrees = oracle.status != "sat"
    else:
        agrees = True
    return {"bound": bound, "status": oracle.status, "agrees": agrees}


def _solve_command(args) -> int:
    inst = _load_instance(Path(args.input))
    if args.emit_smt:
        with open(args.emit_smt, "w") as sink:
            emit_smtlib(inst, sink)
    verdict = solve(inst, _config_from(args))
    doc = _result_document(inst, verdict, args.bounds_profile)
    if args.oracle_check is not None:
        doc["oracle"] = _run_oracle_check(inst, verdict, args.oracle_check)
    print(json.dumps(doc, separators=(",", ":"), sort_keys=False))
    return 0


def _bench_one(path_str: str, args) -> tuple[str, str, int, str]:
    path = Path(path_str)
    started = time.perf_counter()
    inst = _load_instance(path)
    if args.emit_smt:
        target = Path(args.emit_smt)
        target.mkdir(parents=True, exist_ok=True)
        with open(target / (path.stem + ".smt2"), "w") as sink:
            emit_smtlib(inst, sink)
    verdict = solve(inst, _config_from(args))
    elapsed = int((time.perf_counter() - started) * 1000)
    return (path.name, verdict.status, elapsed, args.bounds_profile)


def _bench_command(args) -> int:
    directory = Path(args.input)
    if not directory.is_dir():
        raise InputError(f"{directory} is not a directory")
    files = sorted(str(p) for p in directory.glob("*.json"))
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            rows = list(pool.map(_bench_one, files, [args] * len(files)))
    else:
        rows = [_bench_one(path, args) for path in files]
    print("file,status,ms,profile")
    counts = {"sat": 0, "unsat": 0, "unknown": 0}
    for name, status, ms, profile in rows:
        counts[status] += 1
        print(f"{name},{status},{ms},{profile}")
    total = len(rows)
    print(
        f"# total={total} sat={counts['sat']} unsat={counts['unsat']} "
        f"unknown={counts['unknown']}"
    )
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "solve":
            return _solve_command(args)
        return _bench_command(args)
    except InputError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except InternalError as err:
        print(f"internal error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
