"""Command-line front end: ``threedpm <command> ...``.

Exit status is 0 when the property holds or an object was found, 1 when it
fails or nothing exists, and 2 for usage errors, unreadable input, violated
preconditions and searches stopped by ``--max-nodes``.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import io as tio
from .model import (
    Instance,
    InstanceError,
    InvalidMatchingError,
    Matching,
    PreconditionError,
    Verdict,
    check_matching,
    delta,
)
from .reduce import (
    ReductionError,
    oracle_3dm,
    oracle_osties,
    oracle_sat,
    reduce_3dm_pmvi,
    reduce_3dm_spmi,
    reduce_osties_ab,
    reduce_sat,
)
from .solve import construct_obs1, solve, witness_2ml, witness_3ml
from .verify import PROPERTIES, SearchLimitExceeded, more_popular_search, verify

log = logging.getLogger("threedpm")

EXIT_YES, EXIT_NO, EXIT_ERROR = 0, 1, 2
INPUT_ERRORS = (OSError, InstanceError, InvalidMatchingError, PreconditionError, ReductionError, ValueError)


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text(encoding="utf-8")


def _load_instance(path: str) -> Instance:
    return tio.parse_instance(_read(path))


def _load_matching(path: str, inst: Instance) -> Matching:
    M = tio.parse_matching(_read(path), inst)
    check_matching(inst, M)
    return M


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _triples_json(M: Matching, inst: Instance) -> list[list[str]]:
    return [list(t) for t in M.sorted(inst)]


def _verdict_json(v: Verdict, inst: Instance) -> dict:
    if v.witness is None:
        w = None
    elif isinstance(v.witness, Matching):
        w = _triples_json(v.witness, inst)
    else:
        w = list(v.witness)
    return {"property": v.property, "holds": v.holds, "witness": w, "delta": v.delta}


# -- commands -----------------------------------------------------------------


def cmd_verify(args) -> int:
    inst = _load_instance(args.instance)
    M = _load_matching(args.matching, inst)
    v = verify(inst, M, args.property, voters=args.voters, strategy=args.strategy,
               max_nodes=args.max_nodes, workers=args.threads)
    if args.json:
        print(json.dumps(_verdict_json(v, inst)))
    else:
        print(f"{v.property}: {'holds' if v.holds else 'fails'}")
        if args.witness and v.witness is not None:
            if isinstance(v.witness, Matching):
                print(f"# more popular matching, delta {v.delta} ({v.votes_for} for, {v.votes_against} against)")
                sys.stdout.write(tio.serialize_matching(v.witness, inst))
            else:
                print("blocking triple: " + " ".join(v.witness))
    return EXIT_YES if v.holds else EXIT_NO


def cmd_solve(args) -> int:
    inst = _load_instance(args.instance)
    M = solve(inst, args.property, args.strategy, max_nodes=args.max_nodes, workers=args.threads)
    if args.json:
        print(json.dumps({"property": args.property, "found": M is not None,
                          "matching": None if M is None else _triples_json(M, inst)}))
    elif M is None:
        print("none")
    else:
        _emit(tio.serialize_matching(M, inst), args.output)
    return EXIT_NO if M is None else EXIT_YES


def cmd_witness(args) -> int:
    inst = _load_instance(args.instance)
    if args.method == "obs1":
        Mp = construct_obs1(inst)
        _emit(tio.serialize_matching(Mp, inst), args.output)
        return EXIT_YES
    if args.matching is None:
        raise UsageError(f"--method={args.method} needs a matching file")
    M = _load_matching(args.matching, inst)
    if args.method == "3ml":
        Mp = witness_3ml(inst, M)
    elif args.method == "2ml":
        Mp = witness_2ml(inst, M)
    else:
        Mp = more_popular_search(inst, M, args.voters, "win", max_nodes=args.max_nodes, workers=args.threads)
        if Mp is None:
            print("none")
            return EXIT_NO
    header, body = tio.serialize_matching(Mp, inst).split("\n", 1)
    _emit(f"{header}\n# delta {delta(inst, Mp, M, args.voters)}\n{body}", args.output)
    return EXIT_YES


def cmd_reduce(args) -> int:
    text = _read(args.input)
    designated = None
    if args.source == "sat":
        inst = reduce_sat(tio.parse_sat(text))
    elif args.source == "3dm-spm":
        inst, designated = reduce_3dm_spmi(tio.parse_cyclic3dm(text))
    elif args.source == "3dm-pmv":
        inst, designated = reduce_3dm_pmvi(tio.parse_cyclic3dm(text))
    else:
        inst = reduce_osties_ab(tio.parse_osties(text))
    inst_text = tio.serialize_instance(inst)
    if args.output is None:
        sys.stdout.write(inst_text)
        if designated is not None:
            sys.stdout.write(tio.serialize_matching(designated, inst))
        return EXIT_YES
    Path(args.output + ".inst").write_text(inst_text, encoding="utf-8")
    written = [args.output + ".inst"]
    if designated is not None:
        Path(args.output + ".match").write_text(tio.serialize_matching(designated, inst), encoding="utf-8")
        written.append(args.output + ".match")
    log.info("wrote %s", ", ".join(written))
    return EXIT_YES


def cmd_generate(args) -> int:
    inst = tio.generate(args.kind, args.n, args.k, not args.incomplete, args.seed)
    _emit(tio.serialize_instance(inst), args.output)
    return EXIT_YES


def cmd_oracle(args) -> int:
    text = _read(args.input)
    if args.problem == "sat":
        phi = tio.parse_sat(text)
        sigma = oracle_sat(phi)
        out = None if sigma is None else tio.serialize_assignment(phi, sigma)
    elif args.problem == "3dm":
        found = oracle_3dm(tio.parse_cyclic3dm(text))
        out = None if found is None else "".join(" ".join(t) + "\n" for t in found)
    else:
        pairs = oracle_osties(tio.parse_osties(text))
        out = None if pairs is None else tio.serialize_osties_matching(pairs)
    if out is None:
        print("none")
        return EXIT_NO
    sys.stdout.write(out)
    return EXIT_YES


# -- parser -------------------------------------------------------------------


def _positive(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _default_threads() -> int:
    raw = os.environ.get("THREEDPM_THREADS")
    if not raw:
        return 1
    try:
        return _positive(raw)
    except (ValueError, argparse.ArgumentTypeError):
        raise UsageError(f"THREEDPM_THREADS must be a positive integer, got {raw!r}") from None


def _global_flags(suppress: bool) -> argparse.ArgumentParser:
    # subcommands repeat the global flags; their defaults are suppressed so
    # that a value given before the command name is not overwritten
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--max-nodes", type=_positive, default=d(None),
                        help="abort exhaustive searches after this many nodes (exit 2)")
    common.add_argument("--threads", type=_positive, default=d(None),
                        help="worker processes for searches (default: $THREEDPM_THREADS or 1); "
                             "witnesses are reproducible only with 1")
    common.add_argument("-v", "--verbose", action="store_true", default=d(False))
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _global_flags(suppress=True)
    p = argparse.ArgumentParser(prog="threedpm", parents=[_global_flags(suppress=False)],
                                description="Popular and stable matchings in 3D instances with cyclic preferences.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=func)
        return sp

    sp = add("verify", cmd_verify, "check a property of a matching")
    sp.add_argument("instance")
    sp.add_argument("matching")
    sp.add_argument("--property", choices=PROPERTIES, required=True)
    sp.add_argument("--voters", choices=("all", "ab"), default="all")
    sp.add_argument("--strategy", choices=("auto", "brute", "poly"), default="auto")
    sp.add_argument("--witness", action="store_true", help="print the witness when the property fails")
    sp.add_argument("--json", action="store_true")

    sp = add("solve", cmd_solve, "find a matching with a property")
    sp.add_argument("instance")
    sp.add_argument("--property", choices=PROPERTIES, required=True)
    sp.add_argument("--strategy", choices=("auto", "brute", "poly"), default="auto")
    sp.add_argument("--json", action="store_true")
    sp.add_argument("-o", "--output")

    sp = add("witness", cmd_witness, "build a matching more popular than the given one")
    sp.add_argument("instance")
    sp.add_argument("matching", nargs="?")
    sp.add_argument("--method", choices=("3ml", "2ml", "obs1", "search"), required=True)
    sp.add_argument("--voters", choices=("all", "ab"), default="all")
    sp.add_argument("-o", "--output")

    sp = add("reduce", cmd_reduce, "compile a source problem into a 3D instance")
    sp.add_argument("--from", dest="source", choices=("sat", "3dm-spm", "3dm-pmv", "osties"), required=True)
    sp.add_argument("input")
    sp.add_argument("-o", "--output", help="output stem; writes STEM.inst and, if defined, STEM.match")

    sp = add("generate", cmd_generate, "draw a seeded instance")
    sp.add_argument("--kind", choices=tio.GENERATOR_KINDS, default="random")
    sp.add_argument("--n", type=_positive, default=3)
    sp.add_argument("--k", type=int, choices=(0, 1, 2, 3), default=0)
    sp.add_argument("--incomplete", action="store_true")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("-o", "--output")

    sp = add("oracle", cmd_oracle, "solve a source problem by brute force")
    sp.add_argument("--problem", choices=("sat", "3dm", "osties"), required=True)
    sp.add_argument("input")
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_ERROR if e.code else EXIT_YES
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        if args.threads is None:
            args.threads = _default_threads()
        return args.func(args)
    except SearchLimitExceeded as e:
        print(f"error: search stopped after exploring {e.nodes} nodes without settling the question; "
              "raise --max-nodes to continue", file=sys.stderr)
        return EXIT_ERROR
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    except INPUT_ERRORS as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
