"""Command-line entry points.

Subcommands: enumerate, derandomize, certify, verify, simulate, connected-run.
Every report embeds the full run manifest (subcommand, parameters, paths,
version) so that rerunning a manifest reproduces all non-timing fields byte
for byte.  Exit codes: 0 success, 1 no valid table exists, 2 verification
failure, 3 bad input.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .connected import ConnectedRunConfig, run_connected_aware
from .derandomize import (
    SearchBudgetExceeded,
    SearchConfig,
    certify_good_f,
    derandomize,
    lift_to_claimed_size,
    search_good_f,
)
from .graphs import (
    InstanceFamilySpec,
    dump_instances,
    enumerate_instances,
    load_instances,
)
from .problems import ProblemFormatError, problem_by_name, verify
from .programs import DETERMINISTIC_BUILTINS, RANDOMIZED_BUILTINS
from .simulator import (
    IncompleteTableError,
    compute_success_exact,
    estimate_success_mc,
    load_table,
    run_deterministic,
    run_normal_form,
    save_table,
)

EXIT_OK = 0
EXIT_UNSAT = 1
EXIT_VERIFY_FAILED = 2
EXIT_BAD_INPUT = 3

OUT_DIR_ENV = "DERANDLAB_OUT_DIR"


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad arguments by default; the documented code is 3.
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_BAD_INPUT, f"{self.prog}: error: {message}\n")


def _out_path(name: str | None) -> Path | None:
    if name is None:
        return None
    path = Path(name)
    base = os.environ.get(OUT_DIR_ENV)
    if base and not path.is_absolute():
        path = Path(base) / path
    return path


def _write_json(path: Path, obj: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _manifest(args: argparse.Namespace) -> dict:
    params = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    return {
        "tool": "derandlab",
        "version": __version__,
        "subcommand": args.subcommand,
        "parameters": params,
    }


def _alphabet(text: str) -> tuple[str, ...]:
    labels = tuple(part for part in text.split(",") if part)
    if not labels:
        raise argparse.ArgumentTypeError("alphabet must name at least one label")
    return labels


def _family_args(parser: argparse.ArgumentParser, required: bool = True) -> None:
    parser.add_argument("--n", type=int, required=required, help="node count")
    parser.add_argument("--c", type=int, default=1, help="identifier exponent")
    parser.add_argument(
        "--input-alphabet",
        type=_alphabet,
        default=("x",),
        help="comma-separated input labels (default: x)",
    )
    parser.add_argument(
        "--max-degree", type=int, default=None, help="optional degree filter"
    )


def _family_spec(args: argparse.Namespace) -> InstanceFamilySpec:
    return InstanceFamilySpec(
        n=args.n,
        c=args.c,
        input_alphabet=args.input_alphabet,
        max_degree=args.max_degree,
    )


def _instances(args: argparse.Namespace) -> list:
    if getattr(args, "instances", None):
        return load_instances(Path(args.instances).read_text())
    return list(enumerate_instances(_family_spec(args)))


def cmd_enumerate(args: argparse.Namespace) -> int:
    spec = _family_spec(args)
    instances = list(enumerate_instances(spec))
    text = dump_instances(instances)
    out = _out_path(args.out)
    if out is None:
        sys.stdout.write(text)
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text)
    print(f"enumerated {len(instances)} instances", file=sys.stderr)
    return EXIT_OK


def cmd_derandomize(args: argparse.Namespace) -> int:
    problem = problem_by_name(args.problem)
    config = SearchConfig(
        problem=problem,
        family=_family_spec(args),
        radius=args.T,
        node_budget=args.budget,
        workers=args.workers,
    )
    try:
        report, outcome = derandomize(config)
    except SearchBudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    payload = report.to_jsonable()
    payload["manifest"] = _manifest(args)
    if args.out_report:
        _write_json(_out_path(args.out_report), payload)
    if outcome.found:
        if args.out_table:
            save_table(outcome.table, _out_path(args.out_table))
        print(
            f"table found: {outcome.table.size} entries, verified "
            f"{report.verified_count}/{report.family_size}",
            file=sys.stderr,
        )
        return EXIT_OK
    kind = "witness instance" if outcome.witness_index is not None else "exhausted search"
    print(f"no valid table exists ({kind})", file=sys.stderr)
    return EXIT_UNSAT


def cmd_certify(args: argparse.Namespace) -> int:
    problem = problem_by_name(args.problem)
    spec = _family_spec(args)
    family = list(enumerate_instances(spec))
    factory = RANDOMIZED_BUILTINS.get(args.program)
    if factory is None:
        print(f"error: unknown randomized program {args.program!r}", file=sys.stderr)
        return EXIT_BAD_INPUT
    program = factory(problem.output_alphabet)
    lift = lift_to_claimed_size(spec.n, spec.c, len(spec.input_alphabet))

    payload: dict = {"manifest": _manifest(args), "mode": args.mode}
    if args.mode == "exact":
        probs = compute_success_exact(program, problem, family, args.bits)
    else:
        if args.seed is None:
            print("error: --seed is required in mc mode", file=sys.stderr)
            return EXIT_BAD_INPUT
        estimates = estimate_success_mc(
            program, problem, family, trials=args.trials, seed=args.seed
        )
        probs = [e.failure for e in estimates]
        payload["stderr"] = [e.stderr for e in estimates]
    certificate = certify_good_f(probs, lift.claimed_size)
    payload["certificate"] = certificate.to_jsonable()

    if args.find_f:
        found = search_good_f(
            program,
            problem,
            family,
            bits=args.bits,
            id_space=list(spec.id_space),
            workers=args.workers,
        )
        payload["good_f"] = (
            {str(k): list(v) for k, v in sorted(found.vectors.items())}
            if found is not None
            else None
        )
    out = _out_path(args.out)
    if out is not None:
        _write_json(out, payload)
    else:
        json.dump(payload, sys.stdout, indent=2, sort_keys=True)
        print()
    print(
        f"certificate total {certificate.total} over {certificate.family_size} "
        f"instances; verdict {certificate.verdict}",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    problem = problem_by_name(args.problem)
    table = load_table(_out_path(args.table))
    instances = _instances(args)
    passed = 0
    witness = None
    for idx, instance in enumerate(instances):
        try:
            outputs = run_normal_form(table, instance)
        except IncompleteTableError as exc:
            witness = {"instance": idx, "error": str(exc)}
            break
        result = verify(problem, instance, outputs)
        if not result.valid:
            witness = {
                "instance": idx,
                "witness_node": result.witness_node,
                "witness_component": result.witness_component,
            }
            break
        passed += 1
    payload = {
        "manifest": _manifest(args),
        "passed": passed,
        "total": len(instances),
        "witness": witness,
    }
    if args.out:
        _write_json(_out_path(args.out), payload)
    if witness is not None:
        print(f"verification failed: {witness}", file=sys.stderr)
        return EXIT_VERIFY_FAILED
    print(f"verified {passed}/{len(instances)}", file=sys.stderr)
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    instances = _instances(args)
    lines = []
    if args.table:
        table = load_table(_out_path(args.table))
        for idx, instance in enumerate(instances):
            try:
                outputs = run_normal_form(table, instance)
            except IncompleteTableError as exc:
                print(f"error: {exc}", file=sys.stderr)
                return EXIT_VERIFY_FAILED
            lines.append({"index": idx, "outputs": {str(v): o for v, o in sorted(outputs.items())}})
    else:
        factory = DETERMINISTIC_BUILTINS.get(args.program)
        if factory is None:
            print(f"error: unknown program {args.program!r}", file=sys.stderr)
            return EXIT_BAD_INPUT
        program = factory()
        for idx, instance in enumerate(instances):
            result = run_deterministic(
                program, instance, claimed_n=args.claimed_n, trace=args.trace
            )
            row = {
                "index": idx,
                "outputs": {str(v): o for v, o in sorted(result.outputs.items())},
                "rounds": result.rounds,
            }
            if args.trace:
                row["trace"] = [list(r) for r in result.trace]
            lines.append(row)
    text = "".join(json.dumps(row, sort_keys=True) + "\n" for row in lines)
    out = _out_path(args.out)
    if out is None:
        sys.stdout.write(text)
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text)
    return EXIT_OK


def cmd_connected_run(args: argparse.Namespace) -> int:
    problem = problem_by_name(args.problem)
    table = load_table(_out_path(args.table))
    config = ConnectedRunConfig(problem, table)
    instances = _instances(args)
    rows = []
    failures = 0
    for idx, instance in enumerate(instances):
        if not instance.graph.is_connected:
            if args.instances:
                print(f"error: instance {idx} is disconnected", file=sys.stderr)
                return EXIT_BAD_INPUT
            continue
        result = run_connected_aware(config, instance)
        ok = verify(problem, instance, result.outputs).valid
        failures += not ok
        rows.append(
            {
                "index": idx,
                "path": result.path,
                "rounds_charged": result.rounds_charged,
                "valid": ok,
                "outputs": {str(v): o for v, o in sorted(result.outputs.items())},
            }
        )
    payload = {"manifest": _manifest(args), "runs": rows, "failures": failures}
    if args.out:
        _write_json(_out_path(args.out), payload)
    else:
        json.dump(payload, sys.stdout, indent=2, sort_keys=True)
        print()
    return EXIT_VERIFY_FAILED if failures else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="derandlab")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    p = sub.add_parser("enumerate", help="write a family as JSON lines")
    _family_args(p)
    p.add_argument("--out", default=None, help="output file (default: stdout)")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("derandomize", help="search for a valid lookup table")
    p.add_argument("--problem", required=True, help="mis | coloring:k | problem file")
    _family_args(p)
    p.add_argument("--T", type=int, required=True, help="table radius")
    p.add_argument("--budget", type=int, default=None, help="search placement budget")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out-table", default=None)
    p.add_argument("--out-report", default=None)
    p.set_defaults(func=cmd_derandomize)

    p = sub.add_parser("certify", help="failure probabilities and union-bound certificate")
    p.add_argument("--problem", required=True)
    _family_args(p)
    p.add_argument("--program", default="first-bit", choices=sorted(RANDOMIZED_BUILTINS))
    p.add_argument("--mode", choices=("exact", "mc"), default="exact")
    p.add_argument("--bits", type=int, default=1, help="per-node bit budget")
    p.add_argument("--trials", type=int, default=1000, help="mc trials")
    p.add_argument("--seed", default=None, help="mc seed (required in mc mode)")
    p.add_argument("--find-f", action="store_true", help="also search for a good assignment")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("verify", help="check a table against a family")
    p.add_argument("--problem", required=True)
    p.add_argument("--table", required=True)
    _family_args(p, required=False)
    p.add_argument("--instances", default=None, help="JSONL instance file")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", help="run a table or builtin program on a family")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--table", default=None)
    group.add_argument("--program", default=None, choices=sorted(DETERMINISTIC_BUILTINS))
    _family_args(p, required=False)
    p.add_argument("--instances", default=None)
    p.add_argument("--claimed-n", type=int, default=None)
    p.add_argument("--trace", action="store_true", help="record per-round message counts")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("connected-run", help="two-phase runtime on connected instances")
    p.add_argument("--problem", required=True)
    p.add_argument("--table", required=True)
    _family_args(p, required=False)
    p.add_argument("--instances", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_connected_run)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "n", None) is None and not getattr(args, "instances", None):
        if args.subcommand in ("verify", "simulate", "connected-run"):
            print("error: provide --n or --instances", file=sys.stderr)
            return EXIT_BAD_INPUT
    try:
        return args.func(args)
    except (ProblemFormatError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
