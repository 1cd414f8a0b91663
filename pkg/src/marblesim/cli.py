"""Command line front end.

Subcommands:

    run     simulate one input vector through a netlist file
    table   enumerate the truth table of a netlist file or library gate
    verify  check library gates against their reference functions
    lint    report junction inputs that would arrive off-schedule
    print   parse a netlist and reprint it in canonical form

``--format records`` switches any subcommand to a line-oriented,
tab-separated output meant for scripting; the default text format is for
people.  Both are byte-deterministic for a given invocation.  The exit code
is 0 exactly when the command produced no error diagnostics.
"""

from __future__ import annotations

import argparse
import os
import sys
import warnings
from pathlib import Path

from .analysis import (format_report, format_table, timing_lint, truth_table,
                       verify_gate)
from .errors import MarblesimError
from .gates import get_macro, library
from .netlist import elaborate, parse, print_canonical
from .physics import (CollisionMode, MidbandWarning, collision_mode,
                      load_physics_config)
from .sim import SimConfig, format_trace, simulate

__all__ = ["main"]

_PHYSICS_ENV = "MARBLE_PHYSICS"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="marblesim",
        description="Simulate collision-based marble logic circuits.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(cmd: argparse.ArgumentParser) -> None:
        cmd.add_argument("--format", choices=("text", "records"),
                         default="text",
                         help="output style (default: text)")

    run = sub.add_parser("run", help="simulate one input vector")
    run.add_argument("file", help="netlist file")
    run.add_argument("--inputs", required=True, metavar="BITS",
                     help="input bits, first declared input first")
    run.add_argument("--mode", choices=("bounce", "merge", "auto"),
                     default="bounce",
                     help="collision mode; auto derives it from physics")
    run.add_argument("--physics", metavar="FILE",
                     help=f"physics config (default: ${_PHYSICS_ENV})")
    run.add_argument("--trace", action="store_true",
                     help="print every marble placement")
    run.add_argument("--strict", action="store_true",
                     help="fail on off-schedule junction arrivals")
    run.add_argument("--no-repair", action="store_true",
                     help="skip automatic hold insertion on unbalanced "
                          "junction inputs")
    add_common(run)

    table = sub.add_parser("table", help="print a truth table")
    table.add_argument("target", metavar="FILE_OR_GATE",
                       help="netlist file, or a library gate name")
    table.add_argument("--mode", choices=("bounce", "merge", "auto"),
                       default="bounce")
    table.add_argument("--physics", metavar="FILE")
    add_common(table)

    verify = sub.add_parser("verify", help="verify library gates")
    verify.add_argument("gates", nargs="*", metavar="GATE",
                        help="gate names (default: whole library)")
    add_common(verify)

    lint = sub.add_parser("lint", help="report timing imbalances")
    lint.add_argument("file", help="netlist file")
    add_common(lint)

    show = sub.add_parser("print", help="reprint a netlist canonically")
    show.add_argument("file", help="netlist file")
    add_common(show)

    return parser


def _resolve_mode(name: str, physics_path: str | None) -> CollisionMode:
    if name != "auto":
        return CollisionMode(name)
    path = physics_path or os.environ.get(_PHYSICS_ENV)
    if not path:
        raise MarblesimError(
            f"--mode auto needs --physics or ${_PHYSICS_ENV}")
    params, policy = load_physics_config(path)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        mode = collision_mode(policy, params)
    for item in caught:
        if issubclass(item.category, MidbandWarning):
            print(f"warning: {item.message}", file=sys.stderr)
    return mode


def _load_circuit(path: str, insert_holds: bool = True):
    ast = parse(Path(path).read_text(encoding="utf-8"))
    return elaborate(ast, insert_holds=insert_holds)


def _cmd_run(args: argparse.Namespace) -> int:
    mode = _resolve_mode(args.mode, args.physics)
    circuit = _load_circuit(args.file, insert_holds=not args.no_repair)
    try:
        bits = tuple(int(ch) for ch in args.inputs)
    except ValueError:
        raise MarblesimError(f"--inputs must be 0s and 1s, "
                             f"got {args.inputs!r}") from None
    config = SimConfig(mode=mode, strict_timing=args.strict)
    outputs, trace, ledger = simulate(circuit, bits, config)

    if args.format == "records":
        for name, bit in zip(circuit.outputs, outputs):
            print(f"output\t{name}\t{bit}")
        print(f"marbles\t{ledger.input_marbles}\t{ledger.injected}"
              f"\t{ledger.output_marbles}\t{ledger.waste_marbles}")
        print(f"mass\t{ledger.input_mass}\t{ledger.injected_mass}"
              f"\t{ledger.output_mass}\t{ledger.waste_mass}")
        for rec in ledger.injections:
            print(f"injection\t{rec.marble_id}\t{rec.node}"
                  f"\t{rec.kind.value}\t{rec.phase}\t{rec.mass}")
        for hazard in trace.hazards:
            print(f"hazard\t{hazard.phase}\t{hazard.node}\t{hazard.port}"
                  f"\t{hazard.marble_id}\t{hazard.expected_phase}")
        for phase, node in trace.collisions():
            print(f"collision\t{phase}\t{node}")
        if args.trace:
            for line in format_trace(trace).splitlines():
                print(f"event\t{line}")
    else:
        print(" ".join(f"{name}={bit}"
                       for name, bit in zip(circuit.outputs, outputs)))
        print(f"marbles: in={ledger.input_marbles} "
              f"injected={ledger.injected} out={ledger.output_marbles} "
              f"waste={ledger.waste_marbles}")
        print(f"mass: in={ledger.input_mass} "
              f"injected={ledger.injected_mass} out={ledger.output_mass} "
              f"waste={ledger.waste_mass}")
        for rec in ledger.injections:
            print(f"injection: marble {rec.marble_id} from {rec.node} "
                  f"({rec.kind.value}) at phase {rec.phase} mass {rec.mass}")
        for hazard in trace.hazards:
            print(f"hazard: {hazard}")
        for phase, node in trace.collisions():
            print(f"collision: phase {phase} at {node}")
        if args.trace:
            print("trace:")
            for line in format_trace(trace).splitlines():
                print(f"  {line}")
    return 1 if trace.hazards else 0


def _cmd_table(args: argparse.Namespace) -> int:
    mode = _resolve_mode(args.mode, args.physics)
    if os.path.exists(args.target):
        circuit = _load_circuit(args.target)
    else:
        try:
            circuit = elaborate(get_macro(args.target).expansion)
        except MarblesimError:
            raise MarblesimError(
                f"{args.target!r} is neither a file nor a library gate"
            ) from None
    table = truth_table(circuit, mode)
    if args.format == "records":
        for bits, outputs in table.rows:
            print(f"row\t{''.join(map(str, bits))}"
                  f"\t{''.join(map(str, outputs))}")
    else:
        print(format_table(table))
    return 0


def _cmd_verify(args: argparse.Namespace) -> int:
    names = args.gates or [macro.name for macro in library()]
    reports = [verify_gate(name) for name in names]
    if args.format == "records":
        for report in reports:
            fields = [
                ("table_bounce", report.table_ok[0]),
                ("table_merge", report.table_ok[1]),
                ("modes_agree", report.modes_agree),
                ("reversible", report.reversible),
                ("reversible_claim", report.reversible_claim),
                ("conservative", report.conservative),
                ("conservative_claim", report.conservative_claim),
                ("physical_bounce", report.physical[0]),
                ("physical_merge", report.physical[1]),
                ("ok", report.ok),
            ]
            for field, value in fields:
                print(f"verify\t{report.name}\t{field}"
                      f"\t{'yes' if value else 'no'}")
    else:
        print("\n\n".join(format_report(report) for report in reports))
    return 0 if all(report.ok for report in reports) else 1


def _cmd_lint(args: argparse.Namespace) -> int:
    ast = parse(Path(args.file).read_text(encoding="utf-8"))
    circuit = elaborate(ast, insert_holds=False)
    diagnostics = timing_lint(circuit)
    for diag in diagnostics:
        if args.format == "records":
            where = diag.line if diag.line is not None else "-"
            print(f"lint\t{diag.severity}\t{where}\t{diag.message}")
        else:
            print(str(diag))
    if args.format == "text" and not diagnostics:
        print("clean")
    return 1 if any(d.severity == "error" for d in diagnostics) else 0


def _cmd_print(args: argparse.Namespace) -> int:
    ast = parse(Path(args.file).read_text(encoding="utf-8"))
    sys.stdout.write(print_canonical(ast))
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "table": _cmd_table,
    "verify": _cmd_verify,
    "lint": _cmd_lint,
    "print": _cmd_print,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (MarblesimError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
