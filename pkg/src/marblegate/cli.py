"""Command-line front end.

Exit codes: 0 success, 1 bad netlist or arguments, 2 runtime failure
(timeout or unclassifiable exit), 3 truth table disagrees with ``--expect``.
"""
from __future__ import annotations

import argparse
import sys
from typing import Dict, List, Optional

from . import logic, netlist, repro
from .errors import ClassificationError, MarbleError, SimulationTimeout, UsageError
from .physics import CollisionModel, Merged, state_tag
from .trace import DEFAULT_SAMPLE_HZ, record, to_svg

EXIT_OK, EXIT_INPUT, EXIT_RUNTIME, EXIT_MISMATCH = 0, 1, 2, 3


def _err(msg: str) -> None:
    print(msg, file=sys.stderr)


def _load(path: str) -> Optional[netlist.CircuitSpec]:
    real = netlist.resolve(path)
    try:
        spec = netlist.load(real)
    except OSError as exc:
        _err(f"{path}: {exc.strerror or exc}")
        return None
    except netlist.NetlistParseError as exc:
        for e in exc.errors:
            tok = f" ({e.token!r})" if e.token and e.token not in e.message else ""
            _err(f"{path}:{e.line}:{e.column}: {e.message}{tok}")
        return None
    problems = netlist.validate(spec)
    for p in problems:
        _err(f"{path}: {p}")
    return None if problems else spec


def parse_assignment(text: str, inputs: List[str]) -> Dict[str, int]:
    """``A=1,B=0`` -> {"A": 1, "B": 0}; inputs left out are 0."""
    out = {name: 0 for name in inputs}
    for part in filter(None, (p.strip() for p in text.split(","))):
        name, sep, bit = part.partition("=")
        name = name.strip()
        if not sep or bit.strip() not in ("0", "1"):
            raise UsageError(f"bad input binding {part!r}; expected NAME=0 or NAME=1")
        if name not in out:
            raise UsageError(f"unknown input {name!r}; circuit inputs are {', '.join(inputs) or 'none'}")
        out[name] = int(bit)
    return out


def _model(text: Optional[str]) -> Optional[CollisionModel]:
    return None if text is None else CollisionModel(text)


def cmd_simulate(args) -> int:
    spec = _load(args.netlist)
    if spec is None:
        return EXIT_INPUT
    try:
        assignment = parse_assignment(args.inputs, spec.inputs)
        world = netlist.build_world(spec, assignment, collision_model=_model(args.model))
    except MarbleError as exc:
        _err(str(exc))
        return EXIT_INPUT
    if not world.marbles and not world.pending:
        if not args.quiet:
            print("no marbles: every input is 0")
    try:
        trace = record(world, until=args.until, sample_hz=args.sample_hz)
    except MarbleError as exc:
        _err(f"simulation failed: {exc}")
        return EXIT_RUNTIME
    if args.trace:
        with open(args.trace, "w", newline="\n") as fh:
            fh.write(trace.to_csv())
    if args.svg:
        with open(args.svg, "w") as fh:
            fh.write(to_svg(trace))
    try:
        exits = logic.classify_exit(trace, spec.sinks)
    except (SimulationTimeout, ClassificationError) as exc:
        _err(str(exc))
        return EXIT_RUNTIME
    if not args.quiet:
        for m in world.marbles:
            label = exits.get(m.id, "-")
            note = f" (merged into {m.state.into})" if isinstance(m.state, Merged) else ""
            print(f"{m.id}\t{state_tag(m.state)}\t{label}{note}")
    return EXIT_OK


def cmd_truthtable(args) -> int:
    spec = _load(args.netlist)
    if spec is None:
        return EXIT_INPUT
    if not spec.inputs:
        _err("circuit declares no inputs")
        return EXIT_INPUT
    try:
        table = logic.evaluate_truth_table(
            spec, model=_model(args.model), horizon=args.until, sample_hz=None, jobs=args.jobs
        )
    except MarbleError as exc:
        _err(str(exc))
        return EXIT_INPUT
    print(table.to_csv() if args.csv else table.to_text(), end="")
    failed = [r for r in table.rows if not r.ok]
    if args.expect:
        problems = logic.compare_to_oracle(table, args.expect)
        n = len(table.rows) - len([p for p in problems if p[:1].isdigit()])
        if problems:
            for p in problems:
                _err(f"mismatch: {p}")
            return EXIT_RUNTIME if failed else EXIT_MISMATCH
        _err(f"{n}/{len(table.rows)} rows match {args.expect}")
    return EXIT_RUNTIME if failed else EXIT_OK


def cmd_repro(args) -> int:
    only = [k for chunk in args.only for k in chunk.split(",") if k] if args.only else None
    try:
        report = repro.run(only)
    except KeyError as exc:
        _err(str(exc.args[0]))
        return EXIT_INPUT
    print(report.to_json() if args.json else report.to_text(), end="" if not args.json else "\n")
    return EXIT_OK if report.passed else EXIT_INPUT


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="marblegate", description="Liquid-marble collision circuit simulator.")
    sub = p.add_subparsers(dest="command", required=True)
    models = [m.value for m in CollisionModel]

    s = sub.add_parser("simulate", help="run one input assignment")
    s.add_argument("netlist", help="path to a .lmc file or a bundled circuit name")
    s.add_argument("--in", dest="inputs", default="", metavar="A=1,B=0")
    s.add_argument("--trace", metavar="CSV")
    s.add_argument("--svg", metavar="SVG")
    s.add_argument("--until", type=float, metavar="MS")
    s.add_argument("--model", choices=models)
    s.add_argument("--sample-hz", type=float, default=DEFAULT_SAMPLE_HZ)
    s.add_argument("--seedless", action="store_true", help="no-op: the engine has no random state")
    s.add_argument("--quiet", action="store_true", help="suppress the per-marble report")
    s.set_defaults(func=cmd_simulate)

    t = sub.add_parser("truthtable", help="simulate every input assignment")
    t.add_argument("netlist")
    t.add_argument("--expect", choices=["gate", "half", "full"])
    t.add_argument("--csv", action="store_true", help="print CSV instead of an aligned table")
    t.add_argument("--until", type=float, metavar="MS")
    t.add_argument("--model", choices=models)
    t.add_argument("--jobs", type=int, default=1)
    t.set_defaults(func=cmd_truthtable)

    r = sub.add_parser("repro", help="run the acceptance checks")
    r.add_argument("--only", action="append", metavar="CHECK", help=", ".join(c.key for c in repro.CHECKS))
    r.add_argument("--json", action="store_true")
    r.set_defaults(func=cmd_repro)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
