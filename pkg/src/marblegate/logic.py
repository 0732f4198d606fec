"""Boolean meaning of marble circuits.

The abstract truth functions of the interaction gate and its adders sit next
to the code that reads truth tables off simulated runs, so the two can be
compared row by row.
"""
from __future__ import annotations

import csv
import enum
import io
import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .errors import ClassificationError, MarbleError, SimulationTimeout, UsageError
from .netlist import CircuitSpec, build_world
from .physics.bodies import CollisionModel, Merged, OutOfBounds, SinkRegion, Sunk
from .physics.world import World
from .trace import Trace, record

# channel labels used by the bundled netlists
PASS_A = "A_notB"
PASS_B = "notA_B"
COLLIDE = "AB"
SUM = "Sum"
CARRY = "Carry"


def gate_semantics(a: int, b: int) -> Tuple[int, int, int]:
    """(pass_a, pass_b, collide) for the two-input interaction gate."""
    a, b = bool(a), bool(b)
    return int(a and not b), int(b and not a), int(a and b)


def half_adder(a: int, b: int) -> Tuple[int, int]:
    pass_a, pass_b, collide = gate_semantics(a, b)
    return pass_a | pass_b, collide


def full_adder(a: int, b: int, c_in: int) -> Tuple[int, int]:
    """(sum, carry) from two cascaded gates.

    The first gate's survivor (if any) meets ``c_in`` at the second gate;
    either collision produces the carry, the second gate's survivor the sum.
    Two carry marbles can never arrive together, so OR stands in for XOR.
    """
    p1a, p1b, c1 = gate_semantics(a, b)
    survivor = p1a | p1b
    p2a, p2b, c2 = gate_semantics(survivor, c_in)
    return p2a | p2b, c1 | c2


# ---------------------------------------------------------------- exits

def _final_world(trace) -> World:
    return trace.world if isinstance(trace, Trace) else trace


def classify_exit(trace, sinks: Sequence[SinkRegion]) -> Dict[str, str]:
    """Map every marble that ended in a sink to that sink's label.

    Merged marbles inherit the label of the marble they merged into.
    Evaporated and annihilated marbles carry no signal and are omitted.
    """
    world = _final_world(trace)
    labels = {s.id: s.label for s in sinks}
    by_id = {m.id: m for m in world.marbles}
    out: Dict[str, str] = {}
    for m in world.marbles:
        if not m.terminal:
            raise SimulationTimeout(f"marble {m.id!r} still {type(m.state).__name__} at t={world.t} ms")
        if isinstance(m.state, OutOfBounds):
            raise ClassificationError(m.id, m.pos.x, m.pos.y)
        if isinstance(m.state, Sunk):
            if m.state.sink not in labels:
                raise ClassificationError(m.id, m.pos.x, m.pos.y)
            out[m.id] = labels[m.state.sink]
    for m in world.marbles:
        if isinstance(m.state, Merged):
            succ = by_id[m.state.into]
            while isinstance(succ.state, Merged):
                succ = by_id[succ.state.into]
            if succ.id in out:
                out[m.id] = out[succ.id]
    return out


def final_positions(trace) -> Dict[str, float]:
    """Final x (mm) of every marble that did not merge into another."""
    world = _final_world(trace)
    return {m.id: m.pos.x for m in world.marbles if m.terminal and not isinstance(m.state, Merged)}


class ModelVerdict(enum.Enum):
    SSM = "SSM"
    BBM = "BBM"
    INDETERMINATE = "Indeterminate"


def _geometry(world: World):
    return (tuple(sorted(world.ramps.items())), tuple(world.sinks))


def classify_model(collided, single_a, single_b) -> ModelVerdict:
    """Decide which collision model a gate run looks like.

    Collided marbles finishing strictly between the two single-marble exits
    indicate the soft-sphere model, strictly outside them the billiard-ball
    model.
    """
    worlds = [_final_world(t) for t in (collided, single_a, single_b)]
    if len({_geometry(w) for w in worlds}) != 1:
        raise UsageError("traces come from different circuit geometries")
    singles = []
    for w in worlds[1:]:
        xs = list(final_positions(w).values())
        if len(xs) != 1:
            raise UsageError(f"a single-marble run must end with one marble, got {len(xs)}")
        singles.append(xs[0])
    lo, hi = min(singles), max(singles)
    xs = list(final_positions(worlds[0]).values())
    if not xs:
        return ModelVerdict.INDETERMINATE
    if all(lo < x < hi for x in xs):
        return ModelVerdict.SSM
    if all(x < lo or x > hi for x in xs):
        return ModelVerdict.BBM
    return ModelVerdict.INDETERMINATE


# ---------------------------------------------------------------- truth tables

@dataclass
class Row:
    inputs: Dict[str, int]
    outputs: Optional[Dict[str, int]]
    status: str = "ok"  # ok | timeout | unclassified | error
    message: str = ""
    sink_counts: Dict[str, int] = field(default_factory=dict)
    trace: Optional[Trace] = None

    @property
    def ok(self) -> bool:
        return self.status == "ok"


@dataclass
class TruthTable:
    inputs: List[str]
    outputs: List[str]
    rows: List[Row]

    def to_text(self) -> str:
        head = self.inputs + ["|"] + self.outputs + ["|", "status"]
        lines = []
        for row in self.rows:
            cells = [str(row.inputs[n]) for n in self.inputs] + ["|"]
            if row.outputs is None:
                cells += ["-"] * len(self.outputs)
            else:
                cells += [str(row.outputs[n]) for n in self.outputs]
            cells += ["|", row.status + (f" ({row.message})" if row.message else "")]
            lines.append(cells)
        widths = [max(len(c) for c in col) for col in zip(head, *lines)]
        fmt = lambda cells: "  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()
        return "\n".join([fmt(head)] + [fmt(c) for c in lines]) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.inputs + self.outputs + ["status"])
        for row in self.rows:
            outs = ["" if row.outputs is None else row.outputs[n] for n in self.outputs]
            w.writerow([row.inputs[n] for n in self.inputs] + outs + [row.status])
        return buf.getvalue()


def assignments(names: Sequence[str]) -> List[Dict[str, int]]:
    """All 2^n assignments, first name most significant."""
    return [dict(zip(names, bits)) for bits in itertools.product((0, 1), repeat=len(names))]


def run_row(
    spec: CircuitSpec,
    assignment: Mapping[str, int],
    model: Optional[CollisionModel] = None,
    horizon: Optional[float] = None,
    sample_hz: Optional[float] = None,
) -> Row:
    world = build_world(spec, assignment, collision_model=model, horizon=horizon)
    labels = spec.labels
    try:
        trace = record(world, sample_hz=sample_hz)
    except MarbleError as exc:
        return Row(dict(assignment), None, "error", str(exc))
    counts = {s.id: 0 for s in spec.sinks}
    for m in world.marbles:
        if isinstance(m.state, Sunk):
            counts[m.state.sink] += 1
    try:
        exits = classify_exit(trace, spec.sinks)
    except SimulationTimeout as exc:
        return Row(dict(assignment), None, "timeout", str(exc), counts, trace)
    except ClassificationError as exc:
        return Row(dict(assignment), None, "unclassified", str(exc), counts, trace)
    occupied = set(exits.values())
    outputs = {label: int(label in occupied) for label in labels}
    return Row(dict(assignment), outputs, "ok", "", counts, trace)


def _run_row_packed(args):
    return run_row(*args)


def evaluate_truth_table(
    spec: CircuitSpec,
    inputs: Optional[Sequence[str]] = None,
    *,
    model: Optional[CollisionModel] = None,
    horizon: Optional[float] = None,
    sample_hz: Optional[float] = None,
    jobs: int = 1,
) -> TruthTable:
    """Simulate every input assignment; row failures are kept in the table."""
    names = list(inputs) if inputs is not None else spec.inputs
    if sorted(names) != sorted(spec.inputs):
        raise UsageError(f"inputs {names} do not match circuit inputs {spec.inputs}")
    work = [(spec, a, model, horizon, sample_hz) for a in assignments(names)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_run_row_packed, work))
    else:
        rows = [_run_row_packed(w) for w in work]
    return TruthTable(names, spec.labels, rows)


# ---------------------------------------------------------------- oracles

def oracle(kind: str) -> Tuple[List[str], List[str], callable]:
    """Input names, output names and truth function for ``gate``/``half``/``full``."""
    if kind == "gate":
        return ["A", "B"], [PASS_A, PASS_B, COLLIDE], lambda a: dict(
            zip([PASS_A, PASS_B, COLLIDE], gate_semantics(a["A"], a["B"]))
        )
    if kind == "half":
        return ["A", "B"], [SUM, CARRY], lambda a: dict(zip([SUM, CARRY], half_adder(a["A"], a["B"])))
    if kind == "full":
        return ["A", "B", "Cin"], [SUM, CARRY], lambda a: dict(
            zip([SUM, CARRY], full_adder(a["A"], a["B"], a["Cin"]))
        )
    raise UsageError(f"unknown oracle {kind!r}; choose gate, half or full")


def compare_to_oracle(table: TruthTable, kind: str) -> List[str]:
    """Human-readable mismatches between a simulated table and an oracle."""
    ins, outs, fn = oracle(kind)
    if sorted(table.inputs) != sorted(ins):
        return [f"inputs {table.inputs} do not match {kind} inputs {ins}"]
    if sorted(table.outputs) != sorted(outs):
        return [f"channels {table.outputs} do not match {kind} channels {outs}"]
    problems = []
    for row in table.rows:
        tag = "".join(str(row.inputs[n]) for n in ins)
        if not row.ok:
            problems.append(f"{tag}: {row.status} {row.message}".rstrip())
            continue
        want = fn(row.inputs)
        if row.outputs != want:
            problems.append(f"{tag}: got {row.outputs}, expected {want}")
    return problems
