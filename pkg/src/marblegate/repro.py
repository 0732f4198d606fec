"""Reproduction suite: every acceptance criterion as a named, self-checking run.

Each check returns a list of :class:`Measurement` lines (measured vs expected).
``run`` collects them into a :class:`Report` that renders as text or JSON.
"""
from __future__ import annotations

import json
import math
import os
import random
import tempfile
import time
from dataclasses import asdict, dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

from . import actuation, calibrate, lifetime, logic, netlist
from .physics import (
    Ballistic,
    CoatingKind,
    CollisionModel,
    ContactEvent,
    Marble,
    PhysicsConfig,
    Regime,
    Vec2,
    classify_regime,
    coalesce,
    resolve_collision,
    run_until,
    standard_coating,
)


@dataclass
class Measurement:
    label: str
    measured: object
    expected: object
    passed: bool


@dataclass
class CheckResult:
    key: str
    title: str
    passed: bool
    seconds: float
    items: List[Measurement] = field(default_factory=list)
    error: str = ""


@dataclass
class Report:
    results: List[CheckResult]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def to_text(self) -> str:
        lines = []
        for r in self.results:
            lines.append(f"[{'PASS' if r.passed else 'FAIL'}] {r.key}: {r.title} ({r.seconds:.1f} s)")
            for m in r.items:
                mark = "ok " if m.passed else "BAD"
                lines.append(f"    {mark} {m.label}: measured {m.measured}, expected {m.expected}")
            if r.error:
                lines.append(f"    error: {r.error}")
        n = sum(r.passed for r in self.results)
        lines.append(f"{n}/{len(self.results)} criteria passed")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return json.dumps({"passed": self.passed, "results": [asdict(r) for r in self.results]}, indent=2, default=str)


def _m(label, measured, expected, passed) -> Measurement:
    return Measurement(label, measured, expected, bool(passed))


def _spec(name: str):
    return netlist.load(netlist.bundled_path(name))


def _table_items(table: logic.TruthTable, kind: str) -> List[Measurement]:
    _, outs, fn = logic.oracle(kind)
    items = []
    for row in table.rows:
        tag = ",".join(f"{k}={v}" for k, v in row.inputs.items())
        want = fn(row.inputs)
        got = row.outputs if row.ok else row.status
        items.append(_m(tag, got, want, row.ok and row.outputs == want))
    return items


# ---------------------------------------------------------------- criteria

def check_gate() -> List[Measurement]:
    t0 = time.perf_counter()
    table = logic.evaluate_truth_table(_spec("gate"))
    elapsed = time.perf_counter() - t0
    return _table_items(table, "gate") + [_m("runtime s", round(elapsed, 2), "< 10", elapsed < 10.0)]


def check_regimes() -> List[Measurement]:
    spec = _spec("gate")
    cfg = spec.physics_config()
    slow = calibrate.calibrate(spec, 0.21)
    fast = calibrate.calibrate(spec, cfg.v_coalesce, above=True)
    return [
        _m("hold for 0.21 m/s (mm)", round(slow.hold, 4), "calibrated", True),
        _m("impact speed (m/s)", round(slow.speed, 5), "0.21 +- 5e-4", abs(slow.speed - 0.21) <= 5e-4),
        _m("outcome at 0.21 m/s", slow.outcome, "bounce", slow.outcome == "bounce"),
        _m("hold for 0.29 m/s (mm)", round(fast.hold, 4), "calibrated", True),
        _m("impact speed (m/s)", round(fast.speed, 5), "[0.29, 0.2905]", 0.29 <= fast.speed <= 0.2905),
        _m("outcome at 0.29 m/s", fast.outcome, "coalesce", fast.outcome == "coalesce"),
        _m("regime(0.21)", classify_regime(0.21, cfg).value, "bounce", classify_regime(0.21, cfg) is Regime.BOUNCE),
        _m("regime(0.29)", classify_regime(0.29, cfg).value, "coalesce", classify_regime(0.29, cfg) is Regime.COALESCE),
    ]


def model_verdict(model: Optional[CollisionModel]) -> logic.ModelVerdict:
    spec = _spec("gate")
    runs = [
        logic.run_row(spec, a, model=model).trace
        for a in ({"A": 1, "B": 1}, {"A": 1, "B": 0}, {"A": 0, "B": 1})
    ]
    return logic.classify_model(*runs)


def check_ordering() -> List[Measurement]:
    ssm = model_verdict(None)
    bbm = model_verdict(CollisionModel.BBM)
    return [
        _m("default model", ssm.value, "SSM", ssm is logic.ModelVerdict.SSM),
        _m("--model bbm", bbm.value, "BBM", bbm is logic.ModelVerdict.BBM),
    ]


def check_coalescence() -> List[Measurement]:
    coat = standard_coating(CoatingKind.NI_UHDPE)
    a = Marble("a", Vec2(-1.4, 0.0), Vec2(0.15, -0.1), 11.6, coat, 2.5, Ballistic())
    b = Marble("b", Vec2(1.4, 0.0), Vec2(-0.15, -0.1), 11.6, coat, 2.5, Ballistic())
    p0 = a.vel * a.mass + b.vel * b.mass
    merged = coalesce(a, b)
    p1 = merged.vel * merged.mass
    rel = (p1 - p0).norm() / p0.norm()
    return [
        _m("merged volume (uL)", merged.volume, 23.2, abs(merged.volume - 23.2) <= 1e-9),
        _m("momentum relative error", rel, "<= 1e-9", rel <= 1e-9),
        _m("merged |vx| (m/s)", abs(merged.vel.x), "< 1e-9", abs(merged.vel.x) < 1e-9),
        _m("coating mass (mg)", merged.coating_mass, 5.0, abs(merged.coating_mass - 5.0) <= 1e-12),
    ]


def check_half_adder() -> List[Measurement]:
    return _table_items(logic.evaluate_truth_table(_spec("half_adder")), "half")


FULL_ADDER_FIGURE_CASES = {(1, 1, 0): "1+1+0=10", (0, 1, 1): "0+1+1=10", (0, 1, 0): "0+1+0=01", (1, 1, 1): "1+1+1=11"}


def check_full_adder() -> List[Measurement]:
    spec = _spec("full_adder")
    table = logic.evaluate_truth_table(spec)
    items = _table_items(table, "full")
    for row in table.rows:
        key = (row.inputs["A"], row.inputs["B"], row.inputs["Cin"])
        if key in FULL_ADDER_FIGURE_CASES and row.ok:
            got = f"{row.outputs[logic.CARRY]}{row.outputs[logic.SUM]}"
            want = FULL_ADDER_FIGURE_CASES[key].split("=")[1]
            items.append(_m(FULL_ADDER_FIGURE_CASES[key], got, want, got == want))
    carry_sinks = [s.id for s in spec.sinks if s.label == logic.CARRY]
    both = [row for row in table.rows if sum(row.sink_counts.get(s, 0) > 0 for s in carry_sinks) > 1]
    items.append(_m(f"rows with {' and '.join(carry_sinks)} both occupied", len(both), 0, not both))
    return items


def _positions(world) -> List[tuple]:
    out: List[tuple] = []
    run_until(world, callback=lambda w: out.append(tuple((m.id, m.pos.x, m.pos.y) for m in w.marbles)))
    return out


def _with_off(spec, latch_id: str, off: float):
    latches = [
        actuation.ElectromagnetLatch(l.id, l.ramp, l.hold, ((l.windows[0][0], off),), l.capture_radius)
        if l.id == latch_id else l
        for l in spec.latches
    ]
    return netlist.CircuitSpec(spec.config, spec.ramps, latches, spec.sources, spec.sinks)


def check_synchronization() -> List[Measurement]:
    spec = _spec("gate")
    # equal off-times: tick-for-tick mirror images
    frames = _positions(netlist.build_world(spec, {"A": 1, "B": 1}))
    worst = 0.0
    for frame in frames:
        (ia, xa, ya), (ib, xb, yb) = frame[0], frame[1]
        worst = max(worst, abs(xa + xb), abs(ya - yb))
    items = [_m("max mirror deviation (mm)", worst, "<= 1e-9", worst <= 1e-9 and len(frames) > 1)]

    # right latch 100 ms later: the lone right marble's path shifts by exactly 100 ms
    off = spec.latches[1].windows[0][1]
    base = _positions(netlist.build_world(spec, {"A": 0, "B": 1}))
    late = _positions(netlist.build_world(_with_off(spec, spec.latches[1].id, off + 100.0), {"A": 0, "B": 1}))
    cfg = spec.physics_config()
    shift = round(100.0 / cfg.dt)
    release = int(round(off / cfg.dt))
    post = base[release:]
    late_post = late[release + shift:release + shift + len(post)]
    dev = max(
        (abs(p[0][1] - q[0][1]) + abs(p[0][2] - q[0][2]) for p, q in zip(post, late_post)),
        default=math.inf,
    )
    items.append(_m("ticks compared after release", len(late_post), len(post), len(late_post) == len(post)))
    items.append(_m("max deviation of shifted path (mm)", dev, 0.0, dev == 0.0))
    items.append(_m("extra run time (ms)", round((len(late) - len(base)) * cfg.dt, 9), 100.0,
                    len(late) - len(base) == shift))
    return items


def check_evaporation() -> List[Measurement]:
    expected_rates = {CoatingKind.BARE: 0.1392, CoatingKind.NI: 0.1133, CoatingKind.UHDPE: 0.1107, CoatingKind.NI_UHDPE: 0.0998}
    expected_dry = {CoatingKind.BARE: 71.84, CoatingKind.NI: 88.26, CoatingKind.UHDPE: 90.33, CoatingKind.NI_UHDPE: 100.20}
    items = []
    dry = {}
    for kind, rate in expected_rates.items():
        got = lifetime.evaporation_rate(kind)
        items.append(_m(f"rate {kind.value} (mg/min)", got, rate, got == rate))
        m = Marble(kind.value, Vec2(0, 0), Vec2(0, 0), 10.0, standard_coating(kind))
        dry[kind] = lifetime.time_to_dryout(m)
        items.append(_m(f"dry-out {kind.value} (min)", round(dry[kind], 4), expected_dry[kind],
                        abs(dry[kind] - expected_dry[kind]) <= 0.01))
    longest = max(dry, key=dry.get)
    items.append(_m("longest-lived coating", longest.value, "ni_uhdpe", longest is CoatingKind.NI_UHDPE))
    return items


def check_cadence() -> List[Measurement]:
    typical = actuation.DropletSource("s", "r", "A", 11.6, rate=7.0)
    fast = actuation.DropletSource("s", "r", "A", 11.6, rate=11.6 * 8 * 3.6)
    p1, p2 = actuation.emission_period(typical), actuation.emission_period(fast)
    per_s = len([t for t in actuation.emission_times(fast, 1000.0) if t < 1000.0])
    return [
        _m("period at 7.0 mL/h (ms)", round(p1, 3), "5966 +- 1", abs(p1 - 5966) <= 1),
        _m("period at max rate (ms)", round(p2, 9), 125.0, abs(p2 - 125.0) <= 1e-9),
        _m("drops in one second at max rate", per_s, 8, per_s == 8),
    ]


def check_determinism() -> List[Measurement]:
    from .cli import main

    with tempfile.TemporaryDirectory() as tmp:
        paths = [os.path.join(tmp, f"t{i}.csv") for i in (1, 2)]
        codes = [main(["simulate", "gate.lmc", "--in", "A=1,B=1", "--trace", p, "--quiet"]) for p in paths]
        blobs = [open(p, "rb").read() for p in paths]
    return [
        _m("exit codes", codes, [0, 0], codes == [0, 0]),
        _m("trace bytes", len(blobs[0]), "non-empty", len(blobs[0]) > 0),
        _m("byte-identical", blobs[0] == blobs[1], True, blobs[0] == blobs[1]),
    ]


def _random_marble(rng: random.Random, tag: str) -> Marble:
    coat = standard_coating(CoatingKind.NI_UHDPE)
    mass = rng.uniform(1.0, 30.0)
    coating_mass = rng.uniform(0.0, min(2.5, mass / 2))
    speed, ang = rng.uniform(0.0, 1.0), rng.uniform(0.0, 2 * math.pi)
    return Marble(tag, Vec2(0.0, 0.0), Vec2(speed * math.cos(ang), speed * math.sin(ang)),
                  mass - coating_mass, coat, coating_mass, Ballistic())


def check_properties(n_collisions: int = 1000, n_specs: int = 200, n_fuzz: int = 10_000, seed: int = 0) -> List[Measurement]:
    rng = random.Random(seed)
    momentum_bad = energy_bad = tried = 0
    models = [CollisionModel.SSM, CollisionModel.BBM, CollisionModel.FUSION_ONLY]
    while tried < n_collisions:
        a, b = _random_marble(rng, "a"), _random_marble(rng, "b")
        ang = rng.uniform(0, 2 * math.pi)
        n = Vec2(math.cos(ang), math.sin(ang))
        closing = (a.vel - b.vel).dot(n)
        if closing <= 0:
            continue
        tried += 1
        b.pos = n * (a.radius + b.radius)
        cfg = PhysicsConfig(restitution=rng.uniform(0, 1), collision_model=rng.choice(models))
        p0 = a.vel * a.mass + b.vel * b.mass
        ke0 = 0.5 * (a.mass * a.vel.dot(a.vel) + b.mass * b.vel.dot(b.vel))
        out = resolve_collision(a, b, ContactEvent("a", "b", closing, n, 0.0), cfg)
        if hasattr(out, "marble"):
            m = out.marble
            p1, ke1 = m.vel * m.mass, 0.5 * m.mass * m.vel.dot(m.vel)
            err = (p1 - p0).norm()
        else:
            p1 = a.vel * a.mass + b.vel * b.mass
            ke1 = 0.5 * (a.mass * a.vel.dot(a.vel) + b.mass * b.vel.dot(b.vel))
            err = abs(p1.dot(n) - p0.dot(n))
        if err > 1e-9 * max(1.0, p0.norm()):
            momentum_bad += 1
        if ke1 > ke0 * (1 + 1e-12) + 1e-15:
            energy_bad += 1

    trip_bad = 0
    for _ in range(n_specs):
        spec = random_spec(rng)
        if netlist.parse(netlist.serialize(spec)) != spec:
            trip_bad += 1

    crashes = 0
    for _ in range(n_fuzz):
        blob = bytes(rng.getrandbits(8) for _ in range(rng.randint(0, 120)))
        if rng.random() < 0.5:
            blob = _mutate_netlist(rng)
        try:
            netlist.parse(blob)
        except netlist.NetlistParseError:
            pass
        except Exception:  # noqa: BLE001 - anything else is a parser crash
            crashes += 1
    return [
        _m(f"momentum violations / {n_collisions}", momentum_bad, 0, momentum_bad == 0),
        _m(f"energy increases / {n_collisions}", energy_bad, 0, energy_bad == 0),
        _m(f"round-trip failures / {n_specs}", trip_bad, 0, trip_bad == 0),
        _m(f"parser crashes / {n_fuzz}", crashes, 0, crashes == 0),
    ]


def random_spec(rng: random.Random) -> netlist.CircuitSpec:
    """A small valid circuit with random geometry, used by the round-trip check."""
    from .physics import RampSegment, SinkRegion

    def num(lo, hi):
        return round(rng.uniform(lo, hi), rng.randint(0, 6))

    ramps = [
        RampSegment(f"r{i}", Vec2(num(-200, 200), num(-200, 200)), num(1, 89), rng.choice((1, -1)),
                    num(1, 300), rng.choice((None, round(rng.uniform(0.1, 1), 3))))
        for i in range(rng.randint(1, 3))
    ]
    latches = []
    for i in range(rng.randint(0, 2)):
        r = rng.choice(ramps)
        on = num(0, 100)
        latches.append(actuation.ElectromagnetLatch(f"em{i}", r.id, min(num(0, r.length), r.length), ((on, on + num(1, 500)),), num(1, 10)))
    sources = []
    for i in range(rng.randint(1, 3)):
        r = rng.choice(ramps)
        kind = rng.choice(list(CoatingKind))
        timed = rng.random() < 0.5
        sources.append(actuation.DropletSource(
            f"s{i}", r.id, f"IN{i}", num(1, 30), standard_coating(kind), netlist.default_coating_mass(kind),
            min(num(0, r.length), r.length), None if timed else num(1, 400), (num(0, 50),) if timed else (),
        ))
    sinks, x = [], -300.0
    for i in range(rng.randint(1, 3)):
        lo = x + num(1, 20)
        hi = lo + num(1, 50)
        sinks.append(SinkRegion(f"k{i}", rng.choice(("AB", "Sum", "Carry", "A_notB")), lo, hi, num(-300, 0)))
        x = hi
    config = {}
    if rng.random() < 0.5:
        config["e"] = num(0, 1)
    if rng.random() < 0.5:
        config["model"] = rng.choice(list(CollisionModel))
    return netlist.CircuitSpec(config, ramps, latches, sources, sinks)


def _mutate_netlist(rng: random.Random) -> bytes:
    text = bytearray(open(netlist.bundled_path(rng.choice(netlist.BUNDLED)), "rb").read())
    for _ in range(rng.randint(1, 8)):
        i = rng.randrange(len(text))
        op = rng.random()
        if op < 0.4:
            text[i] = rng.getrandbits(8)
        elif op < 0.7:
            del text[i]
        else:
            text.insert(i, rng.choice(b"()[]=,.#-+e \n\t0123456789"))
    return bytes(text)


@dataclass(frozen=True)
class Check:
    key: str
    title: str
    fn: Callable[[], List[Measurement]]


CHECKS: List[Check] = [
    Check("gate", "gate truth table matches AND / AND-NOT", check_gate),
    Check("regimes", "bounce at 0.21 m/s, coalesce at 0.29 m/s", check_regimes),
    Check("ordering", "soft-sphere paths inside, billiard-ball paths outside", check_ordering),
    Check("coalescence", "merged volume and momentum bookkeeping", check_coalescence),
    Check("half_adder", "half adder truth table", check_half_adder),
    Check("full_adder", "full adder truth table and carry exclusivity", check_full_adder),
    Check("synchronization", "mirror release and 100 ms offset", check_synchronization),
    Check("evaporation", "evaporation rates and dry-out times", check_evaporation),
    Check("cadence", "droplet emission period", check_cadence),
    Check("determinism", "byte-identical trace CSV", check_determinism),
    Check("properties", "randomized conservation, round-trip and fuzz", check_properties),
]


def run_check(check: Check) -> CheckResult:
    t0 = time.perf_counter()
    try:
        items = check.fn()
        error = ""
    except Exception as exc:  # noqa: BLE001 - a crashing check is reported as a failure
        items, error = [], f"{type(exc).__name__}: {exc}"
    passed = not error and bool(items) and all(m.passed for m in items)
    return CheckResult(check.key, check.title, passed, time.perf_counter() - t0, items, error)


def run(only: Optional[Sequence[str]] = None) -> Report:
    keys = {c.key for c in CHECKS}
    if only:
        unknown = sorted(set(only) - keys)
        if unknown:
            raise KeyError(f"unknown checks {unknown}; available: {', '.join(c.key for c in CHECKS)}")
    selected = [c for c in CHECKS if not only or c.key in only]
    return Report([run_check(c) for c in selected])
