import math

import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from marblegate import netlist
from marblegate.errors import UsageError
from marblegate.physics import CoatingKind, CollisionModel, RampSegment, Vec2
from marblegate.repro import random_spec


def errors_of(text):
    with pytest.raises(netlist.NetlistParseError) as info:
        netlist.parse(text)
    return info.value.errors


def test_bundled_gate_shape(gate_spec):
    assert (len(gate_spec.ramps), len(gate_spec.latches), len(gate_spec.sources), len(gate_spec.sinks)) == (2, 2, 2, 3)
    assert netlist.validate(gate_spec) == []
    left, right = gate_spec.ramps
    assert left.length == right.length == 160.0
    assert left.slope_deg == right.slope_deg == 16.0
    # 16 mm gap between the ramp ends
    assert right.bottom.x - left.bottom.x == pytest.approx(16.0, abs=1e-3)


@pytest.mark.parametrize("name", netlist.BUNDLED)
def test_bundled_circuits_validate(name):
    assert netlist.validate(netlist.load(netlist.bundled_path(name))) == []


def test_empty_input():
    spec = netlist.parse("")
    assert spec == netlist.CircuitSpec()
    assert netlist.parse("# only a comment\n\n") == spec


def test_missing_length_is_one_error():
    errs = errors_of("ramp left anchor=(0,0)mm slope=16deg dir=+x")
    assert len(errs) == 1
    assert "length" in errs[0].message and errs[0].line == 1


def test_terse_ramp_line_names_length_once():
    errs = errors_of("ramp left slope=16")
    assert [e for e in errs if "'length'" in e.message and e.token == "length"]
    assert sum("'length'" in e.message for e in errs) == 1


def test_all_errors_reported_with_positions():
    text = "ramp a anchor=(0,0)mm slope=16deg dir=+x length=10mm\nbogus x\nramp a anchor=(0,0)mm slope=16deg dir=+x length=10mm\nsink k label=AB x=[1,2]cm y=0mm\n"
    errs = errors_of(text)
    lines = sorted(e.line for e in errs)
    assert lines == [2, 3, 4]
    assert any(e.token == "bogus" and e.column == 1 for e in errs)
    assert any("duplicate" in e.message for e in errs)
    assert any("unit" in e.message and e.token == "[1,2]cm" for e in errs)


@pytest.mark.parametrize(
    "line",
    [
        "ramp r anchor=(0,0) slope=16deg dir=+x length=1mm",
        "ramp r anchor=(0,0)mm slope=sixteen dir=+x length=1mm",
        "ramp r anchor=(0,0)mm slope=16deg dir=up length=1mm",
        "ramp r anchor=(0,0mm slope=16deg dir=+x length=1mm",
        "ramp r anchor=(0,0)mm slope=16deg dir=+x length=1mm colour=red",
        "config dt=0.05",
        "config e=nanmm",
        "source s ramp=r input=A volume=1uL coating=gold t=0ms",
        "source s ramp=r input=A volume=1uL coating=ni t=0ms rate=2mLph",
    ],
)
def test_malformed_lines(line):
    assert errors_of(line)


def test_validate_examples(gate_spec):
    bad_ramp = netlist.parse(netlist.serialize(gate_spec).replace("em em_left ramp=left", "em em_left ramp=nowhere"))
    problems = netlist.validate(bad_ramp)
    assert len(problems) == 1 and "nowhere" in problems[0]

    overlap = netlist.parse(netlist.serialize(gate_spec).replace("x=[10.3,40]mm", "x=[5,40]mm"))
    problems = netlist.validate(overlap)
    assert len(problems) == 1 and "out_a" in problems[0] and "out_ab" in problems[0]

    empty = netlist.validate(netlist.CircuitSpec())
    assert any("source" in p for p in empty) and any("sink" in p for p in empty)


def test_hold_out_of_range(gate_spec):
    spec = netlist.parse(netlist.serialize(gate_spec).replace("at=156.91mm window=[0,500]ms", "at=170mm window=[0,500]ms", 1))
    assert any("hold" in p for p in netlist.validate(spec))


def test_build_world_examples(gate_spec):
    assert len(netlist.build_world(gate_spec, {"A": 1, "B": 0}).marbles) == 1
    assert len(netlist.build_world(gate_spec, {"A": 0, "B": 0}).marbles) == 0
    w = netlist.build_world(gate_spec, {"A": 1, "B": 1})
    a, b = w.marbles
    assert a.pos.x == -b.pos.x and a.pos.y == b.pos.y
    assert a.vel == b.vel == Vec2(0, 0)
    with pytest.raises(UsageError):
        netlist.build_world(gate_spec, {"A": 1})


@given(st.dictionaries(st.sampled_from(["A", "B"]), st.integers(0, 1), min_size=2))
def test_marble_count_matches_bits(gate_spec, assignment):
    assert len(netlist.build_world(gate_spec, assignment).marbles) == sum(assignment.values())


def test_config_reaches_physics():
    spec = netlist.parse("config dt=0.1ms e=0.5 model=bbm g=9.7mps2 evaporation=on evap_bare=0.2mgpmin\n")
    cfg = spec.physics_config()
    assert (cfg.dt, cfg.restitution, cfg.collision_model, cfg.g, cfg.evaporation) == (0.1, 0.5, CollisionModel.BBM, 9.7, True)
    assert spec.evaporation_rates()[CoatingKind.BARE] == 0.2


@pytest.mark.parametrize("name", netlist.BUNDLED)
def test_round_trip_bundled(name):
    spec = netlist.load(netlist.bundled_path(name))
    text = netlist.serialize(spec)
    assert netlist.parse(text) == spec
    assert netlist.serialize(netlist.parse(text)) == text


def test_canonical_order(gate_spec):
    kinds = [line.split()[0] for line in netlist.serialize(gate_spec).splitlines()]
    assert kinds == sorted(kinds, key=["config", "ramp", "em", "source", "sink"].index)


@settings(max_examples=300, suppress_health_check=[HealthCheck.too_slow])
@given(st.randoms(use_true_random=False))
def test_round_trip_generated(rng):
    spec = random_spec(rng)
    assert netlist.validate(spec) == []
    assert netlist.parse(netlist.serialize(spec)) == spec


finite = st.floats(allow_nan=False, allow_infinity=False, min_value=-1e12, max_value=1e12)


@given(finite, finite, st.floats(0.001, 89.999), st.floats(1e-6, 1e9))
def test_round_trip_any_float(x, y, slope, length):
    spec = netlist.CircuitSpec(ramps=[RampSegment("r", Vec2(x, y), slope, -1, length)])
    back = netlist.parse(netlist.serialize(spec))
    assert back == spec
    assert math.copysign(1, back.ramps[0].anchor.x) == math.copysign(1, x) or x == 0


def _parse_total(blob):
    try:
        netlist.parse(blob)
    except netlist.NetlistParseError as exc:
        assert exc.errors
        for e in exc.errors:
            assert e.line >= 1 and e.column >= 1


@settings(max_examples=10_000, deadline=None, suppress_health_check=list(HealthCheck))
@given(st.binary(max_size=200))
def test_parse_never_crashes_on_bytes(blob):
    _parse_total(blob)


grammarish = st.text(alphabet="rampemsourcinkfgdtxyv=()[],.+-0123456789 \n#_AB", max_size=200)


@settings(max_examples=2000, deadline=None)
@given(grammarish)
def test_parse_never_crashes_on_near_grammar(text):
    _parse_total(text)
