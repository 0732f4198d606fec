import pytest
from hypothesis import given, strategies as st

from marblegate import netlist
from marblegate.actuation import (
    DropletSource,
    ElectromagnetLatch,
    emission_period,
    emission_times,
    latch_active,
    release,
    try_capture,
)
from marblegate.errors import ConfigurationError
from marblegate.physics import (
    CoatingKind,
    Held,
    Marble,
    OnRamp,
    RampSegment,
    Vec2,
    World,
    run_until,
    standard_coating,
)

RAMP = RampSegment("r", Vec2(0, 0), 16, 1, 100)


def latch(*windows, hold=50.0):
    return ElectromagnetLatch("em", "r", hold, tuple(windows))


def rolling(s, kind=CoatingKind.NI_UHDPE):
    m = Marble("m", Vec2(0, 0), Vec2(0.1, -0.03), 11.6, standard_coating(kind), state=OnRamp("r", s))
    m.pos = RAMP.center_at(s, m.radius)
    return m


@pytest.mark.parametrize("t, active", [(250, True), (500, False), (0, True), (-1, False)])
def test_window_is_half_open(t, active):
    assert latch_active(latch((0, 500)), t) is active


def test_empty_schedule_never_active():
    assert not latch_active(latch(), 0.0)


def test_windows_must_be_ordered():
    with pytest.raises(ConfigurationError):
        latch((100, 200), (150, 300))
    with pytest.raises(ConfigurationError):
        latch((100, 100))


def test_capture_snaps_and_stops():
    m = rolling(52.0)
    assert try_capture(latch((0, 500)), m, 10.0, RAMP)
    assert m.state == Held("em")
    assert m.vel == Vec2(0, 0)
    assert m.pos == RAMP.center_at(50.0, m.radius)


def test_no_capture_out_of_range_or_off():
    assert not try_capture(latch((0, 500)), rolling(60.0), 10.0, RAMP)
    assert not try_capture(latch((0, 5)), rolling(50.0), 10.0, RAMP)


@given(st.floats(0, 100), st.floats(0, 1000))
def test_non_magnetic_never_captured(s, t):
    for kind in (CoatingKind.UHDPE, CoatingKind.BARE):
        assert not try_capture(latch((0, 2000)), rolling(s, kind), t, RAMP)


def test_release_only_after_off():
    em = latch((0, 500))
    m = rolling(50.0)
    try_capture(em, m, 0.0, RAMP)
    world = World(ramps={"r": RAMP}, latches={"em": em}, marbles=[m])
    release(em, world, 499.95)
    assert isinstance(m.state, Held)
    release(em, world, 500.0)
    assert m.state == OnRamp("r", 50.0) and m.vel == Vec2(0, 0)


def test_release_without_marbles_is_noop():
    world = World(ramps={"r": RAMP})
    assert release(latch((0, 5)), world, 10.0) is world
    assert world.marbles == []


def test_cadence_examples():
    typical = DropletSource("s", "r", "A", 11.6, rate=7.0)
    period = emission_period(typical)
    assert period == pytest.approx(11.6 / (7000 / 3600) * 1000, rel=1e-12)
    assert abs(period - 5966) <= 1
    assert 1000 / period == pytest.approx(0.1676, abs=1e-4)
    fast = DropletSource("s", "r", "A", 11.6, rate=11.6 * 8 * 3.6)
    assert emission_period(fast) == pytest.approx(125.0, abs=1e-9)


def test_explicit_times():
    src = DropletSource("s", "r", "A", 11.6, times=(0.0, 40.0, 60.0))
    assert emission_times(src, 50.0) == [0.0, 40.0]


def test_missing_cadence_is_configuration_error():
    with pytest.raises(ConfigurationError):
        emission_times(DropletSource("s", "r", "A", 11.6), 100.0)


def test_held_state_constant_while_latched(gate_spec):
    world = netlist.build_world(gate_spec, {"A": 1, "B": 0})
    snapshots = []

    def watch(w):
        m = w.marbles[0]
        if isinstance(m.state, Held):
            snapshots.append((m.pos, m.vel))

    run_until(world, callback=watch)
    assert len(snapshots) > 100
    assert len(set(snapshots)) == 1


def test_mirror_release(gate_spec):
    world = netlist.build_world(gate_spec, {"A": 1, "B": 1})
    worst = []
    run_until(world, callback=lambda w: worst.append(
        max(abs(w.marbles[0].pos.x + w.marbles[1].pos.x), abs(w.marbles[0].pos.y - w.marbles[1].pos.y))
    ))
    assert max(worst) <= 1e-9
