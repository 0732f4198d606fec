"""Droplet sources and electromagnet latches.

Latch windows are half-open ``[on, off)`` in ms.  A latch catches a magnetic
marble by snapping it to the hold point; it lets go on the first tick at
which its schedule is off.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, List, Optional, Tuple

from .errors import ConfigurationError
from .physics.bodies import (
    ZERO,
    CoatingKind,
    CoatingSpec,
    Held,
    Marble,
    OnRamp,
    RampSegment,
    standard_coating,
)

if TYPE_CHECKING:
    from .physics.world import World

# Hardware the latches stand in for; not used by the dynamics.
ELECTROMAGNET_HARDWARE = {"force_N": 100.0, "voltage_V_dc": 12.0, "size_mm": (29.0, 22.0)}

DEFAULT_CAPTURE_RADIUS = 5.0  # mm
DEFAULT_COATING_MASS = 2.5  # mg, typical Ni/UHDPE coating


@dataclass(frozen=True)
class ElectromagnetLatch:
    id: str
    ramp: str
    hold: float  # arc position on the ramp, mm
    windows: Tuple[Tuple[float, float], ...] = ()
    capture_radius: float = DEFAULT_CAPTURE_RADIUS

    def __post_init__(self):
        prev_off = -math.inf
        for on, off in self.windows:
            if not on < off:
                raise ConfigurationError(f"latch {self.id}: window [{on}, {off}) is empty")
            if on < prev_off:
                raise ConfigurationError(f"latch {self.id}: windows overlap or are out of order")
            prev_off = off
        if not self.capture_radius > 0:
            raise ConfigurationError(f"latch {self.id}: capture radius must be positive")


def latch_active(latch: ElectromagnetLatch, t: float) -> bool:
    return any(on <= t < off for on, off in latch.windows)


def try_capture(latch: ElectromagnetLatch, marble: Marble, t: float, ramp: RampSegment) -> bool:
    """Capture ``marble`` if it is magnetic, on the latch's ramp and within range."""
    state = marble.state
    if not isinstance(state, OnRamp) or state.ramp != latch.ramp:
        return False
    if marble.coating.magnetic_fraction <= 0 or not latch_active(latch, t):
        return False
    if abs(state.s - latch.hold) > latch.capture_radius:
        return False
    marble.state = Held(latch.id)
    marble.vel = ZERO
    marble.pos = ramp.center_at(latch.hold, marble.radius)
    return True


def release(latch: ElectromagnetLatch, world: "World", t: float) -> "World":
    """Let go of every marble this latch holds once its schedule is off at ``t``."""
    if latch_active(latch, t):
        return world
    ramp = world.ramps[latch.ramp]
    for m in world.marbles:
        if isinstance(m.state, Held) and m.state.latch == latch.id:
            m.state = OnRamp(latch.ramp, latch.hold)
            m.vel = ZERO
            m.pos = ramp.center_at(latch.hold, m.radius)
    return world


@dataclass(frozen=True)
class DropletSource:
    id: str
    ramp: str
    input: str
    volume: float  # µL
    coating: CoatingSpec = field(default_factory=lambda: standard_coating(CoatingKind.NI_UHDPE))
    coating_mass: float = DEFAULT_COATING_MASS
    entry: float = 0.0  # arc position, mm
    rate: Optional[float] = None  # mL/h
    times: Tuple[float, ...] = ()  # explicit emission times, ms

    def __post_init__(self):
        if not self.volume > 0:
            raise ConfigurationError(f"source {self.id}: volume must be positive")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ConfigurationError(f"source {self.id}: emission times must strictly increase")
        if self.rate is not None and not self.rate > 0:
            raise ConfigurationError(f"source {self.id}: feed rate must be positive")


def emission_period(source: DropletSource) -> float:
    """Time between drops in ms for a feed rate in mL/h (1 mL/h = 1/3600 µL/ms)."""
    if source.rate is None:
        raise ConfigurationError(f"source {source.id} has no feed rate")
    return source.volume * 3600.0 / source.rate


def emission_times(source: DropletSource, horizon: float) -> List[float]:
    if not horizon > 0:
        raise ConfigurationError("horizon must be positive")
    if source.times:
        return [t for t in source.times if t <= horizon]
    if source.rate is None:
        raise ConfigurationError(f"source {source.id}: neither feed rate nor emission times given")
    period = emission_period(source)
    return [k * period for k in range(int(horizon // period) + 1) if k * period <= horizon]


def spawn(source: DropletSource, ramp: RampSegment, index: int) -> Marble:
    """A freshly coated marble at rest on the source's entry point."""
    m = Marble(
        id=f"{source.id}.{index}",
        pos=ZERO,
        vel=ZERO,
        volume=source.volume,
        coating=source.coating,
        coating_mass=source.coating_mass,
        state=OnRamp(ramp.id, source.entry),
    )
    m.pos = ramp.center_at(source.entry, m.radius)
    return m
