"""Simulation state and the fixed-step integrator."""
from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set, Tuple

from .. import actuation
from ..errors import SimulationIntegrityError, UsageError
from .bodies import (
    Ballistic,
    Held,
    Marble,
    OnRamp,
    OutOfBounds,
    PhysicsConfig,
    RampSegment,
    SinkRegion,
    Sunk,
    Vec2,
)
from .collision import (
    Bounced,
    Coalesced,
    ContactEvent,
    resolve_collision,
)

# Marbles this far below the lowest ramp or sink can no longer reach anything.
OUT_OF_BOUNDS_MARGIN = 50.0  # mm


@dataclass
class Bond:
    """Two marbles held in compressed contact (soft-sphere model)."""

    a: str
    b: str
    normal: Vec2
    release_time: float


@dataclass(frozen=True)
class Emission:
    time: float
    source: str
    index: int


@dataclass(frozen=True)
class CollisionRecord:
    event: ContactEvent
    outcome: str  # "bounce", "coalesce" or "annihilate"


@dataclass
class World:
    config: PhysicsConfig = field(default_factory=PhysicsConfig)
    ramps: Dict[str, RampSegment] = field(default_factory=dict)
    latches: Dict[str, actuation.ElectromagnetLatch] = field(default_factory=dict)
    sinks: List[SinkRegion] = field(default_factory=list)
    marbles: List[Marble] = field(default_factory=list)
    sources: Dict[str, actuation.DropletSource] = field(default_factory=dict)
    pending: List[Emission] = field(default_factory=list)
    tick: int = 0
    contact_latch: Set[Tuple[str, str]] = field(default_factory=set)
    bonds: List[Bond] = field(default_factory=list)
    collisions: List[CollisionRecord] = field(default_factory=list)
    evaporation_rates: Optional[dict] = None

    @property
    def t(self) -> float:
        """Current time in ms; rounded so that tick boundaries compare cleanly."""
        return round(self.tick * self.config.dt, 9)

    def marble(self, marble_id: str) -> Marble:
        for m in self.marbles:
            if m.id == marble_id:
                return m
        raise KeyError(marble_id)

    def copy(self) -> "World":
        return copy.deepcopy(self)

    def floor_y(self) -> Optional[float]:
        ys = [s.floor_y for s in self.sinks]
        for r in self.ramps.values():
            ys.extend((r.anchor.y, r.bottom.y))
        if not ys:
            return None
        return min(ys) - OUT_OF_BOUNDS_MARGIN

    def quiescent(self) -> bool:
        """No marble can move again and no emission is outstanding."""
        if self.pending:
            return False
        return all(m.terminal for m in self.marbles)

    def total_volume(self) -> float:
        from .bodies import Evaporated, Merged, Annihilated
        return sum(m.volume for m in self.marbles if not isinstance(m.state, (Merged, Evaporated, Annihilated)))


def _pair(a: str, b: str) -> Tuple[str, str]:
    return (a, b) if a < b else (b, a)


def detect_contacts(world: World) -> List[ContactEvent]:
    """Approaching pairs of moving marbles whose discs touch or overlap."""
    movers = [m for m in world.marbles if m.active]
    bonded = {_pair(b.a, b.b) for b in world.bonds}
    t = world.t
    events = []
    for i, m1 in enumerate(movers):
        r1 = m1.radius
        for m2 in movers[i + 1:]:
            dx = m2.pos.x - m1.pos.x
            dy = m2.pos.y - m1.pos.y
            reach = r1 + m2.radius
            d2 = dx * dx + dy * dy
            if d2 > reach * reach or d2 == 0.0:
                continue
            key = _pair(m1.id, m2.id)
            if key in world.contact_latch or key in bonded:
                continue
            d = math.sqrt(d2)
            nx, ny = dx / d, dy / d
            closing = (m1.vel.x - m2.vel.x) * nx + (m1.vel.y - m2.vel.y) * ny
            if closing > 0:
                events.append(ContactEvent(m1.id, m2.id, closing, Vec2(nx, ny), t))
    events.sort(key=lambda e: _pair(e.a, e.b))
    return events


def _move(world: World, m: Marble, dt: float, bond_normals: Dict[str, List[Vec2]]) -> None:
    cfg = world.config
    g = cfg.g_mm
    st = m.state
    if isinstance(st, OnRamp):
        ramp = world.ramps[st.ramp]
        k = ramp.rolling_factor if ramp.rolling_factor is not None else cfg.rolling_factor
        tx, ty = ramp.tangent.x, ramp.tangent.y
        a = -k * g * ty  # k g sin(slope), positive downhill
        sd = m.vel.x * tx + m.vel.y * ty + a * dt
        s = st.s + sd * dt
        r = m.radius
        m.pos = ramp.center_at(s, r)
        m.vel = Vec2(sd * tx, sd * ty)
        if 0.0 <= s <= ramp.length:
            m.state = OnRamp(st.ramp, s)
        else:
            m.state = Ballistic()
        return
    vx, vy = m.vel.x, m.vel.y - g * dt
    m.vel = Vec2(vx, vy)
    dx, dy = vx * dt, vy * dt
    for n in bond_normals.get(m.id, ()):
        along = dx * n.x + dy * n.y
        dx -= along * n.x
        dy -= along * n.y
    m.pos = Vec2(m.pos.x + dx, m.pos.y + dy)


def _try_land(world: World, m: Marble, prev: Vec2) -> None:
    r = m.radius
    for ramp in world.ramps.values():
        n, tg, a = ramp.normal, ramp.tangent, ramp.anchor
        if m.vel.x * n.x + m.vel.y * n.y >= 0:
            continue
        rx, ry = m.pos.x - a.x, m.pos.y - a.y
        d = rx * n.x + ry * n.y
        if d >= r:
            continue
        prev_d = (prev.x - a.x) * n.x + (prev.y - a.y) * n.y
        if prev_d < r:
            continue
        u = rx * tg.x + ry * tg.y
        if not 0.0 <= u <= ramp.length:
            continue
        vt = m.vel.x * tg.x + m.vel.y * tg.y
        m.state = OnRamp(ramp.id, u)
        m.pos = ramp.center_at(u, r)
        m.vel = Vec2(vt * tg.x, vt * tg.y)
        return


def _check_sinks(world: World, m: Marble, prev: Vec2) -> None:
    for sink in world.sinks:
        if prev.y > sink.floor_y >= m.pos.y and sink.contains_x(m.pos.x):
            m.state = Sunk(sink.id)
            return


def _after_bounce(world: World, m: Marble) -> None:
    """Keep a marble that was struck while rolling on its ramp, or launch it."""
    st = m.state
    if not isinstance(st, OnRamp):
        return
    ramp = world.ramps[st.ramp]
    n, tg = ramp.normal, ramp.tangent
    if m.vel.x * n.x + m.vel.y * n.y > 0:
        m.state = Ballistic()
    else:
        vt = m.vel.x * tg.x + m.vel.y * tg.y
        m.vel = Vec2(vt * tg.x, vt * tg.y)


def spawn_due(world: World, t: float) -> None:
    while world.pending and world.pending[0].time <= t:
        em = world.pending.pop(0)
        src = world.sources[em.source]
        world.marbles.append(actuation.spawn(src, world.ramps[src.ramp], em.index))


def _check_finite(world: World) -> None:
    for m in world.marbles:
        if m.terminal:
            continue
        if not (m.pos.is_finite() and m.vel.is_finite() and math.isfinite(m.volume)):
            raise SimulationIntegrityError(f"non-finite state for marble {m.id!r} at t={world.t} ms")


def step(world: World, dt: Optional[float] = None) -> World:
    """Advance ``world`` by one tick in place and return it.

    Order within a tick: emissions and latch releases at the start time,
    semi-implicit integration, ramp landings, sinks, captures, contacts,
    then expiry of soft-sphere holds.
    """
    cfg = world.config
    if dt is not None and dt != cfg.dt:
        raise UsageError(f"step dt {dt} differs from configured dt {cfg.dt}")
    dt = cfg.dt
    _check_finite(world)
    t0 = world.t
    spawn_due(world, t0)
    for latch in world.latches.values():
        actuation.release(latch, world, t0)

    bond_normals: Dict[str, List[Vec2]] = {}
    for b in world.bonds:
        bond_normals.setdefault(b.a, []).append(b.normal)
        bond_normals.setdefault(b.b, []).append(b.normal)

    floor = world.floor_y()
    for m in world.marbles:
        if not m.active:
            continue
        prev = m.pos
        _move(world, m, dt, bond_normals)
        if isinstance(m.state, Ballistic):
            _try_land(world, m, prev)
        _check_sinks(world, m, prev)
        if isinstance(m.state, Ballistic) and floor is not None and m.pos.y < floor:
            m.state = OutOfBounds()

    world.tick += 1
    t1 = world.t

    for latch in world.latches.values():
        if not actuation.latch_active(latch, t1):
            continue
        ramp = world.ramps[latch.ramp]
        for m in world.marbles:
            actuation.try_capture(latch, m, t1, ramp)

    _release_contact_latch(world)
    for event in detect_contacts(world):
        m1, m2 = world.marble(event.a), world.marble(event.b)
        if not (m1.active and m2.active):
            continue
        n = event.normal
        if (m1.vel.x - m2.vel.x) * n.x + (m1.vel.y - m2.vel.y) * n.y <= 0:
            continue
        outcome = resolve_collision(m1, m2, event, cfg)
        if isinstance(outcome, Bounced):
            world.contact_latch.add(_pair(m1.id, m2.id))
            _after_bounce(world, m1)
            _after_bounce(world, m2)
            if outcome.release_time > t1:
                world.bonds.append(Bond(m1.id, m2.id, n, outcome.release_time))
            world.collisions.append(CollisionRecord(event, "bounce"))
        elif isinstance(outcome, Coalesced):
            world.marbles.append(outcome.marble)
            world.collisions.append(CollisionRecord(event, "coalesce"))
        else:
            world.collisions.append(CollisionRecord(event, "annihilate"))

    world.bonds = [b for b in world.bonds if b.release_time > t1 and _both_active(world, b)]

    if cfg.evaporation:
        from ..lifetime import evaporate_in_place
        minutes = dt / 60000.0
        for m in world.marbles:
            if not m.terminal:
                evaporate_in_place(m, minutes, world.evaporation_rates)

    _check_finite(world)
    return world


def _both_active(world: World, bond: Bond) -> bool:
    return world.marble(bond.a).active and world.marble(bond.b).active


def _release_contact_latch(world: World) -> None:
    if not world.contact_latch:
        return
    keep = set()
    by_id = {m.id: m for m in world.marbles}
    for a, b in world.contact_latch:
        m1, m2 = by_id[a], by_id[b]
        if not (m1.active and m2.active):
            continue
        dx, dy = m2.pos.x - m1.pos.x, m2.pos.y - m1.pos.y
        if math.hypot(dx, dy) <= m1.radius + m2.radius:
            keep.add((a, b))
    world.contact_latch = keep


def run_until(world: World, until: Optional[float] = None, callback=None) -> World:
    """Step until quiescence or ``until`` ms (default: the configured horizon).

    ``callback(world)`` is invoked once before the first tick and after every tick.
    """
    until = world.config.horizon if until is None else until
    if callback is not None:
        callback(world)
    while world.t < until and not world.quiescent():
        step(world)
        if callback is not None:
            callback(world)
    return world
