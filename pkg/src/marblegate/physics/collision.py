"""Pairwise marble collisions: regime choice, impulses and coalescence."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Union

from ..errors import CollisionError, DomainError
from .bodies import (
    Annihilated,
    Ballistic,
    CoatingKind,
    CoatingSpec,
    CollisionModel,
    Marble,
    Merged,
    PhysicsConfig,
    Vec2,
)


def ramp_acceleration(slope_deg: float, rolling_factor: float, g: float = 9.81) -> float:
    """Acceleration along the downhill tangent, m/s^2.

    The same value decelerates a marble travelling uphill.
    """
    if not 0.0 <= slope_deg < 90.0:
        raise DomainError(f"slope {slope_deg} deg outside [0, 90)")
    if not 0.0 < rolling_factor <= 1.0:
        raise DomainError(f"rolling factor {rolling_factor} outside (0, 1]")
    return rolling_factor * g * math.sin(math.radians(slope_deg))


class Regime(enum.Enum):
    BOUNCE = "bounce"
    COALESCE = "coalesce"


def classify_regime(relative_normal_speed: float, config: PhysicsConfig) -> Regime:
    if relative_normal_speed < 0:
        raise DomainError("relative normal speed must be non-negative")
    if relative_normal_speed >= config.v_coalesce:
        return Regime.COALESCE
    return Regime.BOUNCE


@dataclass(frozen=True)
class ContactEvent:
    a: str
    b: str
    normal_speed: float  # closing speed along normal, m/s
    normal: Vec2  # unit vector from a towards b
    time: float  # ms


@dataclass(frozen=True)
class Bounced:
    v1: Vec2
    v2: Vec2
    release_time: float  # equals the event time for BBM


@dataclass(frozen=True)
class Coalesced:
    marble: Marble


@dataclass(frozen=True)
class Annihilation:
    pass


CollisionOutcome = Union[Bounced, Coalesced, Annihilation]


def _closing_speed(m1: Marble, m2: Marble, n: Vec2) -> float:
    return (m1.vel.x - m2.vel.x) * n.x + (m1.vel.y - m2.vel.y) * n.y


def _merge_coating(m1: Marble, m2: Marble) -> CoatingSpec:
    if m1.coating == m2.coating:
        return m1.coating
    total = m1.coating_mass + m2.coating_mass
    if total > 0:
        w1, w2 = m1.coating_mass / total, m2.coating_mass / total
    else:
        w1 = w2 = 0.5
    frac = w1 * m1.coating.magnetic_fraction + w2 * m2.coating.magnetic_fraction
    kinds = {m1.coating.kind, m2.coating.kind}
    polymer = bool(kinds & {CoatingKind.UHDPE, CoatingKind.NI_UHDPE})
    if frac > 0:
        kind = CoatingKind.NI_UHDPE if polymer else CoatingKind.NI
    else:
        kind = CoatingKind.UHDPE if polymer else CoatingKind.BARE
    grains = tuple(sorted(set(m1.coating.grain_sizes_um) | set(m2.coating.grain_sizes_um)))
    return CoatingSpec(kind, frac, grains)


def coalesce(m1: Marble, m2: Marble, new_id: str | None = None) -> Marble:
    """Merge two marbles into one, conserving volume, coating and momentum.

    Both inputs are marked ``Merged`` into the returned marble.
    """
    for m in (m1, m2):
        if not m.active:
            raise CollisionError(f"cannot merge marble {m.id!r} in state {m.state}")
    M = m1.mass + m2.mass
    w1, w2 = m1.mass / M, m2.mass / M
    merged = Marble(
        id=new_id or f"{m1.id}+{m2.id}",
        pos=Vec2(w1 * m1.pos.x + w2 * m2.pos.x, w1 * m1.pos.y + w2 * m2.pos.y),
        vel=Vec2(w1 * m1.vel.x + w2 * m2.vel.x, w1 * m1.vel.y + w2 * m2.vel.y),
        volume=m1.volume + m2.volume,
        coating=_merge_coating(m1, m2),
        coating_mass=m1.coating_mass + m2.coating_mass,
        state=Ballistic(),
    )
    m1.state = Merged(merged.id)
    m2.state = Merged(merged.id)
    return merged


def resolve_collision(m1: Marble, m2: Marble, event: ContactEvent, config: PhysicsConfig) -> CollisionOutcome:
    """Resolve a detected contact and apply the result to the marbles.

    Bounces set the new velocities on ``m1``/``m2`` (the caller owns the SSM
    hold until ``release_time``); coalescence and annihilation change the
    inputs' states and, for coalescence, return the new marble.
    """
    n = event.normal
    if _closing_speed(m1, m2, n) <= 0:
        raise CollisionError(f"marbles {m1.id!r} and {m2.id!r} are not approaching")

    model = config.collision_model
    if model is CollisionModel.ANNIHILATE:
        m1.state = Annihilated()
        m2.state = Annihilated()
        return Annihilation()
    if model is CollisionModel.FUSION_ONLY:
        return Coalesced(coalesce(m1, m2))
    if classify_regime(event.normal_speed, config) is Regime.COALESCE:
        return Coalesced(coalesce(m1, m2))

    vn = _closing_speed(m1, m2, n)
    j = (1.0 + config.restitution) * vn / (1.0 / m1.mass + 1.0 / m2.mass)
    m1.vel = Vec2(m1.vel.x - j / m1.mass * n.x, m1.vel.y - j / m1.mass * n.y)
    m2.vel = Vec2(m2.vel.x + j / m2.mass * n.x, m2.vel.y + j / m2.mass * n.y)
    hold = config.contact_duration if model is CollisionModel.SSM else 0.0
    return Bounced(m1.vel, m2.vel, event.time + hold)
