"""Value types for the marble simulator.

Units throughout: lengths in mm, times in ms, velocities in m/s (which is
numerically mm/ms), volumes in µL, masses in mg.  With water at 1 mg/µL a
marble's mass is its volume plus its coating mass.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

from ..errors import ConfigurationError, DomainError


@dataclass(frozen=True, slots=True)
class Vec2:
    x: float
    y: float

    def __add__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x - other.x, self.y - other.y)

    def __mul__(self, k: float) -> "Vec2":
        return Vec2(self.x * k, self.y * k)

    __rmul__ = __mul__

    def __neg__(self) -> "Vec2":
        return Vec2(-self.x, -self.y)

    def dot(self, other: "Vec2") -> float:
        return self.x * other.x + self.y * other.y

    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def is_finite(self) -> bool:
        return math.isfinite(self.x) and math.isfinite(self.y)


ZERO = Vec2(0.0, 0.0)


def marble_radius(volume: float) -> float:
    """Radius in mm of a sphere holding ``volume`` µL (1 µL = 1 mm³)."""
    if not volume > 0 or not math.isfinite(volume):
        raise DomainError(f"marble volume must be positive and finite, got {volume!r}")
    return (3.0 * volume / (4.0 * math.pi)) ** (1.0 / 3.0)


class CoatingKind(enum.Enum):
    BARE = "bare"
    NI = "ni"
    UHDPE = "uhdpe"
    NI_UHDPE = "ni_uhdpe"


@dataclass(frozen=True)
class CoatingSpec:
    kind: CoatingKind
    magnetic_fraction: float = 0.0
    # informational only
    grain_sizes_um: Tuple[float, ...] = ()

    def __post_init__(self):
        if not 0.0 <= self.magnetic_fraction <= 1.0:
            raise ConfigurationError(f"magnetic_fraction {self.magnetic_fraction} not in [0, 1]")
        magnetic_kind = self.kind in (CoatingKind.NI, CoatingKind.NI_UHDPE)
        if magnetic_kind != (self.magnetic_fraction > 0):
            raise ConfigurationError(
                f"{self.kind.value} coating inconsistent with magnetic_fraction={self.magnetic_fraction}"
            )


_STANDARD_COATINGS = {
    CoatingKind.BARE: CoatingSpec(CoatingKind.BARE, 0.0, ()),
    CoatingKind.NI: CoatingSpec(CoatingKind.NI, 1.0, (4.0, 7.0)),
    CoatingKind.UHDPE: CoatingSpec(CoatingKind.UHDPE, 0.0, (100.0,)),
    CoatingKind.NI_UHDPE: CoatingSpec(CoatingKind.NI_UHDPE, 0.5, (4.0, 7.0, 100.0)),
}


def standard_coating(kind: Union[CoatingKind, str]) -> CoatingSpec:
    """The stock coating for ``kind``; Ni/UHDPE is taken as a 50/50 mix."""
    return _STANDARD_COATINGS[CoatingKind(kind)]


# Motion states. Terminal states: Merged, Sunk, Evaporated, Annihilated, OutOfBounds.

@dataclass(frozen=True)
class OnRamp:
    ramp: str
    s: float  # arc position from the ramp's top end, mm


@dataclass(frozen=True)
class Ballistic:
    pass


@dataclass(frozen=True)
class Held:
    latch: str


@dataclass(frozen=True)
class Merged:
    into: str


@dataclass(frozen=True)
class Sunk:
    sink: str


@dataclass(frozen=True)
class Evaporated:
    pass


@dataclass(frozen=True)
class Annihilated:
    pass


@dataclass(frozen=True)
class OutOfBounds:
    """Fell below every ramp and sink; it can never be classified."""


MotionState = Union[OnRamp, Ballistic, Held, Merged, Sunk, Evaporated, Annihilated, OutOfBounds]

TERMINAL_STATES = (Merged, Sunk, Evaporated, Annihilated, OutOfBounds)


def state_tag(state: MotionState) -> str:
    return {
        OnRamp: "on_ramp",
        Ballistic: "ballistic",
        Held: "held",
        Merged: "merged",
        Sunk: "sunk",
        Evaporated: "evaporated",
        Annihilated: "annihilated",
        OutOfBounds: "out_of_bounds",
    }[type(state)]


@dataclass
class Marble:
    id: str
    pos: Vec2
    vel: Vec2
    volume: float
    coating: CoatingSpec = field(default_factory=lambda: standard_coating(CoatingKind.NI_UHDPE))
    coating_mass: float = 0.0
    state: MotionState = field(default_factory=Ballistic)

    @property
    def radius(self) -> float:
        return marble_radius(self.volume)

    @property
    def mass(self) -> float:
        return self.volume + self.coating_mass

    @property
    def terminal(self) -> bool:
        return isinstance(self.state, TERMINAL_STATES)

    @property
    def active(self) -> bool:
        """True for marbles that still move (on a ramp or in flight)."""
        return isinstance(self.state, (OnRamp, Ballistic))


@dataclass(frozen=True)
class RampSegment:
    id: str
    anchor: Vec2  # top end
    slope_deg: float
    direction: int  # +1: downhill towards +x, -1: towards -x
    length: float
    rolling_factor: Optional[float] = None  # None: use PhysicsConfig.rolling_factor

    tangent: Vec2 = field(init=False, compare=False, repr=False)
    normal: Vec2 = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        if not 0.0 < self.slope_deg < 90.0:
            raise ConfigurationError(f"ramp {self.id}: slope {self.slope_deg} deg not in (0, 90)")
        if self.direction not in (1, -1):
            raise ConfigurationError(f"ramp {self.id}: direction must be +1 or -1")
        if not self.length > 0:
            raise ConfigurationError(f"ramp {self.id}: length must be positive")
        if self.rolling_factor is not None and not 0.0 < self.rolling_factor <= 1.0:
            raise ConfigurationError(f"ramp {self.id}: rolling factor {self.rolling_factor} not in (0, 1]")
        th = math.radians(self.slope_deg)
        c, s = math.cos(th), math.sin(th)
        object.__setattr__(self, "tangent", Vec2(self.direction * c, -s))
        object.__setattr__(self, "normal", Vec2(self.direction * s, c))

    @property
    def bottom(self) -> Vec2:
        return self.anchor + self.tangent * self.length

    def surface_point(self, s: float) -> Vec2:
        return self.anchor + self.tangent * s

    def center_at(self, s: float, radius: float) -> Vec2:
        """Centre of a marble of ``radius`` resting on the ramp at arc ``s``."""
        return Vec2(
            self.anchor.x + self.tangent.x * s + self.normal.x * radius,
            self.anchor.y + self.tangent.y * s + self.normal.y * radius,
        )


@dataclass(frozen=True)
class SinkRegion:
    id: str
    label: str
    x_lo: float
    x_hi: float
    floor_y: float

    def __post_init__(self):
        if not self.x_lo < self.x_hi:
            raise ConfigurationError(f"sink {self.id}: empty x-interval [{self.x_lo}, {self.x_hi}]")

    def contains_x(self, x: float) -> bool:
        return self.x_lo <= x <= self.x_hi

    def overlaps(self, other: "SinkRegion") -> bool:
        return self.x_lo <= other.x_hi and other.x_lo <= self.x_hi


class CollisionModel(enum.Enum):
    SSM = "ssm"
    BBM = "bbm"
    FUSION_ONLY = "fusion"
    ANNIHILATE = "annihilate"


@dataclass(frozen=True)
class PhysicsConfig:
    dt: float = 0.05  # ms
    g: float = 9.81  # m/s^2
    v_coalesce: float = 0.29  # m/s
    restitution: float = 0.8
    contact_duration: float = 10.0  # ms, SSM only
    collision_model: CollisionModel = CollisionModel.SSM
    rolling_factor: float = 5.0 / 7.0
    horizon: float = 5000.0  # ms
    evaporation: bool = False

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigurationError("dt must be positive")
        if not 0.0 <= self.restitution <= 1.0:
            raise ConfigurationError("restitution must lie in [0, 1]")
        if not self.v_coalesce > 0:
            raise ConfigurationError("v_coalesce must be positive")
        if not self.contact_duration >= 0:
            raise ConfigurationError("contact_duration must be non-negative")
        if not 0.0 < self.rolling_factor <= 1.0:
            raise ConfigurationError("rolling_factor must lie in (0, 1]")

    @property
    def g_mm(self) -> float:
        """Gravity in mm/ms^2."""
        return self.g * 1e-3
