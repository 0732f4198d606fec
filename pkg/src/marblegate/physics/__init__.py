"""Fixed-step 2D mechanics of liquid marbles on ramps and in flight."""
from .bodies import (
    ZERO,
    Annihilated,
    Ballistic,
    CoatingKind,
    CoatingSpec,
    CollisionModel,
    Evaporated,
    Held,
    Marble,
    Merged,
    MotionState,
    OnRamp,
    OutOfBounds,
    PhysicsConfig,
    RampSegment,
    SinkRegion,
    Sunk,
    Vec2,
    marble_radius,
    standard_coating,
    state_tag,
)
from .collision import (
    Annihilation,
    Bounced,
    Coalesced,
    CollisionOutcome,
    ContactEvent,
    Regime,
    classify_regime,
    coalesce,
    ramp_acceleration,
    resolve_collision,
)
from .world import Bond, Emission, World, detect_contacts, run_until, step
