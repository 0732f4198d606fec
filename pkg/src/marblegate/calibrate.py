"""Engineer a target impact speed by moving the release points of a gate.

Both latches of a symmetric gate are moved together along their ramps; the
further up they hold, the faster the marbles meet.  The relation is monotone,
so plain bisection on the hold position finds the release point that gives a
requested relative normal speed at first contact.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

from .errors import ConfigurationError
from .netlist import CircuitSpec, build_world
from .physics.world import World, step


@dataclass(frozen=True)
class Calibration:
    hold: float  # mm of arc from the ramp top
    speed: float  # relative normal speed at first contact, m/s
    outcome: str
    iterations: int


def with_hold(spec: CircuitSpec, hold: float) -> CircuitSpec:
    return replace(spec, latches=[replace(l, hold=hold) for l in spec.latches])


def first_contact(world: World, until: float = 2000.0):
    """Step until the first collision and return its record, or None."""
    while world.t < until and not world.quiescent():
        step(world)
        if world.collisions:
            return world.collisions[0]
    return None


def impact(spec: CircuitSpec, hold: float, **overrides):
    world = build_world(with_hold(spec, hold), {name: 1 for name in spec.inputs}, **overrides)
    rec = first_contact(world)
    if rec is None:
        raise ConfigurationError(f"marbles never meet with hold at {hold} mm")
    return rec


def calibrate(
    spec: CircuitSpec,
    target: float,
    *,
    lo: float = 0.0,
    hi: Optional[float] = None,
    tol: float = 5e-4,
    above: bool = False,
    max_iter: int = 60,
    **overrides,
) -> Calibration:
    """Hold position giving an impact speed within ``tol`` of ``target``.

    With ``above`` the result is constrained to ``[target, target + tol]``,
    which matters when the target sits on a threshold.
    """
    if hi is None:
        hi = min(next(r.length for r in spec.ramps if r.id == l.ramp) for l in spec.latches)
    # speed falls as the hold point moves down the ramp
    for i in range(1, max_iter + 1):
        mid = 0.5 * (lo + hi)
        rec = impact(spec, mid, **overrides)
        v = rec.event.normal_speed
        ok = target <= v <= target + tol if above else abs(v - target) <= tol
        if ok:
            return Calibration(mid, v, rec.outcome, i)
        if v > target:
            lo = mid
        else:
            hi = mid
    raise ConfigurationError(f"no hold position reaches {target} m/s within {tol}")
