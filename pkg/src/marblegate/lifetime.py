"""Evaporation of marbles under a constant-rate model.

Only initial evaporation rates were measured, so the rate is held constant
for a marble's whole life.  Water is taken as 1 mg/µL, which makes a rate in
mg/min a volume loss in µL/min.
"""
from __future__ import annotations

import copy
from typing import Mapping, Optional, Union

from .errors import DomainError
from .physics.bodies import CoatingKind, Evaporated, Marble

# mg/min for 10 µL marbles
EVAPORATION_RATES: Mapping[CoatingKind, float] = {
    CoatingKind.BARE: 0.1392,
    CoatingKind.NI: 0.1133,
    CoatingKind.UHDPE: 0.1107,
    CoatingKind.NI_UHDPE: 0.0998,
}

RateTable = Mapping[CoatingKind, float]


def evaporation_rate(kind: Union[CoatingKind, str], table: Optional[RateTable] = None) -> float:
    table = EVAPORATION_RATES if table is None else table
    try:
        return table[CoatingKind(kind)]
    except (ValueError, KeyError):
        raise DomainError(f"no evaporation rate for coating {kind!r}") from None


def evaporate_in_place(marble: Marble, minutes: float, table: Optional[RateTable] = None) -> None:
    if minutes < 0:
        raise DomainError("evaporation interval must be non-negative")
    if isinstance(marble.state, Evaporated) or minutes == 0:
        return
    remaining = marble.volume - evaporation_rate(marble.coating.kind, table) * minutes
    if remaining <= 0:
        marble.volume = 0.0
        marble.state = Evaporated()
    else:
        marble.volume = remaining


def apply_evaporation(marble: Marble, minutes: float, table: Optional[RateTable] = None) -> Marble:
    """Return a copy of ``marble`` after ``minutes`` of evaporation."""
    out = copy.copy(marble)
    evaporate_in_place(out, minutes, table)
    return out


def time_to_dryout(marble: Marble, table: Optional[RateTable] = None) -> float:
    """Minutes until the marble's water is gone."""
    if isinstance(marble.state, Evaporated) or marble.volume <= 0:
        raise DomainError(f"marble {marble.id!r} has already evaporated")
    return marble.volume / evaporation_rate(marble.coating.kind, table)
