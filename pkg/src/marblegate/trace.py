"""Trajectory sampling with CSV and SVG export."""
from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .physics.bodies import state_tag
from .physics.world import World, run_until

DEFAULT_SAMPLE_HZ = 120.0  # camera frame rate of the original footage
CSV_HEADER = "t_ms,id,x_mm,y_mm,vx_mps,vy_mps,state"


@dataclass(frozen=True)
class TraceRecord:
    t: float
    id: str
    x: float
    y: float
    vx: float
    vy: float
    state: str

    def csv_row(self) -> str:
        return f"{self.t:.3f},{self.id},{self.x:.6f},{self.y:.6f},{self.vx:.6f},{self.vy:.6f},{self.state}"


@dataclass
class Trace:
    world: World
    records: List[TraceRecord] = field(default_factory=list)

    def by_marble(self) -> Dict[str, List[TraceRecord]]:
        out: Dict[str, List[TraceRecord]] = {}
        for r in self.records:
            out.setdefault(r.id, []).append(r)
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(CSV_HEADER + "\n")
        for r in self.records:
            buf.write(r.csv_row() + "\n")
        return buf.getvalue()


class _Sampler:
    def __init__(self, sample_hz: Optional[float]):
        self.period = None if not sample_hz else 1000.0 / sample_hz
        self.next_t = 0.0
        self.records: List[TraceRecord] = []
        self.done: set = set()

    def __call__(self, world: World) -> None:
        if self.period is None:
            return
        if world.t + 1e-9 >= self.next_t:
            self.snapshot(world)
            while self.next_t <= world.t + 1e-9:
                self.next_t += self.period
        else:
            # terminal transitions are always recorded so exits are not lost
            for m in world.marbles:
                if m.terminal and m.id not in self.done:
                    self._emit(world.t, m)

    def snapshot(self, world: World) -> None:
        for m in world.marbles:
            if m.id in self.done:
                continue
            self._emit(world.t, m)

    def _emit(self, t: float, m) -> None:
        self.records.append(TraceRecord(t, m.id, m.pos.x, m.pos.y, m.vel.x, m.vel.y, state_tag(m.state)))
        if m.terminal:
            self.done.add(m.id)


def record(world: World, until: Optional[float] = None, sample_hz: Optional[float] = DEFAULT_SAMPLE_HZ) -> Trace:
    """Run ``world`` to quiescence (or ``until``) sampling at ``sample_hz``.

    ``sample_hz=None`` skips sampling and keeps only the final world.
    """
    sampler = _Sampler(sample_hz)
    run_until(world, until, sampler)
    if sampler.period is not None:
        last = sampler.records[-1].t if sampler.records else None
        if last != world.t:
            sampler.snapshot(world)
    return Trace(world, sampler.records)


# ---------------------------------------------------------------- SVG

_COLOURS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")


def _bounds(world: World, trace: Trace) -> Tuple[float, float, float, float]:
    xs, ys = [], []
    for r in world.ramps.values():
        xs += [r.anchor.x, r.bottom.x]
        ys += [r.anchor.y, r.bottom.y]
    for s in world.sinks:
        xs += [s.x_lo, s.x_hi]
        ys.append(s.floor_y)
    for rec in trace.records:
        xs.append(rec.x)
        ys.append(rec.y)
    if not xs:
        return -10.0, -10.0, 10.0, 10.0
    return min(xs), min(ys), max(xs), max(ys)


def to_svg(trace: Trace, margin: float = 10.0) -> str:
    """Static overlay: ramps, sinks and one polyline per marble, in mm.

    SVG's y axis points down, so world y is negated.
    """
    world = trace.world
    x0, y0, x1, y1 = _bounds(world, trace)
    vx, vy = x0 - margin, -y1 - margin
    w, h = (x1 - x0) + 2 * margin, (y1 - y0) + 2 * margin
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{vx:.3f} {vy:.3f} {w:.3f} {h:.3f}" '
        f'width="{w * 4:.0f}" height="{h * 4:.0f}">',
        f'<rect x="{vx:.3f}" y="{vy:.3f}" width="{w:.3f}" height="{h:.3f}" fill="white"/>',
    ]
    for r in world.ramps.values():
        a, b = r.anchor, r.bottom
        out.append(
            f'<line class="ramp" id="ramp-{r.id}" x1="{a.x:.3f}" y1="{-a.y:.3f}" x2="{b.x:.3f}" y2="{-b.y:.3f}" '
            'stroke="#444" stroke-width="0.8"/>'
        )
    for s in world.sinks:
        out.append(
            f'<rect class="sink" id="sink-{s.id}" x="{s.x_lo:.3f}" y="{-s.floor_y:.3f}" width="{s.x_hi - s.x_lo:.3f}" '
            'height="3" fill="none" stroke="#999" stroke-width="0.3"/>'
        )
        out.append(
            f'<text x="{(s.x_lo + s.x_hi) / 2:.3f}" y="{-s.floor_y + 7:.3f}" font-size="3" '
            f'text-anchor="middle" fill="#666">{s.label}</text>'
        )
    for i, (mid, recs) in enumerate(sorted(trace.by_marble().items())):
        pts = " ".join(f"{r.x:.3f},{-r.y:.3f}" for r in recs)
        colour = _COLOURS[i % len(_COLOURS)]
        out.append(
            f'<polyline class="marble" id="marble-{mid}" points="{pts}" fill="none" stroke="{colour}" '
            'stroke-width="0.5"/>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
