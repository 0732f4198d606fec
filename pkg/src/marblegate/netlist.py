"""The ``.lmc`` circuit description language.

One declaration per line, ``#`` starts a comment::

    config   dt=0.05ms v_coalesce=0.29mps e=0.8
    ramp     <id> anchor=(x,y)mm slope=<d>deg dir=<+x|-x> length=<l>mm [k=<f>]
    em       <id> ramp=<id> at=<arc>mm window=[on,off]ms [window=...] [radius=<r>mm]
    source   <id> ramp=<id> input=<NAME> volume=<v>uL coating=<bare|ni|uhdpe|ni_uhdpe>
             [t=<ms>ms ...|rate=<r>mLph] [at=<arc>mm] [mass=<m>mg]
    sink     <id> label=<CHANNEL> x=[lo,hi]mm y=<floor>mm

Dimensioned values must carry their unit.  :func:`parse` reports every
problem in the text at once through :class:`NetlistParseError`.
"""
from __future__ import annotations

import math
import os
import re
from importlib import resources
from dataclasses import dataclass, field, replace
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from .actuation import DEFAULT_CAPTURE_RADIUS, DropletSource, ElectromagnetLatch, emission_times
from .errors import ConfigurationError, MarbleError, UsageError
from .physics.bodies import (
    CoatingKind,
    CollisionModel,
    PhysicsConfig,
    RampSegment,
    SinkRegion,
    Vec2,
    standard_coating,
)
from .physics.world import Emission, World, spawn_due

KEYWORDS = ("config", "ramp", "em", "source", "sink")

_NUM = r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?"
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_SCALAR = re.compile(rf"({_NUM})([A-Za-z0-9]*)\Z")
_POINT = re.compile(rf"\(\s*({_NUM})\s*,\s*({_NUM})\s*\)([A-Za-z]*)\Z")
_INTERVAL = re.compile(rf"\[\s*({_NUM})\s*,\s*({_NUM})\s*\]([A-Za-z]*)\Z")

# config key -> (unit, PhysicsConfig field); unit None means dimensionless
_CONFIG_NUMERIC = {
    "dt": ("ms", "dt"),
    "g": ("mps2", "g"),
    "v_coalesce": ("mps", "v_coalesce"),
    "e": (None, "restitution"),
    "tau": ("ms", "contact_duration"),
    "k": (None, "rolling_factor"),
    "horizon": ("ms", "horizon"),
}
_EVAP_KEYS = {f"evap_{k.value}": k for k in CoatingKind}
CONFIG_KEYS = tuple(_CONFIG_NUMERIC) + ("model", "evaporation") + tuple(_EVAP_KEYS)


@dataclass(frozen=True)
class ParseError:
    line: int
    column: int
    message: str
    token: str = ""

    def __str__(self):
        tok = f" near {self.token!r}" if self.token else ""
        return f"line {self.line}, column {self.column}: {self.message}{tok}"


class NetlistParseError(MarbleError, ValueError):
    def __init__(self, errors: Sequence[ParseError]):
        self.errors = list(errors)
        super().__init__("\n".join(str(e) for e in self.errors))


@dataclass
class CircuitSpec:
    config: Dict[str, object] = field(default_factory=dict)
    ramps: List[RampSegment] = field(default_factory=list)
    latches: List[ElectromagnetLatch] = field(default_factory=list)
    sources: List[DropletSource] = field(default_factory=list)
    sinks: List[SinkRegion] = field(default_factory=list)

    @property
    def inputs(self) -> List[str]:
        """Input names in order of first appearance."""
        seen: List[str] = []
        for s in self.sources:
            if s.input not in seen:
                seen.append(s.input)
        return seen

    @property
    def labels(self) -> List[str]:
        """Output channel labels in order of first appearance."""
        seen: List[str] = []
        for s in self.sinks:
            if s.label not in seen:
                seen.append(s.label)
        return seen

    def physics_config(self, **overrides) -> PhysicsConfig:
        kw = {}
        for key, value in self.config.items():
            if key in _CONFIG_NUMERIC:
                kw[_CONFIG_NUMERIC[key][1]] = value
            elif key == "model":
                kw["collision_model"] = value
            elif key == "evaporation":
                kw["evaporation"] = value
        kw.update({k: v for k, v in overrides.items() if v is not None})
        return PhysicsConfig(**kw)

    def evaporation_rates(self) -> Optional[Dict[CoatingKind, float]]:
        custom = {kind: self.config[key] for key, kind in _EVAP_KEYS.items() if key in self.config}
        if not custom:
            return None
        from .lifetime import EVAPORATION_RATES
        return {**EVAPORATION_RATES, **custom}


# ---------------------------------------------------------------- lexing

@dataclass(frozen=True)
class _Tok:
    text: str
    col: int  # 1-based


def _split_tokens(line: str) -> Tuple[List[_Tok], Optional[str]]:
    """Whitespace split that keeps bracketed groups together."""
    toks: List[_Tok] = []
    depth = 0
    start = None
    for i, ch in enumerate(line):
        if ch.isspace() and depth == 0:
            if start is not None:
                toks.append(_Tok(line[start:i], start + 1))
                start = None
            continue
        if start is None:
            start = i
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
            if depth < 0:
                return toks, f"unbalanced {ch!r} at column {i + 1}"
    if start is not None:
        toks.append(_Tok(line[start:], start + 1))
    if depth != 0:
        return toks, "unclosed bracket"
    return toks, None


# ---------------------------------------------------------------- values

class _ValueError(Exception):
    pass


def _number(text: str) -> float:
    v = float(text)
    if not math.isfinite(v):
        raise _ValueError("number is not finite")
    return v


def _scalar(text: str, unit: Optional[str]) -> float:
    m = _SCALAR.match(text)
    if not m:
        raise _ValueError(f"malformed number {text!r}")
    got = m.group(2)
    want = unit or ""
    if got != want:
        if want:
            raise _ValueError(f"expected unit {want!r}, got {got or 'none'!r}")
        raise _ValueError(f"unexpected unit {got!r} on dimensionless value")
    return _number(m.group(1))


def _pair(regex, text: str, unit: str, what: str) -> Tuple[float, float]:
    m = regex.match(text)
    if not m:
        raise _ValueError(f"malformed {what} {text!r}")
    if m.group(3) != unit:
        raise _ValueError(f"expected unit {unit!r}, got {m.group(3) or 'none'!r}")
    return _number(m.group(1)), _number(m.group(2))


def _ident(text: str) -> str:
    if not _IDENT.match(text):
        raise _ValueError(f"malformed identifier {text!r}")
    return text


def _direction(text: str) -> int:
    if text == "+x":
        return 1
    if text == "-x":
        return -1
    raise _ValueError(f"direction must be +x or -x, got {text!r}")


def _coating(text: str) -> CoatingKind:
    try:
        return CoatingKind(text)
    except ValueError:
        raise _ValueError(f"unknown coating {text!r}") from None


def _model(text: str) -> CollisionModel:
    try:
        return CollisionModel(text)
    except ValueError:
        raise _ValueError(f"unknown collision model {text!r}") from None


def _switch(text: str) -> bool:
    if text in ("on", "off"):
        return text == "on"
    raise _ValueError(f"expected on or off, got {text!r}")


# key -> (converter, required, repeatable)
_Field = Tuple[object, bool, bool]

_RAMP_FIELDS: Dict[str, _Field] = {
    "anchor": (lambda s: _pair(_POINT, s, "mm", "point"), True, False),
    "slope": (lambda s: _scalar(s, "deg"), True, False),
    "dir": (_direction, True, False),
    "length": (lambda s: _scalar(s, "mm"), True, False),
    "k": (lambda s: _scalar(s, None), False, False),
}
_EM_FIELDS: Dict[str, _Field] = {
    "ramp": (_ident, True, False),
    "at": (lambda s: _scalar(s, "mm"), True, False),
    "window": (lambda s: _pair(_INTERVAL, s, "ms", "window"), False, True),
    "radius": (lambda s: _scalar(s, "mm"), False, False),
}
_SOURCE_FIELDS: Dict[str, _Field] = {
    "ramp": (_ident, True, False),
    "input": (_ident, True, False),
    "volume": (lambda s: _scalar(s, "uL"), True, False),
    "coating": (_coating, True, False),
    "t": (lambda s: _scalar(s, "ms"), False, True),
    "rate": (lambda s: _scalar(s, "mLph"), False, False),
    "at": (lambda s: _scalar(s, "mm"), False, False),
    "mass": (lambda s: _scalar(s, "mg"), False, False),
}
_SINK_FIELDS: Dict[str, _Field] = {
    "label": (_ident, True, False),
    "x": (lambda s: _pair(_INTERVAL, s, "mm", "interval"), True, False),
    "y": (lambda s: _scalar(s, "mm"), True, False),
}

_CONFIG_FIELDS: Dict[str, _Field] = {
    **{k: ((lambda u: (lambda s: _scalar(s, u)))(unit), False, False) for k, (unit, _) in _CONFIG_NUMERIC.items()},
    "model": (_model, False, False),
    "evaporation": (_switch, False, False),
    **{k: (lambda s: _scalar(s, "mgpmin"), False, False) for k in _EVAP_KEYS},
}


def default_coating_mass(kind: CoatingKind) -> float:
    return 0.0 if kind is CoatingKind.BARE else 2.5


# ---------------------------------------------------------------- parsing

def _decode(text: Union[str, bytes]) -> Tuple[str, List[ParseError]]:
    if isinstance(text, str):
        return text, []
    try:
        return text.decode("utf-8"), []
    except UnicodeDecodeError as exc:
        line = text[: exc.start].count(b"\n") + 1
        col = exc.start - (text.rfind(b"\n", 0, exc.start) + 1) + 1
        err = ParseError(line, col, "invalid UTF-8", repr(text[exc.start:exc.end]))
        return text.decode("utf-8", errors="replace"), [err]


def parse(text: Union[str, bytes]) -> CircuitSpec:
    """Parse netlist text; raise :class:`NetlistParseError` listing every error."""
    src, errors = _decode(text)
    spec = CircuitSpec()
    seen_ids: Dict[str, set] = {k: set() for k in KEYWORDS}

    for lineno, raw in enumerate(src.split("\n"), start=1):
        line = raw.split("#", 1)[0].rstrip("\r")
        if not line.strip():
            continue
        toks, lex_err = _split_tokens(line)
        if lex_err:
            errors.append(ParseError(lineno, 1, lex_err, line.strip()))
            continue
        kw = toks[0]
        if kw.text not in KEYWORDS:
            errors.append(ParseError(lineno, kw.col, "unknown keyword", kw.text))
            continue
        if kw.text == "config":
            fields = _collect(toks[1:], _CONFIG_FIELDS, lineno, errors)
            for key, value in fields.items():
                if key in spec.config:
                    errors.append(ParseError(lineno, kw.col, f"config key {key!r} set twice", key))
                else:
                    spec.config[key] = value
            continue

        if len(toks) < 2 or "=" in toks[1].text:
            errors.append(ParseError(lineno, kw.col, f"{kw.text} declaration needs an id", kw.text))
            continue
        id_tok = toks[1]
        if not _IDENT.match(id_tok.text):
            errors.append(ParseError(lineno, id_tok.col, "malformed identifier", id_tok.text))
            continue
        if id_tok.text in seen_ids[kw.text]:
            errors.append(ParseError(lineno, id_tok.col, f"duplicate {kw.text} id", id_tok.text))
            continue
        seen_ids[kw.text].add(id_tok.text)
        table = {"ramp": _RAMP_FIELDS, "em": _EM_FIELDS, "source": _SOURCE_FIELDS, "sink": _SINK_FIELDS}[kw.text]
        n_before = len(errors)
        given: set = set()
        fields = _collect(toks[2:], table, lineno, errors, given)
        for key, (_, required, _) in table.items():
            # a key that was present but malformed has already been reported
            if required and key not in given:
                errors.append(ParseError(lineno, kw.col, f"missing required key {key!r}", key))
        if len(errors) > n_before:
            continue
        try:
            _build(kw.text, id_tok.text, fields, spec)
        except ConfigurationError as exc:
            errors.append(ParseError(lineno, id_tok.col, str(exc), id_tok.text))

    if errors:
        raise NetlistParseError(errors)
    return spec


def _collect(
    toks: Sequence[_Tok], table: Mapping[str, _Field], lineno: int, errors: List[ParseError], seen: Optional[set] = None
) -> dict:
    out: dict = {}
    for tok in toks:
        key, eq, value = tok.text.partition("=")
        if not eq:
            errors.append(ParseError(lineno, tok.col, "expected key=value", tok.text))
            continue
        if key not in table:
            errors.append(ParseError(lineno, tok.col, f"unknown key {key!r}", tok.text))
            continue
        conv, _, repeatable = table[key]
        if seen is not None:
            seen.add(key)
        try:
            v = conv(value)
        except (_ValueError, ValueError) as exc:
            errors.append(ParseError(lineno, tok.col + len(key) + 1, str(exc), value))
            continue
        if repeatable:
            out.setdefault(key, []).append(v)
        elif key in out:
            errors.append(ParseError(lineno, tok.col, f"key {key!r} given twice", tok.text))
        else:
            out[key] = v
    return out


def _build(kind: str, ident: str, f: dict, spec: CircuitSpec) -> None:
    if kind == "ramp":
        spec.ramps.append(RampSegment(ident, Vec2(*f["anchor"]), f["slope"], f["dir"], f["length"], f.get("k")))
    elif kind == "em":
        spec.latches.append(
            ElectromagnetLatch(
                ident, f["ramp"], f["at"], tuple(f.get("window", ())), f.get("radius", DEFAULT_CAPTURE_RADIUS)
            )
        )
    elif kind == "source":
        if "t" in f and "rate" in f:
            raise ConfigurationError("give either t= or rate=, not both")
        coating = f["coating"]
        spec.sources.append(
            DropletSource(
                ident,
                f["ramp"],
                f["input"],
                f["volume"],
                standard_coating(coating),
                f.get("mass", default_coating_mass(coating)),
                f.get("at", 0.0),
                f.get("rate"),
                tuple(f.get("t", ())),
            )
        )
    else:
        lo, hi = f["x"]
        spec.sinks.append(SinkRegion(ident, f["label"], lo, hi, f["y"]))


# ---------------------------------------------------------------- validation

def validate(spec: CircuitSpec) -> List[str]:
    """Semantic problems with a parsed spec; an empty list means valid."""
    problems: List[str] = []
    ramps = {r.id: r for r in spec.ramps}
    for latch in spec.latches:
        ramp = ramps.get(latch.ramp)
        if ramp is None:
            problems.append(f"em {latch.id}: unknown ramp {latch.ramp!r}")
        elif not 0.0 <= latch.hold <= ramp.length:
            problems.append(f"em {latch.id}: hold position {latch.hold} mm outside ramp {ramp.id} (0..{ramp.length} mm)")
    inputs: Dict[str, str] = {}
    for src in spec.sources:
        ramp = ramps.get(src.ramp)
        if ramp is None:
            problems.append(f"source {src.id}: unknown ramp {src.ramp!r}")
        elif not 0.0 <= src.entry <= ramp.length:
            problems.append(f"source {src.id}: entry {src.entry} mm outside ramp {ramp.id}")
        if src.rate is None and not src.times:
            problems.append(f"source {src.id}: needs t= emission times or rate=")
        if src.input in inputs:
            problems.append(f"input {src.input!r} bound by both {inputs[src.input]} and {src.id}")
        inputs.setdefault(src.input, src.id)
    for i, a in enumerate(spec.sinks):
        for b in spec.sinks[i + 1:]:
            if a.overlaps(b):
                problems.append(f"sinks {a.id} and {b.id} overlap in x")
    if not spec.sources:
        problems.append("circuit has no source")
    if not spec.sinks:
        problems.append("circuit has no sink")
    return problems


# ---------------------------------------------------------------- serialization

def _fmt(x: float) -> str:
    s = repr(float(x))
    return s[:-2] if s.endswith(".0") else s


def serialize(spec: CircuitSpec) -> str:
    lines: List[str] = []
    if spec.config:
        parts = []
        for key in CONFIG_KEYS:
            if key not in spec.config:
                continue
            v = spec.config[key]
            if key == "model":
                parts.append(f"model={v.value}")
            elif key == "evaporation":
                parts.append(f"evaporation={'on' if v else 'off'}")
            elif key in _EVAP_KEYS:
                parts.append(f"{key}={_fmt(v)}mgpmin")
            else:
                unit = _CONFIG_NUMERIC[key][0] or ""
                parts.append(f"{key}={_fmt(v)}{unit}")
        lines.append("config " + " ".join(parts))
    for r in spec.ramps:
        line = (
            f"ramp {r.id} anchor=({_fmt(r.anchor.x)},{_fmt(r.anchor.y)})mm slope={_fmt(r.slope_deg)}deg "
            f"dir={'+x' if r.direction == 1 else '-x'} length={_fmt(r.length)}mm"
        )
        if r.rolling_factor is not None:
            line += f" k={_fmt(r.rolling_factor)}"
        lines.append(line)
    for em in spec.latches:
        wins = "".join(f" window=[{_fmt(a)},{_fmt(b)}]ms" for a, b in em.windows)
        lines.append(f"em {em.id} ramp={em.ramp} at={_fmt(em.hold)}mm{wins} radius={_fmt(em.capture_radius)}mm")
    for s in spec.sources:
        line = (
            f"source {s.id} ramp={s.ramp} input={s.input} volume={_fmt(s.volume)}uL coating={s.coating.kind.value}"
        )
        line += "".join(f" t={_fmt(t)}ms" for t in s.times)
        if s.rate is not None:
            line += f" rate={_fmt(s.rate)}mLph"
        line += f" at={_fmt(s.entry)}mm mass={_fmt(s.coating_mass)}mg"
        lines.append(line)
    for k in spec.sinks:
        lines.append(f"sink {k.id} label={k.label} x=[{_fmt(k.x_lo)},{_fmt(k.x_hi)}]mm y={_fmt(k.floor_y)}mm")
    return "\n".join(lines) + ("\n" if lines else "")


# ---------------------------------------------------------------- worlds

def build_world(spec: CircuitSpec, assignment: Mapping[str, int], **config_overrides) -> World:
    """A ready-to-run world with marbles only for inputs set to 1.

    Emissions due at t <= 0 are spawned immediately; later ones are queued.
    ``config_overrides`` are PhysicsConfig field names (e.g. ``collision_model``).
    """
    missing = [name for name in spec.inputs if name not in assignment]
    if missing:
        raise UsageError(f"assignment lacks inputs {missing}")
    cfg = spec.physics_config(**config_overrides)
    world = World(
        config=cfg,
        ramps={r.id: r for r in spec.ramps},
        latches={l.id: l for l in spec.latches},
        sinks=list(spec.sinks),
        sources={s.id: s for s in spec.sources},
        evaporation_rates=spec.evaporation_rates(),
    )
    pending = []
    for src in spec.sources:
        if not assignment[src.input]:
            continue
        for i, t in enumerate(emission_times(src, cfg.horizon)):
            pending.append(Emission(t, src.id, i))
    pending.sort(key=lambda e: (e.time, e.source, e.index))
    world.pending = pending
    spawn_due(world, 0.0)
    return world


def with_config(spec: CircuitSpec, **config) -> CircuitSpec:
    """Copy of ``spec`` with netlist config keys replaced."""
    return replace(spec, config={**spec.config, **config})


def load(path) -> CircuitSpec:
    with open(path, "rb") as fh:
        return parse(fh.read())


BUNDLED = ("gate", "half_adder", "full_adder")


def bundled_path(name: str) -> str:
    """Filesystem path of a netlist shipped with the package (``gate``, ``gate.lmc``...)."""
    stem = name[:-4] if name.endswith(".lmc") else name
    return str(resources.files("marblegate") / "circuits" / f"{stem}.lmc")


def resolve(path_or_name: str) -> str:
    """A real path if one exists, otherwise the bundled netlist of that name."""
    if os.path.exists(path_or_name):
        return path_or_name
    candidate = bundled_path(os.path.basename(path_or_name))
    return candidate if os.path.exists(candidate) else path_or_name
