"""World substrate: agent states, time-indexed traces, and map regions.

All types are immutable values after construction and safe to share across
parallel workers. Traces and maps have versioned JSON file formats
(`format_version` integer): traces are line-delimited JSON with a header
record, maps are a single JSON document of named polygon lists.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .geometry import InvalidGeometryError, Polygon, Region, area_outside

TRACE_FORMAT_VERSION = 1
MAP_FORMAT_VERSION = 1


class AgentKind(enum.Enum):
    CAR = "car"
    PEDESTRIAN = "pedestrian"
    CYCLIST = "cyclist"


# Footprints are oriented rectangles: simple, convex, and exact under
# polygon clipping. Masses feed the collision rules.
DEFAULT_DIMS = {
    AgentKind.CAR: (4.5, 2.0),
    AgentKind.PEDESTRIAN: (0.5, 0.5),
    AgentKind.CYCLIST: (1.8, 0.6),
}
DEFAULT_MASS = {
    AgentKind.CAR: 1500.0,
    AgentKind.PEDESTRIAN: 75.0,
    AgentKind.CYCLIST: 90.0,
}


class TraceFormatError(ValueError):
    """Malformed trace or map file; carries a location hint."""


@dataclass(frozen=True)
class AgentState:
    """Pose, kinematics, and footprint of one agent at one time step."""

    position: tuple[float, float]
    heading: float
    velocity: tuple[float, float]
    acceleration: tuple[float, float]
    footprint: Polygon
    agent_kind: AgentKind
    mass: float

    def __post_init__(self):
        if self.mass <= 0.0:
            raise ValueError(f"agent mass must be > 0, got {self.mass}")
        cx, cy = self.footprint.centroid
        if math.hypot(cx - self.position[0], cy - self.position[1]) > 1e-6:
            raise ValueError("footprint centroid does not match agent position")

    @property
    def speed(self) -> float:
        return math.hypot(self.velocity[0], self.velocity[1])

    @property
    def accel_long(self) -> float:
        """Acceleration component along the heading axis."""
        return (self.acceleration[0] * math.cos(self.heading)
                + self.acceleration[1] * math.sin(self.heading))

    @property
    def accel_lat(self) -> float:
        """Acceleration component perpendicular to the heading axis."""
        return (-self.acceleration[0] * math.sin(self.heading)
                + self.acceleration[1] * math.cos(self.heading))

    @classmethod
    def make(cls, kind: AgentKind, x: float, y: float, heading: float = 0.0,
             vx: float = 0.0, vy: float = 0.0, ax: float = 0.0, ay: float = 0.0,
             length: Optional[float] = None, width: Optional[float] = None,
             mass: Optional[float] = None) -> "AgentState":
        dl, dw = DEFAULT_DIMS[kind]
        length = dl if length is None else length
        width = dw if width is None else width
        mass = DEFAULT_MASS[kind] if mass is None else mass
        footprint = Polygon.oriented_rect(x, y, length, width, heading)
        return cls((x, y), heading, (vx, vy), (ax, ay), footprint, kind, mass)


@dataclass(frozen=True)
class AgentTrack:
    """One non-ego agent's state sequence across a trace."""

    agent_id: str
    states: tuple[AgentState, ...]

    @property
    def kind(self) -> AgentKind:
        return self.states[0].agent_kind


@dataclass(frozen=True)
class WorldState:
    """Snapshot of the world at one trace index; the STL signal sample."""

    index: int
    ego: AgentState
    others: tuple[tuple[str, AgentState], ...]

    def vehicles(self) -> tuple[tuple[str, AgentState], ...]:
        return tuple((i, s) for i, s in self.others if s.agent_kind is AgentKind.CAR)

    def vrus(self) -> tuple[tuple[str, AgentState], ...]:
        return tuple((i, s) for i, s in self.others
                     if s.agent_kind is not AgentKind.CAR)


@dataclass(frozen=True)
class Trace:
    """Time-indexed world states over [t1, t2] at a fixed timestep."""

    timestep: float
    t1: int
    ego: tuple[AgentState, ...]
    others: tuple[AgentTrack, ...] = ()
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.timestep <= 0.0:
            raise ValueError("timestep must be > 0")
        n = len(self.ego)
        if n == 0:
            raise ValueError("trace needs at least one state")
        for track in self.others:
            if len(track.states) != n:
                raise ValueError(
                    f"agent {track.agent_id!r} has {len(track.states)} states, "
                    f"expected {n}")

    @property
    def t2(self) -> int:
        return self.t1 + len(self.ego) - 1

    def __len__(self) -> int:
        return len(self.ego)

    def state(self, t: int) -> WorldState:
        """World state at absolute index t ∈ [t1, t2]."""
        i = t - self.t1
        if not 0 <= i < len(self.ego):
            raise IndexError(f"index {t} outside [{self.t1}, {self.t2}]")
        return WorldState(t, self.ego[i],
                          tuple((tr.agent_id, tr.states[i]) for tr in self.others))

    def states(self) -> Iterable[WorldState]:
        for t in range(self.t1, self.t2 + 1):
            yield self.state(t)


@dataclass(frozen=True)
class Lane:
    polygon: Polygon
    centerline: tuple[tuple[float, float], ...]
    speed_limit: Optional[float] = None

    def __post_init__(self):
        if len(self.centerline) < 2:
            raise InvalidGeometryError("lane centerline needs >= 2 points")


@dataclass(frozen=True)
class MapModel:
    """Static map: drivable area, road sides, lanes, sidewalks, target.

    Region symbols are stored statically; the rule formulas treat them as
    constant over the trace horizon.
    """

    drivable: Region
    correct_side: Region = Region(())
    incorrect_side: Region = Region(())
    lanes: tuple[Lane, ...] = ()
    sidewalks: Region = Region(())
    target: Optional[Region] = None

    def __post_init__(self):
        for i, lane in enumerate(self.lanes):
            if area_outside(lane.polygon, self.drivable) > 1e-6:
                raise InvalidGeometryError(f"lane {i} extends outside drivable area")
        for name, region in (("correct_side", self.correct_side),
                             ("incorrect_side", self.incorrect_side)):
            for j, member in enumerate(region.members):
                if area_outside(member, self.drivable) > 1e-6:
                    raise InvalidGeometryError(
                        f"{name} member {j} extends outside drivable area")

    def lane_at(self, x: float, y: float) -> Optional[Lane]:
        """Lane whose polygon contains the point, or None."""
        for lane in self.lanes:
            if lane.polygon.contains_point(x, y):
                return lane
        return None


# --- trace file format (line-delimited JSON) -------------------------------

def _state_record(s: AgentState) -> dict:
    return {"x": s.position[0], "y": s.position[1], "heading": s.heading,
            "vx": s.velocity[0], "vy": s.velocity[1],
            "ax": s.acceleration[0], "ay": s.acceleration[1]}


def _agent_header(s: AgentState) -> dict:
    xmin, ymin, xmax, ymax = s.footprint.bounds()
    # Rectangle dims recovered in the local frame, not the world bbox.
    v = s.footprint.vertices
    e1 = math.hypot(v[1][0] - v[0][0], v[1][1] - v[0][1])
    e2 = math.hypot(v[2][0] - v[1][0], v[2][1] - v[1][1])
    length, width = max(e1, e2), min(e1, e2)
    return {"kind": s.agent_kind.value, "length": length, "width": width,
            "mass": s.mass}


def dump_trace(trace: Trace, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        header = {
            "format_version": TRACE_FORMAT_VERSION,
            "timestep": trace.timestep,
            "start_index": trace.t1,
            "ego": _agent_header(trace.ego[0]),
            "agents": [dict(id=tr.agent_id, **_agent_header(tr.states[0]))
                       for tr in trace.others],
        }
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for i, t in enumerate(range(trace.t1, trace.t2 + 1)):
            rec = {
                "t": t,
                "ego": _state_record(trace.ego[i]),
                "agents": [dict(id=tr.agent_id, **_state_record(tr.states[i]))
                           for tr in trace.others],
            }
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def _build_state(rec: dict, kind: AgentKind, length: float, width: float,
                 mass: float) -> AgentState:
    return AgentState.make(
        kind, rec["x"], rec["y"], rec.get("heading", 0.0),
        rec.get("vx", 0.0), rec.get("vy", 0.0),
        rec.get("ax", 0.0), rec.get("ay", 0.0),
        length=length, width=width, mass=mass)


def load_trace(path) -> Trace:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise TraceFormatError(f"{path}: empty trace file")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise TraceFormatError(f"{path}:1: bad JSON header: {exc}") from exc
    version = header.get("format_version")
    if version != TRACE_FORMAT_VERSION:
        raise TraceFormatError(
            f"{path}:1: unsupported trace format_version {version!r}")
    timestep = float(header["timestep"])
    t1 = int(header.get("start_index", 0))

    def agent_meta(h: dict) -> tuple[AgentKind, float, float, float]:
        kind = AgentKind(h["kind"])
        dl, dw = DEFAULT_DIMS[kind]
        return (kind, float(h.get("length", dl)), float(h.get("width", dw)),
                float(h.get("mass", DEFAULT_MASS[kind])))

    ego_meta = agent_meta(header["ego"])
    order = [a["id"] for a in header.get("agents", [])]
    meta = {a["id"]: agent_meta(a) for a in header.get("agents", [])}

    ego_states: list[AgentState] = []
    other_states: dict[str, list[AgentState]] = {aid: [] for aid in order}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise TraceFormatError(f"{path}:{lineno}: bad JSON record: {exc}") from exc
        try:
            ego_states.append(_build_state(rec["ego"], *ego_meta))
            seen = set()
            for arec in rec.get("agents", []):
                aid = arec["id"]
                if aid not in meta:
                    raise TraceFormatError(
                        f"{path}:{lineno}: agent {aid!r} missing from header")
                other_states[aid].append(_build_state(arec, *meta[aid]))
                seen.add(aid)
            missing = set(order) - seen
            if missing:
                raise TraceFormatError(
                    f"{path}:{lineno}: records missing for agents {sorted(missing)}")
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, TraceFormatError):
                raise
            raise TraceFormatError(f"{path}:{lineno}: {exc}") from exc
    if not ego_states:
        raise TraceFormatError(f"{path}: no state records")
    return Trace(
        timestep=timestep, t1=t1, ego=tuple(ego_states),
        others=tuple(AgentTrack(aid, tuple(other_states[aid])) for aid in order))


# --- map file format (single JSON document) --------------------------------

def _poly_json(p: Polygon) -> list:
    return [[x, y] for x, y in p.vertices]


def _region_json(r: Region) -> list:
    return [_poly_json(m) for m in r.members]


def dump_map(m: MapModel, path) -> None:
    doc = {
        "format_version": MAP_FORMAT_VERSION,
        "drivable": _region_json(m.drivable),
        "correct_side": _region_json(m.correct_side),
        "incorrect_side": _region_json(m.incorrect_side),
        "lanes": [{"polygon": _poly_json(l.polygon),
                   "centerline": [[x, y] for x, y in l.centerline],
                   "speed_limit": l.speed_limit} for l in m.lanes],
        "sidewalks": _region_json(m.sidewalks),
        "target": _region_json(m.target) if m.target is not None else None,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_map(path) -> MapModel:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise TraceFormatError(f"{path}: bad JSON: {exc}") from exc
    version = doc.get("format_version")
    if version != MAP_FORMAT_VERSION:
        raise TraceFormatError(f"{path}: unsupported map format_version {version!r}")

    def region(key: str) -> Region:
        return Region(Polygon(v) for v in doc.get(key) or [])

    try:
        target = doc.get("target")
        return MapModel(
            drivable=region("drivable"),
            correct_side=region("correct_side"),
            incorrect_side=region("incorrect_side"),
            lanes=tuple(Lane(Polygon(l["polygon"]),
                             tuple((float(x), float(y)) for x, y in l["centerline"]),
                             l.get("speed_limit"))
                        for l in doc.get("lanes", [])),
            sidewalks=region("sidewalks"),
            target=Region(Polygon(v) for v in target) if target else None,
        )
    except (KeyError, TypeError, InvalidGeometryError) as exc:
        raise TraceFormatError(f"{path}: {exc}") from exc
