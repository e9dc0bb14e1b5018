"""Neighbor classification and time-to-collision extrapolation."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from ..geometry import (
    intersection_area,
    packed_overlap,
    packed_vertices,
    translate_packed,
)
from ..world import MapModel, Trace

# Cone half-angle for "front" classification.
FRONT_HALF_ANGLE = math.radians(30.0)
_COS_FRONT = math.cos(FRONT_HALF_ANGLE)

# Collision extrapolations stop scanning at this horizon (seconds); a TTC
# reported as the horizon value means "no contact within the horizon".
TTC_HORIZON = 10.0

# Seconds of ego motion used to derive the reference direction in
# future-trajectory mode.
LOOKAHEAD_SECONDS = 2.0


class ClassifyMode(enum.Enum):
    FUTURE_TRAJECTORY = "future_trajectory"
    HEADING = "heading"


class TtcAssumption(enum.Enum):
    OTHER_STOPS = "other_stops"
    BOTH_CONSTANT = "both_constant"


@dataclass(frozen=True)
class NeighborSets:
    """Agent ids partitioned relative to the ego at one time index."""

    front: frozenset
    left: frozenset
    right: frozenset
    vru_on: frozenset
    vru_off: frozenset


def _reference_direction(trace: Trace, t: int, mode: ClassifyMode) -> tuple[float, float]:
    ego = trace.state(t).ego
    if mode is ClassifyMode.HEADING:
        return math.cos(ego.heading), math.sin(ego.heading)
    steps = max(1, round(LOOKAHEAD_SECONDS / trace.timestep))
    t_ahead = min(t + steps, trace.t2)
    fx, fy = trace.state(t_ahead).ego.position
    dx = fx - ego.position[0]
    dy = fy - ego.position[1]
    norm = math.hypot(dx, dy)
    if norm < 1e-9:
        return math.cos(ego.heading), math.sin(ego.heading)
    return dx / norm, dy / norm


def classify_neighbors(trace: Trace, t: int, m: MapModel,
                       mode: ClassifyMode = ClassifyMode.FUTURE_TRAJECTORY) -> NeighborSets:
    """Partition the other agents around the ego at index t.

    Vehicles go to front (within the front cone of the reference
    direction), else left or right by the sign of their lateral offset.
    VRUs split into on-road and off-road by footprint overlap with the
    drivable area.
    """
    state = trace.state(t)
    ego = state.ego
    rx, ry = _reference_direction(trace, t, mode)

    front, left, right = set(), set(), set()
    vru_on, vru_off = set(), set()
    for aid, s in state.others:
        if s.agent_kind.value == "car":
            dx = s.position[0] - ego.position[0]
            dy = s.position[1] - ego.position[1]
            norm = math.hypot(dx, dy)
            if norm < 1e-9:
                front.add(aid)
                continue
            cos_angle = (dx * rx + dy * ry) / norm
            if cos_angle >= _COS_FRONT:
                front.add(aid)
            elif rx * dy - ry * dx > 0.0:
                left.add(aid)
            else:
                right.add(aid)
        else:
            if _on_road(s, m):
                vru_on.add(aid)
            else:
                vru_off.add(aid)
    return NeighborSets(frozenset(front), frozenset(left), frozenset(right),
                        frozenset(vru_on), frozenset(vru_off))


def _on_road(s, m: MapModel) -> bool:
    for member in m.drivable.members:
        if intersection_area(s.footprint, member) > 0.0:
            return True
    return False


def time_to_collision(trace: Trace, t: int, agent_id: str,
                      assumption: TtcAssumption) -> float:
    """Earliest τ >= 0 at which extrapolated footprints meet, else +inf.

    Footprints are rigidly translated at constant velocity (the other
    agent's velocity is zeroed under OTHER_STOPS) and tested for overlap
    at the trace timestep resolution up to TTC_HORIZON seconds.
    """
    state = trace.state(t)
    ego = state.ego
    other = None
    for aid, s in state.others:
        if aid == agent_id:
            other = s
            break
    if other is None:
        raise KeyError(f"agent {agent_id!r} not present at index {t}")

    v0 = ego.velocity
    vj = (0.0, 0.0) if assumption is TtcAssumption.OTHER_STOPS else other.velocity
    dt = trace.timestep
    n_steps = round(TTC_HORIZON / dt)

    # Cheap reject: the footprints cannot meet if the center track never
    # comes within the combined footprint reach.
    rx = other.position[0] - ego.position[0]
    ry = other.position[1] - ego.position[1]
    wx = vj[0] - v0[0]
    wy = vj[1] - v0[1]
    reach = _reach(ego) + _reach(other)
    if _min_track_dist(rx, ry, wx, wy, TTC_HORIZON) > reach:
        return math.inf

    pa = packed_vertices(ego.footprint)
    pb = packed_vertices(other.footprint)
    na = ego.footprint.n
    nb = other.footprint.n
    for k in range(n_steps + 1):
        tau = k * dt
        qa = translate_packed(pa, na, v0[0] * tau, v0[1] * tau)
        qb = translate_packed(pb, nb, vj[0] * tau, vj[1] * tau)
        if packed_overlap(qa, na, qb, nb):
            return tau
    return math.inf


def _reach(s) -> float:
    xmin, ymin, xmax, ymax = s.footprint.bounds()
    return 0.5 * math.hypot(xmax - xmin, ymax - ymin)


def _min_track_dist(rx: float, ry: float, wx: float, wy: float, horizon: float) -> float:
    """Min distance from origin to the segment {r + w·τ : τ in [0, horizon]}."""
    ww = wx * wx + wy * wy
    if ww <= 0.0:
        return math.hypot(rx, ry)
    tau = -(rx * wx + ry * wy) / ww
    tau = min(max(tau, 0.0), horizon)
    return math.hypot(rx + wx * tau, ry + wy * tau)
