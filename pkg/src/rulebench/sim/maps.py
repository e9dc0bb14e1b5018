"""Built-in maps: a straight multilane road and a four-way intersection.

Each builder materializes a MapModel (disjoint convex region members) and
carries the placement knowledge the scenario instantiator needs: where
the ego starts, how spatial relations map to poses, and which waypoint
path realizes a maneuver from a pose.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from ..geometry import Polygon, Region
from ..scenario import Maneuver, Relation
from ..world import Lane, MapModel


class UnrealizableRelationError(ValueError):
    """The requested spatial relation or maneuver has no pose on this map."""


@dataclass(frozen=True)
class Pose:
    x: float
    y: float
    heading: float


def _straight_centerline(x0, y0, x1, y1, step=5.0):
    n = max(2, int(math.hypot(x1 - x0, y1 - y0) / step) + 1)
    return tuple((x0 + (x1 - x0) * i / (n - 1), y0 + (y1 - y0) * i / (n - 1))
                 for i in range(n))


class StraightMap:
    """Bidirectional straight road along +x with sidewalks on both sides.

    Forward lanes (travel +x) sit above y=0 ordered rightmost first; the
    oncoming lanes stack above them. The ego starts in forward lane 1
    when there are two or more forward lanes (so both faster and slower
    neighbors exist), else lane 0.
    """

    kind = "straight_multilane"

    def __init__(self, n_forward: int = 2, n_oncoming: int = 2,
                 length: float = 400.0, lane_width: float = 3.5,
                 speed_limit: float = 13.9, sidewalk_width: float = 2.0,
                 with_target: bool = True,
                 detour: Optional[tuple[float, float, float]] = None):
        self.n_forward = n_forward
        self.n_oncoming = n_oncoming
        self.length = length
        self.lane_width = lane_width
        self.speed_limit = speed_limit
        self.sidewalk_width = sidewalk_width
        # (x_start, x_end, lateral y): the ego route jogs out to y between
        # the two x bounds, modeling a blocked-lane detour.
        self.detour = detour

        w = lane_width
        fwd = []
        for i in range(n_forward):
            poly = Polygon.axis_rect(0.0, i * w, length, (i + 1) * w)
            center = _straight_centerline(0.0, (i + 0.5) * w, length, (i + 0.5) * w)
            fwd.append(Lane(poly, center, speed_limit))
        onc = []
        top0 = n_forward * w
        for j in range(n_oncoming):
            poly = Polygon.axis_rect(0.0, top0 + j * w, length, top0 + (j + 1) * w)
            center = _straight_centerline(length, top0 + (j + 0.5) * w,
                                          0.0, top0 + (j + 0.5) * w)
            onc.append(Lane(poly, center, speed_limit))
        self.forward_lanes = tuple(fwd)
        self.oncoming_lanes = tuple(onc)

        road_top = (n_forward + n_oncoming) * w
        sidewalk_lo = Polygon.axis_rect(0.0, -sidewalk_width, length, 0.0)
        sidewalk_hi = Polygon.axis_rect(0.0, road_top, length, road_top + sidewalk_width)
        target = None
        if with_target:
            target = Region([Polygon.axis_rect(length - 20.0, 0.0,
                                               length - 5.0, n_forward * w)])
        self.model = MapModel(
            drivable=Region([Polygon.axis_rect(0.0, 0.0, length, road_top)]),
            correct_side=Region([Polygon.axis_rect(0.0, 0.0, length, n_forward * w)]),
            incorrect_side=Region([Polygon.axis_rect(0.0, n_forward * w,
                                                     length, road_top)])
            if n_oncoming else Region(()),
            lanes=self.forward_lanes + self.oncoming_lanes,
            sidewalks=Region([sidewalk_lo, sidewalk_hi]),
            target=target,
        )
        self.ego_lane_index = 1 if n_forward >= 2 else 0

    def with_target_for(self, maneuver: Maneuver) -> "StraightMap":
        return self

    def ego_spawn(self) -> Pose:
        lane = self.forward_lanes[self.ego_lane_index]
        y = lane.centerline[0][1]
        return Pose(15.0, y, 0.0)

    def ego_path(self, maneuver: Maneuver, spawn: Pose):
        end = self.length - 8.0
        if maneuver in (Maneuver.GO_STRAIGHT, Maneuver.LANE_FOLLOWING):
            if self.detour is not None:
                x0, x1, yd = self.detour
                return ((spawn.x, spawn.y), (x0 - 12.0, spawn.y), (x0, yd),
                        (x1, yd), (x1 + 12.0, spawn.y), (end, spawn.y))
            return _straight_centerline(spawn.x, spawn.y, end, spawn.y)
        if maneuver is Maneuver.LANE_CHANGE:
            target = self._adjacent_lane(self.ego_lane_index, +1)
            ty = target.centerline[0][1]
            return ((spawn.x, spawn.y), (spawn.x + 15.0, spawn.y),
                    (spawn.x + 35.0, ty), (end, ty))
        raise UnrealizableRelationError(
            f"maneuver {maneuver.value} unrealizable on {self.kind}")

    def _adjacent_lane(self, index: int, step: int) -> Lane:
        j = index + step
        if not 0 <= j < self.n_forward:
            raise UnrealizableRelationError(
                f"no adjacent lane at index {j} on {self.kind}")
        return self.forward_lanes[j]

    def agent_spawn(self, relation: Relation, ego: Pose, dist: float) -> Pose:
        if relation is Relation.AHEAD:
            return Pose(ego.x + dist, ego.y, 0.0)
        if relation is Relation.BEHIND:
            return Pose(ego.x - dist, ego.y, 0.0)
        if relation is Relation.FASTER_LANE:
            lane = self._adjacent_lane(self.ego_lane_index, +1)
            return Pose(ego.x + dist, lane.centerline[0][1], 0.0)
        if relation is Relation.SLOWER_LANE:
            lane = self._adjacent_lane(self.ego_lane_index, -1)
            return Pose(ego.x + dist, lane.centerline[0][1], 0.0)
        if relation is Relation.OPPOSING_LANES:
            if not self.oncoming_lanes:
                raise UnrealizableRelationError(
                    f"relation {relation.value} unrealizable on one-way {self.kind}")
            lane = self.oncoming_lanes[0]
            return Pose(ego.x + dist, lane.centerline[0][1], math.pi)
        if relation is Relation.SIDEWALK:
            # hug the curb so close passes actually measure as close
            return Pose(ego.x + dist, -0.3, 0.5 * math.pi)
        raise UnrealizableRelationError(
            f"relation {relation.value} unrealizable on {self.kind}")

    def agent_path(self, maneuver: Maneuver, spawn: Pose):
        if maneuver in (Maneuver.GO_STRAIGHT, Maneuver.LANE_FOLLOWING):
            reach = self.length - 8.0 if abs(spawn.heading) < 0.1 else 8.0
            return _straight_centerline(spawn.x, spawn.y, reach, spawn.y)
        if maneuver is Maneuver.LANE_CHANGE:
            if abs(spawn.heading) > 0.1:
                raise UnrealizableRelationError(
                    "lane change unrealizable for oncoming traffic")
            lane_idx = int(spawn.y // self.lane_width)
            step = +1 if lane_idx + 1 < self.n_forward else -1
            target = self._adjacent_lane(lane_idx, step)
            ty = target.centerline[0][1]
            return ((spawn.x, spawn.y), (spawn.x + 15.0, spawn.y),
                    (spawn.x + 35.0, ty), (self.length - 8.0, ty))
        raise UnrealizableRelationError(
            f"maneuver {maneuver.value} unrealizable on {self.kind}")

    def walk_goal(self, maneuver: Maneuver, spawn: Pose):
        if maneuver is Maneuver.CROSS_STREET:
            road_top = (self.n_forward + self.n_oncoming) * self.lane_width
            return (spawn.x, road_top + 0.5 * self.sidewalk_width)
        return (min(spawn.x + 60.0, self.length), spawn.y)


class FourWayMap:
    """Four-way intersection with ``lanes_per_arm`` lanes per direction.

    The ego approaches from the south heading north in the rightmost
    (outermost) lane. Arms reach ``arm_length`` meters from the junction
    center at the origin.
    """

    kind = "four_way_intersection"

    def __init__(self, arm_length: float = 80.0, lane_width: float = 6.0,
                 speed_limit: float = 11.1, sidewalk_width: float = 2.0,
                 with_target: bool = True, target_arm: str = "north",
                 lanes_per_arm: int = 1):
        if lanes_per_arm < 1:
            raise ValueError("lanes_per_arm must be >= 1")
        self.arm = arm_length
        self.lane_width = lane_width
        self.lanes_per_arm = lanes_per_arm
        self.speed_limit = speed_limit
        self.sidewalk_width = sidewalk_width
        c = lanes_per_arm * lane_width  # road half-width
        self.c = c
        # rightmost-lane center offset from the road centerline
        self.e = c - 0.5 * lane_width
        ext = arm_length + c

        # Disjoint drivable decomposition: full horizontal bar + two stubs.
        drivable = Region([
            Polygon.axis_rect(-ext, -c, ext, c),
            Polygon.axis_rect(-c, c, c, ext),
            Polygon.axis_rect(-c, -ext, c, -c),
        ])
        w = lane_width
        lanes = []
        # All vertical (ego-road) lanes first: inside the junction several
        # lane polygons overlap, and lane lookups take the first match.
        for k in range(lanes_per_arm):
            lo, hi = k * w, (k + 1) * w
            mid = lo + 0.5 * w
            lanes.append(Lane(Polygon.axis_rect(lo, -ext, hi, ext),
                              _straight_centerline(mid, -ext, mid, ext),
                              speed_limit))
            lanes.append(Lane(Polygon.axis_rect(-hi, -ext, -lo, ext),
                              _straight_centerline(-mid, ext, -mid, -ext),
                              speed_limit))
        for k in range(lanes_per_arm):
            lo, hi = k * w, (k + 1) * w
            mid = lo + 0.5 * w
            lanes.append(Lane(Polygon.axis_rect(-ext, -hi, ext, -lo),
                              _straight_centerline(-ext, -mid, ext, -mid),
                              speed_limit))
            lanes.append(Lane(Polygon.axis_rect(-ext, lo, ext, hi),
                              _straight_centerline(ext, mid, -ext, mid),
                              speed_limit))
        lanes = tuple(lanes)
        sidewalks = Region([
            Polygon.axis_rect(c, -ext, c + sidewalk_width, -c),   # SE along south arm
            Polygon.axis_rect(-c - sidewalk_width, -ext, -c, -c),  # SW
            Polygon.axis_rect(c, c, c + sidewalk_width, ext),      # NE along north arm
            Polygon.axis_rect(-c - sidewalk_width, c, -c, ext),    # NW
        ])
        self.with_target = with_target
        self.target_arm = target_arm
        target = None
        if with_target:
            boxes = {
                "north": Polygon.axis_rect(0.0, arm_length - 25.0, c, arm_length),
                "east": Polygon.axis_rect(arm_length - 25.0, -c, arm_length, 0.0),
                "west": Polygon.axis_rect(-arm_length, 0.0,
                                          -(arm_length - 25.0), c),
            }
            target = Region([boxes[target_arm]])
        self.model = MapModel(
            drivable=drivable,
            lanes=lanes,
            sidewalks=sidewalks,
            target=target,
        )

    def with_target_for(self, maneuver: Maneuver) -> "FourWayMap":
        arm = {Maneuver.RIGHT_TURN: "east", Maneuver.LEFT_TURN: "west"}.get(
            maneuver, "north")
        if not self.with_target or arm == self.target_arm:
            return self
        return FourWayMap(self.arm, self.lane_width, self.speed_limit,
                          self.sidewalk_width, self.with_target, arm,
                          self.lanes_per_arm)

    def ego_spawn(self) -> Pose:
        return Pose(self.e, -0.55 * self.arm, 0.5 * math.pi)

    def _turn_arc(self, entry, center, a0, a1, exit_pt, n=12):
        r = math.hypot(entry[0] - center[0], entry[1] - center[1])
        pts = [entry]
        for i in range(1, n):
            a = a0 + (a1 - a0) * i / n
            pts.append((center[0] + r * math.cos(a), center[1] + r * math.sin(a)))
        pts.append(exit_pt)
        return tuple(pts)

    @property
    def _r_right(self) -> float:
        # trackable at the steering limit while clearing the inner corner
        if self.lanes_per_arm == 1:
            return self.c
        return self.lane_width + 1.0

    @property
    def _r_left(self) -> float:
        return self.e + self.c + 0.5

    def ego_path(self, maneuver: Maneuver, spawn: Pose):
        ext = self.arm + self.c - 6.0
        e = self.e
        if maneuver in (Maneuver.GO_STRAIGHT, Maneuver.LANE_FOLLOWING):
            return _straight_centerline(spawn.x, spawn.y, spawn.x, ext)
        if maneuver is Maneuver.RIGHT_TURN:
            # northbound -> east arm, clockwise around (e+R, -e-R)
            r = self._r_right
            cx, cy = e + r, -e - r
            arc = self._turn_arc((e, cy), (cx, cy), math.pi, 0.5 * math.pi,
                                 (cx, -e))
            return ((spawn.x, spawn.y),) + arc + ((ext, -e),)
        if maneuver is Maneuver.LEFT_TURN:
            # northbound -> west arm, counterclockwise around (e-R, e-R)
            r = self._r_left
            cx, cy = e - r, e - r
            arc = self._turn_arc((e, cy), (cx, cy), 0.0, 0.5 * math.pi,
                                 (cx, e))
            return ((spawn.x, spawn.y),) + arc + ((-ext, e),)
        raise UnrealizableRelationError(
            f"maneuver {maneuver.value} unrealizable on {self.kind}")

    def agent_spawn(self, relation: Relation, ego: Pose, dist: float) -> Pose:
        e = self.e
        if relation is Relation.AHEAD:
            return Pose(ego.x, ego.y + dist, 0.5 * math.pi)
        if relation is Relation.BEHIND:
            return Pose(ego.x, ego.y - dist, 0.5 * math.pi)
        if relation is Relation.FASTER_LANE:
            if self.lanes_per_arm < 2:
                raise UnrealizableRelationError(
                    f"relation {relation.value} unrealizable on single-lane "
                    f"{self.kind}")
            return Pose(e - self.lane_width, ego.y + dist, 0.5 * math.pi)
        if relation is Relation.OPPOSING_LANES:
            return Pose(-e, ego.y + dist, -0.5 * math.pi)
        if relation is Relation.CONFLICTING_LANES:
            return Pose(-dist, -e, 0.0)
        if relation is Relation.SIDEWALK:
            x = self.c + 0.5 * self.sidewalk_width
            return Pose(x, ego.y + dist, 0.5 * math.pi)
        raise UnrealizableRelationError(
            f"relation {relation.value} unrealizable on {self.kind}")

    def agent_path(self, maneuver: Maneuver, spawn: Pose):
        ext = self.arm + self.c - 6.0
        e = self.e
        heading = spawn.heading
        northbound = abs(heading - 0.5 * math.pi) < 0.1
        if maneuver in (Maneuver.GO_STRAIGHT, Maneuver.LANE_FOLLOWING):
            if northbound:
                return _straight_centerline(spawn.x, spawn.y, spawn.x, ext)
            if abs(heading + 0.5 * math.pi) < 0.1:      # southbound
                return _straight_centerline(spawn.x, spawn.y, spawn.x, -ext)
            if abs(heading) < 0.1:                       # eastbound
                return _straight_centerline(spawn.x, spawn.y, ext, spawn.y)
            return _straight_centerline(spawn.x, spawn.y, -ext, spawn.y)
        if maneuver is Maneuver.LANE_CHANGE and northbound \
                and self.lanes_per_arm >= 2:
            # merge one lane toward the curb (into the ego's lane)
            tx = spawn.x + self.lane_width
            if tx > self.e + 0.1:
                tx = spawn.x - self.lane_width
            return ((spawn.x, spawn.y), (spawn.x, spawn.y + 15.0),
                    (tx, spawn.y + 35.0), (tx, ext))
        turning_from_rightmost = (
            (abs(heading) < 0.1 and abs(spawn.y + e) < 0.1)
            or (abs(heading + 0.5 * math.pi) < 0.1 and abs(spawn.x + e) < 0.1))
        if maneuver is Maneuver.RIGHT_TURN and abs(heading) < 0.1 \
                and turning_from_rightmost:
            # eastbound turning right into the south arm (southbound lane)
            r = self._r_right
            cx, cy = -e - r, -e - r
            arc = self._turn_arc((cx, -e), (cx, cy), 0.5 * math.pi, 0.0,
                                 (-e, cy))
            return ((spawn.x, spawn.y),) + arc + ((-e, -ext),)
        if maneuver is Maneuver.LEFT_TURN and abs(heading) < 0.1 \
                and turning_from_rightmost:
            # eastbound turning left into the north arm
            r = self._r_left
            cx, cy = e - r, -e + r
            arc = self._turn_arc((cx, -e), (cx, cy), -0.5 * math.pi, 0.0,
                                 (e, cy))
            return ((spawn.x, spawn.y),) + arc + ((e, ext),)
        if maneuver is Maneuver.LEFT_TURN and abs(heading + 0.5 * math.pi) < 0.1 \
                and turning_from_rightmost:
            # southbound (opposing) turning left across the ego's path
            r = self._r_left
            cx, cy = -e + r, -e + r
            arc = self._turn_arc((-e, cy), (cx, cy), math.pi, 1.5 * math.pi,
                                 (cx, -e))
            return ((spawn.x, spawn.y),) + arc + ((ext, -e),)
        if maneuver is Maneuver.RIGHT_TURN and abs(heading + 0.5 * math.pi) < 0.1 \
                and turning_from_rightmost:
            # southbound turning right into the west arm
            r = self._r_right
            cx, cy = -e - r, e + r
            arc = self._turn_arc((-e, cy), (cx, cy), 0.0, -0.5 * math.pi,
                                 (cx, e))
            return ((spawn.x, spawn.y),) + arc + ((-ext, e),)
        raise UnrealizableRelationError(
            f"maneuver {maneuver.value} from heading {heading:.2f} "
            f"unrealizable on {self.kind}")

    def walk_goal(self, maneuver: Maneuver, spawn: Pose):
        if maneuver is Maneuver.CROSS_STREET:
            return (-self.c - 0.5 * self.sidewalk_width, spawn.y)
        return (spawn.x, min(spawn.y + 60.0, self.arm))


BUILTIN_MAPS = {
    "straight_2x2": lambda: StraightMap(n_forward=2, n_oncoming=2),
    "straight_1x1": lambda: StraightMap(n_forward=1, n_oncoming=1),
    "straight_3x1": lambda: StraightMap(n_forward=3, n_oncoming=1),
    "straight_detour": lambda: StraightMap(n_forward=2, n_oncoming=2,
                                           length=250.0,
                                           detour=(60.0, 95.0, 14.8)),
    "straight_short": lambda: StraightMap(n_forward=1, n_oncoming=1,
                                          length=160.0),
    "four_way": lambda: FourWayMap(),
    "four_way_2": lambda: FourWayMap(lanes_per_arm=2),
}


def builtin_map(map_id: str):
    try:
        return BUILTIN_MAPS[map_id]()
    except KeyError:
        raise UnrealizableRelationError(
            f"unknown builtin map {map_id!r}; known: {sorted(BUILTIN_MAPS)}") from None


def suggest_map_id(spec) -> str:
    """Builtin map on which the spec's maneuvers/relations are realizable.

    Turns and conflicting-lane traffic need an intersection; lane changes
    and faster/slower-lane neighbors need extra lanes. Specs needing both
    get the two-lane intersection (slower-lane neighbors stay
    unrealizable there and are flagged sample-by-sample at falsification
    time).
    """
    relations = {a.spatial_relation.value for a in spec.agents}
    needs_junction = (spec.ego_maneuver.value in ("LEFT_TURN", "RIGHT_TURN")
                      or "CONFLICTING_LANES" in relations)
    needs_lanes = (spec.ego_maneuver.value == "LANE_CHANGE"
                   or bool(relations & {"FASTER_LANE", "SLOWER_LANE"}))
    if needs_junction and needs_lanes:
        return "four_way_2"
    if needs_junction:
        return "four_way"
    if needs_lanes:
        return "straight_3x1"
    return "straight_2x2"
