"""Shared evaluation context: one trace + map + params, with caches.

Rule violation scores and their STL formulas draw the same per-step
quantities (pairwise distances, neighbor partitions, collision times),
so one context serves a full rule-vector evaluation.
"""

from __future__ import annotations

import math
from typing import Optional

from ..geometry import Region, min_distance, point_to_polyline_distance
from ..world import Lane, MapModel, Trace, WorldState
from .kinematics import ClassifyMode, NeighborSets, TtcAssumption, classify_neighbors, time_to_collision
from .params import RuleParams


class EvalContext:
    def __init__(self, trace: Trace, map_model: MapModel, params: RuleParams):
        self.trace = trace
        self.map = map_model
        self.params = params
        self._dist: dict = {}
        self._neighbors: dict = {}
        self._ttc: dict = {}
        self._lane: dict = {}
        self._lane_regions: dict = {}

    @property
    def indices(self):
        return range(self.trace.t1, self.trace.t2 + 1)

    def state(self, t: int) -> WorldState:
        return self.trace.state(t)

    def agent(self, t: int, aid: str):
        for i, s in self.trace.state(t).others:
            if i == aid:
                return s
        raise KeyError(f"agent {aid!r} not present at index {t}")

    def distance(self, t: int, aid: str) -> float:
        key = (t, aid)
        d = self._dist.get(key)
        if d is None:
            d = min_distance(self.trace.state(t).ego.footprint,
                             self.agent(t, aid).footprint)
            self._dist[key] = d
        return d

    def neighbors(self, t: int, mode: ClassifyMode) -> NeighborSets:
        key = (t, mode)
        ns = self._neighbors.get(key)
        if ns is None:
            ns = classify_neighbors(self.trace, t, self.map, mode)
            self._neighbors[key] = ns
        return ns

    def on_road(self, t: int, aid: str) -> bool:
        ns = self.neighbors(t, ClassifyMode.FUTURE_TRAJECTORY)
        return aid in ns.vru_on

    def ttc(self, t: int, aid: str, assumption: TtcAssumption) -> float:
        key = (t, aid, assumption)
        v = self._ttc.get(key)
        if v is None:
            v = time_to_collision(self.trace, t, aid, assumption)
            self._ttc[key] = v
        return v

    def ego_lane(self, t: int) -> Optional[Lane]:
        if t not in self._lane:
            x, y = self.trace.state(t).ego.position
            self._lane[t] = self.map.lane_at(x, y)
        return self._lane[t]

    def lane_region(self, lane: Lane) -> Region:
        key = id(lane)
        r = self._lane_regions.get(key)
        if r is None:
            r = Region([lane.polygon])
            self._lane_regions[key] = r
        return r

    def centerline_distance(self, t: int) -> float:
        """Distance from the ego centroid to its current lane's centerline.

        Outside every lane, the nearest centerline stands in for the
        current lane.
        """
        x, y = self.trace.state(t).ego.position
        lane = self.ego_lane(t)
        if lane is not None:
            return point_to_polyline_distance(x, y, lane.centerline)
        best = math.inf
        for cand in self.map.lanes:
            d = point_to_polyline_distance(x, y, cand.centerline)
            if d < best:
                best = d
        return best

    def speed_limit(self, t: int) -> float:
        lane = self.ego_lane(t)
        if lane is not None and lane.speed_limit is not None:
            return lane.speed_limit
        return self.params.v_limit
