"""Shared builders: maps, traces, and randomized trace generation."""

from __future__ import annotations

import math
import random

import pytest

from rulebench.geometry import Polygon, Region
from rulebench.world import AgentKind, AgentState, AgentTrack, Lane, MapModel, Trace


def straight_map(length: float = 120.0, with_target: bool = True) -> MapModel:
    """Two forward lanes, two oncoming, sidewalks, optional target box."""
    w = 3.5
    lanes = []
    for i in range(2):
        lanes.append(Lane(Polygon.axis_rect(0, i * w, length, (i + 1) * w),
                          ((0.0, (i + 0.5) * w), (length, (i + 0.5) * w)), 13.9))
    for j in range(2):
        y0 = (2 + j) * w
        lanes.append(Lane(Polygon.axis_rect(0, y0, length, y0 + w),
                          ((length, y0 + 0.5 * w), (0.0, y0 + 0.5 * w)), 13.9))
    target = Region([Polygon.axis_rect(length - 20, 0, length - 5, 2 * w)]) \
        if with_target else None
    return MapModel(
        drivable=Region([Polygon.axis_rect(0, 0, length, 4 * w)]),
        correct_side=Region([Polygon.axis_rect(0, 0, length, 2 * w)]),
        incorrect_side=Region([Polygon.axis_rect(0, 2 * w, length, 4 * w)]),
        lanes=tuple(lanes),
        sidewalks=Region([Polygon.axis_rect(0, -2, length, 0),
                          Polygon.axis_rect(0, 4 * w, length, 4 * w + 2)]),
        target=target,
    )


def linear_trace(n: int, dt: float = 0.1, x0: float = 5.0, y: float = 1.75,
                 speed: float = 10.0, heading: float = 0.0,
                 others: tuple = ()) -> Trace:
    """Ego moving in a straight line plus optional scripted agent tracks.

    ``others`` entries are (agent_id, kind, x0, y0, vx, vy).
    """
    ego = tuple(
        AgentState.make(AgentKind.CAR,
                        x0 + speed * math.cos(heading) * dt * i,
                        y + speed * math.sin(heading) * dt * i,
                        heading,
                        vx=speed * math.cos(heading),
                        vy=speed * math.sin(heading))
        for i in range(n))
    tracks = []
    for aid, kind, ax0, ay0, vx, vy in others:
        tracks.append(AgentTrack(aid, tuple(
            AgentState.make(kind, ax0 + vx * dt * i, ay0 + vy * dt * i,
                            math.atan2(vy, vx) if (vx or vy) else 0.0,
                            vx=vx, vy=vy)
            for i in range(n))))
    return Trace(timestep=dt, t1=0, ego=ego, others=tuple(tracks))


def random_trace(rng: random.Random, n: int = 10, dt: float = 0.1,
                 max_agents: int = 3) -> Trace:
    """Small random trace: wandering ego plus 0..max_agents other agents.

    Built to exercise every rule: agents spawn near the ego (collisions
    and near-misses happen), the ego wanders over lanes, road edges, and
    the sidewalk band of the conftest straight map.
    """

    def track(kind: AgentKind, x: float, y: float) -> list[AgentState]:
        heading = rng.uniform(-math.pi, math.pi)
        speed_cap = 12.0 if kind is AgentKind.CAR else 2.5
        vx = rng.uniform(-speed_cap, speed_cap)
        vy = rng.uniform(-0.4 * speed_cap, 0.4 * speed_cap)
        ax = rng.uniform(-3.0, 3.0)
        ay = rng.uniform(-1.5, 1.5)
        states = []
        for i in range(n):
            states.append(AgentState.make(
                kind, x, y,
                heading if kind is AgentKind.CAR else math.atan2(vy, vx or 1e-9),
                vx=vx, vy=vy, ax=ax, ay=ay))
            x += vx * dt
            y += vy * dt
            vx += ax * dt
            vy += ay * dt
        return states

    ego = track(AgentKind.CAR, rng.uniform(0.0, 80.0), rng.uniform(-2.0, 16.0))
    tracks = []
    for k in range(rng.randrange(max_agents + 1)):
        kind = rng.choice([AgentKind.CAR, AgentKind.PEDESTRIAN, AgentKind.CYCLIST])
        ex, ey = ego[0].position
        tracks.append(AgentTrack(
            f"a{k}", tuple(track(kind, ex + rng.uniform(-25.0, 25.0),
                                 ey + rng.uniform(-8.0, 8.0)))))
    return Trace(timestep=dt, t1=0, ego=tuple(ego), others=tuple(tracks))


@pytest.fixture
def basic_map() -> MapModel:
    return straight_map()


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20250808)
