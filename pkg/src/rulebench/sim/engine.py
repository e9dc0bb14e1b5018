"""Deterministic fixed-step simulator: scene instantiation and rollout.

Cars integrate a kinematic bicycle model, pedestrians a point mass, both
with forward Euler at the trace timestep. Recorded velocities are the
exact per-step displacement rates and recorded accelerations are their
finite differences, so traces are self-consistent for the comfort rules.
Identical (spec, assignment, map, seed, agent) inputs produce identical
traces.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Optional

from ..geometry import polygons_overlap
from ..scenario import AgentType, ScenarioSpec
from ..world import AgentKind, AgentState, AgentTrack, Trace
from .behaviors import (
    ACCEL_MAX,
    BRAKE_MAX,
    Behavior,
    BrakeInterrupt,
    Control,
    FollowPath,
    STEER_MAX,
    SPEED_MAX,
    WALK_SPEED_MAX,
    WHEELBASE,
    WalkTo,
)
from .maps import UnrealizableRelationError, builtin_map

DEFAULT_TIMESTEP = 0.1
COLLISION_GRACE_SECONDS = 1.0
MAX_STEPS = 10_000


class InstantiationError(ValueError):
    """The scenario cannot be placed on the chosen map."""


@dataclass
class SimAgent:
    agent_id: str
    kind: AgentKind
    x: float
    y: float
    heading: float
    speed: float
    behavior: Optional[Behavior]
    vx: float = 0.0
    vy: float = 0.0

    def __post_init__(self):
        if self.kind is AgentKind.CAR:
            self.vx = self.speed * math.cos(self.heading)
            self.vy = self.speed * math.sin(self.heading)

    def state(self, ax: float = 0.0, ay: float = 0.0) -> AgentState:
        return AgentState.make(self.kind, self.x, self.y, self.heading,
                               self.vx, self.vy, ax, ay)


@dataclass
class Scene:
    """Initial agent placement plus everything a rollout needs."""

    spec: ScenarioSpec
    assignment: dict
    map_model: object
    sim_map: object
    ego: SimAgent
    ego_route: tuple
    ego_target_speed: float
    others: list
    seed: int
    timestep: float = DEFAULT_TIMESTEP


def _param(assignment: dict, name: str, default: float) -> float:
    v = assignment.get(name, default)
    return float(v)


def instantiate(spec: ScenarioSpec, assignment: dict, map_id_or_map=None,
                seed: int = 0) -> Scene:
    """Place all agents deterministically per their spatial relations.

    Raises InstantiationError when a relation or maneuver has no pose on
    the map (e.g. conflicting lanes on a straight road) or when the
    placement leaves two footprints overlapping at t=0.
    """
    if map_id_or_map is None:
        sim_map = builtin_map(spec.map_id)
    elif isinstance(map_id_or_map, str):
        sim_map = builtin_map(map_id_or_map)
    else:
        sim_map = map_id_or_map
    sim_map = sim_map.with_target_for(spec.ego_maneuver)

    missing = [k for k in spec.parameters if k not in assignment]
    if missing:
        raise InstantiationError(f"assignment missing parameters: {missing}")
    for k, v in assignment.items():
        lo, hi = spec.parameters.get(k, (-math.inf, math.inf))
        if not lo <= float(v) <= hi:
            raise InstantiationError(
                f"assignment {k}={v} outside declared range [{lo}, {hi}]")

    ego_pose = sim_map.ego_spawn()
    ego_speed = _param(assignment, "EGO_SPEED", 8.0)
    ego_init = _param(assignment, "EGO_INIT_SPEED", ego_speed)
    try:
        ego_route = tuple(sim_map.ego_path(spec.ego_maneuver, ego_pose))
    except UnrealizableRelationError as exc:
        raise InstantiationError(f"{exc} (map {sim_map.kind!r})") from exc
    ego = SimAgent("ego", AgentKind.CAR, ego_pose.x, ego_pose.y,
                   ego_pose.heading, ego_init, None)

    others = []
    for a in spec.agents:
        upper = a.name.upper()
        dist = _param(assignment, f"{upper}_DIST",
                      20.0 if a.agent_type is AgentType.CAR else 15.0)
        try:
            pose = sim_map.agent_spawn(a.spatial_relation, ego_pose, dist)
            if a.agent_type is AgentType.PEDESTRIAN:
                speed = _param(assignment, f"{upper}_SPEED", 1.5)
                goal = sim_map.walk_goal(a.maneuver, pose)
                behavior = WalkTo(goal, min(speed, WALK_SPEED_MAX))
                agent = SimAgent(a.name, AgentKind.PEDESTRIAN, pose.x, pose.y,
                                 pose.heading, 0.0, behavior)
            else:
                speed = _param(assignment, f"{upper}_SPEED", 8.0)
                path = sim_map.agent_path(a.maneuver, pose)
                behavior: Behavior = FollowPath(path, min(speed, SPEED_MAX))
                brake_dist = assignment.get(f"{upper}_SAFETY_DIST")
                if brake_dist is not None:
                    behavior = BrakeInterrupt(
                        behavior, float(brake_dist),
                        _param(assignment, f"{upper}_BRAKE", 1.0))
                agent = SimAgent(a.name, AgentKind.CAR, pose.x, pose.y,
                                 pose.heading, speed, behavior)
        except UnrealizableRelationError as exc:
            raise InstantiationError(
                f"agent {a.name!r}: {exc} (map {sim_map.kind!r})") from exc
        others.append(agent)

    # Reject initial interpenetration; falsifiers treat this as an
    # invalid sample rather than a finding.
    placed = [ego] + others
    for i in range(len(placed)):
        for j in range(i + 1, len(placed)):
            if polygons_overlap(placed[i].state().footprint,
                                placed[j].state().footprint):
                raise InstantiationError(
                    f"initial overlap between {placed[i].agent_id!r} "
                    f"and {placed[j].agent_id!r}")

    return Scene(spec=spec, assignment=dict(assignment),
                 map_model=sim_map.model, sim_map=sim_map, ego=ego,
                 ego_route=ego_route, ego_target_speed=ego_speed,
                 others=others, seed=seed)


def run(scene: Scene, ego_agent, duration: float) -> Trace:
    """Roll the scene forward under a pluggable ego policy.

    The trace holds the initial state plus one state per step. The run
    stops early on an ego collision once past a one-second grace window,
    or on a non-finite ego control (recorded as a fault in the metadata).
    """
    dt = scene.timestep
    n_steps = int(round(duration / dt))
    if n_steps > MAX_STEPS:
        raise ValueError(f"{n_steps} steps exceed the {MAX_STEPS}-step cap")
    rng = random.Random(scene.seed)
    ego_agent.reset(scene)

    agents = [scene.ego] + scene.others
    recorded: dict[str, list[AgentState]] = {a.agent_id: [] for a in agents}
    prev_vel: dict[str, tuple[float, float]] = {}
    metadata: dict = {"seed": scene.seed, "scenario": scene.spec.name}

    def record() -> list[AgentState]:
        out = []
        for a in agents:
            if prev_vel:
                ax = (a.vx - prev_vel[a.agent_id][0]) / dt
                ay = (a.vy - prev_vel[a.agent_id][1]) / dt
            else:
                ax = ay = 0.0
            st = a.state(ax, ay)
            recorded[a.agent_id].append(st)
            out.append(st)
        return out

    states = record()
    for step in range(1, n_steps + 1):
        ego_view = states[0]
        others_view = states[1:]
        control = ego_agent.act(ego_view, others_view, scene)
        if not isinstance(control, Control) or not control.finite():
            metadata["fault"] = f"non-finite ego control at step {step}"
            break

        controls = [control]
        for i, a in enumerate(scene.others):
            own_view = states[1 + i]
            world_view = [s for k, s in enumerate(states) if k != 1 + i]
            c = a.behavior.control(own_view, world_view, rng) if a.behavior \
                else Control()
            if not c.finite():
                c = Control()
                metadata.setdefault("agent_faults", []).append(
                    {"agent": a.agent_id, "step": step})
            controls.append(c)

        for a in agents:
            prev_vel[a.agent_id] = (a.vx, a.vy)
        for a, c in zip(agents, controls):
            _integrate(a, c, dt)
        states = record()

        if step * dt >= COLLISION_GRACE_SECONDS:
            ego_fp = states[0].footprint
            hit = next((s for s in states[1:]
                        if polygons_overlap(ego_fp, s.footprint)), None)
            if hit is not None:
                metadata["terminated_early"] = "ego_collision"
                metadata["collision_step"] = step
                break

    ego_track = tuple(recorded["ego"])
    others = tuple(AgentTrack(a.agent_id, tuple(recorded[a.agent_id]))
                   for a in scene.others)
    return Trace(timestep=dt, t1=0, ego=ego_track, others=others,
                 metadata=metadata)


def _integrate(a: SimAgent, c: Control, dt: float) -> None:
    if a.kind is AgentKind.PEDESTRIAN:
        wx, wy = c.walk_velocity if c.walk_velocity is not None else (0.0, 0.0)
        speed = math.hypot(wx, wy)
        if speed > WALK_SPEED_MAX:
            wx *= WALK_SPEED_MAX / speed
            wy *= WALK_SPEED_MAX / speed
        a.x += a.vx * dt
        a.y += a.vy * dt
        a.vx, a.vy = wx, wy
        if math.hypot(wx, wy) > 1e-6:
            a.heading = math.atan2(wy, wx)
        a.speed = math.hypot(wx, wy)
        return

    throttle = min(max(c.throttle, 0.0), 1.0)
    brake = min(max(c.brake, 0.0), 1.0)
    steer = min(max(c.steer, -STEER_MAX), STEER_MAX)
    accel = throttle * ACCEL_MAX - brake * BRAKE_MAX

    # displacement uses the velocity recorded at the step start
    a.x += a.vx * dt
    a.y += a.vy * dt
    new_speed = min(max(a.speed + accel * dt, 0.0), SPEED_MAX)
    a.heading += (a.speed / WHEELBASE) * math.tan(steer) * dt
    a.speed = new_speed
    a.vx = a.speed * math.cos(a.heading)
    a.vy = a.speed * math.sin(a.heading)
