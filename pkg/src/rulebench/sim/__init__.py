"""Deterministic kinematic simulator: maps, behaviors, engine, agents."""

from .agents import AgentPolicy, AggressiveAgent, RuleBasedAgent, builtin_agents, make_agent
from .behaviors import (
    Behavior,
    BrakeInterrupt,
    Control,
    FollowPath,
    WalkTo,
    follow_lane,
    follow_trajectory,
    lane_change,
)
from .engine import (
    COLLISION_GRACE_SECONDS,
    DEFAULT_TIMESTEP,
    InstantiationError,
    Scene,
    instantiate,
    run,
)
from .maps import (BUILTIN_MAPS, FourWayMap, Pose, StraightMap,
                   UnrealizableRelationError, builtin_map, suggest_map_id)

__all__ = [
    "AgentPolicy", "AggressiveAgent", "RuleBasedAgent", "builtin_agents",
    "make_agent", "Behavior", "BrakeInterrupt", "Control", "FollowPath",
    "WalkTo", "follow_lane", "follow_trajectory", "lane_change",
    "COLLISION_GRACE_SECONDS", "DEFAULT_TIMESTEP", "InstantiationError",
    "Scene", "instantiate", "run", "BUILTIN_MAPS", "FourWayMap", "Pose",
    "StraightMap", "UnrealizableRelationError", "builtin_map",
    "suggest_map_id",
]
