"""Pluggable ego policies and the two built-in baselines.

A policy observes the full world state each step and returns a Control.
The rule-based baseline tracks the scenario route with pure pursuit and
brakes for leaders inside its safety gap; the aggressive baseline never
brakes for traffic and overspeeds by 20%, guaranteeing findable
violations for falsification tests.
"""

from __future__ import annotations

from .behaviors import CURVE_LAT_ACCEL, Control, PathTracker, leader_gap, route_speed, speed_control


class AgentPolicy:
    """Interface for agents under test. Stateful per run; reset() first."""

    name = "policy"

    def reset(self, scene) -> None:
        raise NotImplementedError

    def act(self, ego_state, others, scene) -> Control:
        """Full world observation -> control for this step."""
        raise NotImplementedError


class RuleBasedAgent(AgentPolicy):
    """Centerline tracking with proportional speed control and gap braking."""

    name = "rule_based"

    def __init__(self, safety_distance: float = 8.0, brake_fraction: float = 1.0,
                 speed_cap: float | None = None):
        self.safety_distance = safety_distance
        self.brake_fraction = brake_fraction
        self.speed_cap = speed_cap
        self._tracker = None
        self._target = 0.0

    def reset(self, scene) -> None:
        self._tracker = PathTracker(scene.ego_route)
        self._target = scene.ego_target_speed
        if self.speed_cap is not None:
            self._target = min(self._target, self.speed_cap)
        sd = scene.assignment.get("EGO_SAFETY_DIST")
        if sd is not None:
            self.safety_distance = float(sd)
        bf = scene.assignment.get("EGO_BRAKE")
        if bf is not None:
            self.brake_fraction = min(max(float(bf), 0.0), 1.0)

    def act(self, ego_state, others, scene) -> Control:
        x, y = ego_state.position
        steer = self._tracker.steer(x, y, ego_state.heading, ego_state.speed)
        if leader_gap(ego_state, others) < self.safety_distance:
            return Control(brake=self.brake_fraction, steer=steer)
        target = route_speed(self._target, self._tracker.remaining(x, y))
        target = min(target, self._tracker.curve_speed_cap(x, y, CURVE_LAT_ACCEL))
        throttle, brake = speed_control(ego_state.speed, target)
        return Control(throttle, brake, steer)


class AggressiveAgent(AgentPolicy):
    """Route tracking with no traffic braking and a 20% overspeed."""

    name = "aggressive_baseline"

    def __init__(self, overspeed: float = 1.2):
        self.overspeed = overspeed
        self._tracker = None
        self._target = 0.0

    def reset(self, scene) -> None:
        self._tracker = PathTracker(scene.ego_route)
        self._target = scene.ego_target_speed * self.overspeed

    def act(self, ego_state, others, scene) -> Control:
        x, y = ego_state.position
        steer = self._tracker.steer(x, y, ego_state.heading, ego_state.speed)
        target = route_speed(self._target, self._tracker.remaining(x, y))
        throttle, brake = speed_control(ego_state.speed, target)
        return Control(throttle, brake, steer)


def builtin_agents() -> dict[str, AgentPolicy]:
    """Fresh instances of the built-in baselines, keyed by name."""
    return {"rule_based": RuleBasedAgent(), "aggressive_baseline": AggressiveAgent()}


def make_agent(name: str) -> AgentPolicy:
    agents = builtin_agents()
    try:
        return agents[name]
    except KeyError:
        raise ValueError(f"unknown agent {name!r}; known: {sorted(agents)}") from None
