"""Scripted agent behaviors: waypoint tracking, walking, brake interrupts.

Cars track waypoint paths with pure-pursuit steering and proportional
speed control; pedestrians are point masses walking toward a goal. A
brake interrupt wraps any car behavior and overrides it with braking
whenever a leading agent gets inside the safety gap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

# Vehicle actuation limits (kinematic bicycle).
ACCEL_MAX = 4.0
BRAKE_MAX = 8.0
STEER_MAX = 0.6
WHEELBASE = 2.8
SPEED_MAX = 30.0
WALK_SPEED_MAX = 3.0

SPEED_GAIN = 1.5


@dataclass(frozen=True)
class Control:
    throttle: float = 0.0
    brake: float = 0.0
    steer: float = 0.0
    walk_velocity: Optional[tuple[float, float]] = None

    def finite(self) -> bool:
        vals = [self.throttle, self.brake, self.steer]
        if self.walk_velocity is not None:
            vals.extend(self.walk_velocity)
        return all(math.isfinite(v) for v in vals)


def _wrap_angle(a: float) -> float:
    while a > math.pi:
        a -= 2.0 * math.pi
    while a < -math.pi:
        a += 2.0 * math.pi
    return a


def speed_control(v: float, target: float) -> tuple[float, float]:
    """Throttle/brake fractions from a proportional speed law."""
    a_des = SPEED_GAIN * (target - v)
    a_des = min(max(a_des, -BRAKE_MAX), ACCEL_MAX)
    if a_des >= 0.0:
        return a_des / ACCEL_MAX, 0.0
    return 0.0, -a_des / BRAKE_MAX


class PathTracker:
    """Pure-pursuit steering along a waypoint polyline."""

    def __init__(self, waypoints: Sequence[tuple[float, float]]):
        if len(waypoints) < 2:
            raise ValueError("path needs >= 2 waypoints")
        self.pts = [(float(x), float(y)) for x, y in waypoints]
        self._seg = 0

    def _advance(self, x: float, y: float) -> None:
        # Move the progress index forward past segments already behind us.
        while self._seg < len(self.pts) - 2:
            ax, ay = self.pts[self._seg]
            bx, by = self.pts[self._seg + 1]
            vx, vy = bx - ax, by - ay
            denom = vx * vx + vy * vy
            t = ((x - ax) * vx + (y - ay) * vy) / denom if denom > 0 else 1.0
            if t < 1.0:
                break
            self._seg += 1

    def lookahead_point(self, x: float, y: float, dist: float) -> tuple[float, float]:
        self._advance(x, y)
        remaining = dist
        ax, ay = self.pts[self._seg]
        bx, by = self.pts[self._seg + 1]
        vx, vy = bx - ax, by - ay
        denom = vx * vx + vy * vy
        t = ((x - ax) * vx + (y - ay) * vy) / denom if denom > 0 else 1.0
        t = min(max(t, 0.0), 1.0)
        px, py = ax + t * vx, ay + t * vy
        seg = self._seg
        while True:
            bx, by = self.pts[seg + 1]
            d = math.hypot(bx - px, by - py)
            if d >= remaining or seg + 2 >= len(self.pts):
                if d <= 1e-9:
                    return bx, by
                f = min(remaining / d, 1.0)
                return px + f * (bx - px), py + f * (by - py)
            remaining -= d
            px, py = bx, by
            seg += 1

    def steer(self, x: float, y: float, heading: float, v: float) -> float:
        ld = min(max(0.7 * v + 2.0, 3.0), 12.0)
        tx, ty = self.lookahead_point(x, y, ld)
        alpha = _wrap_angle(math.atan2(ty - y, tx - x) - heading)
        delta = math.atan2(2.0 * WHEELBASE * math.sin(alpha), ld)
        return min(max(delta, -STEER_MAX), STEER_MAX)

    def remaining(self, x: float, y: float) -> float:
        """Arc distance from the current projection to the path end."""
        self._advance(x, y)
        ax, ay = self.pts[self._seg]
        bx, by = self.pts[self._seg + 1]
        vx, vy = bx - ax, by - ay
        denom = vx * vx + vy * vy
        t = ((x - ax) * vx + (y - ay) * vy) / denom if denom > 0 else 1.0
        t = min(max(t, 0.0), 1.0)
        px, py = ax + t * vx, ay + t * vy
        total = math.hypot(bx - px, by - py)
        for seg in range(self._seg + 1, len(self.pts) - 1):
            cx, cy = self.pts[seg]
            dx, dy = self.pts[seg + 1]
            total += math.hypot(dx - cx, dy - cy)
        return total

    def _radii(self) -> list[float]:
        if not hasattr(self, "_radii_cache"):
            radii = [math.inf] * len(self.pts)
            for i in range(1, len(self.pts) - 1):
                radii[i] = _circumradius(self.pts[i - 1], self.pts[i],
                                         self.pts[i + 1])
            self._radii_cache = radii
        return self._radii_cache

    def curve_speed_cap(self, x: float, y: float, lat_accel: float,
                        horizon: float = 25.0) -> float:
        """Speed staying under ``lat_accel`` on the curvature ahead."""
        self._advance(x, y)
        radii = self._radii()
        dist = 0.0
        px, py = x, y
        cap = math.inf
        for i in range(self._seg + 1, len(self.pts)):
            qx, qy = self.pts[i]
            dist += math.hypot(qx - px, qy - py)
            if radii[i] < math.inf:
                cap = min(cap, math.sqrt(lat_accel * radii[i]))
            if dist > horizon:
                break
            px, py = qx, qy
        return max(cap, 2.0)


def _circumradius(a, b, c) -> float:
    ab = math.hypot(b[0] - a[0], b[1] - a[1])
    bc = math.hypot(c[0] - b[0], c[1] - b[1])
    ca = math.hypot(a[0] - c[0], a[1] - c[1])
    cross = ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
    if abs(cross) < 1e-9:
        return math.inf
    return (ab * bc * ca) / (2.0 * abs(cross))


# Comfortable deceleration used to stop at the end of a route, and the
# lateral-acceleration budget used to slow for upcoming curvature.
STOP_DECEL = 3.0
CURVE_LAT_ACCEL = 3.0


def route_speed(target: float, remaining: float) -> float:
    """Target speed capped so the agent can stop by the route's end."""
    margin = max(remaining - 2.0, 0.0)
    return min(target, math.sqrt(2.0 * STOP_DECEL * margin))


class Behavior:
    """Per-agent controller; one instance per simulation run."""

    def control(self, own, world, rng) -> Control:
        raise NotImplementedError


class FollowPath(Behavior):
    def __init__(self, waypoints, target_speed: float):
        if not 0.0 <= target_speed <= SPEED_MAX:
            raise ValueError(f"target speed {target_speed} outside [0, {SPEED_MAX}]")
        self.tracker = PathTracker(waypoints)
        self.target_speed = target_speed

    def control(self, own, world, rng) -> Control:
        x, y = own.position
        steer = self.tracker.steer(x, y, own.heading, own.speed)
        target = route_speed(self.target_speed, self.tracker.remaining(x, y))
        target = min(target, self.tracker.curve_speed_cap(x, y, CURVE_LAT_ACCEL))
        throttle, brake = speed_control(own.speed, target)
        return Control(throttle, brake, steer)


def follow_lane(lane, target_speed: float) -> FollowPath:
    """Track a lane's centerline at a target speed."""
    return FollowPath(lane.centerline, target_speed)


def follow_trajectory(lanes, target_speed: float) -> FollowPath:
    """Track the concatenated centerlines of a lane sequence."""
    pts: list[tuple[float, float]] = []
    for lane in lanes:
        for p in lane.centerline:
            if not pts or math.hypot(p[0] - pts[-1][0], p[1] - pts[-1][1]) > 1e-9:
                pts.append(p)
    return FollowPath(pts, target_speed)


def lane_change(from_lane, to_lane, target_speed: float,
                along: float = 15.0) -> FollowPath:
    """Continue ``along`` meters in the current lane, then merge over."""
    pts = [from_lane.centerline[0]]
    fx, fy = from_lane.centerline[0]
    lx, ly = from_lane.centerline[-1]
    norm = math.hypot(lx - fx, ly - fy)
    ux, uy = (lx - fx) / norm, (ly - fy) / norm
    pts.append((fx + ux * along, fy + uy * along))
    pts.extend(p for p in to_lane.centerline
               if (p[0] - fx) * ux + (p[1] - fy) * uy > along + 10.0)
    if len(pts) < 3:
        pts.append(to_lane.centerline[-1])
    return FollowPath(pts, target_speed)


class WalkTo(Behavior):
    """Point-mass walk toward a goal point, stopping on arrival."""

    def __init__(self, goal: tuple[float, float], speed: float):
        if not 0.0 <= speed <= WALK_SPEED_MAX:
            raise ValueError(f"walk speed {speed} outside [0, {WALK_SPEED_MAX}]")
        self.goal = (float(goal[0]), float(goal[1]))
        self.speed = speed

    def control(self, own, world, rng) -> Control:
        dx = self.goal[0] - own.position[0]
        dy = self.goal[1] - own.position[1]
        d = math.hypot(dx, dy)
        if d < 0.3 or self.speed <= 0.0:
            return Control(walk_velocity=(0.0, 0.0))
        return Control(walk_velocity=(dx / d * self.speed, dy / d * self.speed))


class BrakeInterrupt(Behavior):
    """Wraps a car behavior; brakes when a leader is inside the safety gap."""

    def __init__(self, inner: Behavior, safety_distance: float,
                 brake_fraction: float = 1.0):
        if safety_distance <= 0.0:
            raise ValueError("safety distance must be > 0")
        if not 0.0 < brake_fraction <= 1.0:
            raise ValueError("brake fraction must be in (0, 1]")
        self.inner = inner
        self.safety_distance = safety_distance
        self.brake_fraction = brake_fraction

    def control(self, own, world, rng) -> Control:
        if leader_gap(own, world) < self.safety_distance:
            return Control(brake=self.brake_fraction)
        return self.inner.control(own, world, rng)


def _half_length(state) -> float:
    xmin, ymin, xmax, ymax = state.footprint.bounds()
    return 0.5 * max(xmax - xmin, ymax - ymin)


def leader_gap(own, world) -> float:
    """Bumper gap to the nearest agent in the forward corridor, else +inf.

    ``world`` is the list of the other agents' states (self excluded).
    """
    ch = math.cos(own.heading)
    sh = math.sin(own.heading)
    best = math.inf
    for other in world:
        dx = other.position[0] - own.position[0]
        dy = other.position[1] - own.position[1]
        lon = dx * ch + dy * sh
        lat = -dx * sh + dy * ch
        if lon <= 0.0 or abs(lat) > 2.0:
            continue
        gap = lon - _half_length(own) - _half_length(other)
        if gap < best:
            best = gap
    return best
