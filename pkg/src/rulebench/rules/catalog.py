"""The rule catalog: 19 driving objectives with violation scores.

Every rule maps (trace, map, params) to a real score: positive means
violated (larger is worse), non-positive means satisfied. Rules with a
temporal-logic reading also expose a formula builder whose Boolean
verdict must agree with the score's sign; the objective-function rules
(14, 15, 17-19) subtract a configurable satisfaction threshold from the
raw objective so the same sign convention holds.

Registered alternative formalizations: summed clearance deficits instead
of the worst one (rules 10-12), heading-relative neighbor classification
instead of future-trajectory (rules 10-12), and a centroid-based
correct-side test instead of the whole footprint (rule 4).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Optional

from .. import stl
from ..geometry import (
    area_outside,
    distance_to_region,
    intersection_area,
    min_distance,
    region_difference_intersection_area,
)
from ..world import AgentKind, WorldState
from .context import EvalContext
from .kinematics import ClassifyMode, TTC_HORIZON, TtcAssumption


class Variant(enum.Enum):
    DEFAULT = "default"
    CLEARANCE_SUM = "clearance_sum"
    CLEARANCE_HEADING = "clearance_heading"
    CORRECT_SIDE_CENTROID = "correct_side_centroid"


# Rules each non-default variant may be attached to.
VARIANT_RULES = {
    Variant.CLEARANCE_SUM: frozenset({10, 11, 12}),
    Variant.CLEARANCE_HEADING: frozenset({10, 11, 12}),
    Variant.CORRECT_SIDE_CENTROID: frozenset({4}),
}


class RuleInapplicableError(ValueError):
    """The map lacks a region this rule needs; distinct from a violation."""


@dataclass(frozen=True)
class RuleDef:
    index: int
    name: str
    stl_definable: bool
    vs: Callable
    formula: Optional[Callable] = None
    check_applicable: Optional[Callable] = None
    supported_variants: frozenset = frozenset()

    def applicable(self, map_model) -> bool:
        return self.check_applicable is None or self.check_applicable(map_model)


def _other(st: WorldState, aid: str):
    for i, s in st.others:
        if i == aid:
            return s
    raise KeyError(aid)


def _vru_tracks(ctx: EvalContext):
    return [tr for tr in ctx.trace.others if tr.kind is not AgentKind.CAR]


def _vehicle_tracks(ctx: EvalContext):
    return [tr for tr in ctx.trace.others if tr.kind is AgentKind.CAR]


def _full_interval(ctx: EvalContext) -> tuple[int, int]:
    return (0, len(ctx.trace) - 1)


# --- rules 1-2: collisions --------------------------------------------------

def _impact_energy(ego, other) -> float:
    """Kinetic energy measure of a first contact.

    Perfectly inelastic impact along the relative-velocity axis: the two
    bodies share the momentum-conserving velocity component afterwards.
    The score adds the magnitudes of the ego's energy change and the
    other agent's energy change; zero relative velocity transfers nothing.
    """
    m1, m2 = ego.mass, other.mass
    dvx = ego.velocity[0] - other.velocity[0]
    dvy = ego.velocity[1] - other.velocity[1]
    r = math.hypot(dvx, dvy)
    if r < 1e-12:
        return 0.0
    ux, uy = dvx / r, dvy / r
    a = ego.velocity[0] * ux + ego.velocity[1] * uy
    b = other.velocity[0] * ux + other.velocity[1] * uy
    w = (m1 * a + m2 * b) / (m1 + m2)
    ego_delta = 0.5 * m1 * (a * a - w * w)
    other_delta = 0.5 * m2 * (w * w - b * b)
    return abs(ego_delta) + abs(other_delta)


def _vs_collision(ctx: EvalContext, tracks) -> float:
    total = 0.0
    for tr in tracks:
        for t in ctx.indices:
            st = ctx.state(t)
            other = _other(st, tr.agent_id)
            if intersection_area(st.ego.footprint, other.footprint) > 0.0:
                total += _impact_energy(st.ego, other)
                break
    return total


def _formula_collision(ctx: EvalContext, tracks) -> stl.Formula:
    atoms = [
        stl.Atomic(
            (lambda st, aid=tr.agent_id:
             -intersection_area(st.ego.footprint, _other(st, aid).footprint)),
            name=f"no_overlap[{tr.agent_id}]")
        for tr in tracks
    ]
    return stl.Globally(stl.conjunction(atoms), _full_interval(ctx))


def vs_vru_collision(ctx, variant):
    return _vs_collision(ctx, _vru_tracks(ctx))


def formula_vru_collision(ctx, variant):
    return _formula_collision(ctx, _vru_tracks(ctx))


def vs_vehicle_collision(ctx, variant):
    return _vs_collision(ctx, _vehicle_tracks(ctx))


def formula_vehicle_collision(ctx, variant):
    return _formula_collision(ctx, _vehicle_tracks(ctx))


# --- rule 3: drivable area ---------------------------------------------------

def vs_drivable(ctx, variant):
    worst = 0.0
    for t in ctx.indices:
        fp = ctx.state(t).ego.footprint
        out = area_outside(fp, ctx.map.drivable)
        term = out
        if out >= fp.area - 1e-12:
            # Fully outside: grade by squared separation so drifting
            # farther keeps increasing the score.
            d = distance_to_region(fp, ctx.map.drivable)
            term += d * d
        if term > worst:
            worst = term
    return worst


def formula_drivable(ctx, variant):
    atom = stl.Atomic(lambda st: -area_outside(st.ego.footprint, ctx.map.drivable),
                      name="inside_drivable")
    return stl.Globally(atom, _full_interval(ctx))


# --- rule 4: correct side ----------------------------------------------------

def _wrong_side_area(ctx, st: WorldState) -> float:
    return region_difference_intersection_area(
        st.ego.footprint, ctx.map.incorrect_side, ctx.map.correct_side)


def _centroid_wrong(ctx, st: WorldState) -> bool:
    x, y = st.ego.position
    return (ctx.map.incorrect_side.contains_point(x, y)
            and not ctx.map.correct_side.contains_point(x, y))


def vs_correct_side(ctx, variant):
    total = 0.0
    if variant is Variant.CORRECT_SIDE_CENTROID:
        for t in ctx.indices:
            st = ctx.state(t)
            if _centroid_wrong(ctx, st):
                total += _wrong_side_area(ctx, st)
    else:
        for t in ctx.indices:
            total += _wrong_side_area(ctx, ctx.state(t))
    return total


def formula_correct_side(ctx, variant):
    if variant is Variant.CORRECT_SIDE_CENTROID:
        atom = stl.Atomic(lambda st: -1.0 if _centroid_wrong(ctx, st) else 1.0,
                          name="centroid_on_correct_side")
    else:
        atom = stl.Atomic(lambda st: -_wrong_side_area(ctx, st),
                          name="on_correct_side")
    return stl.Globally(atom, _full_interval(ctx))


# --- rules 5 and 7: time to collision ----------------------------------------

def _vs_ttc(ctx, tracks, assumption, threshold) -> float:
    worst = threshold - TTC_HORIZON
    for tr in tracks:
        for t in ctx.indices:
            ttc = min(ctx.ttc(t, tr.agent_id, assumption), TTC_HORIZON)
            margin = threshold - ttc
            if margin > worst:
                worst = margin
    return worst


def _formula_ttc(ctx, tracks, assumption, threshold) -> stl.Formula:
    atoms = [
        stl.Atomic(
            (lambda st, aid=tr.agent_id:
             min(ctx.ttc(st.index, aid, assumption), TTC_HORIZON) - threshold),
            name=f"ttc[{tr.agent_id}]")
        for tr in tracks
    ]
    return stl.Globally(stl.conjunction(atoms), _full_interval(ctx))


def vs_vru_ttc(ctx, variant):
    return _vs_ttc(ctx, _vru_tracks(ctx), TtcAssumption.OTHER_STOPS,
                   ctx.params.t_vru_ttc)


def formula_vru_ttc(ctx, variant):
    return _formula_ttc(ctx, _vru_tracks(ctx), TtcAssumption.OTHER_STOPS,
                        ctx.params.t_vru_ttc)


def vs_vehicle_ttc(ctx, variant):
    return _vs_ttc(ctx, _vehicle_tracks(ctx), TtcAssumption.BOTH_CONSTANT,
                   ctx.params.t_vehicle_ttc)


def formula_vehicle_ttc(ctx, variant):
    return _formula_ttc(ctx, _vehicle_tracks(ctx), TtcAssumption.BOTH_CONSTANT,
                        ctx.params.t_vehicle_ttc)


# --- rule 6: VRU acknowledgment ------------------------------------------------

def _toward_vru(ego, vru) -> tuple[float, float]:
    dx = vru.position[0] - ego.position[0]
    dy = vru.position[1] - ego.position[1]
    n = math.hypot(dx, dy)
    if n < 1e-9:
        return math.cos(ego.heading), math.sin(ego.heading)
    return dx / n, dy / n


def _predicted_distance(ego, vru, tau: float) -> float:
    fa = ego.footprint.translated(ego.velocity[0] * tau, ego.velocity[1] * tau)
    fb = vru.footprint.translated(vru.velocity[0] * tau, vru.velocity[1] * tau)
    return min_distance(fa, fb)


def _ack_steps(ctx) -> int:
    return math.ceil(ctx.params.t_ack / ctx.trace.timestep - 1e-9)


def vs_vru_ack(ctx, variant):
    p = ctx.params
    dt = ctx.trace.timestep
    K = _ack_steps(ctx)
    best = None
    for t in ctx.indices:
        st = ctx.state(t)
        ego = st.ego
        for tr in _vru_tracks(ctx):
            vru = _other(st, tr.agent_id)
            ux, uy = _toward_vru(ego, vru)
            v_proj = ego.velocity[0] * ux + ego.velocity[1] * uy
            if v_proj < p.v_ack:
                continue
            a_proj = ego.acceleration[0] * ux + ego.acceleration[1] * uy
            for k in range(K + 1):
                if _predicted_distance(ego, vru, k * dt) <= p.d_ack:
                    cand = a_proj - p.a_ack
                    if best is None or cand > best:
                        best = cand
                    break
    # No approach ever demanded acknowledgment: satisfied with unit margin.
    return best if best is not None else -1.0


def formula_vru_ack(ctx, variant):
    p = ctx.params
    dt = ctx.trace.timestep
    K = _ack_steps(ctx)
    conjuncts = []
    for tr in _vru_tracks(ctx):
        aid = tr.agent_id

        def v_term(st, aid=aid):
            ego = st.ego
            vru = _other(st, aid)
            ux, uy = _toward_vru(ego, vru)
            return ego.velocity[0] * ux + ego.velocity[1] * uy - p.v_ack

        def a_term(st, aid=aid):
            ego = st.ego
            vru = _other(st, aid)
            ux, uy = _toward_vru(ego, vru)
            return p.a_ack - (ego.acceleration[0] * ux + ego.acceleration[1] * uy)

        for k in range(K + 1):
            def d_term(st, aid=aid, tau=k * dt):
                return p.d_ack - _predicted_distance(st.ego, _other(st, aid), tau)

            premise = stl.And(stl.Atomic(v_term, name=f"approaching[{aid}]"),
                              stl.Atomic(d_term, name=f"near[{aid},{k}]"))
            conjuncts.append(stl.Implies(premise,
                                         stl.Atomic(a_term, name=f"braking[{aid}]")))
    return stl.Globally(stl.conjunction(conjuncts), _full_interval(ctx))


# --- rules 8-9: VRU clearance ---------------------------------------------------

def _vs_vru_clearance(ctx, on_road: bool, threshold: float) -> float:
    worst = None
    for tr in _vru_tracks(ctx):
        for t in ctx.indices:
            if ctx.on_road(t, tr.agent_id) is not on_road:
                continue
            margin = threshold - ctx.distance(t, tr.agent_id)
            if worst is None or margin > worst:
                worst = margin
    # No qualifying agent at any step: satisfied with a unit margin, kept
    # independent of the threshold so tightening it never raises a score.
    return worst if worst is not None else -1.0


def _formula_vru_clearance(ctx, on_road: bool, threshold: float) -> stl.Formula:
    atoms = []
    for tr in _vru_tracks(ctx):
        def fn(st, aid=tr.agent_id):
            if ctx.on_road(st.index, aid) is not on_road:
                return threshold
            return ctx.distance(st.index, aid) - threshold

        atoms.append(stl.Atomic(fn, name=f"vru_clear[{tr.agent_id}]"))
    return stl.Globally(stl.conjunction(atoms), _full_interval(ctx))


def vs_vru_clearance_off(ctx, variant):
    return _vs_vru_clearance(ctx, False, ctx.params.d_vru_off)


def formula_vru_clearance_off(ctx, variant):
    return _formula_vru_clearance(ctx, False, ctx.params.d_vru_off)


def vs_vru_clearance_on(ctx, variant):
    return _vs_vru_clearance(ctx, True, ctx.params.d_vru_on)


def formula_vru_clearance_on(ctx, variant):
    return _formula_vru_clearance(ctx, True, ctx.params.d_vru_on)


# --- rules 10-12: vehicle clearance ----------------------------------------------

def _clearance_mode(variant: Variant) -> ClassifyMode:
    if variant is Variant.CLEARANCE_HEADING:
        return ClassifyMode.HEADING
    return ClassifyMode.FUTURE_TRAJECTORY


def _members(ctx, t: int, direction: str, mode: ClassifyMode) -> frozenset:
    return getattr(ctx.neighbors(t, mode), direction)


def _vs_vehicle_clearance(ctx, variant, direction: str, threshold: float) -> float:
    mode = _clearance_mode(variant)
    if variant is Variant.CLEARANCE_SUM:
        total = 0.0
        for tr in _vehicle_tracks(ctx):
            for t in ctx.indices:
                if tr.agent_id not in _members(ctx, t, direction, mode):
                    continue
                deficit = threshold - ctx.distance(t, tr.agent_id)
                if deficit > 0.0:
                    total += deficit
        return total
    worst = None
    for tr in _vehicle_tracks(ctx):
        for t in ctx.indices:
            if tr.agent_id not in _members(ctx, t, direction, mode):
                continue
            margin = threshold - ctx.distance(t, tr.agent_id)
            if worst is None or margin > worst:
                worst = margin
    return worst if worst is not None else -1.0


def _formula_vehicle_clearance(ctx, variant, direction: str,
                               threshold: float) -> stl.Formula:
    mode = _clearance_mode(variant)
    atoms = []
    for tr in _vehicle_tracks(ctx):
        def fn(st, aid=tr.agent_id):
            if aid not in _members(ctx, st.index, direction, mode):
                return threshold
            return ctx.distance(st.index, aid) - threshold

        atoms.append(stl.Atomic(fn, name=f"clear_{direction}[{tr.agent_id}]"))
    return stl.Globally(stl.conjunction(atoms), _full_interval(ctx))


def vs_clearance_front(ctx, variant):
    return _vs_vehicle_clearance(ctx, variant, "front", ctx.params.d_vehicle_front)


def formula_clearance_front(ctx, variant):
    return _formula_vehicle_clearance(ctx, variant, "front",
                                      ctx.params.d_vehicle_front)


def vs_clearance_left(ctx, variant):
    return _vs_vehicle_clearance(ctx, variant, "left", ctx.params.d_vehicle_left)


def formula_clearance_left(ctx, variant):
    return _formula_vehicle_clearance(ctx, variant, "left",
                                      ctx.params.d_vehicle_left)


def vs_clearance_right(ctx, variant):
    return _vs_vehicle_clearance(ctx, variant, "right", ctx.params.d_vehicle_right)


def formula_clearance_right(ctx, variant):
    return _formula_vehicle_clearance(ctx, variant, "right",
                                      ctx.params.d_vehicle_right)


# --- rule 13: speed limit ---------------------------------------------------------

def vs_speed_limit(ctx, variant):
    worst = -math.inf
    for t in ctx.indices:
        over = ctx.state(t).ego.speed - ctx.speed_limit(t)
        if over > worst:
            worst = over
    over = max(worst, 0.0)
    return over * over


def formula_speed_limit(ctx, variant):
    atom = stl.Atomic(lambda st: ctx.speed_limit(st.index) - st.ego.speed,
                      name="under_limit")
    return stl.Globally(atom, _full_interval(ctx))


# --- rules 14-15: lane objectives ---------------------------------------------------

def vs_lane_keeping(ctx, variant):
    count = 0
    for t in ctx.indices:
        lane = ctx.ego_lane(t)
        if lane is None:
            count += 1
            continue
        fp = ctx.state(t).ego.footprint
        if area_outside(fp, ctx.lane_region(lane)) > 1e-9:
            count += 1
    return float(count) - ctx.params.lane_keep_max_steps


def vs_lane_centering(ctx, variant):
    total = 0.0
    for t in ctx.indices:
        total += ctx.centerline_distance(t)
    return total - ctx.params.center_mean_dev * len(ctx.trace)


# --- rule 16: goal / progress ---------------------------------------------------------

def vs_goal(ctx, variant):
    best = math.inf
    for t in ctx.indices:
        fp = ctx.state(t).ego.footprint
        out = area_outside(fp, ctx.map.target)
        term = out
        if out >= fp.area - 1e-12:
            d = distance_to_region(fp, ctx.map.target)
            term += d * d
        if term < best:
            best = term
    return best


def formula_goal(ctx, variant):
    atom = stl.Atomic(lambda st: -area_outside(st.ego.footprint, ctx.map.target),
                      name="in_target")
    return stl.Eventually(atom, _full_interval(ctx))


# --- rules 17-19: comfort ----------------------------------------------------------------

def vs_jerk(ctx, variant):
    tr = ctx.trace
    total = 0.0
    prev = tr.ego[0].acceleration
    for i in range(1, len(tr)):
        cur = tr.ego[i].acceleration
        total += math.hypot(cur[0] - prev[0], cur[1] - prev[1])
        prev = cur
    allowance = ctx.params.jerk_mean * (len(tr) - 1) * tr.timestep
    return total - allowance


def vs_accel_long(ctx, variant):
    tr = ctx.trace
    total = sum(abs(s.accel_long) for s in tr.ego)
    return total - ctx.params.accel_long_mean * len(tr)


def vs_accel_lat(ctx, variant):
    tr = ctx.trace
    total = sum(abs(s.accel_lat) for s in tr.ego)
    return total - ctx.params.accel_lat_mean * len(tr)


# --- applicability predicates --------------------------------------------------------------

def _needs_drivable(m) -> bool:
    return not m.drivable.is_empty()


def _needs_sides(m) -> bool:
    return not m.incorrect_side.is_empty()


def _needs_lanes(m) -> bool:
    return len(m.lanes) > 0


def _needs_target(m) -> bool:
    return m.target is not None and not m.target.is_empty()


_CLEARANCE_VARIANTS = frozenset({Variant.CLEARANCE_SUM, Variant.CLEARANCE_HEADING})

RULE_DEFS: dict[int, RuleDef] = {
    r.index: r for r in [
        RuleDef(1, "vru_collision", True, vs_vru_collision, formula_vru_collision),
        RuleDef(2, "vehicle_collision", True, vs_vehicle_collision,
                formula_vehicle_collision),
        RuleDef(3, "drivable_area", True, vs_drivable, formula_drivable,
                _needs_drivable),
        RuleDef(4, "correct_side", True, vs_correct_side, formula_correct_side,
                _needs_sides,
                supported_variants=frozenset({Variant.CORRECT_SIDE_CENTROID})),
        RuleDef(5, "vru_ttc", True, vs_vru_ttc, formula_vru_ttc),
        RuleDef(6, "vru_acknowledgment", True, vs_vru_ack, formula_vru_ack),
        RuleDef(7, "vehicle_ttc", True, vs_vehicle_ttc, formula_vehicle_ttc),
        RuleDef(8, "vru_clearance_off_road", True, vs_vru_clearance_off,
                formula_vru_clearance_off, _needs_drivable),
        RuleDef(9, "vru_clearance_on_road", True, vs_vru_clearance_on,
                formula_vru_clearance_on, _needs_drivable),
        RuleDef(10, "front_clearance", True, vs_clearance_front,
                formula_clearance_front, supported_variants=_CLEARANCE_VARIANTS),
        RuleDef(11, "left_clearance", True, vs_clearance_left,
                formula_clearance_left, supported_variants=_CLEARANCE_VARIANTS),
        RuleDef(12, "right_clearance", True, vs_clearance_right,
                formula_clearance_right, supported_variants=_CLEARANCE_VARIANTS),
        RuleDef(13, "speed_limit", True, vs_speed_limit, formula_speed_limit),
        RuleDef(14, "lane_keeping", False, vs_lane_keeping,
                check_applicable=_needs_lanes),
        RuleDef(15, "lane_centering", False, vs_lane_centering,
                check_applicable=_needs_lanes),
        RuleDef(16, "goal_progress", True, vs_goal, formula_goal, _needs_target),
        RuleDef(17, "comfort_jerk", False, vs_jerk),
        RuleDef(18, "comfort_accel_long", False, vs_accel_long),
        RuleDef(19, "comfort_accel_lat", False, vs_accel_lat),
    ]
}
