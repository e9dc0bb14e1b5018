"""Rule catalog: worked scores, variant behavior, STL sign agreement."""

import math
import random

import pytest

from conftest import linear_trace, random_trace, straight_map
from rulebench import stl
from rulebench.geometry import Polygon, Region
from rulebench.rules import (
    EvalContext,
    RULE_DEFS,
    RuleId,
    RuleInapplicableError,
    RuleParams,
    Variant,
    active_variant,
    dump_rule_config,
    evaluate_all,
    evaluate_rule,
    load_rule_config,
    rule_ids_for,
    stl_formula,
    RuleConfig,
)
from rulebench.world import AgentKind, AgentState, AgentTrack, MapModel, Trace

PARAMS = RuleParams()


def score(idx, trace, m, params=PARAMS, variant=Variant.DEFAULT):
    return evaluate_rule(RuleId(idx, variant), trace, m, params)


class TestCollisionRules:
    def test_clean_when_far_apart(self, basic_map):
        tr = linear_trace(30, others=(("v", AgentKind.CAR, 40.0, 1.75, 10.0, 0.0),))
        assert score(2, tr, basic_map) <= 0.0

    def test_zero_without_overlap(self, basic_map, rng):
        for _ in range(30):
            tr = random_trace(rng, max_agents=2)
            ctx = EvalContext(tr, basic_map, PARAMS)
            from rulebench.geometry import intersection_area

            any_overlap = any(
                intersection_area(st.ego.footprint, s.footprint) > 0.0
                for st in tr.states() for _, s in st.others)
            if not any_overlap:
                assert score(1, tr, basic_map) == 0.0
                assert score(2, tr, basic_map) == 0.0

    def test_energy_scales_with_speed(self, basic_map):
        def crash_trace(speed):
            return linear_trace(40, x0=0.0, speed=speed,
                                others=(("p", AgentKind.PEDESTRIAN,
                                         15.0, 1.75, 0.0, 0.0),))

        slow = score(1, crash_trace(6.0), basic_map)
        fast = score(1, crash_trace(12.0), basic_map)
        assert 0.0 < slow < fast

    def test_vru_vs_vehicle_split(self, basic_map):
        tr = linear_trace(40, x0=0.0, speed=10.0,
                          others=(("p", AgentKind.PEDESTRIAN, 15.0, 1.75, 0, 0),))
        assert score(1, tr, basic_map) > 0.0
        assert score(2, tr, basic_map) == 0.0


class TestDrivableArea:
    def test_inside_is_zero(self, basic_map):
        tr = linear_trace(20)
        assert score(3, tr, basic_map) == 0.0

    def test_farther_outside_scores_strictly_more(self, basic_map):
        # both fully off the road; the distance term separates them
        near = linear_trace(5, y=-4.0, speed=0.0)
        far = linear_trace(5, y=-9.0, speed=0.0)
        s_near = score(3, near, basic_map)
        s_far = score(3, far, basic_map)
        assert s_near > 0.0
        assert s_far > s_near

    def test_inapplicable_without_drivable(self):
        m = MapModel(drivable=Region(()))
        tr = linear_trace(5)
        with pytest.raises(RuleInapplicableError):
            score(3, tr, m)


class TestCorrectSide:
    def test_wrong_side_accumulates_per_step(self, basic_map):
        tr10 = linear_trace(10, y=9.0)
        tr20 = linear_trace(20, y=9.0)
        s10 = score(4, tr10, basic_map)
        s20 = score(4, tr20, basic_map)
        assert s10 > 0.0
        assert s20 == pytest.approx(2.0 * s10, rel=1e-6)

    def test_centroid_variant_ignores_edge_overlap(self, basic_map):
        # straddling the divider: footprint overlaps the oncoming side but
        # the centroid stays on the correct side
        tr = linear_trace(10, y=6.5)
        assert score(4, tr, basic_map) > 0.0
        assert score(4, tr, basic_map,
                     variant=Variant.CORRECT_SIDE_CENTROID) <= 0.0

    def test_inapplicable_without_side_regions(self):
        from rulebench.sim import builtin_map

        m = builtin_map("four_way").model  # junction maps carry no sides
        tr = linear_trace(5, y=3.0)
        with pytest.raises(RuleInapplicableError):
            score(4, tr, m)
        vec = evaluate_all(tr, m, PARAMS)
        assert RuleId(4) in vec.inapplicable

    def test_variant_matches_when_fully_wrong(self, basic_map):
        tr = linear_trace(10, y=9.0)
        default = score(4, tr, basic_map)
        centroid = score(4, tr, basic_map, variant=Variant.CORRECT_SIDE_CENTROID)
        assert centroid == pytest.approx(default)


class TestTtcRules:
    def test_vru_ttc_threshold(self, basic_map):
        # closing at 10 m/s on a pedestrian 25 m out: the 22.5 m bumper gap
        # closes at 2.25 s, snapped up to the 2.3 s grid point
        tr = linear_trace(1, x0=0.0, speed=10.0,
                          others=(("p", AgentKind.PEDESTRIAN, 25.0, 1.75, 0, 0),))
        s = score(5, tr, basic_map)
        assert s == pytest.approx(3.0 - 2.3, abs=1e-9)

    def test_vacuous_is_negative(self, basic_map):
        tr = linear_trace(5)
        assert score(5, tr, basic_map) < 0.0
        assert score(7, tr, basic_map) < 0.0


class TestClearanceRules:
    def make_front_gap_trace(self, deficit, steps=3):
        gap = PARAMS.d_vehicle_front - deficit
        return linear_trace(steps, x0=0.0, speed=1.0,
                            others=(("v", AgentKind.CAR, 4.5 + gap, 1.75,
                                     1.0, 0.0),))

    def test_default_takes_worst(self, basic_map):
        tr = self.make_front_gap_trace(0.5)
        assert score(10, tr, basic_map) == pytest.approx(0.5, abs=1e-9)

    def test_sum_variant_accumulates(self, basic_map):
        tr = self.make_front_gap_trace(0.5, steps=3)
        assert score(10, tr, basic_map,
                     variant=Variant.CLEARANCE_SUM) == pytest.approx(1.5, abs=1e-9)

    def test_sum_dominates_default(self, basic_map, rng):
        for _ in range(40):
            tr = random_trace(rng, max_agents=2)
            default = score(10, tr, basic_map)
            summed = score(10, tr, basic_map, variant=Variant.CLEARANCE_SUM)
            assert summed >= min(default, 0.0) - 1e-12
            if default > 0:
                assert summed >= default - 1e-12

    def test_shrinking_threshold_never_raises_score(self, basic_map, rng):
        for _ in range(25):
            tr = random_trace(rng, max_agents=2)
            wide = evaluate_rule(RuleId(10), tr, basic_map,
                                 PARAMS.replace(d_vehicle_front=6.0))
            narrow = evaluate_rule(RuleId(10), tr, basic_map,
                                   PARAMS.replace(d_vehicle_front=2.0))
            assert narrow <= wide + 1e-12

    def test_vru_off_road_clearance(self, basic_map):
        tr = linear_trace(20, y=1.75,
                          others=(("p", AgentKind.PEDESTRIAN, 12.0, -0.4, 0, 0),))
        assert score(8, tr, basic_map) > 0.0
        assert score(9, tr, basic_map) < 0.0


class TestSpeedLimit:
    def test_squared_excess(self):
        # no posted lane limit, so the 10 m/s parameter applies
        m = MapModel(drivable=Region([Polygon.axis_rect(0, 0, 200, 14)]))
        tr = linear_trace(20, speed=12.0)
        assert evaluate_rule(RuleId(13), tr, m,
                             PARAMS.replace(v_limit=10.0)) == pytest.approx(4.0)

    def test_lane_limit_overrides_param(self):
        m = straight_map()  # lanes posted at 13.9
        tr = linear_trace(20, speed=15.0)
        got = evaluate_rule(RuleId(13), tr, m, PARAMS.replace(v_limit=99.0))
        assert got == pytest.approx((15.0 - 13.9) ** 2)

    def test_under_limit_is_zero(self, basic_map):
        tr = linear_trace(20, speed=10.0)
        assert score(13, tr, basic_map) == 0.0


class TestObjectiveRules:
    def test_lane_centering_accumulates_offset(self):
        # constant 0.4 m offset for 50 steps: objective 20 m·steps; the
        # short map keeps every other rule satisfied (goal still reached)
        m = straight_map(length=60.0)
        tr = linear_trace(50, y=1.75 + 0.4)
        got = score(15, tr, m)
        assert got == pytest.approx(20.0 - PARAMS.center_mean_dev * 50)
        vec = evaluate_all(tr, m, PARAMS)
        others = {r for r in vec.violated() if r.index != 15}
        assert vec.is_violated(RuleId(15))
        assert not others

    def test_lane_keeping_counts_steps(self, basic_map):
        tr = linear_trace(10, y=3.5)  # straddles two lanes the whole time
        assert score(14, tr, basic_map) == pytest.approx(10.0)

    def test_comfort_jerk(self, basic_map):
        states = []
        for i in range(11):
            ax = 3.0 if i % 2 else -3.0
            states.append(AgentState.make(AgentKind.CAR, float(i), 1.75,
                                          vx=8.0, ax=ax))
        tr = Trace(timestep=0.1, t1=0, ego=tuple(states))
        # |delta a| = 6 per step for 10 steps, allowance 2 m/s^3 * 1 s
        assert score(17, tr, basic_map) == pytest.approx(60.0 - 2.0)

    def test_comfort_accel_means(self, basic_map):
        tr = linear_trace(10)
        assert score(18, tr, basic_map) == pytest.approx(-30.0)
        assert score(19, tr, basic_map) == pytest.approx(-20.0)


class TestGoal:
    def test_reaching_target_zeroes_score(self, basic_map):
        tr = linear_trace(120, x0=5.0, speed=10.0)  # crosses the target box
        assert score(16, tr, basic_map) == 0.0

    def test_unreached_scores_positive(self, basic_map):
        tr = linear_trace(10, x0=5.0, speed=1.0)
        assert score(16, tr, basic_map) > 0.0

    def test_inapplicable_without_target(self):
        m = straight_map(with_target=False)
        tr = linear_trace(10)
        with pytest.raises(RuleInapplicableError):
            score(16, tr, m)
        vec = evaluate_all(tr, m, PARAMS)
        assert RuleId(16) in vec.inapplicable
        assert RuleId(16) not in vec.scores


class TestEvaluateAll:
    def test_empty_road_violates_nothing(self, basic_map):
        tr = linear_trace(105, speed=10.0)  # ends inside the target box
        vec = evaluate_all(tr, basic_map, PARAMS)
        assert not vec.violated()
        assert not vec.inapplicable

    def test_runover_fires_vru_rules(self, basic_map):
        tr = linear_trace(60, x0=0.0, speed=10.0,
                          others=(("p", AgentKind.PEDESTRIAN, 25.0, 1.75, 0, 0),))
        violated = {r.index for r in evaluate_all(tr, basic_map, PARAMS).violated()}
        assert {1, 5, 6, 9}.issubset(violated)

    def test_variant_selection_changes_keys(self, basic_map):
        tr = linear_trace(10)
        vec = evaluate_all(tr, basic_map, PARAMS, variants={Variant.CLEARANCE_SUM})
        keys = {str(r) for r in vec.rule_ids()}
        assert "10:clearance_sum" in keys
        assert "10" not in keys

    def test_conflicting_variants_rejected(self):
        with pytest.raises(ValueError):
            active_variant(10, {Variant.CLEARANCE_SUM, Variant.CLEARANCE_HEADING})


class TestSignConsistency:
    STL_RULES = [RuleId(i) for i in (1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 16)]
    VARIANT_RULES = [RuleId(4, Variant.CORRECT_SIDE_CENTROID),
                     RuleId(10, Variant.CLEARANCE_SUM),
                     RuleId(11, Variant.CLEARANCE_HEADING),
                     RuleId(12, Variant.CLEARANCE_SUM)]

    def test_sample(self, basic_map, rng):
        # the acceptance suite runs 500 traces; a fast slice here
        for _ in range(60):
            tr = random_trace(rng)
            ctx = EvalContext(tr, basic_map, PARAMS)
            for rid in self.STL_RULES + self.VARIANT_RULES:
                s = RULE_DEFS[rid.index].vs(ctx, rid.variant)
                if abs(s) <= 1e-9:
                    continue
                sat = stl.satisfies(stl_formula(rid, ctx), tr, tr.t1)
                assert (s > 0) == (not sat), (rid, s, sat)


class TestRuleId:
    def test_variant_validation(self):
        with pytest.raises(ValueError):
            RuleId(5, Variant.CLEARANCE_SUM)
        with pytest.raises(ValueError):
            RuleId(10, Variant.CORRECT_SIDE_CENTROID)
        assert RuleId.parse("10:clearance_sum").variant is Variant.CLEARANCE_SUM
        assert str(RuleId(4, Variant.CORRECT_SIDE_CENTROID)) == \
            "4:correct_side_centroid"

    def test_rule_ids_for(self):
        ids = rule_ids_for({Variant.CLEARANCE_HEADING})
        by_index = {r.index: r.variant for r in ids}
        assert by_index[10] is Variant.CLEARANCE_HEADING
        assert by_index[4] is Variant.DEFAULT
        assert len(ids) == 19


class TestParamsConfig:
    def test_round_trip(self, tmp_path):
        cfg = RuleConfig(PARAMS.replace(d_vehicle_front=6.0),
                         frozenset({Variant.CLEARANCE_SUM}))
        path = tmp_path / "rules.json"
        dump_rule_config(cfg, path)
        back = load_rule_config(path)
        assert back == cfg

    def test_rejects_nonpositive_thresholds(self):
        with pytest.raises(ValueError):
            RuleParams(d_vru_on=0.0)
        # the acknowledgment acceleration bound is legitimately negative
        RuleParams(a_ack=-2.5)

    def test_rejects_unknown_keys(self):
        with pytest.raises(ValueError):
            RuleParams.from_dict({"no_such_threshold": 1.0})
