"""Acceptance suite: one test per exit criterion, with timing printouts.

Each test enforces its stated tolerances and wall-clock budget and prints
a single pass line; run ``pytest tests/test_acceptance.py -v -s`` to see
them.
"""

import itertools
import json
import math
import random
import time
import warnings

import pytest

from conftest import linear_trace, random_trace, straight_map
from rulebench import stl
from rulebench.rulebook import (
    Comparator,
    HierarchicalRulebook,
    Preference,
    RuleGroup,
    Rulebook,
    default_hierarchy,
    default_rulebook_config,
    error_value,
)
from rulebench.rules import (
    EvalContext,
    RULE_DEFS,
    RuleConfig,
    RuleId,
    RuleParams,
    Variant,
    ViolationVector,
    evaluate_all,
    rule_ids_for,
    stl_formula,
)

BUDGETS = {}


def _finish(criterion: str, t0: float, budget: float, detail: str = "") -> None:
    elapsed = time.perf_counter() - t0
    assert elapsed < budget, f"{criterion} took {elapsed:.1f}s (budget {budget}s)"
    suffix = f" [{detail}]" if detail else ""
    print(f"\n[{criterion}] PASS in {elapsed:.1f}s (budget {budget:.0f}s){suffix}")


def test_criterion_1_error_value_arithmetic():
    """Worked four-objective book: EV exactly 9; all-violated normalizes to 1."""
    t0 = time.perf_counter()
    book = Rulebook(
        nodes=["no_collision", "lane_keeping", "left_clearance", "right_clearance"],
        edges=[("no_collision", "lane_keeping"),
               ("lane_keeping", "left_clearance"),
               ("lane_keeping", "right_clearance")])
    assert book.error_weight("no_collision") == 2 ** 3
    assert book.error_weight("lane_keeping") == 2 ** 2
    assert book.error_weight("left_clearance") == 2 ** 0
    assert book.error_weight("right_clearance") == 2 ** 0

    v = ViolationVector({"no_collision": 1.0, "lane_keeping": -1.0,
                         "left_clearance": -1.0, "right_clearance": 0.5})
    value, _ = error_value(book, v)
    assert value == 9.0

    v_all = ViolationVector({k: 1.0 for k in book.nodes})
    _, norm = error_value(book, v_all)
    assert norm == 1.0

    # the full 19-rule default book normalizes to exactly 1.0 as well
    h = default_hierarchy()
    flat = h.flatten()
    v19 = ViolationVector({r: 1.0 for r in rule_ids_for()})
    _, norm19 = error_value(flat, v19)
    assert norm19 == 1.0
    _finish("criterion 1: error-value arithmetic", t0, 1.0, "EV=9, norm=1.0")


def test_criterion_2_stl_oracle_equivalence():
    """10k random formulas: Boolean semantics equals robustness sign."""
    from test_stl import random_formula

    t0 = time.perf_counter()
    rng = random.Random(20240188)
    checked_sign = 0
    for _ in range(10_000):
        samples = [rng.uniform(-3.0, 3.0) for _ in range(8)]
        phi, _ = random_formula(rng, rng.randint(1, 3), 7)
        rho = stl.robustness(phi, samples, 0)
        assert stl.robustness(stl.Not(phi), samples, 0) == -rho
        sat = stl.satisfies(phi, samples, 0)
        if rho > 0:
            assert sat
            checked_sign += 1
        elif rho < 0:
            assert not sat
            checked_sign += 1
    assert checked_sign > 9000
    _finish("criterion 2: STL oracle equivalence", t0, 30.0,
            f"{checked_sign} nonzero-robustness checks")


def test_criterion_3_rule_stl_sign_consistency():
    """Every STL-definable rule agrees with its formula on 500 random traces."""
    t0 = time.perf_counter()
    m = straight_map()
    params = RuleParams()
    rule_ids = [RuleId(i) for i in (1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 16)]
    rule_ids += [RuleId(4, Variant.CORRECT_SIDE_CENTROID),
                 RuleId(10, Variant.CLEARANCE_SUM),
                 RuleId(11, Variant.CLEARANCE_HEADING),
                 RuleId(12, Variant.CLEARANCE_SUM)]
    rng = random.Random(31337)
    agreements = 0
    for _ in range(500):
        tr = random_trace(rng)
        ctx = EvalContext(tr, m, params)
        for rid in rule_ids:
            score = RULE_DEFS[rid.index].vs(ctx, rid.variant)
            if abs(score) <= 1e-9:
                continue
            sat = stl.satisfies(stl_formula(rid, ctx), tr, tr.t1)
            assert (score > 0) == (not sat), (rid, score, sat)
            agreements += 1
    _finish("criterion 3: rule/STL sign consistency", t0, 120.0,
            f"{agreements} decided rule evaluations")


def test_criterion_4_coreset_properties():
    """Two-car space: 100 picks reach residual <= 2 with full coverage;
    greedy picks verified optimal per step on a small space."""
    from rulebench.scenario import (SpaceConfig, coverage_report, distance,
                                    enumerate_space, select_coreset)

    t0 = time.perf_counter()
    space = enumerate_space(SpaceConfig(2, 0))
    subset = select_coreset(space, 100)
    rep = coverage_report(subset, space)
    assert rep.max_residual_distance <= 2
    assert rep.ego_maneuver_coverage == 1.0
    assert rep.adv_maneuver_coverage == 1.0
    assert rep.adv_relation_coverage == 1.0
    assert rep.pair_coverage == 1.0

    # per-step exhaustive verification on a space under 500 points
    rng = random.Random(5)
    small = sorted(rng.sample(space, 450))
    picks = select_coreset(small, 12)
    assert picks[0] == min(small)
    chosen = [picks[0]]
    for pick in picks[1:]:
        best = max(min(distance(p, s) for s in chosen) for p in small)
        assert min(distance(pick, s) for s in chosen) == best
        chosen.append(pick)
    _finish("criterion 4: coreset properties", t0, 60.0,
            f"residual={rep.max_residual_distance}, space={len(space)}")


def _planted_instance(seed: int):
    from rulebench.prefdata import synthesize_vector_dataset

    rng = random.Random(seed)
    base = HierarchicalRulebook(tuple(default_hierarchy().groups[:4]))
    order = list(range(4))
    rng.shuffle(order)
    planted = HierarchicalRulebook(tuple(base.groups[i] for i in order))
    dataset = synthesize_vector_dataset(rng, planted, rule_ids=planted.rules(),
                                        n_scenarios=10)
    return base, planted, dataset


def test_criterion_5_priority_optimization_oracle():
    """Greedy matches brute force on >= 48/50 planted instances and the
    orderings dominate; adjacent-swap plants converge within 3 sweeps."""
    from rulebench.optimize import brute_force_priority, optimize_priority
    from rulebench.prefdata import agreement, synthesize_vector_dataset

    t0 = time.perf_counter()
    matches = 0
    for seed in range(50):
        base, planted, ds = _planted_instance(seed)
        initial = agreement(base, ds).accuracy
        unrestricted = optimize_priority(base, ds)
        restricted = optimize_priority(base, ds, restricted=True)
        brute = brute_force_priority(base, ds)
        assert brute.iterations == 24  # all 4! permutations examined
        assert unrestricted.accuracy >= restricted.accuracy - 1e-12
        assert restricted.accuracy >= initial - 1e-12
        assert brute.accuracy >= unrestricted.accuracy - 1e-12
        if abs(brute.accuracy - unrestricted.accuracy) < 1e-12:
            matches += 1
    assert matches >= 48, f"greedy matched brute force in only {matches}/50"

    rng = random.Random(77)
    h = default_hierarchy()
    for pos in (1, 2, 4):
        planted = h.swapped(pos, pos + 1)
        ds = synthesize_vector_dataset(rng, planted, n_scenarios=15)
        result = optimize_priority(h, ds)
        assert result.iterations <= 3
        assert result.accuracy == 1.0
    _finish("criterion 5: priority-optimization oracle", t0, 120.0,
            f"greedy==brute in {matches}/50")


def test_criterion_6_parameter_optimization_recovery():
    """Planted 6 m front-clearance threshold recovered from {2,4,6,8};
    tuning never lowers accuracy."""
    from test_optimize import planted_parameter_dataset

    from rulebench.optimize import CandidateGrid, optimize_parameters

    t0 = time.perf_counter()
    config = default_rulebook_config()
    rng = random.Random(2024)
    ds = planted_parameter_dataset(rng, 100, 6.0, config)
    grid = CandidateGrid({"d_vehicle_front": [2.0, 4.0, 6.0, 8.0]})
    result = optimize_parameters(config, ds, grid)
    assert result.config.rule_config.params.d_vehicle_front == 6.0
    assert result.accuracy_trace[-1] >= result.accuracy_trace[0]

    for seed in range(6):
        local = random.Random(seed)
        planted = local.choice([2.0, 4.0, 6.0, 8.0])
        ds = planted_parameter_dataset(local, 30, planted, config)
        res = optimize_parameters(config, ds, grid)
        trace = res.accuracy_trace
        assert all(b >= a - 1e-12 for a, b in zip(trace, trace[1:]))
        assert trace[-1] >= trace[0]
    _finish("criterion 6: parameter-optimization recovery", t0, 60.0,
            "recovered d_vehicle_front=6.0")


def test_criterion_7_bradley_terry_correctness():
    """Closed-form two-item fit, grid-search three-item oracle, monotone MM."""
    import numpy as np

    from rulebench.prefdata import bradley_terry

    t0 = time.perf_counter()
    s = bradley_terry({("a", "b"): 8, ("b", "a"): 2})
    assert abs(s["a"] - 0.8) < 1e-6
    assert abs(s["b"] - 0.2) < 1e-6

    counts = {("a", "b"): 7, ("b", "a"): 3, ("b", "c"): 6, ("c", "b"): 4,
              ("a", "c"): 8, ("c", "a"): 2}
    # the MM loop asserts per-step likelihood monotonicity internally
    s3 = bradley_terry(counts)

    def log_lik(w):
        return sum(n * math.log(w[x] / (w[x] + w[y]))
                   for (x, y), n in counts.items())

    best, best_ll = None, -math.inf
    for wa in np.arange(1e-3, 1.0, 1e-3):
        for wb in np.arange(1e-3, 1.0 - wa, 1e-3):
            wc = 1.0 - wa - wb
            if wc <= 0:
                continue
            ll = log_lik({"a": wa, "b": wb, "c": wc})
            if ll > best_ll:
                best, best_ll = {"a": wa, "b": wb, "c": wc}, ll
    for k in "abc":
        assert abs(s3[k] - best[k]) < 1e-3
    _finish("criterion 7: Bradley-Terry correctness", t0, 10.0)


def test_criterion_8_falsification_effectiveness():
    """Smoke suite x aggressive agent: counterexamples everywhere, every
    applicable rule violated, many distinct combinations, reruns identical."""
    from rulebench.falsify import dump_report, load_suite, run_suite
    from rulebench.sim import make_agent

    t0 = time.perf_counter()
    config = default_rulebook_config()
    suite = load_suite()
    assert len(suite) == 12

    def run_once():
        return run_suite(make_agent("aggressive_baseline"), config, seed=2024,
                         suite=suite)

    report = run_once()
    for rep in report.reports:
        assert rep.ce_ratio > 0.0, f"no counterexamples in {rep.scenario}"
        assert rep.budget == 30
    assert report.cross_suite_violated_pct() == 1.0, \
        f"unviolated rules: {report.summary()['unviolated_rules']}"
    unique_total = sum(rep.unique_violations for rep in report.reports)
    assert unique_total >= 5

    rerun = run_once()
    assert json.dumps(report.summary(), sort_keys=True) == \
        json.dumps(rerun.summary(), sort_keys=True)
    for a, b in zip(report.reports, rerun.reports):
        assert [r.to_json_dict() for r in a.rows] == \
            [r.to_json_dict() for r in b.rows]
    _finish("criterion 8: falsification effectiveness", t0, 300.0,
            f"{unique_total} unique violation sets across the suite")


def test_criterion_9_simulator_determinism():
    """Byte-identical traces; recorded kinematics self-consistent over
    1000 random runs."""
    from rulebench.scenario import AgentSpec, AgentType, Maneuver, Relation, ScenarioSpec
    from rulebench.sim import InstantiationError, instantiate, make_agent, run
    from rulebench.sim.behaviors import ACCEL_MAX
    from rulebench.world import dump_trace

    t0 = time.perf_counter()
    spec = ScenarioSpec(
        "mix", "four_way", Maneuver.GO_STRAIGHT, (
            AgentSpec("car1", AgentType.CAR, Maneuver.LEFT_TURN,
                      Relation.OPPOSING_LANES),
            AgentSpec("ped1", AgentType.PEDESTRIAN, Maneuver.CROSS_STREET,
                      Relation.SIDEWALK),),
        {"EGO_SPEED": (6.0, 11.0), "CAR1_SPEED": (5.0, 10.0),
         "CAR1_DIST": (40.0, 75.0), "PED1_SPEED": (1.0, 2.5),
         "PED1_DIST": (10.0, 40.0)})

    blobs = []
    for attempt in range(2):
        scene = instantiate(spec, {"EGO_SPEED": 9.0, "CAR1_SPEED": 7.0,
                                   "CAR1_DIST": 60.0, "PED1_SPEED": 1.5,
                                   "PED1_DIST": 20.0}, seed=12)
        trace = run(scene, make_agent("rule_based"), 12.0)
        path = f"/tmp/rulebench_det_check_{attempt}.jsonl"
        dump_trace(trace, path)
        with open(path, "rb") as fh:
            blobs.append(fh.read())
    assert blobs[0] == blobs[1]

    rng = random.Random(99)
    runs = 0
    while runs < 1000:
        assignment = {k: rng.uniform(lo, hi)
                      for k, (lo, hi) in spec.parameters.items()}
        try:
            scene = instantiate(spec, assignment, seed=runs)
        except InstantiationError:
            continue
        agent = make_agent("rule_based" if runs % 2 else "aggressive_baseline")
        trace = run(scene, agent, 2.5)
        dt = trace.timestep
        for states in [trace.ego] + [t.states for t in trace.others]:
            for i in range(1, len(states)):
                ax = (states[i].velocity[0] - states[i - 1].velocity[0]) / dt
                ay = (states[i].velocity[1] - states[i - 1].velocity[1]) / dt
                assert abs(ax - states[i].acceleration[0]) <= 1e-6
                assert abs(ay - states[i].acceleration[1]) <= 1e-6
                dx = states[i].position[0] - states[i - 1].position[0]
                dy = states[i].position[1] - states[i - 1].position[1]
                bound = states[i - 1].speed * dt + 0.5 * ACCEL_MAX * dt * dt
                assert math.hypot(dx, dy) <= bound + 1e-9
        runs += 1
    _finish("criterion 9: simulator determinism", t0, 120.0, f"{runs} runs")


def test_criterion_10_alternative_formalization_divergence():
    """Switching clearance max -> sum flips verdicts and deciding rules on a
    200-pair synthetic dataset; the report counts the changes."""
    from rulebench.prefdata import (PairCount, PreferenceDataset, ScenarioData,
                                    TrajectoryEntry, agreement, reason_changes)
    from rulebench.world import AgentKind

    t0 = time.perf_counter()
    rng = random.Random(1001)
    m = straight_map()
    params = RuleParams()

    from rulebench.world import AgentState, AgentTrack, Trace

    def gap_trace(kind: str) -> Trace:
        """Front-gap profiles: sustained shallow deficit, single spike, clear."""
        D = params.d_vehicle_front
        n = 30
        if kind == "sustained":
            gaps = [D - rng.uniform(0.2, 0.5)] * n
        elif kind == "spike":
            deep = rng.randrange(5, n - 5)
            gaps = [D + 2.0 if i != deep else D - rng.uniform(1.0, 2.0)
                    for i in range(n)]
        else:
            gaps = [D + rng.uniform(1.0, 6.0)] * n
        ego_states = tuple(AgentState.make(AgentKind.CAR, 3.0 * 0.1 * i, 1.75,
                                           vx=3.0) for i in range(n))
        lead_states = tuple(
            AgentState.make(AgentKind.CAR, 3.0 * 0.1 * i + 4.5 + gap, 1.75,
                            vx=3.0) for i, gap in enumerate(gaps))
        return Trace(timestep=0.1, t1=0, ego=ego_states,
                     others=(AgentTrack("lead", lead_states),))

    # traces drawn once; only the formalization differs between datasets
    pairs = []
    for i in range(200):
        kinds = (("sustained", "spike") if i % 3 == 0 else
                 (rng.choice(["sustained", "spike", "clear"]),
                  rng.choice(["sustained", "spike", "clear"])))
        pairs.append((gap_trace(kinds[0]), gap_trace(kinds[1])))

    def build_dataset(cfg: RuleConfig) -> PreferenceDataset:
        scenarios = []
        for i, (ta, tb) in enumerate(pairs):
            trajs = (
                TrajectoryEntry("a", vector=evaluate_all(ta, m, cfg.params,
                                                         cfg.variants)),
                TrajectoryEntry("b", vector=evaluate_all(tb, m, cfg.params,
                                                         cfg.variants)),
            )
            scenarios.append(ScenarioData(
                f"s{i}", trajs,
                (PairCount("a", "b", 7), PairCount("b", "a", 3))))
        return PreferenceDataset(tuple(scenarios))

    ds_default = build_dataset(RuleConfig())
    ds_sum = build_dataset(RuleConfig(variants=frozenset({Variant.CLEARANCE_SUM})))

    rep_default = agreement(default_hierarchy(), ds_default)
    rep_sum = agreement(default_hierarchy({Variant.CLEARANCE_SUM}), ds_sum)
    diff = reason_changes(rep_default, rep_sum)
    assert diff["pairs_compared"] == 200
    assert diff["preference_changes"] >= 1
    assert diff["reason_changes"] >= 1
    _finish("criterion 10: alternative-formalization divergence", t0, 60.0,
            f"{diff['preference_changes']} verdicts, "
            f"{diff['reason_changes']} reasons changed")
