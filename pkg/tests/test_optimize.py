"""Greedy priority/parameter tuning against the brute-force oracle."""

import random
import warnings

import pytest

from conftest import linear_trace, straight_map
from rulebench.optimize import (
    CandidateGrid,
    brute_force_priority,
    optimize_parameters,
    optimize_priority,
    scenario_specific_priority,
)
from rulebench.prefdata import (
    PairCount,
    PreferenceDataset,
    ScenarioData,
    TrajectoryEntry,
    agreement,
    synthesize_vector_dataset,
)
from rulebench.rulebook import (
    HierarchicalRulebook,
    RulebookConfig,
    default_hierarchy,
    default_rulebook_config,
)
from rulebench.rules import RuleConfig, RuleParams, RuleId, evaluate_all
from rulebench.world import AgentKind


def small_hierarchy(order=None):
    h = default_hierarchy()
    groups = list(h.groups[:4])
    if order:
        groups = [groups[i] for i in order]
    return HierarchicalRulebook(tuple(groups))


class TestOptimizePriority:
    def test_self_planted_converges_immediately(self, rng):
        h = default_hierarchy()
        ds = synthesize_vector_dataset(rng, h, n_scenarios=10)
        result = optimize_priority(h, ds)
        assert result.iterations == 1
        assert result.hierarchy.group_names() == h.group_names()
        assert result.accuracy == 1.0

    def test_recovers_adjacent_swap(self, rng):
        h = default_hierarchy()
        planted = h.swapped(2, 3)
        ds = synthesize_vector_dataset(rng, planted, n_scenarios=15)
        for restricted in (False, True):
            result = optimize_priority(h, ds, restricted=restricted)
            assert result.hierarchy.group_names() == planted.group_names()
            assert result.accuracy == 1.0
            assert result.iterations <= 3

    def test_accuracy_trace_monotone(self, rng):
        h = small_hierarchy()
        planted = small_hierarchy(order=[2, 0, 3, 1])
        ds = synthesize_vector_dataset(rng, planted, n_scenarios=12)
        result = optimize_priority(h, ds)
        trace = result.accuracy_trace
        assert all(b >= a - 1e-12 for a, b in zip(trace, trace[1:]))
        assert result.iterations <= len(h.groups) ** 2

    def test_pinned_group_never_moves(self, rng):
        h = default_hierarchy()
        planted = h.swapped(0, 4)
        ds = synthesize_vector_dataset(rng, planted, n_scenarios=12)
        result = optimize_priority(h, ds, pinned={"safety_critical"})
        assert result.hierarchy.group_names()[0] == "safety_critical"

    def test_unknown_pin_rejected(self, rng):
        h = default_hierarchy()
        ds = synthesize_vector_dataset(rng, h, n_scenarios=2)
        with pytest.raises(ValueError):
            optimize_priority(h, ds, pinned={"nope"})

    def test_empty_dataset_noop(self):
        h = default_hierarchy()
        with pytest.warns(UserWarning, match="empty"):
            result = optimize_priority(h, PreferenceDataset(()))
        assert result.iterations == 0
        assert result.hierarchy is h

    def test_greedy_orderings_dominate(self):
        # unrestricted >= restricted >= initial, and brute force >= greedy
        wins = 0
        for seed in range(20):
            rng = random.Random(seed)
            base = small_hierarchy()
            order = list(range(4))
            rng.shuffle(order)
            planted = small_hierarchy(order)
            ds = synthesize_vector_dataset(rng, planted,
                                           rule_ids=planted.rules(),
                                           n_scenarios=10)
            initial = agreement(base, ds).accuracy
            unrestricted = optimize_priority(base, ds)
            restricted = optimize_priority(base, ds, restricted=True)
            brute = brute_force_priority(base, ds)
            assert unrestricted.accuracy >= restricted.accuracy - 1e-12
            assert restricted.accuracy >= initial - 1e-12
            assert brute.accuracy >= unrestricted.accuracy - 1e-12
            if abs(brute.accuracy - unrestricted.accuracy) < 1e-12:
                wins += 1
        assert wins >= 18

    def test_deterministic(self, rng):
        h = small_hierarchy()
        planted = small_hierarchy(order=[3, 1, 0, 2])
        ds = synthesize_vector_dataset(rng, planted, rule_ids=planted.rules(),
                                       n_scenarios=10)
        r1 = optimize_priority(h, ds)
        r2 = optimize_priority(h, ds)
        assert r1.hierarchy.group_names() == r2.hierarchy.group_names()
        assert r1.accuracy_trace == r2.accuracy_trace


class TestBruteForce:
    def test_single_free_group_is_identity(self, rng):
        h = small_hierarchy()
        ds = synthesize_vector_dataset(rng, h, rule_ids=h.rules(), n_scenarios=5)
        pinned = set(h.group_names()[1:])
        result = brute_force_priority(h, ds, pinned=pinned)
        assert result.accuracy == pytest.approx(agreement(h, ds).accuracy)

    def test_two_free_groups(self, rng):
        h = small_hierarchy()
        planted = small_hierarchy(order=[1, 0, 2, 3])
        ds = synthesize_vector_dataset(rng, planted, rule_ids=planted.rules(),
                                       n_scenarios=8)
        pinned = set(h.group_names()[2:])
        result = brute_force_priority(h, ds, pinned=pinned)
        both = [agreement(h, ds).accuracy,
                agreement(h.swapped(0, 1), ds).accuracy]
        assert result.accuracy == pytest.approx(max(both))

    def test_guard_on_too_many_groups(self):
        groups = tuple(
            HierarchicalRulebook and __import__("rulebench.rulebook",
                                                fromlist=["RuleGroup"]).RuleGroup(
                f"g{i}", (f"r{i}",)) for i in range(9))
        h = HierarchicalRulebook(groups)
        with pytest.raises(ValueError, match="brute-force"):
            brute_force_priority(h, PreferenceDataset(()))


class TestScenarioSpecific:
    def test_per_scenario_books(self, rng):
        h = default_hierarchy()
        ds = synthesize_vector_dataset(rng, h, n_scenarios=4)
        out = scenario_specific_priority(h, ds)
        assert set(out) == {s.scenario_id for s in ds.scenarios}
        for result in out.values():
            assert result.accuracy >= 0.0


def planted_parameter_dataset(rng, n_pairs: int, planted_front: float,
                              base_config: RulebookConfig) -> PreferenceDataset:
    """Trace-backed pairs whose labels follow a rulebook with the planted
    front-clearance threshold.

    Each pair contrasts two front-gap profiles, so the preferred side
    flips depending on where the threshold sits.
    """
    from rulebench.rulebook import compare

    m = straight_map()
    planted_params = base_config.rule_config.params.replace(
        d_vehicle_front=planted_front)
    scenarios = []
    for i in range(n_pairs):
        trajs = []
        for tag in ("a", "b"):
            gap = rng.uniform(1.0, 9.0)
            trace = linear_trace(
                12, x0=0.0, speed=3.0,
                others=(("lead", AgentKind.CAR, 4.5 + gap + 3.0 * 0.1, 1.75,
                         3.0, 0.0),))
            trajs.append(TrajectoryEntry(tag, trace=trace))
        va = evaluate_all(trajs[0].trace, m, planted_params)
        vb = evaluate_all(trajs[1].trace, m, planted_params)
        verdict = compare(base_config.hierarchy, va, vb)
        n_a = {"prefer_a": 10, "prefer_b": 0, "indifferent": 5}[verdict.verdict.value]
        scenarios.append(ScenarioData(
            f"p{i}", tuple(trajs),
            (PairCount("a", "b", n_a), PairCount("b", "a", 10 - n_a)),
            map_model=m))
    return PreferenceDataset(tuple(scenarios))


class TestOptimizeParameters:
    def test_singleton_grid_is_identity(self, rng):
        config = default_rulebook_config()
        ds = planted_parameter_dataset(rng, 20, 6.0, config)
        grid = CandidateGrid({"d_vehicle_front":
                              [config.rule_config.params.d_vehicle_front]})
        result = optimize_parameters(config, ds, grid)
        assert result.config.rule_config.params == config.rule_config.params

    def test_recovers_planted_threshold(self, rng):
        config = default_rulebook_config()
        ds = planted_parameter_dataset(rng, 100, 6.0, config)
        grid = CandidateGrid({"d_vehicle_front": [2.0, 4.0, 6.0, 8.0]})
        result = optimize_parameters(config, ds, grid)
        assert result.config.rule_config.params.d_vehicle_front == 6.0
        assert result.accuracy == 1.0

    def test_accuracy_never_drops(self, rng):
        for seed in range(5):
            local = random.Random(seed)
            config = default_rulebook_config()
            ds = planted_parameter_dataset(local, 30,
                                           local.choice([2.0, 4.0, 6.0, 8.0]),
                                           config)
            grid = CandidateGrid({"d_vehicle_front": [2.0, 4.0, 6.0, 8.0],
                                  "t_vehicle_ttc": [1.0, 2.0, 3.0]})
            result = optimize_parameters(config, ds, grid)
            trace = result.accuracy_trace
            assert all(b >= a - 1e-12 for a, b in zip(trace, trace[1:]))

    def test_priority_structure_untouched(self, rng):
        config = default_rulebook_config()
        ds = planted_parameter_dataset(rng, 10, 6.0, config)
        grid = CandidateGrid({"d_vehicle_front": [2.0, 6.0]})
        result = optimize_parameters(config, ds, grid)
        assert result.config.hierarchy == config.hierarchy

    def test_rejects_unknown_grid_names(self, rng):
        config = default_rulebook_config()
        ds = planted_parameter_dataset(rng, 2, 6.0, config)
        with pytest.raises(ValueError):
            optimize_parameters(config, ds, CandidateGrid({"bogus": [1.0]}))

    def test_grid_requires_candidates(self):
        with pytest.raises(ValueError):
            CandidateGrid({"d_vehicle_front": []})
