"""Data-driven rulebook tuning against labeled preference data.

Two greedy procedures: priority optimization swaps rule-group positions
(optionally only adjacent ones) committing the single best improving swap
per sweep until a full sweep finds none; parameter optimization walks the
rules in topological priority order and greedily picks each tunable
threshold from a finite candidate grid. A brute-force permutation search
doubles as the test oracle for the first.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, replace
from typing import Iterable, Mapping

from .prefdata import PreferenceDataset, agreement, ground_truth, with_vectors
from .rulebook import HierarchicalRulebook, RulebookConfig
from .rules import RuleId, evaluate_rule

# Parameters each catalog rule owns; topological order decides tuning order.
RULE_PARAMETERS: dict[int, tuple[str, ...]] = {
    5: ("t_vru_ttc",),
    6: ("t_ack", "v_ack", "d_ack", "a_ack"),
    7: ("t_vehicle_ttc",),
    8: ("d_vru_off",),
    9: ("d_vru_on",),
    10: ("d_vehicle_front",),
    11: ("d_vehicle_left",),
    12: ("d_vehicle_right",),
    13: ("v_limit",),
    14: ("lane_keep_max_steps",),
    15: ("center_mean_dev",),
    17: ("jerk_mean",),
    18: ("accel_long_mean",),
    19: ("accel_lat_mean",),
}

MAX_BRUTE_FORCE_GROUPS = 8


@dataclass(frozen=True)
class CandidateGrid:
    """Finite candidate values per tunable parameter name."""

    values: Mapping[str, tuple[float, ...]]

    def __init__(self, values: Mapping[str, Iterable[float]]):
        vals = {}
        for name, cands in values.items():
            cands = tuple(float(c) for c in cands)
            if not cands:
                raise ValueError(f"empty candidate list for parameter {name!r}")
            vals[name] = cands
        object.__setattr__(self, "values", vals)

    def candidates(self, name: str, current: float) -> tuple[float, ...]:
        """Candidate list with the current value guaranteed present (first)."""
        cands = self.values[name]
        if current in cands:
            return cands
        return (current,) + cands


@dataclass(frozen=True)
class PriorityResult:
    hierarchy: HierarchicalRulebook
    iterations: int
    accuracy_trace: tuple[float, ...]
    log: tuple[dict, ...] = ()

    @property
    def accuracy(self) -> float:
        return self.accuracy_trace[-1]


def optimize_priority(b0: HierarchicalRulebook, dataset: PreferenceDataset,
                      restricted: bool = False,
                      pinned: Iterable[str] = ()) -> PriorityResult:
    """Greedy best-swap search over rule-group positions.

    Each sweep evaluates every candidate pair swap (adjacent pairs only
    when restricted) and commits the single best strictly-improving one;
    the search stops when a full sweep improves nothing. Pinned groups
    never move. Ties between equally good swaps resolve to the
    lexicographically smallest (i, j).
    """
    pinned = frozenset(pinned)
    unknown = pinned - set(b0.group_names())
    if unknown:
        raise ValueError(f"pinned groups not in rulebook: {sorted(unknown)}")
    if dataset.n_pairs() == 0:
        warnings.warn("empty preference dataset: priority optimization is a no-op",
                      stacklevel=2)
        return PriorityResult(b0, 0, (0.0,))
    truth = ground_truth(dataset)
    free = [i for i, name in enumerate(b0.group_names()) if name not in pinned]
    if len(free) < 2:
        acc = agreement(b0, dataset, truth=truth).accuracy
        return PriorityResult(b0, 1, (acc, acc))

    current = b0
    acc = agreement(current, dataset, truth=truth).accuracy
    trace = [acc]
    log = []
    iterations = 0
    converged = False
    while not converged:
        iterations += 1
        converged = True
        best = current
        best_acc = acc
        best_swap = None
        positions = [i for i, name in enumerate(current.group_names())
                     if name not in pinned]
        for ai in range(len(positions)):
            for bi in range(ai + 1, len(positions)):
                i, j = positions[ai], positions[bi]
                if restricted and j != i + 1:
                    continue
                candidate = current.swapped(i, j)
                cand_acc = agreement(candidate, dataset, truth=truth).accuracy
                log.append({"iteration": iterations, "swap": [i, j],
                            "accuracy": cand_acc})
                if cand_acc > best_acc:
                    best = candidate
                    best_acc = cand_acc
                    best_swap = (i, j)
                    converged = False
        current = best
        acc = best_acc
        trace.append(acc)
        if best_swap is not None:
            log.append({"iteration": iterations, "committed": list(best_swap),
                        "accuracy": acc})
    return PriorityResult(current, iterations, tuple(trace), tuple(log))


def brute_force_priority(b0: HierarchicalRulebook, dataset: PreferenceDataset,
                         pinned: Iterable[str] = ()) -> PriorityResult:
    """Exhaustive search over all orderings of the unpinned groups."""
    pinned = frozenset(pinned)
    names = b0.group_names()
    free_pos = [i for i, name in enumerate(names) if name not in pinned]
    if len(free_pos) > MAX_BRUTE_FORCE_GROUPS:
        raise ValueError(
            f"{len(free_pos)} free groups exceed the brute-force guard "
            f"({MAX_BRUTE_FORCE_GROUPS})")
    groups = list(b0.groups)
    free_groups = [groups[i] for i in free_pos]
    best = None
    best_acc = -1.0
    n_perms = 0
    truth = ground_truth(dataset)
    for perm in itertools.permutations(free_groups):
        arranged = list(groups)
        for pos, g in zip(free_pos, perm):
            arranged[pos] = g
        candidate = HierarchicalRulebook(tuple(arranged), b0.group_edges)
        acc = agreement(candidate, dataset, truth=truth).accuracy
        n_perms += 1
        if acc > best_acc:
            best = candidate
            best_acc = acc
    return PriorityResult(best, n_perms, (best_acc,))


def scenario_specific_priority(b0: HierarchicalRulebook, dataset: PreferenceDataset,
                               restricted: bool = False,
                               pinned: Iterable[str] = ()) -> dict[str, PriorityResult]:
    """One optimized rulebook per scenario."""
    out = {}
    for sc in dataset.scenarios:
        sub = dataset.subset([sc.scenario_id])
        out[sc.scenario_id] = optimize_priority(b0, sub, restricted, pinned)
    return out


@dataclass(frozen=True)
class ParameterResult:
    config: RulebookConfig
    accuracy_trace: tuple[float, ...]
    log: tuple[dict, ...] = ()

    @property
    def accuracy(self) -> float:
        return self.accuracy_trace[-1]


def optimize_parameters(config: RulebookConfig, dataset: PreferenceDataset,
                        grid: CandidateGrid) -> ParameterResult:
    """Greedy threshold tuning in topological priority order.

    Rules are visited top priority first; for each tunable parameter the
    candidate maximizing agreement is committed before moving on (ties
    keep the current value). Only the tuned rule's scores are recomputed,
    so the dataset must carry traces and maps for its trajectories.
    """
    grid_names = set(grid.values)
    known = {p for names in RULE_PARAMETERS.values() for p in names}
    unknown = grid_names - known
    if unknown:
        raise ValueError(f"grid names no rule parameter: {sorted(unknown)}")
    book_rules = {r.index for r in config.hierarchy.rules() if isinstance(r, RuleId)}
    outside = {name for name in grid_names
               if not any(name in RULE_PARAMETERS.get(i, ()) for i in book_rules)}
    if outside:
        raise ValueError(
            f"grid tunes parameters of rules outside the rulebook: {sorted(outside)}")

    params = config.rule_config.params
    variants = config.rule_config.variants
    base = with_vectors(dataset, _evaluated_vectors(dataset, config))
    truth = ground_truth(base)
    acc = agreement(config.hierarchy, base, truth=truth).accuracy
    trace = [acc]
    log = []

    flat = config.hierarchy.flatten()
    topo = [r for level in flat.levels() for r in level]
    for rid in topo:
        if not isinstance(rid, RuleId):
            continue
        names = [n for n in RULE_PARAMETERS.get(rid.index, ()) if n in grid_names]
        for name in names:
            current = getattr(params, name)
            best_val = current
            best_acc = acc
            best_vectors = None
            for cand in grid.candidates(name, current):
                if cand == current:
                    continue
                trial_params = params.replace(**{name: cand})
                trial_vectors = _patch_rule_scores(base, rid, trial_params, variants)
                cand_acc = agreement(config.hierarchy,
                                     with_vectors(base, trial_vectors),
                                     truth=truth).accuracy
                log.append({"rule": str(rid), "parameter": name,
                            "candidate": cand, "accuracy": cand_acc})
                if cand_acc > best_acc:
                    best_acc = cand_acc
                    best_val = cand
                    best_vectors = trial_vectors
            if best_val != current:
                params = params.replace(**{name: best_val})
                base = with_vectors(base, best_vectors)
                acc = best_acc
            log.append({"rule": str(rid), "parameter": name,
                        "committed": best_val, "accuracy": acc})
            trace.append(acc)

    tuned = RulebookConfig(config.hierarchy,
                           replace(config.rule_config, params=params))
    return ParameterResult(tuned, tuple(trace), tuple(log))


def _evaluated_vectors(dataset: PreferenceDataset, config: RulebookConfig) -> dict:
    from .rules import evaluate_all

    out = {}
    for sc in dataset.scenarios:
        for t in sc.trajectories:
            if t.vector is not None:
                out[(sc.scenario_id, t.trajectory_id)] = t.vector
                continue
            if t.trace is None or sc.map_model is None:
                raise ValueError(
                    f"trajectory {t.trajectory_id!r} in scenario {sc.scenario_id!r} "
                    "needs a trace and map for parameter tuning")
            out[(sc.scenario_id, t.trajectory_id)] = evaluate_all(
                t.trace, sc.map_model, config.rule_config.params,
                config.rule_config.variants)
    return out


def _patch_rule_scores(dataset: PreferenceDataset, rid: RuleId, trial_params,
                       variants) -> dict:
    """Vectors with one rule's scores recomputed under trial parameters."""
    out = {}
    for sc in dataset.scenarios:
        for t in sc.trajectories:
            vec = t.vector
            if vec is None or rid not in vec.scores:
                continue
            if t.trace is None or sc.map_model is None:
                raise ValueError(
                    f"trajectory {t.trajectory_id!r} in scenario {sc.scenario_id!r} "
                    "needs a trace and map for parameter tuning")
            score = evaluate_rule(rid, t.trace, sc.map_model, trial_params)
            scores = dict(vec.scores)
            scores[rid] = score
            from .rules import ViolationVector

            out[(sc.scenario_id, t.trajectory_id)] = ViolationVector(
                scores, vec.inapplicable)
    return out
