"""Labeled preference data: ingestion, Bradley-Terry estimation, agreement.

A dataset is a list of scenarios, each with trajectories (violation
vectors precomputed or recomputable from trace files) and pairwise
annotator counts c(a, b) = number of annotators preferring a over b.
Ground-truth preferences come from Bradley-Terry strengths fitted per
scenario; rulebook agreement is the fraction of humanly-decided pairs
the rulebook ranks the same way.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import warnings
from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Optional

from .rulebook import Comparator, HierarchicalRulebook, Preference, compare
from .rules import RuleConfig, ViolationVector
from .world import MapModel, Trace, load_map, load_trace

DATASET_FORMAT_VERSION = 1


class DegenerateDataWarning(UserWarning):
    pass


@dataclass(frozen=True)
class TrajectoryEntry:
    trajectory_id: str
    vector: Optional[ViolationVector] = None
    trace: Optional[Trace] = None
    trace_file: Optional[str] = None


@dataclass(frozen=True)
class PairCount:
    """c(a, b): annotators preferring trajectory a over trajectory b."""

    a: str
    b: str
    n: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("annotator counts must be >= 0")


@dataclass(frozen=True)
class ScenarioData:
    scenario_id: str
    trajectories: tuple[TrajectoryEntry, ...]
    counts: tuple[PairCount, ...]
    map_model: Optional[MapModel] = None

    def __post_init__(self):
        ids = {t.trajectory_id for t in self.trajectories}
        if len(ids) != len(self.trajectories):
            raise ValueError(f"scenario {self.scenario_id!r} has duplicate trajectory ids")
        for c in self.counts:
            if c.a not in ids or c.b not in ids:
                raise ValueError(
                    f"scenario {self.scenario_id!r}: count references unknown "
                    f"trajectory ({c.a!r}, {c.b!r})")

    def count_of(self, a: str, b: str) -> int:
        return sum(c.n for c in self.counts if c.a == a and c.b == b)

    def pairs(self) -> list[tuple[str, str]]:
        """Unordered trajectory pairs with at least one recorded comparison."""
        seen = []
        for c in self.counts:
            key = tuple(sorted((c.a, c.b)))
            if key not in seen:
                seen.append(key)
        return seen


@dataclass(frozen=True)
class PreferenceDataset:
    scenarios: tuple[ScenarioData, ...]

    def n_pairs(self) -> int:
        return sum(len(s.pairs()) for s in self.scenarios)

    def subset(self, scenario_ids: Iterable[str]) -> "PreferenceDataset":
        wanted = set(scenario_ids)
        return PreferenceDataset(tuple(s for s in self.scenarios
                                       if s.scenario_id in wanted))


# --- Bradley-Terry estimation -------------------------------------------------

def bradley_terry(counts: Mapping[tuple[str, str], int],
                  max_iters: int = 500, tol: float = 1e-10) -> dict[str, float]:
    """Maximum-likelihood strengths from pairwise win counts.

    Standard minorize-maximize iteration; strengths are positive and
    normalized to sum 1. The log-likelihood is asserted non-decreasing
    every step. Items with no comparisons are dropped with a warning;
    items that never win (or never lose) drive strengths to the bound and
    are flagged as degenerate.
    """
    items = sorted({i for pair in counts for i in pair})
    totals = {i: 0 for i in items}
    wins = {i: 0 for i in items}
    for (a, b), n in counts.items():
        if a == b:
            raise ValueError(f"self-comparison for item {a!r}")
        totals[a] += n
        totals[b] += n
        wins[a] += n
    dropped = [i for i in items if totals[i] == 0]
    if dropped:
        warnings.warn(f"items with no comparisons excluded: {dropped}",
                      DegenerateDataWarning, stacklevel=2)
        items = [i for i in items if totals[i] > 0]
    if not items:
        return {}
    if any(wins[i] == 0 or wins[i] == totals[i] for i in items):
        warnings.warn("one-sided counts: some strengths are driven to the bound",
                      DegenerateDataWarning, stacklevel=2)

    # aggregate ordered counts into unordered pair totals
    n_ab: dict[tuple[str, str], int] = {}
    for (a, b), n in counts.items():
        if a in totals and b in totals and (a in items and b in items):
            key = (a, b) if a <= b else (b, a)
            n_ab[key] = n_ab.get(key, 0) + n

    strengths: dict = {}
    for comp in _components(items, n_ab):
        strengths.update(_fit_component(comp, counts, n_ab, wins, max_iters, tol))
    total = sum(strengths.values())
    return {i: strengths[i] / total for i in items}


def _components(items: list, n_ab: Mapping) -> list[list]:
    adj = {i: set() for i in items}
    for (a, b), n in n_ab.items():
        if n > 0:
            adj[a].add(b)
            adj[b].add(a)
    seen: set = set()
    comps = []
    for i in items:
        if i in seen:
            continue
        comp = []
        stack = [i]
        seen.add(i)
        while stack:
            cur = stack.pop()
            comp.append(cur)
            for nxt in adj[cur]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        comps.append(sorted(comp))
    return comps


def _log_likelihood(comp, counts, w) -> float:
    ll = 0.0
    for (a, b), n in counts.items():
        if n > 0 and a in w and b in w:
            ll += n * math.log(max(w[a], 1e-300) / (w[a] + w[b]))
    return ll


def _fit_component(comp, counts, n_ab, wins, max_iters, tol) -> dict:
    if len(comp) == 1:
        return {comp[0]: 1.0}
    w = {i: 1.0 / len(comp) for i in comp}
    prev_ll = _log_likelihood(comp, counts, w)
    for _ in range(max_iters):
        new = {}
        for i in comp:
            denom = 0.0
            for j in comp:
                if j == i:
                    continue
                key = (i, j) if i <= j else (j, i)
                n = n_ab.get(key, 0)
                if n:
                    denom += n / (w[i] + w[j])
            new[i] = wins[i] / denom if denom > 0.0 else w[i]
            if new[i] <= 0.0:
                new[i] = 1e-12
        scale = sum(new.values())
        for i in comp:
            new[i] /= scale
        ll = _log_likelihood(comp, counts, new)
        assert ll >= prev_ll - 1e-9, "MM step decreased the likelihood"
        delta = max(abs(new[i] - w[i]) / max(w[i], 1e-300) for i in comp)
        w = new
        prev_ll = ll
        if delta < tol:
            break
    return {i: w[i] * len(comp) for i in comp}


def scenario_strengths(scenario: ScenarioData, **kwargs) -> dict[str, float]:
    counts = {}
    for c in scenario.counts:
        counts[(c.a, c.b)] = counts.get((c.a, c.b), 0) + c.n
    return bradley_terry(counts, **kwargs)


def ground_truth(dataset: PreferenceDataset) -> dict[tuple[str, str, str], Preference]:
    """Estimated human preference per recorded pair.

    Keys are (scenario_id, a, b) with a < b; the value says whether a or b
    is preferred. Exactly equal strengths give indifferent, never an
    arbitrary pick.
    """
    out = {}
    for sc in dataset.scenarios:
        strengths = scenario_strengths(sc)
        for a, b in sc.pairs():
            sa = strengths.get(a)
            sb = strengths.get(b)
            if sa is None or sb is None:
                continue
            if sa > sb:
                pref = Preference.PREFER_A
            elif sb > sa:
                pref = Preference.PREFER_B
            else:
                pref = Preference.INDIFFERENT
            out[(sc.scenario_id, a, b)] = pref
    return out


# --- rulebook vs human agreement ------------------------------------------------

@dataclass(frozen=True)
class PairOutcome:
    scenario_id: str
    a: str
    b: str
    rulebook: Preference
    deciding_rule: Optional[object]
    human: Preference
    match: Optional[bool]


@dataclass(frozen=True)
class AgreementReport:
    accuracy: float
    outcomes: tuple[PairOutcome, ...]
    n_matched: int
    n_decided: int
    n_skipped: int


def agreement(h: HierarchicalRulebook, dataset: PreferenceDataset,
              vectors: Optional[Mapping] = None,
              indifferent_policy: str = "mismatch",
              eps: float = 1e-6,
              truth: Optional[Mapping] = None) -> AgreementReport:
    """Fraction of humanly-decided pairs the rulebook ranks the same way.

    ``vectors`` may override stored violation vectors, keyed by
    (scenario_id, trajectory_id). Pairs without vectors are skipped with
    a warning. A rulebook 'indifferent' against a decided human preference
    counts as a mismatch by default; pass indifferent_policy="exclude" to
    drop such pairs from the denominator instead. ``truth`` short-circuits
    the Bradley-Terry fit when evaluating many books on one dataset.
    """
    if indifferent_policy not in ("mismatch", "exclude"):
        raise ValueError(f"unknown indifferent_policy {indifferent_policy!r}")
    comparator = Comparator(h)
    if truth is None:
        truth = ground_truth(dataset)
    outcomes = []
    matched = 0
    decided = 0
    skipped = 0
    for sc in dataset.scenarios:
        stored = {t.trajectory_id: t.vector for t in sc.trajectories}
        for a, b in sc.pairs():
            human = truth.get((sc.scenario_id, a, b))
            if human is None:
                continue
            va = _lookup_vector(vectors, stored, sc.scenario_id, a)
            vb = _lookup_vector(vectors, stored, sc.scenario_id, b)
            if va is None or vb is None:
                warnings.warn(
                    f"scenario {sc.scenario_id!r}: missing violation vector for "
                    f"pair ({a!r}, {b!r}); skipped", stacklevel=2)
                skipped += 1
                outcomes.append(PairOutcome(sc.scenario_id, a, b,
                                            Preference.INDIFFERENT, None, human, None))
                continue
            verdict = comparator.compare(va, vb, eps=eps)
            if human is Preference.INDIFFERENT:
                match = None  # human undecided: not counted either way
            elif verdict.verdict is Preference.INDIFFERENT and indifferent_policy == "exclude":
                match = None
            else:
                match = verdict.verdict is human
                decided += 1
                if match:
                    matched += 1
            outcomes.append(PairOutcome(sc.scenario_id, a, b, verdict.verdict,
                                        verdict.deciding_rule, human, match))
    accuracy = matched / decided if decided else 0.0
    return AgreementReport(accuracy, tuple(outcomes), matched, decided, skipped)


def _lookup_vector(vectors, stored, sid, tid):
    if vectors is not None and (sid, tid) in vectors:
        return vectors[(sid, tid)]
    return stored.get(tid)


def reason_changes(base: AgreementReport, other: AgreementReport) -> dict:
    """Count preference and deciding-rule differences between two reports."""
    base_by_pair = {(o.scenario_id, o.a, o.b): o for o in base.outcomes}
    n_pref = 0
    n_reason = 0
    common = 0
    for o in other.outcomes:
        bo = base_by_pair.get((o.scenario_id, o.a, o.b))
        if bo is None:
            continue
        common += 1
        if o.rulebook is not bo.rulebook:
            n_pref += 1
        if o.deciding_rule != bo.deciding_rule:
            n_reason += 1
    return {"pairs_compared": common,
            "preference_changes": n_pref,
            "reason_changes": n_reason}


# --- five-fold split utility ----------------------------------------------------

def kfold_scenario_splits(dataset: PreferenceDataset, k: int, rng) -> list:
    """Split by scenario into k (train, test) dataset pairs."""
    ids = [s.scenario_id for s in dataset.scenarios]
    order = list(ids)
    rng.shuffle(order)
    folds = [order[i::k] for i in range(k)]
    out = []
    for i in range(k):
        test = set(folds[i])
        train = [sid for sid in ids if sid not in test]
        out.append((dataset.subset(train), dataset.subset(test)))
    return out


# --- dataset files ----------------------------------------------------------------

def load_dataset(path, load_traces: bool = False) -> PreferenceDataset:
    base = os.path.dirname(os.path.abspath(path))
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    version = doc.get("format_version")
    if version != DATASET_FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported dataset format_version {version!r}")
    scenarios = []
    for s in doc["scenarios"]:
        map_model = None
        if s.get("map_file"):
            map_model = load_map(os.path.join(base, s["map_file"]))
        trajs = []
        for t in s["trajectories"]:
            trace = None
            if load_traces and t.get("trace_file"):
                trace = load_trace(os.path.join(base, t["trace_file"]))
            trajs.append(TrajectoryEntry(t["id"], trace=trace,
                                         trace_file=t.get("trace_file")))
        counts = tuple(PairCount(c["a"], c["b"], int(c["n"])) for c in s["counts"])
        scenarios.append(ScenarioData(s["id"], tuple(trajs), counts, map_model))
    return PreferenceDataset(tuple(scenarios))


def dump_dataset(dataset: PreferenceDataset, path) -> None:
    doc = {
        "format_version": DATASET_FORMAT_VERSION,
        "scenarios": [
            {
                "id": s.scenario_id,
                "trajectories": [
                    {"id": t.trajectory_id,
                     **({"trace_file": t.trace_file} if t.trace_file else {})}
                    for t in s.trajectories
                ],
                "counts": [{"a": c.a, "b": c.b, "n": c.n} for c in s.counts],
            }
            for s in dataset.scenarios
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=1)
        fh.write("\n")


def rule_config_hash(rule_config: RuleConfig) -> str:
    blob = json.dumps(rule_config.to_json_dict(), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def load_vector_cache(path) -> dict:
    if not os.path.exists(path):
        return {}
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    return {k: ViolationVector.from_json_dict(v) for k, v in doc.items()}


def dump_vector_cache(cache: dict, path) -> None:
    doc = {k: v.to_json_dict() for k, v in sorted(cache.items())}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=1)
        fh.write("\n")


def compute_vectors(dataset: PreferenceDataset, rule_config: RuleConfig,
                    cache: Optional[dict] = None) -> PreferenceDataset:
    """Fill in missing violation vectors by evaluating trajectory traces.

    Requires each affected scenario to carry a map model and each
    trajectory a trace. ``cache`` (mutated in place) memoizes vectors by
    (scenario, trajectory, rule-config hash).
    """
    from .rules import evaluate_all

    chash = rule_config_hash(rule_config)
    out = {}
    for sc in dataset.scenarios:
        for t in sc.trajectories:
            if t.vector is not None:
                continue
            key = f"{sc.scenario_id}/{t.trajectory_id}/{chash}"
            if cache is not None and key in cache:
                out[(sc.scenario_id, t.trajectory_id)] = cache[key]
                continue
            if t.trace is None:
                raise ValueError(
                    f"trajectory {t.trajectory_id!r} in scenario "
                    f"{sc.scenario_id!r} has neither a vector nor a trace")
            if sc.map_model is None:
                raise ValueError(f"scenario {sc.scenario_id!r} has no map model")
            vec = evaluate_all(t.trace, sc.map_model, rule_config.params,
                               rule_config.variants)
            out[(sc.scenario_id, t.trajectory_id)] = vec
            if cache is not None:
                cache[key] = vec
    return with_vectors(dataset, out)


def with_vectors(dataset: PreferenceDataset, vectors: Mapping) -> PreferenceDataset:
    """Copy of the dataset with vectors attached from a (sid, tid) mapping."""
    scenarios = []
    for sc in dataset.scenarios:
        trajs = tuple(
            replace(t, vector=vectors.get((sc.scenario_id, t.trajectory_id), t.vector))
            for t in sc.trajectories)
        scenarios.append(ScenarioData(sc.scenario_id, trajs, sc.counts, sc.map_model))
    return PreferenceDataset(tuple(scenarios))


# --- synthetic data (planted rulebook + annotator noise) ---------------------------

def synthesize_vector_dataset(rng, hierarchy: HierarchicalRulebook,
                              rule_ids=None, n_scenarios: int = 20,
                              trajectories_per_scenario: int = 4,
                              annotators: int = 10,
                              noise: float = 0.0) -> PreferenceDataset:
    """Dataset whose annotator counts follow a planted rulebook.

    Each synthetic trajectory violates one or two rules drawn from a
    single rule group (everything else satisfied with a margin), so cross
    -group comparisons hinge precisely on the planted group order. Each
    annotator votes with the planted verdict, flipping with probability
    ``noise``; indifferent planted verdicts split the vote.
    """
    if rule_ids is None:
        rule_ids = hierarchy.rules()
    rule_ids = tuple(rule_ids)
    comparator = Comparator(hierarchy)
    groups = [g for g in hierarchy.groups if g.members]
    scenarios = []
    for s in range(n_scenarios):
        trajs = []
        for t in range(trajectories_per_scenario):
            group = groups[rng.randrange(len(groups))]
            k = 1 if len(group.members) == 1 or rng.random() < 0.7 else 2
            violated = set(rng.sample(list(group.members), k))
            scores = {}
            for rid in rule_ids:
                if rid in violated:
                    scores[rid] = 0.1 + 4.0 * rng.random()
                else:
                    scores[rid] = -(0.1 + 4.0 * rng.random())
            trajs.append(TrajectoryEntry(f"t{t}", vector=ViolationVector(scores)))
        counts = []
        for i in range(len(trajs)):
            for j in range(i + 1, len(trajs)):
                a, b = trajs[i], trajs[j]
                verdict = comparator.compare(a.vector, b.vector)
                n_a = 0
                for _ in range(annotators):
                    if verdict.verdict is Preference.PREFER_A:
                        vote_a = rng.random() >= noise
                    elif verdict.verdict is Preference.PREFER_B:
                        vote_a = rng.random() < noise
                    else:
                        vote_a = rng.random() < 0.5
                    if vote_a:
                        n_a += 1
                counts.append(PairCount(a.trajectory_id, b.trajectory_id, n_a))
                counts.append(PairCount(b.trajectory_id, a.trajectory_id,
                                        annotators - n_a))
        scenarios.append(ScenarioData(f"s{s}", tuple(trajs), tuple(counts)))
    return PreferenceDataset(tuple(scenarios))
