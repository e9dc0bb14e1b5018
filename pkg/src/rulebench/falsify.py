"""Bandit-guided falsification: sample, simulate, evaluate, adapt.

Each scenario parameter gets an independent UCB1 bandit over equal-width
bins of its declared interval; the reward fed back after every simulated
sample is the trace's normalized error value, so sampling concentrates
where the rulebook hurts most. Reports follow a fixed schema: per-sample
rows plus aggregates (average and maximum normalized error value,
counterexample ratio, violated-rule percentage, and the number of
distinct violated-rule combinations).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Optional

from .rulebook import RulebookConfig, error_value
from .rules import RuleId, evaluate_all
from .scenario import ScenarioSpec
from .sim import InstantiationError, instantiate, run
from .sim.agents import AgentPolicy

DEFAULT_BINS = 5
UCB_EXPLORATION = math.sqrt(2.0)
REPORT_FORMAT_VERSION = 1


@dataclass
class _Arm:
    pulls: int = 0
    total_reward: float = 0.0

    @property
    def mean(self) -> float:
        return self.total_reward / self.pulls if self.pulls else 0.0


class BanditState:
    """Per-parameter UCB1 bandits over equal-width interval bins."""

    def __init__(self, parameters: dict, n_bins: int = DEFAULT_BINS):
        if n_bins < 1:
            raise ValueError("need at least one bin")
        self.n_bins = n_bins
        self.parameters = {name: (float(lo), float(hi))
                           for name, (lo, hi) in sorted(parameters.items())}
        self.arms = {name: [_Arm() for _ in range(n_bins)]
                     for name in self.parameters}

    def _bounds(self, name: str, bin_index: int) -> tuple[float, float]:
        lo, hi = self.parameters[name]
        width = (hi - lo) / self.n_bins
        return lo + bin_index * width, lo + (bin_index + 1) * width

    def select_bin(self, name: str) -> int:
        arms = self.arms[name]
        for i, arm in enumerate(arms):
            if arm.pulls == 0:
                return i
        total = sum(arm.pulls for arm in arms)
        best_i = 0
        best_score = -math.inf
        for i, arm in enumerate(arms):
            score = arm.mean + UCB_EXPLORATION * math.sqrt(math.log(total) / arm.pulls)
            if score > best_score:
                best_score = score
                best_i = i
        return best_i

    def next_assignment(self, rng) -> dict:
        """One value per parameter: UCB1 bin choice, uniform within the bin."""
        out = {}
        for name in self.parameters:
            lo, hi = self.parameters[name]
            if hi <= lo:
                out[name] = lo
                continue
            b = self.select_bin(name)
            blo, bhi = self._bounds(name, b)
            out[name] = rng.uniform(blo, bhi)
        return out

    def update(self, assignment: dict, reward: float) -> None:
        if not 0.0 <= reward <= 1.0:
            raise ValueError(f"reward {reward} outside [0, 1]")
        for name in self.parameters:
            lo, hi = self.parameters[name]
            if hi <= lo:
                continue
            v = float(assignment[name])
            width = (hi - lo) / self.n_bins
            b = min(int((v - lo) / width), self.n_bins - 1) if width > 0 else 0
            arm = self.arms[name][b]
            arm.pulls += 1
            arm.total_reward += reward


@dataclass(frozen=True)
class SampleRow:
    index: int
    assignment: dict
    valid: bool
    error_value: float = 0.0
    normalized_ev: float = 0.0
    violated: tuple = ()
    note: str = ""

    def to_json_dict(self) -> dict:
        return {
            "index": self.index,
            "assignment": {k: self.assignment[k] for k in sorted(self.assignment)},
            "valid": self.valid,
            "error_value": self.error_value,
            "normalized_ev": self.normalized_ev,
            "violated": sorted(str(r) for r in self.violated),
            "note": self.note,
        }


@dataclass(frozen=True)
class FalsificationReport:
    scenario: str
    agent: str
    budget: int
    seed: int
    applicable: tuple
    rows: tuple[SampleRow, ...]

    @property
    def valid_rows(self) -> tuple[SampleRow, ...]:
        return tuple(r for r in self.rows if r.valid)

    @property
    def avg_ev(self) -> float:
        rows = self.valid_rows
        return sum(r.normalized_ev for r in rows) / len(rows) if rows else 0.0

    @property
    def max_ev(self) -> float:
        rows = self.valid_rows
        return max((r.normalized_ev for r in rows), default=0.0)

    @property
    def ce_ratio(self) -> float:
        rows = self.valid_rows
        if not rows:
            return 0.0
        return sum(1 for r in rows if r.violated) / len(rows)

    @property
    def violated_rules(self) -> frozenset:
        return frozenset(r for row in self.valid_rows for r in row.violated)

    @property
    def violated_rules_pct(self) -> float:
        if not self.applicable:
            return 0.0
        return len(self.violated_rules) / len(self.applicable)

    @property
    def unique_violations(self) -> int:
        combos = {frozenset(r.violated) for r in self.valid_rows if r.violated}
        return len(combos)

    def summary(self) -> dict:
        return {
            "scenario": self.scenario,
            "agent": self.agent,
            "budget": self.budget,
            "seed": self.seed,
            "valid_samples": len(self.valid_rows),
            "avg_ev": self.avg_ev,
            "max_ev": self.max_ev,
            "ce_ratio": self.ce_ratio,
            "violated_rules_pct": self.violated_rules_pct,
            "violated_rules": sorted(str(r) for r in self.violated_rules),
            "unique_violations": self.unique_violations,
        }


def falsify(spec: ScenarioSpec, agent: AgentPolicy, config: RulebookConfig,
            budget: int, seed: int, map_model=None, duration: float = 20.0,
            n_bins: int = DEFAULT_BINS) -> FalsificationReport:
    """Run the sample → simulate → evaluate → update loop for one scenario.

    Instantiation failures are recorded as invalid rows, excluded from
    aggregates, and do not update the bandit.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    import random

    rng = random.Random(seed)
    bandit = BanditState(spec.parameters, n_bins=n_bins)
    flat = config.hierarchy.flatten()
    rows = []
    applicable: tuple = ()
    for i in range(budget):
        assignment = bandit.next_assignment(rng)
        try:
            scene = instantiate(spec, assignment, map_model, seed=seed + i)
        except InstantiationError as exc:
            rows.append(SampleRow(i, assignment, valid=False, note=str(exc)))
            continue
        trace = run(scene, agent, duration)
        vec = evaluate_all(trace, scene.map_model, config.rule_config.params,
                           config.rule_config.variants)
        if not applicable:
            applicable = tuple(sorted((r for r in vec.scores
                                       if isinstance(r, RuleId)),
                                      key=lambda r: (r.index, r.variant.value)))
        value, norm = error_value(flat, vec)
        rows.append(SampleRow(i, assignment, valid=True, error_value=value,
                              normalized_ev=norm,
                              violated=tuple(sorted(
                                  vec.violated(),
                                  key=lambda r: (r.index, r.variant.value)))))
        bandit.update(assignment, norm)
    return FalsificationReport(
        scenario=spec.name, agent=getattr(agent, "name", type(agent).__name__),
        budget=budget, seed=seed, applicable=applicable, rows=tuple(rows))


@dataclass(frozen=True)
class SuiteReport:
    reports: tuple[FalsificationReport, ...]

    def union_violated(self) -> frozenset:
        return frozenset(r for rep in self.reports for r in rep.violated_rules)

    def union_applicable(self) -> frozenset:
        return frozenset(r for rep in self.reports for r in rep.applicable)

    def cross_suite_violated_pct(self) -> float:
        applicable = self.union_applicable()
        if not applicable:
            return 0.0
        return len(self.union_violated()) / len(applicable)

    def summary(self) -> dict:
        return {
            "scenarios": len(self.reports),
            "per_scenario": [rep.summary() for rep in self.reports],
            "cross_suite_violated_pct": self.cross_suite_violated_pct(),
            "unviolated_rules": sorted(
                str(r) for r in self.union_applicable() - self.union_violated()),
        }


def suite_report(reports: Iterable[FalsificationReport]) -> SuiteReport:
    reports = tuple(reports)
    if not reports:
        raise ValueError("need at least one report")
    return SuiteReport(reports)


# --- report files ---------------------------------------------------------------

def dump_report(report: FalsificationReport, rows_path, summary_path) -> None:
    """Line-delimited per-sample rows plus a summary JSON document."""
    with open(rows_path, "w", encoding="utf-8") as fh:
        header = {"format_version": REPORT_FORMAT_VERSION,
                  "scenario": report.scenario, "agent": report.agent,
                  "budget": report.budget, "seed": report.seed,
                  "applicable": sorted(str(r) for r in report.applicable)}
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for row in report.rows:
            fh.write(json.dumps(row.to_json_dict(), sort_keys=True) + "\n")
    with open(summary_path, "w", encoding="utf-8") as fh:
        json.dump(report.summary(), fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_report(rows_path) -> FalsificationReport:
    with open(rows_path, "r", encoding="utf-8") as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    header = json.loads(lines[0])
    if header.get("format_version") != REPORT_FORMAT_VERSION:
        raise ValueError(f"unsupported report format_version "
                         f"{header.get('format_version')!r}")
    rows = []
    for ln in lines[1:]:
        doc = json.loads(ln)
        rows.append(SampleRow(
            index=doc["index"], assignment=doc["assignment"],
            valid=doc["valid"], error_value=doc["error_value"],
            normalized_ev=doc["normalized_ev"],
            violated=tuple(RuleId.parse(s) for s in doc["violated"]),
            note=doc.get("note", "")))
    return FalsificationReport(
        scenario=header["scenario"], agent=header["agent"],
        budget=header["budget"], seed=header["seed"],
        applicable=tuple(RuleId.parse(s) for s in header["applicable"]),
        rows=tuple(rows))


# --- bundled scenario suites ----------------------------------------------------

def load_suite(path=None) -> list[dict]:
    """Scenario entries [{spec, duration, budget}, ...] from a suite manifest.

    With no path, loads the bundled 12-scenario smoke suite.
    """
    import os

    from .scenario import load_scenario

    if path is None:
        base = os.path.join(os.path.dirname(__file__), "data", "smoke_suite")
        path = os.path.join(base, "suite.json")
    else:
        base = os.path.dirname(os.path.abspath(path))
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format_version") != 1:
        raise ValueError(f"unsupported suite format_version "
                         f"{doc.get('format_version')!r}")
    out = []
    for entry in doc["scenarios"]:
        spec = load_scenario(os.path.join(base, entry["spec"]))
        out.append({"spec": spec, "duration": float(entry.get("duration", 20.0)),
                    "budget": int(entry.get("budget", 30))})
    return out


def run_suite(agent: AgentPolicy, config: RulebookConfig, seed: int,
              suite: Optional[list] = None,
              budget_override: Optional[int] = None) -> SuiteReport:
    """Falsify every scenario of a suite with per-scenario derived seeds."""
    if suite is None:
        suite = load_suite()
    reports = []
    for i, entry in enumerate(suite):
        budget = budget_override or entry["budget"]
        reports.append(falsify(entry["spec"], agent, config, budget,
                               seed=seed + 1000 * i,
                               duration=entry["duration"]))
    return suite_report(reports)
