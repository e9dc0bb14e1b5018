"""Rule identities, violation vectors, and whole-catalog evaluation."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

from ..world import MapModel, Trace
from .catalog import (
    RULE_DEFS,
    RuleDef,
    RuleInapplicableError,
    Variant,
    VARIANT_RULES,
)
from .context import EvalContext
from .kinematics import (
    ClassifyMode,
    NeighborSets,
    TtcAssumption,
    TTC_HORIZON,
    classify_neighbors,
    time_to_collision,
)
from .params import RuleParams, dump_params, load_params

__all__ = [
    "RULE_DEFS", "RuleDef", "RuleInapplicableError", "Variant", "VARIANT_RULES",
    "EvalContext", "ClassifyMode", "NeighborSets", "TtcAssumption", "TTC_HORIZON",
    "classify_neighbors", "time_to_collision", "RuleParams", "dump_params",
    "load_params", "RuleId", "ViolationVector", "VIOLATION_EPS", "RuleConfig",
    "active_variant", "rule_ids_for", "evaluate_rule", "evaluate_all",
    "stl_formula", "rule_sort_key",
]

# A rule counts as violated when its score exceeds this absolute tolerance.
VIOLATION_EPS = 1e-9


@dataclass(frozen=True)
class RuleId:
    """Catalog index 1..19 plus the active formalization variant."""

    index: int
    variant: Variant = Variant.DEFAULT

    def __post_init__(self):
        if self.index not in RULE_DEFS:
            raise ValueError(f"unknown rule index {self.index}")
        if self.variant is not Variant.DEFAULT:
            allowed = VARIANT_RULES.get(self.variant, frozenset())
            if self.index not in allowed:
                raise ValueError(
                    f"variant {self.variant.value} not valid on rule {self.index}")
        object.__setattr__(self, "_hash", hash((self.index, self.variant)))

    def __hash__(self):  # hot in rulebook reachability sets
        return self._hash

    @property
    def name(self) -> str:
        return RULE_DEFS[self.index].name

    def __str__(self) -> str:
        if self.variant is Variant.DEFAULT:
            return str(self.index)
        return f"{self.index}:{self.variant.value}"

    @classmethod
    def parse(cls, text: str) -> "RuleId":
        part = str(text).split(":")
        index = int(part[0])
        variant = Variant(part[1]) if len(part) > 1 else Variant.DEFAULT
        return cls(index, variant)


def rule_sort_key(rid):
    """Stable ordering for rule keys of mixed types."""
    if isinstance(rid, RuleId):
        return (0, rid.index, rid.variant.value)
    return (1, str(rid), "")


@dataclass(frozen=True)
class ViolationVector:
    """Per-rule scores for one trace; positive score means violated."""

    scores: Mapping
    inapplicable: frozenset = frozenset()

    def __post_init__(self):
        scores = {k: float(v) for k, v in self.scores.items()}
        bad = [k for k, v in scores.items() if v != v or abs(v) == float("inf")]
        if bad:
            raise ValueError(f"non-finite scores for rules {bad}")
        object.__setattr__(self, "scores", scores)

    def rule_ids(self) -> tuple:
        return tuple(sorted(self.scores, key=rule_sort_key))

    def score(self, rid) -> float:
        return self.scores[rid]

    def violated(self, eps: float = VIOLATION_EPS) -> frozenset:
        return frozenset(k for k, v in self.scores.items() if v > eps)

    def is_violated(self, rid, eps: float = VIOLATION_EPS) -> bool:
        return self.scores[rid] > eps

    def to_json_dict(self) -> dict:
        return {
            "scores": {str(k): v for k, v in sorted(self.scores.items(),
                                                    key=lambda kv: rule_sort_key(kv[0]))},
            "inapplicable": sorted(str(k) for k in self.inapplicable),
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "ViolationVector":
        scores = {RuleId.parse(k): float(v) for k, v in doc["scores"].items()}
        inapplicable = frozenset(RuleId.parse(k) for k in doc.get("inapplicable", []))
        return cls(scores, inapplicable)


def active_variant(index: int, variants: Iterable[Variant]) -> Variant:
    """Variant in effect for one rule given the evaluation's variant set."""
    chosen = Variant.DEFAULT
    for v in variants:
        if v is Variant.DEFAULT:
            continue
        if index in VARIANT_RULES[v]:
            if chosen is not Variant.DEFAULT:
                raise ValueError(
                    f"conflicting variants {chosen.value} and {v.value} "
                    f"for rule {index}")
            chosen = v
    return chosen


def rule_ids_for(variants: Iterable[Variant] = ()) -> tuple[RuleId, ...]:
    """All 19 catalog RuleIds with the given variant set applied."""
    variants = tuple(variants)
    return tuple(RuleId(i, active_variant(i, variants)) for i in sorted(RULE_DEFS))


def evaluate_rule(rule_id: RuleId, trace: Trace, map_model: MapModel,
                  params: RuleParams, ctx: Optional[EvalContext] = None) -> float:
    """Violation score of one rule; positive means violated.

    Raises RuleInapplicableError when the map lacks a region the rule
    needs (distinct from a violation).
    """
    rdef = RULE_DEFS[rule_id.index]
    if not rdef.applicable(map_model):
        raise RuleInapplicableError(
            f"rule {rule_id.index} ({rdef.name}) inapplicable on this map")
    if ctx is None:
        ctx = EvalContext(trace, map_model, params)
    return float(rdef.vs(ctx, rule_id.variant))


def stl_formula(rule_id: RuleId, ctx: EvalContext):
    """Temporal-logic formula of an STL-definable rule, over ctx's trace."""
    rdef = RULE_DEFS[rule_id.index]
    if rdef.formula is None:
        raise ValueError(f"rule {rule_id.index} ({rdef.name}) is objective-based")
    return rdef.formula(ctx, rule_id.variant)


def evaluate_all(trace: Trace, map_model: MapModel, params: RuleParams,
                 variants: Iterable[Variant] = ()) -> ViolationVector:
    """One score per catalog rule; inapplicable rules are marked, not failed."""
    variants = tuple(variants)
    ctx = EvalContext(trace, map_model, params)
    scores: dict[RuleId, float] = {}
    inapplicable = set()
    for index in sorted(RULE_DEFS):
        rid = RuleId(index, active_variant(index, variants))
        rdef = RULE_DEFS[index]
        if not rdef.applicable(map_model):
            inapplicable.add(rid)
            continue
        scores[rid] = float(rdef.vs(ctx, rid.variant))
    return ViolationVector(scores, frozenset(inapplicable))


@dataclass(frozen=True)
class RuleConfig:
    """Rule thresholds plus the active variant set; file round-trips losslessly."""

    params: RuleParams = field(default_factory=RuleParams)
    variants: frozenset = frozenset()

    def __post_init__(self):
        for index in VARIANT_RULES.get(Variant.CLEARANCE_SUM, ()):
            active_variant(index, self.variants)  # raises on conflicts

    def to_json_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "variants": sorted(v.value for v in self.variants),
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "RuleConfig":
        return cls(
            params=RuleParams.from_dict(doc.get("params", {})),
            variants=frozenset(Variant(v) for v in doc.get("variants", [])),
        )


def dump_rule_config(config: RuleConfig, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(config.to_json_dict(), fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_rule_config(path) -> RuleConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return RuleConfig.from_json_dict(json.load(fh))
