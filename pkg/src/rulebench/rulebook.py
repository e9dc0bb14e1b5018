"""Prioritized rulebooks: error weights, error values, and trajectory comparison.

A rulebook is a set of rule keys plus directed priority edges (higher →
lower); its transitive closure is a preorder whose strongly connected
components form equal-priority classes. A hierarchical rulebook organizes
rules into ordered groups: every rule of a higher group dominates every
rule of a lower group, and intra-group edges refine priorities inside a
group.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .rules import (
    RuleConfig,
    RuleId,
    Variant,
    VIOLATION_EPS,
    ViolationVector,
    rule_ids_for,
    rule_sort_key,
)

RULEBOOK_FORMAT_VERSION = 1


class StructuralError(ValueError):
    """Malformed rulebook structure (duplicate members, unknown nodes...)."""


class ComparisonError(ValueError):
    """Violation vectors do not cover a common rule set."""


class UndefinedNormalizationError(ZeroDivisionError):
    """No applicable rules: the normalized error value is undefined."""


@dataclass(frozen=True)
class Rulebook:
    """Rule keys with directed priority edges (higher first)."""

    nodes: frozenset
    edges: frozenset = frozenset()

    def __init__(self, nodes: Iterable, edges: Iterable = ()):
        nodes = frozenset(nodes)
        edges = frozenset((h, l) for h, l in edges)
        for h, l in edges:
            if h not in nodes or l not in nodes:
                raise StructuralError(f"edge ({h}, {l}) references unknown rule")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", edges)

    def _reach(self) -> dict:
        """node -> set of nodes reachable through priority edges."""
        succ: dict = {n: set() for n in self.nodes}
        for h, l in self.edges:
            succ[h].add(l)
        reach: dict = {}
        order = sorted(self.nodes, key=rule_sort_key)
        for n in order:
            seen = set()
            stack = [n]
            while stack:
                cur = stack.pop()
                for nxt in succ[cur]:
                    if nxt not in seen:
                        seen.add(nxt)
                        stack.append(nxt)
            reach[n] = seen
        return reach

    def strictly_below(self, r) -> frozenset:
        """Rules with strictly lower priority than r (mutual edges = equal)."""
        if r not in self.nodes:
            raise StructuralError(f"unknown rule {r!r}")
        reach = self._reach()
        return frozenset(s for s in reach[r] if r not in reach[s])

    def error_weight(self, r) -> int:
        """2 to the number of rules strictly below r."""
        return 2 ** len(self.strictly_below(r))

    def weights(self) -> dict:
        reach = self._reach()
        out = {}
        for r in self.nodes:
            m = sum(1 for s in reach[r] if r not in reach[s])
            out[r] = 2 ** m
        return out

    def levels(self) -> list:
        """Priority levels: rules grouped by longest strict-domination depth.

        Returned highest priority first. Rules in one equal-priority class
        share a level.
        """
        reach = self._reach()
        strict_pred: dict = {n: set() for n in self.nodes}
        for h in self.nodes:
            for l in reach[h]:
                if h not in reach[l]:
                    strict_pred[l].add(h)
        depth: dict = {}

        def depth_of(n, trail=()):
            if n in depth:
                return depth[n]
            if n in trail:
                raise StructuralError("cycle across distinct priority classes")
            d = 0
            for p in strict_pred[n]:
                d = max(d, depth_of(p, trail + (n,)) + 1)
            depth[n] = d
            return d

        for n in self.nodes:
            depth_of(n)
        by_depth: dict = {}
        for n, d in depth.items():
            by_depth.setdefault(d, []).append(n)
        return [sorted(by_depth[d], key=rule_sort_key) for d in sorted(by_depth)]


@dataclass(frozen=True)
class RuleGroup:
    name: str
    members: tuple
    intra_edges: tuple = ()

    def __init__(self, name: str, members: Iterable, intra_edges: Iterable = ()):
        members = tuple(members)
        intra_edges = tuple((h, l) for h, l in intra_edges)
        mset = set(members)
        if len(mset) != len(members):
            raise StructuralError(f"group {name!r} lists a rule twice")
        for h, l in intra_edges:
            if h not in mset or l not in mset:
                raise StructuralError(
                    f"group {name!r} intra edge ({h}, {l}) leaves the group")
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "members", members)
        object.__setattr__(self, "intra_edges", intra_edges)


@dataclass(frozen=True)
class HierarchicalRulebook:
    """Ordered rule groups; higher groups dominate lower ones wholesale.

    With ``group_edges`` unset, the listed order is a strict total order.
    An explicit edge list makes the inter-group relation a partial order.
    """

    groups: tuple[RuleGroup, ...]
    group_edges: Optional[tuple] = None

    def __init__(self, groups: Iterable[RuleGroup], group_edges=None):
        groups = tuple(groups)
        seen: dict = {}
        names = set()
        for g in groups:
            if g.name in names:
                raise StructuralError(f"duplicate group name {g.name!r}")
            names.add(g.name)
            for r in g.members:
                if r in seen:
                    raise StructuralError(
                        f"rule {r!r} appears in groups {seen[r]!r} and {g.name!r}")
                seen[r] = g.name
        if group_edges is not None:
            group_edges = tuple((h, l) for h, l in group_edges)
            for h, l in group_edges:
                if h not in names or l not in names:
                    raise StructuralError(f"group edge ({h}, {l}) names unknown group")
        object.__setattr__(self, "groups", groups)
        object.__setattr__(self, "group_edges", group_edges)

    def group_names(self) -> tuple[str, ...]:
        return tuple(g.name for g in self.groups)

    def rules(self) -> tuple:
        out = []
        for g in self.groups:
            out.extend(g.members)
        return tuple(out)

    def _dominations(self) -> set:
        """Strict (higher_group_index, lower_group_index) pairs."""
        n = len(self.groups)
        if self.group_edges is None:
            return {(i, j) for i in range(n) for j in range(n) if i < j}
        idx = {g.name: i for i, g in enumerate(self.groups)}
        direct = {(idx[h], idx[l]) for h, l in self.group_edges}
        # transitive closure
        closed = set(direct)
        changed = True
        while changed:
            changed = False
            for a, b in list(closed):
                for c, d in list(closed):
                    if b == c and (a, d) not in closed:
                        closed.add((a, d))
                        changed = True
        for a, b in closed:
            if (b, a) in closed:
                raise StructuralError("cyclic inter-group ordering")
        return closed

    def flatten(self) -> Rulebook:
        """Rule-level book: group dominations expanded to rule pairs."""
        nodes = self.rules()
        edges = []
        for g in self.groups:
            edges.extend(g.intra_edges)
        for i, j in self._dominations():
            for hi in self.groups[i].members:
                for lo in self.groups[j].members:
                    edges.append((hi, lo))
        return Rulebook(nodes, edges)

    def swapped(self, i: int, j: int) -> "HierarchicalRulebook":
        """New hierarchy with groups at positions i and j exchanged."""
        groups = list(self.groups)
        groups[i], groups[j] = groups[j], groups[i]
        return HierarchicalRulebook(groups, self.group_edges)


class Preference(enum.Enum):
    PREFER_A = "prefer_a"
    PREFER_B = "prefer_b"
    INDIFFERENT = "indifferent"


@dataclass(frozen=True)
class PreferenceVerdict:
    verdict: Preference
    deciding_rule: Optional[object] = None

    def __post_init__(self):
        has_rule = self.deciding_rule is not None
        if (self.verdict is Preference.INDIFFERENT) == has_rule:
            raise ValueError("deciding_rule present iff a preference was decided")


def flatten(h: HierarchicalRulebook) -> Rulebook:
    return h.flatten()


def error_weight(b: Rulebook, r) -> int:
    return b.error_weight(r)


def error_value(b: Rulebook, v: ViolationVector,
                eps: float = VIOLATION_EPS) -> tuple[float, float]:
    """Sum of error weights of violated rules, plus its [0, 1] normalization.

    Rules absent from the vector's scores (inapplicable) are excluded from
    both the numerator and the normalizer.
    """
    weights = b.weights()
    applicable = [r for r in b.nodes if r in v.scores]
    if not applicable:
        raise UndefinedNormalizationError("no applicable rules to normalize over")
    total = sum(weights[r] for r in applicable)
    value = sum(weights[r] for r in applicable if v.scores[r] > eps)
    return float(value), float(value) / float(total)


class Comparator:
    """Reusable pairwise comparison bound to one hierarchy.

    Flattening, weights, and priority levels are computed once; use this
    when ranking many trajectory pairs under the same book.
    """

    def __init__(self, h: HierarchicalRulebook):
        self.book = h.flatten()
        self.weights = self.book.weights()
        self.levels = self.book.levels()

    def compare(self, va: ViolationVector, vb: ViolationVector,
                eps: float = 1e-6) -> PreferenceVerdict:
        if frozenset(va.scores) != frozenset(vb.scores):
            raise ComparisonError("violation vectors cover different rule sets")
        weights = self.weights
        for level in self.levels:
            rules = [r for r in level if r in va.scores]
            if not rules:
                continue
            ca = sum(1 for r in rules if va.scores[r] > VIOLATION_EPS)
            cb = sum(1 for r in rules if vb.scores[r] > VIOLATION_EPS)
            if ca != cb:
                differing = [r for r in rules
                             if (va.scores[r] > VIOLATION_EPS)
                             != (vb.scores[r] > VIOLATION_EPS)]
                reason = min(differing, key=lambda r: (-weights[r], rule_sort_key(r)))
                winner = Preference.PREFER_A if ca < cb else Preference.PREFER_B
                return PreferenceVerdict(winner, reason)
            sa = sum(max(va.scores[r], 0.0) for r in rules)
            sb = sum(max(vb.scores[r], 0.0) for r in rules)
            if abs(sa - sb) > eps:
                differing = [r for r in rules
                             if abs(max(va.scores[r], 0.0)
                                    - max(vb.scores[r], 0.0)) > eps]
                if not differing:
                    differing = rules
                reason = min(differing, key=lambda r: (-weights[r], rule_sort_key(r)))
                winner = Preference.PREFER_A if sa < sb else Preference.PREFER_B
                return PreferenceVerdict(winner, reason)
        return PreferenceVerdict(Preference.INDIFFERENT)


def compare(h: HierarchicalRulebook, va: ViolationVector, vb: ViolationVector,
            eps: float = 1e-6) -> PreferenceVerdict:
    """Preference between two trajectories' violation vectors.

    Walks the flattened book's priority levels from the top. At each level
    the violated-rule counts are compared first, then the summed positive
    scores; the first difference beyond ``eps`` decides, and the
    highest-weight differing rule at that level is reported as the reason.
    """
    return Comparator(h).compare(va, vb, eps)


# --- default catalog hierarchy ----------------------------------------------

def default_hierarchy(variants: Iterable[Variant] = ()) -> HierarchicalRulebook:
    """Default grouping of the 19-rule catalog.

    VRU-related rules outrank their vehicle counterparts inside a group;
    groups are otherwise flat. Order and membership are plain data, free
    to override via config files.
    """
    ids = {r.index: r for r in rule_ids_for(variants)}

    def g(name, members, intra=()):
        return RuleGroup(name, tuple(ids[i] for i in members),
                         tuple((ids[h], ids[l]) for h, l in intra))

    return HierarchicalRulebook((
        g("safety_critical", (1, 2), ((1, 2),)),
        g("road_compliance", (3, 4, 13)),
        g("safety_enhancing", (8, 9, 10, 11, 12),
          ((8, 10), (8, 11), (8, 12), (9, 10), (9, 11), (9, 12))),
        g("social_interpretability", (14, 15)),
        g("precautionary", (5, 6, 7),
          ((5, 7), (6, 7))),
        g("progress", (16,)),
        g("comfort", (17, 18, 19)),
    ))


# --- config file round trip ---------------------------------------------------

def _rule_key_str(r) -> str:
    return str(r)


def _parse_rule_key(s: str):
    try:
        return RuleId.parse(s)
    except (ValueError, KeyError):
        return s


@dataclass(frozen=True)
class RulebookConfig:
    """Hierarchy plus rule thresholds/variants: the full evaluation config."""

    hierarchy: HierarchicalRulebook
    rule_config: RuleConfig = field(default_factory=RuleConfig)

    def to_json_dict(self) -> dict:
        doc = {
            "format_version": RULEBOOK_FORMAT_VERSION,
            "groups": [
                {
                    "name": g.name,
                    "rules": [_rule_key_str(r) for r in g.members],
                    "edges": [[_rule_key_str(h), _rule_key_str(l)]
                              for h, l in g.intra_edges],
                }
                for g in self.hierarchy.groups
            ],
            "group_order": ("listed" if self.hierarchy.group_edges is None
                            else [[h, l] for h, l in self.hierarchy.group_edges]),
            "rule_config": self.rule_config.to_json_dict(),
        }
        return doc

    @classmethod
    def from_json_dict(cls, doc: dict) -> "RulebookConfig":
        version = doc.get("format_version")
        if version != RULEBOOK_FORMAT_VERSION:
            raise ValueError(f"unsupported rulebook format_version {version!r}")
        groups = tuple(
            RuleGroup(
                g["name"],
                tuple(_parse_rule_key(r) for r in g["rules"]),
                tuple((_parse_rule_key(h), _parse_rule_key(l))
                      for h, l in g.get("edges", [])),
            )
            for g in doc["groups"]
        )
        order = doc.get("group_order", "listed")
        group_edges = None if order == "listed" else tuple((h, l) for h, l in order)
        return cls(
            hierarchy=HierarchicalRulebook(groups, group_edges),
            rule_config=RuleConfig.from_json_dict(doc.get("rule_config", {})),
        )


def dump_rulebook(config: RulebookConfig, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(config.to_json_dict(), fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_rulebook(path) -> RulebookConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return RulebookConfig.from_json_dict(json.load(fh))


def default_rulebook_config(variants: Iterable[Variant] = (),
                            rule_config: Optional[RuleConfig] = None) -> RulebookConfig:
    variants = frozenset(variants)
    if rule_config is None:
        rule_config = RuleConfig(variants=variants)
    return RulebookConfig(default_hierarchy(rule_config.variants), rule_config)
