"""Declarative scenarios: specs, symbol encodings, coresets, coverage.

A scenario names a map, an ego maneuver, and agents with (type, maneuver,
spatial relation). Each spec encodes to a symbol vector: the ego maneuver
first, then one (relation, maneuver) pair per agent. Scenario distance is
the Hamming distance minimized over reorderings of the agent pairs, and
coresets are picked by k-center greedy under that metric.

Symbol table (fixed for files and reports): maneuvers are numbered
go_straight=1, left_turn=2, right_turn=3, lane_change=4, lane_following=5,
cross_street=6, walk_sidewalk=7; relations are lettered ahead=A, behind=B,
faster_lane=C, slower_lane=D, opposing_lanes=E, conflicting_lanes=F,
sidewalk=G.
"""

from __future__ import annotations

import enum
import itertools
import json
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

SCENARIO_FORMAT_VERSION = 1


class ScenarioError(ValueError):
    """Invalid scenario spec, encoding, or selection request."""


class AgentType(enum.Enum):
    CAR = "CAR"
    PEDESTRIAN = "PEDESTRIAN"


class Maneuver(enum.Enum):
    GO_STRAIGHT = "GO_STRAIGHT"
    LEFT_TURN = "LEFT_TURN"
    RIGHT_TURN = "RIGHT_TURN"
    LANE_CHANGE = "LANE_CHANGE"
    LANE_FOLLOWING = "LANE_FOLLOWING"
    CROSS_STREET = "CROSS_STREET"
    WALK_SIDEWALK = "WALK_SIDEWALK"


class Relation(enum.Enum):
    AHEAD = "AHEAD"
    BEHIND = "BEHIND"
    FASTER_LANE = "FASTER_LANE"
    SLOWER_LANE = "SLOWER_LANE"
    OPPOSING_LANES = "OPPOSING_LANES"
    CONFLICTING_LANES = "CONFLICTING_LANES"
    SIDEWALK = "SIDEWALK"


VEHICLE_MANEUVERS = (Maneuver.GO_STRAIGHT, Maneuver.LEFT_TURN, Maneuver.RIGHT_TURN,
                     Maneuver.LANE_CHANGE, Maneuver.LANE_FOLLOWING)
PEDESTRIAN_MANEUVERS = (Maneuver.CROSS_STREET, Maneuver.WALK_SIDEWALK)
VEHICLE_RELATIONS = (Relation.AHEAD, Relation.BEHIND, Relation.FASTER_LANE,
                     Relation.SLOWER_LANE, Relation.OPPOSING_LANES,
                     Relation.CONFLICTING_LANES)
PEDESTRIAN_RELATIONS = (Relation.SIDEWALK,)

MANEUVER_SYMBOL = {
    Maneuver.GO_STRAIGHT: 1,
    Maneuver.LEFT_TURN: 2,
    Maneuver.RIGHT_TURN: 3,
    Maneuver.LANE_CHANGE: 4,
    Maneuver.LANE_FOLLOWING: 5,
    Maneuver.CROSS_STREET: 6,
    Maneuver.WALK_SIDEWALK: 7,
}
RELATION_SYMBOL = {
    Relation.AHEAD: "A",
    Relation.BEHIND: "B",
    Relation.FASTER_LANE: "C",
    Relation.SLOWER_LANE: "D",
    Relation.OPPOSING_LANES: "E",
    Relation.CONFLICTING_LANES: "F",
    Relation.SIDEWALK: "G",
}
_SYMBOL_MANEUVER = {v: k for k, v in MANEUVER_SYMBOL.items()}
_SYMBOL_RELATION = {v: k for k, v in RELATION_SYMBOL.items()}


@dataclass(frozen=True)
class AgentSpec:
    name: str
    agent_type: AgentType
    maneuver: Maneuver
    spatial_relation: Relation

    def __post_init__(self):
        if self.agent_type is AgentType.PEDESTRIAN:
            if self.maneuver not in PEDESTRIAN_MANEUVERS:
                raise ScenarioError(
                    f"agent {self.name!r}: pedestrian cannot {self.maneuver.value}")
            if self.spatial_relation not in PEDESTRIAN_RELATIONS:
                raise ScenarioError(
                    f"agent {self.name!r}: pedestrian cannot be placed "
                    f"{self.spatial_relation.value}")
        else:
            if self.maneuver not in VEHICLE_MANEUVERS:
                raise ScenarioError(
                    f"agent {self.name!r}: car cannot {self.maneuver.value}")
            if self.spatial_relation not in VEHICLE_RELATIONS:
                raise ScenarioError(
                    f"agent {self.name!r}: car cannot be placed "
                    f"{self.spatial_relation.value}")


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    map_id: str
    ego_maneuver: Maneuver
    agents: tuple[AgentSpec, ...] = ()
    parameters: Mapping[str, tuple[float, float]] = field(default_factory=dict)

    def __post_init__(self):
        if self.ego_maneuver not in VEHICLE_MANEUVERS:
            raise ScenarioError(f"ego cannot {self.ego_maneuver.value}")
        names = [a.name for a in self.agents]
        if len(set(names)) != len(names):
            raise ScenarioError("duplicate agent names")
        params = {}
        for key, rng in self.parameters.items():
            lo, hi = float(rng[0]), float(rng[1])
            if lo > hi:
                raise ScenarioError(f"parameter {key!r} has lo > hi: [{lo}, {hi}]")
            params[str(key)] = (lo, hi)
        object.__setattr__(self, "parameters", params)


@dataclass(frozen=True, order=True)
class Encoding:
    """Symbol vector [ego maneuver, (relation, maneuver) per agent]."""

    ego: int
    pairs: tuple[tuple[str, int], ...] = ()

    @property
    def dimension(self) -> int:
        return 1 + 2 * len(self.pairs)

    def symbols(self) -> tuple:
        out = [self.ego]
        for rel, man in self.pairs:
            out.append(rel)
            out.append(man)
        return tuple(out)

    def canonical(self) -> "Encoding":
        """Agent pairs sorted: the representative modulo agent order."""
        return Encoding(self.ego, tuple(sorted(self.pairs)))

    def __str__(self) -> str:
        return "[" + ", ".join(str(s) for s in self.symbols()) + "]"


def encode(spec: ScenarioSpec) -> Encoding:
    """Deterministic symbol vector; agent pairs follow declaration order."""
    try:
        ego = MANEUVER_SYMBOL[spec.ego_maneuver]
        pairs = tuple((RELATION_SYMBOL[a.spatial_relation],
                       MANEUVER_SYMBOL[a.maneuver]) for a in spec.agents)
    except KeyError as exc:
        raise ScenarioError(f"unknown vocabulary token: {exc}") from exc
    return Encoding(ego, pairs)


def decode(enc: Encoding) -> tuple[Maneuver, tuple[tuple[Relation, Maneuver], ...]]:
    """Ego maneuver and the multiset (sorted) of agent (relation, maneuver)s."""
    try:
        ego = _SYMBOL_MANEUVER[enc.ego]
        pairs = tuple(sorted(((_SYMBOL_RELATION[r], _SYMBOL_MANEUVER[m])
                              for r, m in enc.pairs),
                             key=lambda rm: (rm[0].value, rm[1].value)))
    except KeyError as exc:
        raise ScenarioError(f"unknown symbol: {exc}") from exc
    return ego, pairs


def distance(a: Encoding, b: Encoding) -> int:
    """Hamming distance minimized over reorderings of b's agent pairs.

    Pairs move atomically as (relation, maneuver) blocks; the ego slot is
    fixed.
    """
    if a.dimension != b.dimension or len(a.pairs) != len(b.pairs):
        raise ScenarioError(
            f"dimension mismatch: {a.dimension} vs {b.dimension}")
    base = 0 if a.ego == b.ego else 1
    if not a.pairs:
        return base
    best = None
    for perm in itertools.permutations(b.pairs):
        d = base
        for (ra, ma), (rb, mb) in zip(a.pairs, perm):
            if ra != rb:
                d += 1
            if ma != mb:
                d += 1
        if best is None or d < best:
            best = d
            if best == base:
                break
    return best


# --- enumeration ----------------------------------------------------------------

def default_feasibility(agent_type: AgentType, relation: Relation,
                        maneuver: Maneuver) -> bool:
    """Which (relation, maneuver) pairs an agent type may take.

    Cars combine any vehicle relation with any vehicle maneuver;
    pedestrians start from the sidewalk and either cross or walk along.
    """
    if agent_type is AgentType.PEDESTRIAN:
        return relation in PEDESTRIAN_RELATIONS and maneuver in PEDESTRIAN_MANEUVERS
    return relation in VEHICLE_RELATIONS and maneuver in VEHICLE_MANEUVERS


@dataclass(frozen=True)
class SpaceConfig:
    n_cars: int = 0
    n_pedestrians: int = 0
    feasible: Callable = default_feasibility

    def __post_init__(self):
        if self.n_cars < 0 or self.n_pedestrians < 0:
            raise ScenarioError("agent counts must be >= 0")
        if self.n_cars + self.n_pedestrians > 3:
            raise ScenarioError("enumeration supports at most 3 non-ego agents")


def enumerate_space(config: SpaceConfig) -> list[Encoding]:
    """All distinct encodings up to agent permutation, feasibility-filtered.

    Returned sorted lexicographically (the deterministic processing order
    for selection and reports).
    """
    car_vocab = sorted(
        (RELATION_SYMBOL[r], MANEUVER_SYMBOL[m])
        for r in Relation for m in Maneuver
        if config.feasible(AgentType.CAR, r, m))
    ped_vocab = sorted(
        (RELATION_SYMBOL[r], MANEUVER_SYMBOL[m])
        for r in Relation for m in Maneuver
        if config.feasible(AgentType.PEDESTRIAN, r, m))
    out = []
    for ego in sorted(MANEUVER_SYMBOL[m] for m in VEHICLE_MANEUVERS):
        for cars in itertools.combinations_with_replacement(car_vocab, config.n_cars):
            for peds in itertools.combinations_with_replacement(ped_vocab,
                                                                config.n_pedestrians):
                out.append(Encoding(ego, tuple(sorted(cars + peds))))
    return sorted(set(out))


# --- k-center greedy selection -----------------------------------------------------

def _codes(space: Sequence[Encoding]) -> np.ndarray:
    rel_code = {sym: i for i, sym in enumerate(sorted(RELATION_SYMBOL.values()))}
    n = len(space)
    if n == 0:
        return np.zeros((0, 1), dtype=np.int16)
    d = space[0].dimension
    arr = np.zeros((n, d), dtype=np.int16)
    for i, enc in enumerate(space):
        arr[i, 0] = enc.ego
        for k, (rel, man) in enumerate(enc.pairs):
            arr[i, 1 + 2 * k] = rel_code[rel]
            arr[i, 2 + 2 * k] = man
    return arr


def _dists_to_point(codes: np.ndarray, enc: Encoding) -> np.ndarray:
    """Permutation-min Hamming distances from one encoding to all rows."""
    rel_code = {sym: i for i, sym in enumerate(sorted(RELATION_SYMBOL.values()))}
    n_pairs = len(enc.pairs)
    best = None
    for perm in itertools.permutations(range(n_pairs)):
        row = [enc.ego]
        for k in perm:
            rel, man = enc.pairs[k]
            row.append(rel_code[rel])
            row.append(man)
        d = (codes != np.asarray(row, dtype=np.int16)).sum(axis=1)
        best = d if best is None else np.minimum(best, d)
    return best


def select_coreset(space: Sequence[Encoding], k: int) -> list[Encoding]:
    """k-center greedy subset: repeatedly add the point farthest from the
    current selection.

    Seeded with the lexicographically smallest encoding; ties in the
    farthest-point step also resolve lexicographically.
    """
    space = sorted(space)
    if not space:
        raise ScenarioError("cannot select from an empty space")
    if k < 1 or k > len(space):
        raise ScenarioError(f"k must be in [1, {len(space)}], got {k}")
    codes = _codes(space)
    selected = [space[0]]
    min_dist = _dists_to_point(codes, space[0])
    while len(selected) < k:
        idx = int(np.argmax(min_dist))  # first max = lexicographically smallest
        selected.append(space[idx])
        min_dist = np.minimum(min_dist, _dists_to_point(codes, space[idx]))
    return selected


@dataclass(frozen=True)
class CoverageReport:
    """Residual distance and vocabulary coverage of a selected subset."""

    max_residual_distance: int
    ego_maneuver_coverage: float
    adv_maneuver_coverage: float
    adv_relation_coverage: float
    pair_coverage: float

    def as_dict(self) -> dict:
        return {
            "max_residual_distance": self.max_residual_distance,
            "ego_maneuver_coverage": self.ego_maneuver_coverage,
            "adv_maneuver_coverage": self.adv_maneuver_coverage,
            "adv_relation_coverage": self.adv_relation_coverage,
            "pair_coverage": self.pair_coverage,
        }


def coverage_report(subset: Sequence[Encoding], space: Sequence[Encoding]) -> CoverageReport:
    """Coverage of the subset against the whole space's vocabulary.

    Residual distance is the farthest any unselected encoding sits from
    its nearest selected one; coverages are fractions of the space's
    vocabulary items (and (relation, maneuver) pairs) appearing in at
    least one selected encoding.
    """
    space = sorted(space)
    subset = [e.canonical() for e in subset]
    sset = set(subset)
    missing = sset - set(space)
    if missing:
        raise ScenarioError(f"subset not within space: {sorted(missing)[:3]}")

    if set(space) == sset:
        residual = 0
    else:
        codes = _codes(space)
        min_dist = _dists_to_point(codes, subset[0])
        for enc in subset[1:]:
            min_dist = np.minimum(min_dist, _dists_to_point(codes, enc))
        residual = int(min_dist.max())

    def frac(seen: set, vocab: set) -> float:
        return 1.0 if not vocab else len(seen & vocab) / len(vocab)

    space_ego = {e.ego for e in space}
    space_man = {m for e in space for _, m in e.pairs}
    space_rel = {r for e in space for r, _ in e.pairs}
    space_pair = {p for e in space for p in e.pairs}
    sub_ego = {e.ego for e in subset}
    sub_man = {m for e in subset for _, m in e.pairs}
    sub_rel = {r for e in subset for r, _ in e.pairs}
    sub_pair = {p for e in subset for p in e.pairs}
    return CoverageReport(
        max_residual_distance=residual,
        ego_maneuver_coverage=frac(sub_ego, space_ego),
        adv_maneuver_coverage=frac(sub_man, space_man),
        adv_relation_coverage=frac(sub_rel, space_rel),
        pair_coverage=frac(sub_pair, space_pair),
    )


def spec_from_encoding(enc: Encoding, name: str, map_id: str,
                       parameters: Optional[Mapping] = None) -> ScenarioSpec:
    """Concrete spec for an encoding, with generated agent names."""
    ego, pairs = decode(enc)
    agents = []
    counts = {"car": 0, "ped": 0}
    for rel, man in pairs:
        if man in PEDESTRIAN_MANEUVERS:
            counts["ped"] += 1
            agents.append(AgentSpec(f"ped{counts['ped']}", AgentType.PEDESTRIAN,
                                    man, rel))
        else:
            counts["car"] += 1
            agents.append(AgentSpec(f"car{counts['car']}", AgentType.CAR, man, rel))
    return ScenarioSpec(name, map_id, ego, tuple(agents), dict(parameters or {}))


# --- spec files --------------------------------------------------------------------

def spec_to_json_dict(spec: ScenarioSpec) -> dict:
    return {
        "format_version": SCENARIO_FORMAT_VERSION,
        "scenario": spec.name,
        "map": spec.map_id,
        "ego": {"type": "CAR", "maneuver": spec.ego_maneuver.value},
        "agents": {
            a.name: {"type": a.agent_type.value, "maneuver": a.maneuver.value,
                     "spatial_relation": a.spatial_relation.value}
            for a in spec.agents
        },
        "parameters": {k: [lo, hi] for k, (lo, hi) in spec.parameters.items()},
    }


def spec_from_json_dict(doc: dict) -> ScenarioSpec:
    version = doc.get("format_version", SCENARIO_FORMAT_VERSION)
    if version != SCENARIO_FORMAT_VERSION:
        raise ScenarioError(f"unsupported scenario format_version {version!r}")

    def tok(enum_cls, value, what):
        try:
            return enum_cls(value)
        except ValueError:
            raise ScenarioError(f"unknown {what} token {value!r}") from None

    agents = tuple(
        AgentSpec(name, tok(AgentType, a.get("type", "CAR"), "agent type"),
                  tok(Maneuver, a["maneuver"], "maneuver"),
                  tok(Relation, a["spatial_relation"], "spatial relation"))
        for name, a in doc.get("agents", {}).items())
    return ScenarioSpec(
        name=doc["scenario"],
        map_id=doc["map"],
        ego_maneuver=tok(Maneuver, doc["ego"]["maneuver"], "maneuver"),
        agents=agents,
        parameters={k: tuple(v) for k, v in doc.get("parameters", {}).items()},
    )


def dump_scenario(spec: ScenarioSpec, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(spec_to_json_dict(spec), fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_scenario(path) -> ScenarioSpec:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"{path}: bad JSON: {exc}") from exc
    try:
        return spec_from_json_dict(doc)
    except KeyError as exc:
        raise ScenarioError(f"{path}: missing field {exc}") from exc


# --- scenic program text -------------------------------------------------------------

_BANNER = "#" * 33


def _section(title: str) -> str:
    return f"{_BANNER}\n# {title:<29} #\n{_BANNER}"


_VEHICLE_BEHAVIOR_CALLS = {
    Maneuver.GO_STRAIGHT: "FollowTrajectoryBehavior(target_speed={speed}, trajectory={name}Trajectory)",
    Maneuver.LEFT_TURN: "FollowTrajectoryBehavior(target_speed={speed}, trajectory={name}Trajectory)",
    Maneuver.RIGHT_TURN: "FollowTrajectoryBehavior(target_speed={speed}, trajectory={name}Trajectory)",
    Maneuver.LANE_CHANGE: "LaneChangeBehavior(laneSectionToSwitch={name}TargetSection, target_speed={speed})",
    Maneuver.LANE_FOLLOWING: "FollowLaneBehavior(target_speed={speed})",
}

_TURN_TYPE = {
    Maneuver.GO_STRAIGHT: "STRAIGHT",
    Maneuver.LEFT_TURN: "LEFT_TURN",
    Maneuver.RIGHT_TURN: "RIGHT_TURN",
}

_RELATION_SPAWN = {
    Relation.AHEAD: ("{name}SpawnPt = new OrientedPoint following roadDirection "
                     "from egoSpawnPt for globalParameters.{upper}_DIST"),
    Relation.BEHIND: ("{name}SpawnPt = new OrientedPoint following roadDirection "
                      "from egoSpawnPt for -globalParameters.{upper}_DIST"),
    Relation.FASTER_LANE: ("{name}InitLane = egoInitLane.sections[0].fasterLane.lane\n"
                           "{name}SpawnPt = new OrientedPoint in {name}InitLane.centerline"),
    Relation.SLOWER_LANE: ("{name}InitLane = egoInitLane.sections[0].slowerLane.lane\n"
                           "{name}SpawnPt = new OrientedPoint in {name}InitLane.centerline"),
    Relation.OPPOSING_LANES: (
        "{name}InitLane = Uniform(*filter(lambda m: m.type is ManeuverType.STRAIGHT,\n"
        "    Uniform(*filter(lambda m: m.type is ManeuverType.STRAIGHT,\n"
        "        egoInitLane.maneuvers)).reverseManeuvers)).startLane\n"
        "{name}SpawnPt = new OrientedPoint in {name}InitLane.centerline"),
    Relation.CONFLICTING_LANES: (
        "{name}InitLane = Uniform(*filter(lambda m: m.type is ManeuverType.STRAIGHT,\n"
        "    Uniform(*filter(lambda m: m.type is ManeuverType.STRAIGHT,\n"
        "        egoInitLane.maneuvers)).conflictingManeuvers)).startLane\n"
        "{name}SpawnPt = new OrientedPoint in {name}InitLane.centerline"),
    Relation.SIDEWALK: (
        "{name}SpawnPt = new OrientedPoint at egoSpawnPt offset by "
        "(8, globalParameters.{upper}_DIST, 0)\n"
        "{name}EndPt = new OrientedPoint at egoSpawnPt offset by "
        "(-8, globalParameters.{upper}_DIST, 0)"),
}


def generate_scenic_text(spec: ScenarioSpec) -> str:
    """Scenic-syntax program text for a scenario spec.

    Purely textual output (never executed here); regeneration from the
    same spec is byte-identical.
    """
    lines: list[str] = []
    lines.append(_section("MAP AND MODEL"))
    lines.append(f"param map = localPath('maps/{spec.map_id}')")
    lines.append("model scenic.domains.driving.model")
    lines.append("param POLICY = 'built_in'")
    lines.append("")

    lines.append(_section("PARAMETERS AND CONSTANTS"))
    params = dict(spec.parameters)
    if "EGO_SPEED" not in params:
        params["EGO_SPEED"] = (6.0, 11.0)
    for a in spec.agents:
        upper = a.name.upper()
        if a.agent_type is AgentType.PEDESTRIAN:
            params.setdefault(f"{upper}_SPEED", (1.0, 2.0))
        else:
            params.setdefault(f"{upper}_SPEED", (6.0, 11.0))
        if a.spatial_relation in (Relation.AHEAD, Relation.BEHIND, Relation.SIDEWALK):
            params.setdefault(f"{upper}_DIST", (10.0, 25.0))
    for key in sorted(params):
        lo, hi = params[key]
        lines.append(f"param {key} = VerifaiRange({lo:g}, {hi:g})")
    lines.append("MODEL = 'vehicle.lincoln.mkz_2017'")
    lines.append("")

    lines.append(_section("SPATIAL RELATIONS"))
    if any(a.spatial_relation is Relation.CONFLICTING_LANES for a in spec.agents) \
            or spec.ego_maneuver in (Maneuver.LEFT_TURN, Maneuver.RIGHT_TURN):
        lines.append("intersection = Uniform(*filter(lambda i: i.is4Way, "
                     "network.intersections))")
        lines.append("egoInitLane = Uniform(*intersection.incomingLanes)")
    else:
        lines.append("egoInitLane = Uniform(*network.lanes)")
    lines.append("egoSpawnPt = new OrientedPoint in egoInitLane.centerline")
    for a in spec.agents:
        template = _RELATION_SPAWN.get(a.spatial_relation)
        if template is None:
            raise ScenarioError(
                f"unsupported relation/maneuver combination: "
                f"({a.spatial_relation.value}, {a.maneuver.value})")
        lines.append(template.format(name=a.name, upper=a.name.upper()))
    lines.append("")

    lines.append(_section("AGENT BEHAVIORS"))
    lines.append("behavior EgoBehavior():")
    lines.append("    try:")
    lines.append("        do FollowLaneBehavior("
                 "target_speed=globalParameters.EGO_SPEED)")
    lines.append("    interrupt when withinDistanceToObjsInLaneNoInter(self, 8):")
    lines.append("        take SetBrakeAction(1.0)")
    for a in spec.agents:
        if a.agent_type is AgentType.PEDESTRIAN:
            lines.append(f"behavior {a.name.capitalize()}Behavior():")
            lines.append(f"    take SetWalkingSpeedAction("
                         f"speed=globalParameters.{a.name.upper()}_SPEED)")
            continue
        if a.maneuver in _TURN_TYPE:
            lines.append(
                f"{a.name}Maneuver = Uniform(*filter(lambda m: m.type is "
                f"ManeuverType.{_TURN_TYPE[a.maneuver]}, {a.name}InitLane.maneuvers))"
                if a.spatial_relation in (Relation.OPPOSING_LANES,
                                          Relation.CONFLICTING_LANES,
                                          Relation.FASTER_LANE, Relation.SLOWER_LANE)
                else
                f"{a.name}Maneuver = Uniform(*filter(lambda m: m.type is "
                f"ManeuverType.{_TURN_TYPE[a.maneuver]}, egoInitLane.maneuvers))")
            lines.append(f"{a.name}Trajectory = [{a.name}Maneuver.startLane, "
                         f"{a.name}Maneuver.connectingLane, {a.name}Maneuver.endLane]")
        if a.maneuver is Maneuver.LANE_CHANGE:
            lines.append(f"{a.name}TargetSection = "
                         "egoInitLane.sections[0].fasterLane")
        call = _VEHICLE_BEHAVIOR_CALLS[a.maneuver].format(
            name=a.name, speed=f"globalParameters.{a.name.upper()}_SPEED")
        lines.append(f"behavior {a.name.capitalize()}Behavior():")
        lines.append(f"    do {call}")
    lines.append("")

    lines.append(_section("SPECIFICATIONS"))
    lines.append("ego = new Car at egoSpawnPt,")
    lines.append("    with blueprint MODEL,")
    lines.append("    with behavior EgoBehavior()")
    for a in spec.agents:
        if a.agent_type is AgentType.PEDESTRIAN:
            lines.append(f"{a.name} = new Pedestrian at {a.name}SpawnPt, "
                         f"facing toward {a.name}EndPt,")
            lines.append(f"    with behavior {a.name.capitalize()}Behavior()")
        else:
            lines.append(f"{a.name} = new Car at {a.name}SpawnPt,")
            lines.append("    with blueprint MODEL,")
            lines.append(f"    with behavior {a.name.capitalize()}Behavior()")
    lines.append("")
    return "\n".join(lines)
