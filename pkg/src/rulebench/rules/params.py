"""Rule thresholds and their config-file round trip."""

from __future__ import annotations

import json
from dataclasses import dataclass, fields, replace


@dataclass(frozen=True)
class RuleParams:
    """Thresholds consumed by the rule catalog.

    Prefixes: t_* seconds, d_* meters, v_* m/s, a_* m/s². The *_mean /
    *_max_steps fields are satisfaction thresholds for the objective-style
    rules so that every rule yields a Boolean verdict. ``v_limit`` is the
    fallback speed limit; a per-lane limit from the map wins.
    """

    t_vru_ttc: float = 3.0
    t_vehicle_ttc: float = 2.0
    t_ack: float = 2.0
    v_ack: float = 3.0
    d_ack: float = 5.0
    a_ack: float = -1.0
    d_vru_off: float = 1.0
    d_vru_on: float = 2.0
    d_vehicle_front: float = 4.0
    d_vehicle_left: float = 1.0
    d_vehicle_right: float = 1.0
    v_limit: float = 15.0
    lane_keep_max_steps: float = 0.0
    center_mean_dev: float = 0.3
    jerk_mean: float = 2.0
    accel_long_mean: float = 3.0
    accel_lat_mean: float = 2.0

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name.startswith(("t_", "d_", "v_")) and v <= 0.0:
                raise ValueError(f"threshold {f.name} must be > 0, got {v}")

    def replace(self, **kwargs) -> "RuleParams":
        return replace(self, **kwargs)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, d: dict) -> "RuleParams":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown rule parameters: {sorted(unknown)}")
        return cls(**d)


def dump_params(params: RuleParams, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(params.to_dict(), fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_params(path) -> RuleParams:
    with open(path, "r", encoding="utf-8") as fh:
        return RuleParams.from_dict(json.load(fh))
