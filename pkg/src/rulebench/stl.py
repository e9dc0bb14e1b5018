"""Signal temporal logic over discrete traces.

Formulas are built programmatically from atomic predicates (real-valued
functions of a world-state sample, satisfied when >= 0), Boolean
connectives, and interval-bounded temporal operators. Intervals are closed
index ranges on the trace grid. Evaluation is offline over a completed
signal; both Boolean semantics and quantitative robustness are provided,
computed by separate recursions so each can check the other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable


class OutOfHorizonError(ValueError):
    """A temporal interval reaches past the end of the signal."""


class Formula:
    """Base class; use the concrete node types below."""

    __slots__ = ()


@dataclass(frozen=True)
class TrueFormula(Formula):
    pass


@dataclass(frozen=True)
class Atomic(Formula):
    """Predicate f(sample) >= 0 with robustness f(sample)."""

    fn: Callable
    name: str = ""


@dataclass(frozen=True)
class Not(Formula):
    sub: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


def _check_interval(interval):
    lo, hi = interval
    if not (isinstance(lo, int) and isinstance(hi, int)):
        raise ValueError(f"interval bounds must be integers, got {interval!r}")
    if lo < 0 or hi < lo:
        raise ValueError(f"invalid interval {interval!r}: need 0 <= lo <= hi")
    return (lo, hi)


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula
    interval: tuple[int, int]

    def __post_init__(self):
        object.__setattr__(self, "interval", _check_interval(self.interval))


@dataclass(frozen=True)
class Eventually(Formula):
    sub: Formula
    interval: tuple[int, int]

    def __post_init__(self):
        object.__setattr__(self, "interval", _check_interval(self.interval))


@dataclass(frozen=True)
class Globally(Formula):
    sub: Formula
    interval: tuple[int, int]

    def __post_init__(self):
        object.__setattr__(self, "interval", _check_interval(self.interval))


def Or(left: Formula, right: Formula) -> Formula:
    return Not(And(Not(left), Not(right)))


def Implies(premise: Formula, conclusion: Formula) -> Formula:
    return Or(Not(premise), conclusion)


def conjunction(formulas) -> Formula:
    """Fold a sequence into nested Ands; empty sequence is vacuously true."""
    formulas = list(formulas)
    if not formulas:
        return TrueFormula()
    out = formulas[0]
    for f in formulas[1:]:
        out = And(out, f)
    return out


def _as_samples(x):
    if isinstance(x, (list, tuple)):
        return x, 0
    states = getattr(x, "states", None)
    if callable(states):
        return list(states()), x.t1
    raise TypeError(f"cannot interpret {type(x).__name__} as a signal")


def robustness(phi: Formula, x, t: int) -> float:
    """Quantitative robustness ρ(φ, x, t).

    Positive means satisfied with margin, negative violated; zero counts
    as satisfaction (the atomic predicate is f >= 0).
    """
    samples, offset = _as_samples(x)
    return _rho(phi, samples, t - offset)


def satisfies(phi: Formula, x, t: int) -> bool:
    """Boolean semantics (x, t) ⊨ φ, evaluated directly (not via sign)."""
    samples, offset = _as_samples(x)
    return _sat(phi, samples, t - offset)


def _bounds(i: int, interval, n: int) -> tuple[int, int]:
    lo, hi = interval
    if i < 0 or i >= n:
        raise OutOfHorizonError(f"evaluation index {i} outside signal of length {n}")
    if i + hi > n - 1:
        raise OutOfHorizonError(
            f"interval [{lo}, {hi}] at index {i} reaches past the last index {n - 1}")
    return i + lo, i + hi


def _rho(phi: Formula, s: list, i: int) -> float:
    if isinstance(phi, TrueFormula):
        return math.inf
    if isinstance(phi, Atomic):
        if i < 0 or i >= len(s):
            raise OutOfHorizonError(f"index {i} outside signal of length {len(s)}")
        return float(phi.fn(s[i]))
    if isinstance(phi, Not):
        return -_rho(phi.sub, s, i)
    if isinstance(phi, And):
        return min(_rho(phi.left, s, i), _rho(phi.right, s, i))
    if isinstance(phi, Eventually):
        a, b = _bounds(i, phi.interval, len(s))
        return max(_rho(phi.sub, s, k) for k in range(a, b + 1))
    if isinstance(phi, Globally):
        a, b = _bounds(i, phi.interval, len(s))
        return min(_rho(phi.sub, s, k) for k in range(a, b + 1))
    if isinstance(phi, Until):
        a, b = _bounds(i, phi.interval, len(s))
        best = -math.inf
        for k in range(a, b + 1):
            v = _rho(phi.right, s, k)
            for m in range(i, k):
                w = _rho(phi.left, s, m)
                if w < v:
                    v = w
            if v > best:
                best = v
        return best
    raise TypeError(f"unknown formula node {type(phi).__name__}")


def _sat(phi: Formula, s: list, i: int) -> bool:
    if isinstance(phi, TrueFormula):
        return True
    if isinstance(phi, Atomic):
        if i < 0 or i >= len(s):
            raise OutOfHorizonError(f"index {i} outside signal of length {len(s)}")
        return float(phi.fn(s[i])) >= 0.0
    if isinstance(phi, Not):
        return not _sat(phi.sub, s, i)
    if isinstance(phi, And):
        return _sat(phi.left, s, i) and _sat(phi.right, s, i)
    if isinstance(phi, Eventually):
        a, b = _bounds(i, phi.interval, len(s))
        return any(_sat(phi.sub, s, k) for k in range(a, b + 1))
    if isinstance(phi, Globally):
        a, b = _bounds(i, phi.interval, len(s))
        return all(_sat(phi.sub, s, k) for k in range(a, b + 1))
    if isinstance(phi, Until):
        a, b = _bounds(i, phi.interval, len(s))
        for k in range(a, b + 1):
            if _sat(phi.right, s, k) and all(_sat(phi.left, s, m) for m in range(i, k)):
                return True
        return False
    raise TypeError(f"unknown formula node {type(phi).__name__}")
