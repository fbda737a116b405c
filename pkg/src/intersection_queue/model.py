"""Domain types and state-transition rules of the two-queue intersection model.

The Markov state is ``(x, y, s)``: residual system time of the last vehicle to
enter, its direction, and its crossing time.  Between arrivals ``x`` decays at
unit rate down to zero; an arrival moves the state with :func:`arrival_update`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Iterable, NamedTuple, Sequence

PMF_TOLERANCE = 1e-12


class VehicleClass(IntEnum):
    ONE = 1
    TWO = 2

    @property
    def opposite(self) -> "VehicleClass":
        return VehicleClass.TWO if self is VehicleClass.ONE else VehicleClass.ONE


class ParamsError(ValueError):
    """Raised when parameters break a model assumption.

    ``violations`` holds machine-readable codes such as ``"theta-order"``.
    """

    def __init__(self, violations: Sequence[str], detail: str = ""):
        self.violations = list(violations)
        msg = ", ".join(self.violations)
        super().__init__(f"{msg}: {detail}" if detail else msg)


class PmfStats(NamedTuple):
    mean: float
    min: float
    max: float
    second_moment: float


@dataclass(frozen=True)
class CrossingTimeDistribution:
    """Finite PMF over vehicle-type crossing times (seconds).

    Atoms are stored sorted by crossing time.  Normalization and positivity
    are checked by :meth:`violations`, not on construction, so that
    :func:`validate_params` can report every problem at once.
    """

    times: tuple[float, ...]
    probs: tuple[float, ...]

    def __post_init__(self):
        if len(self.times) != len(self.probs):
            raise ValueError("times and probs must have the same length")
        order = sorted(range(len(self.times)), key=lambda i: self.times[i])
        object.__setattr__(self, "times", tuple(float(self.times[i]) for i in order))
        object.__setattr__(self, "probs", tuple(float(self.probs[i]) for i in order))

    @classmethod
    def constant(cls, s: float) -> "CrossingTimeDistribution":
        return cls((s,), (1.0,))

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[float, float]]) -> "CrossingTimeDistribution":
        pairs = list(pairs)
        return cls(tuple(s for s, _ in pairs), tuple(p for _, p in pairs))

    @classmethod
    def parse(cls, text: str) -> "CrossingTimeDistribution":
        """Parse an inline ``"s:p,s:p"`` list, e.g. ``"2.77:0.5,6.96:0.5"``."""
        pairs = []
        for item in text.split(","):
            item = item.strip()
            if not item:
                continue
            try:
                s, p = item.split(":")
                pairs.append((float(s), float(p)))
            except ValueError:
                raise ValueError(f"bad PMF atom {item!r}, expected 's:p'") from None
        return cls.from_pairs(pairs)

    def pairs(self) -> list[tuple[float, float]]:
        return list(zip(self.times, self.probs))

    def violations(self) -> list[str]:
        out = []
        if not self.times:
            return ["pmf-empty"]
        if any(not (0.0 < p <= 1.0) for p in self.probs):
            out.append("pmf-bad-probability")
        if abs(math.fsum(self.probs) - 1.0) > PMF_TOLERANCE:
            out.append("pmf-not-normalized")
        if any(not (s > 0.0 and math.isfinite(s)) for s in self.times):
            out.append("pmf-nonpositive-time")
        if any(a >= b for a, b in zip(self.times, self.times[1:])):
            out.append("pmf-duplicate-time")
        return out

    def __contains__(self, s: float) -> bool:
        return s in self.times

    @property
    def mean(self) -> float:
        return math.fsum(s * p for s, p in zip(self.times, self.probs))

    @property
    def second_moment(self) -> float:
        return math.fsum(s * s * p for s, p in zip(self.times, self.probs))

    @property
    def s_min(self) -> float:
        return self.times[0]

    @property
    def s_max(self) -> float:
        return self.times[-1]


def pmf_stats(dist: CrossingTimeDistribution) -> PmfStats:
    """Mean, min, max and second moment of the crossing-time PMF."""
    return PmfStats(dist.mean, dist.s_min, dist.s_max, dist.second_moment)


@dataclass(frozen=True)
class IntersectionParams:
    """Arrival rates (1/s), cooldowns (s) and the crossing-time PMF.

    ``theta1`` is the same-direction cooldown (offset time), ``theta2`` the
    cross-direction one (switch-over time).
    """

    lambda1: float
    lambda2: float
    theta1: float
    theta2: float
    crossing: CrossingTimeDistribution = field(repr=True)

    def rate(self, y: VehicleClass) -> float:
        return self.lambda1 if y == VehicleClass.ONE else self.lambda2

    @property
    def total_rate(self) -> float:
        return self.lambda1 + self.lambda2

    def with_rates(self, lambda1: float, lambda2: float) -> "IntersectionParams":
        return IntersectionParams(lambda1, lambda2, self.theta1, self.theta2, self.crossing)

    def to_dict(self) -> dict:
        return {
            "lambda1": self.lambda1,
            "lambda2": self.lambda2,
            "theta1": self.theta1,
            "theta2": self.theta2,
            "pmf": [[s, p] for s, p in self.crossing.pairs()],
        }


def params_violations(params: IntersectionParams) -> list[str]:
    out = []
    if not (params.lambda1 >= 0 and params.lambda2 >= 0):
        out.append("negative-rate")
    if not all(math.isfinite(v) for v in (params.lambda1, params.lambda2)):
        out.append("non-finite-rate")
    if params.theta1 < 0:
        out.append("negative-theta")
    if params.theta2 < params.theta1:
        out.append("theta-order")
    pmf_problems = params.crossing.violations()
    out.extend(pmf_problems)
    if "pmf-empty" not in pmf_problems and params.theta2 >= params.crossing.s_min:
        out.append("cooldown-exceeds-min-crossing")
    return out


def validate_params(params: IntersectionParams) -> IntersectionParams:
    """Return ``params`` unchanged, or raise :class:`ParamsError` listing every violation."""
    problems = params_violations(params)
    if problems:
        raise ParamsError(problems, repr(params))
    return params


@dataclass(frozen=True)
class QueueState:
    x: float
    y: VehicleClass
    s: float


def initial_state(params: IntersectionParams) -> QueueState:
    """Empty system: nothing in the crossing zone, class 1, first PMF atom."""
    return QueueState(0.0, VehicleClass.ONE, params.crossing.s_min)


@dataclass(frozen=True)
class VehicleOutcome:
    arrival_time: float
    vehicle_class: VehicleClass
    crossing_time: float
    system_time: float
    delay: float


def decay_state(state: QueueState, dt: float) -> QueueState:
    if dt < 0:
        raise ValueError(f"dt must be non-negative, got {dt}")
    return QueueState(max(0.0, state.x - dt), state.y, state.s)


def next_residual(
    x: float, y: int, s: float, new_y: int, new_s: float, theta1: float, theta2: float
) -> tuple[float, float]:
    """Scalar FCFS update; returns ``(x_new, delay)``.

    The cooldown branch is taken on ``x >= s - theta`` (ties wait).  Delay is
    returned as ``x - (s - theta)`` so it is never negative after rounding.
    """
    free_below = s - (theta1 if new_y == y else theta2)
    if x >= free_below:
        wait = x - free_below
        return new_s + wait, wait
    return new_s, 0.0


def arrival_update(
    state_pre: QueueState,
    new_class: VehicleClass,
    new_s: float,
    params: IntersectionParams,
) -> tuple[QueueState, float]:
    """Apply an arrival at the current instant; ``state_pre`` is already decayed."""
    if new_s not in params.crossing:
        raise ValueError(f"crossing time {new_s} is not in the PMF support")
    new_class = VehicleClass(new_class)
    x_new, delay = next_residual(
        state_pre.x, state_pre.y, state_pre.s, new_class, new_s, params.theta1, params.theta2
    )
    return QueueState(x_new, new_class, new_s), delay
