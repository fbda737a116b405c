"""Physical parameter derivations and the two named intersection presets."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .model import CrossingTimeDistribution, IntersectionParams, validate_params

TABLE_TOLERANCE = 0.01  # seconds


@dataclass(frozen=True)
class VehicleSpec:
    length: float  # m
    width: float  # m
    max_speed: float  # m/s
    max_accel: float  # m/s^2
    max_decel: float  # m/s^2
    min_headway: float  # m

    def __post_init__(self):
        for name, value in vars(self).items():
            if not value > 0:
                raise ValueError(f"{name} must be positive, got {value}")


@dataclass(frozen=True)
class GeometrySpec:
    crossing_distance: float  # m

    def __post_init__(self):
        if not self.crossing_distance > 0:
            raise ValueError("crossing_distance must be positive")


def conventional_crossing_time(a: float, b: float, l: float) -> float:
    """Crossing from a full stop at constant acceleration ``a`` over ``b + l`` meters."""
    if a <= 0:
        raise ValueError(f"acceleration must be positive, got {a}")
    return math.sqrt(2.0 * (b + l) / a)


def cav_crossing_time(v_bar: float, b: float, l: float) -> float:
    """Crossing ``b + l`` meters at constant speed ``v_bar``."""
    if v_bar <= 0:
        raise ValueError(f"speed must be positive, got {v_bar}")
    return (l + b) / v_bar


def headway_safety_check(v_bar: float, d_dec: float, h: float) -> bool:
    """True when the braking distance ``v_bar**2 / (2 d_dec)`` fits inside headway ``h``."""
    if d_dec <= 0:
        raise ValueError(f"deceleration must be positive, got {d_dec}")
    return v_bar * v_bar / (2.0 * d_dec) <= h


@dataclass(frozen=True)
class ScenarioPreset:
    """A named intersection type.

    ``crossing_time`` is the tabulated value used by the queueing model;
    ``derived_crossing_time`` is recomputed from vehicle and geometry data.
    """

    name: str
    vehicle: VehicleSpec
    geometry: GeometrySpec
    theta1: float
    theta2: float
    crossing_time: float
    derived_crossing_time: float

    def params(self, lambda1: float, lambda2: float) -> IntersectionParams:
        return validate_params(
            IntersectionParams(
                lambda1,
                lambda2,
                self.theta1,
                self.theta2,
                CrossingTimeDistribution.constant(self.crossing_time),
            )
        )

    @property
    def headway_safe(self) -> bool:
        return headway_safety_check(
            self.vehicle.max_speed, self.vehicle.max_decel, self.vehicle.min_headway
        )

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "theta1": self.theta1,
            "theta2": self.theta2,
            "crossing_time": self.crossing_time,
            "derived_crossing_time": self.derived_crossing_time,
            "min_headway": self.vehicle.min_headway,
            "braking_distance": self.vehicle.max_speed**2 / (2.0 * self.vehicle.max_decel),
            "headway_safe": self.headway_safe,
            "vehicle": vars(self.vehicle).copy(),
            "crossing_distance": self.geometry.crossing_distance,
        }


GEOMETRY = GeometrySpec(crossing_distance=14.4)

# name -> (min headway m, tabulated crossing time s, offset time s, switch-over time s)
_TABLE = {
    "conventional": (7.5, 6.96, 2.0, 4.0),
    "cav": (5.5, 2.77, 1.0, 2.0),
}

PRESET_NAMES = tuple(_TABLE)


def _vehicle(headway: float) -> VehicleSpec:
    return VehicleSpec(
        length=5.0, width=1.8, max_speed=7.0, max_accel=0.8, max_decel=4.5, min_headway=headway
    )


def preset(name: str) -> ScenarioPreset:
    try:
        headway, s_table, theta1, theta2 = _TABLE[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {', '.join(PRESET_NAMES)}") from None
    vehicle = _vehicle(headway)
    b, l = vehicle.length, GEOMETRY.crossing_distance
    if name == "conventional":
        derived = conventional_crossing_time(vehicle.max_accel, b, l)
    else:
        derived = cav_crossing_time(vehicle.max_speed, b, l)
    if abs(derived - s_table) > TABLE_TOLERANCE:
        raise ValueError(
            f"preset {name}: derived crossing time {derived:.4f} s disagrees with table value {s_table} s"
        )
    return ScenarioPreset(name, vehicle, GEOMETRY, theta1, theta2, s_table, derived)
