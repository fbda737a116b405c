"""Stability criterion, delay upper bound and the M/D/1 reference formula."""

from __future__ import annotations

from dataclasses import dataclass

from .generator import BOUNDARY_SNAP, drift_coefficients
from .model import IntersectionParams, VehicleClass


@dataclass(frozen=True)
class StabilityReport:
    lhs: float
    sufficient_stable: bool
    margin: float


@dataclass(frozen=True)
class DelayBoundReport:
    bound: float | None
    defined: bool


def criterion_lhs(params: IntersectionParams) -> float:
    """Left side of the stability criterion; values within rounding of 1 are snapped to 1."""
    spread = params.theta1 + params.crossing.mean - params.crossing.s_min
    lhs = (
        max(params.lambda1, params.lambda2) * (params.theta2 - params.theta1)
        + (params.lambda1 + params.lambda2) * spread
    )
    return 1.0 if abs(lhs - 1.0) <= BOUNDARY_SNAP else lhs


def per_class_load(params: IntersectionParams, y: VehicleClass) -> float:
    """Load seen when the last vehicle is of class ``y`` and has the shortest crossing time."""
    y = VehicleClass(y)
    spread = params.crossing.mean - params.crossing.s_min
    return params.rate(y) * (params.theta1 + spread) + params.rate(y.opposite) * (
        params.theta2 + spread
    )


def stability_criterion(params: IntersectionParams) -> StabilityReport:
    """Sufficient condition for stability under FCFS; ``lhs == 1`` counts as not stable."""
    lhs = criterion_lhs(params)
    return StabilityReport(lhs=lhs, sufficient_stable=lhs < 1.0, margin=1.0 - lhs)


def delay_upper_bound(params: IntersectionParams) -> DelayBoundReport:
    """Mean-delay bound ``d / c``; undefined when the criterion fails."""
    coeffs = drift_coefficients(params)
    if not stability_criterion(params).sufficient_stable:
        return DelayBoundReport(bound=None, defined=False)
    return DelayBoundReport(bound=coeffs.d / coeffs.c, defined=True)


def stability_boundary(params: IntersectionParams) -> list[tuple[float, float]]:
    """Vertices ``(lambda1, lambda2)`` of the polyline where the criterion lhs equals 1.

    The curve is piecewise linear with a kink on the diagonal.  Returns an
    empty list when the criterion holds for every rate pair.
    """
    spread = params.theta1 + params.crossing.mean - params.crossing.s_min
    gap = params.theta2 - params.theta1
    axis_den = gap + spread
    diag_den = gap + 2.0 * spread
    if axis_den <= 0:
        return []
    on_axis = 1.0 / axis_den
    on_diag = 1.0 / diag_den
    return [(on_axis, 0.0), (on_diag, on_diag), (0.0, on_axis)]


def md1_waiting_time(lam: float, theta1: float) -> float:
    """Pollaczek-Khinchine mean wait of M/D/1 with deterministic service ``theta1``."""
    rho = lam * theta1
    if lam < 0 or theta1 < 0:
        raise ValueError("rate and service time must be non-negative")
    if rho >= 1:
        raise ValueError(f"utilization {rho} >= 1, no stationary wait")
    return lam * theta1 * theta1 / (2.0 * (1.0 - rho))
