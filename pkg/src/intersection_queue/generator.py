"""Infinitesimal generator of the intersection process applied to V(x) = x**2 / 2.

``lv_closed_form`` evaluates the piecewise closed form; ``lv_numeric`` builds
the same quantity from the transition rules (one forward step of length ``h``)
and serves as an independent check.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable

from .model import (
    IntersectionParams,
    QueueState,
    VehicleClass,
    arrival_update,
    decay_state,
)


# |c| below this is treated as exactly zero so grid points on the boundary stay unstable
BOUNDARY_SNAP = 1e-12


class GeneratorRegime(Enum):
    COOLDOWN_ACTIVE = "cooldown-active"  # x >= s - theta1
    CROSS_ONLY_COOLDOWN = "cross-only-cooldown"  # s - theta2 <= x < s - theta1
    FREE_FLOW = "free-flow"  # 0 <= x < s - theta2


@dataclass(frozen=True)
class DriftCoefficients:
    """Constants of the drift bound ``LV(x) <= -c*x + d``."""

    c: float
    d: float


def lyapunov(x: float) -> float:
    return 0.5 * x * x


def classify_regime(x: float, s: float, params: IntersectionParams) -> GeneratorRegime:
    if x >= s - params.theta1:
        return GeneratorRegime.COOLDOWN_ACTIVE
    if x >= s - params.theta2:
        return GeneratorRegime.CROSS_ONLY_COOLDOWN
    return GeneratorRegime.FREE_FLOW


def regime_boundaries(s: float, params: IntersectionParams) -> tuple[float, float, float]:
    return (0.0, s - params.theta2, s - params.theta1)


def _mean_sq_jump(theta: float, s: float, params: IntersectionParams) -> float:
    # E[(theta + S' - s)^2] over the crossing-time PMF
    return sum(p * (theta + sp - s) ** 2 for sp, p in params.crossing.pairs())


def lv_closed_form(x: float, y: VehicleClass, s: float, params: IntersectionParams) -> float:
    """Generator of V at state ``(x, y, s)``."""
    y = VehicleClass(y)
    lam_same = params.rate(y)
    lam_other = params.rate(y.opposite)
    s_bar = params.crossing.mean
    m2 = params.crossing.second_moment
    th1, th2 = params.theta1, params.theta2

    regime = classify_regime(x, s, params)
    if regime is GeneratorRegime.COOLDOWN_ACTIVE:
        slope = -1.0 + lam_same * (th1 + s_bar - s) + lam_other * (th2 + s_bar - s)
        return (
            slope * x
            + 0.5 * lam_same * _mean_sq_jump(th1, s, params)
            + 0.5 * lam_other * _mean_sq_jump(th2, s, params)
        )
    if regime is GeneratorRegime.CROSS_ONLY_COOLDOWN:
        return (
            (-1.0 + lam_other * (th2 + s_bar - s)) * x
            - 0.5 * lam_same * x * x
            + 0.5 * lam_same * m2
            + 0.5 * lam_other * _mean_sq_jump(th2, s, params)
        )
    drift = -x if x > 0 else 0.0
    return drift - 0.5 * (lam_same + lam_other) * (x * x - m2)


def _apply_generator(
    g: Callable[[QueueState], float],
    state: QueueState,
    params: IntersectionParams,
    h: float,
) -> float:
    # P(no arrival in [0, h]) = 1 - (lam1 + lam2) h to first order
    lam_same = params.rate(state.y)
    lam_other = params.rate(state.y.opposite)
    g0 = g(state)
    expected = (1.0 - (lam_same + lam_other) * h) * g(decay_state(state, h))
    for new_class, lam in ((state.y, lam_same), (state.y.opposite, lam_other)):
        if lam == 0:
            continue
        for sp, p in params.crossing.pairs():
            post, _ = arrival_update(state, new_class, sp, params)
            expected += lam * h * p * g(post)
    return (expected - g0) / h


def lv_numeric(
    x: float, y: VehicleClass, s: float, params: IntersectionParams, h: float = 1e-5
) -> float:
    """Forward-step estimate of the generator of V; error is O(h).

    ``h`` must be positive and the step ``(x - h, x]`` must not cross a regime
    boundary (``x == 0`` is allowed: the state is absorbing there).
    """
    if h <= 0:
        raise ValueError(f"step h must be positive, got {h}")
    if x < 0:
        raise ValueError(f"x must be non-negative, got {x}")
    if x > 0:
        for b in regime_boundaries(s, params):
            if x - h < b <= x:
                raise ValueError(f"step h={h} from x={x} straddles regime boundary {b}")
    state = QueueState(x, VehicleClass(y), s)
    return _apply_generator(lambda st: lyapunov(st.x), state, params, h)


def drift_coefficients(params: IntersectionParams) -> DriftCoefficients:
    """Worst-case slope ``c`` over both classes and intercept ``d``.

    ``c <= 0`` means the drift bound gives no stability guarantee; it is
    returned as is.
    """
    lam_total = params.lambda1 + params.lambda2
    spread = params.theta1 + params.crossing.mean - params.crossing.s_min
    c = 1.0 - lam_total * spread - max(params.lambda1, params.lambda2) * (params.theta2 - params.theta1)
    d = 0.5 * lam_total * params.crossing.second_moment
    if abs(c) <= BOUNDARY_SNAP:
        c = 0.0
    return DriftCoefficients(c, d)
