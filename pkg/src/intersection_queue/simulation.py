"""Event-driven Monte Carlo simulation of the intersection process.

Arrivals are a merged Poisson stream thinned into the two directions.  The
state only changes at arrivals, so each replication is exact: ``x`` decays
linearly between events and its time integral is summed in closed form.

Random draws are made in fixed-size blocks (interarrival, class, crossing
time) so that a given seed yields the same arrival sequence whatever the
horizon.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats

from .model import (
    IntersectionParams,
    ParamsError,
    VehicleClass,
    VehicleOutcome,
    next_residual,
    validate_params,
)

BLOCK = 4096
DEFAULT_WARMUP = 0.2
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class SimConfig:
    horizon: float
    warmup_fraction: float = DEFAULT_WARMUP
    replications: int = 20
    base_seed: int = 0

    def __post_init__(self):
        if not self.horizon > 0:
            raise ValueError(f"horizon must be positive, got {self.horizon}")
        if not 0 <= self.warmup_fraction < 1:
            raise ValueError(f"warmup_fraction must be in [0, 1), got {self.warmup_fraction}")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if not 0 <= self.base_seed <= _MASK64:
            raise ValueError("base_seed must be an unsigned 64-bit integer")

    def to_dict(self) -> dict:
        return {
            "horizon": self.horizon,
            "warmup_fraction": self.warmup_fraction,
            "replications": self.replications,
            "base_seed": self.base_seed,
        }


@dataclass(frozen=True)
class ReplicationResult:
    vehicles_total: int
    vehicles_after_warmup: int
    mean_delay: float
    max_delay: float
    time_avg_x: float
    final_x: float
    warmup_x: float
    per_class_counts: tuple[int, int]
    growth_rate: float  # net change of x per second over the measured window
    trace: tuple[VehicleOutcome, ...] | None = field(default=None, repr=False)


@dataclass(frozen=True)
class SummaryStats:
    """Mean across replications with a Student-t 95% half width.

    With a single replication the half width is reported as 0 and
    ``ci_defined`` is False.
    """

    mean: float
    ci_half_width_95: float
    replication_count: int

    @property
    def ci_defined(self) -> bool:
        return self.replication_count > 1

    @property
    def upper(self) -> float:
        return self.mean + self.ci_half_width_95

    def to_dict(self) -> dict:
        return {
            "mean": self.mean,
            "ci_half_width_95": self.ci_half_width_95,
            "replication_count": self.replication_count,
            "ci_defined": self.ci_defined,
        }


@dataclass(frozen=True)
class ExperimentResult:
    delay: SummaryStats
    time_avg_x: SummaryStats
    replications: tuple[ReplicationResult, ...]


def _splitmix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def replication_seed(base_seed: int, index: int) -> int:
    """64-bit seed of replication ``index`` derived from ``base_seed`` (SplitMix64 mixing)."""
    return _splitmix64(base_seed ^ _splitmix64(index))


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def sample_arrivals(
    rng: np.random.Generator, params: IntersectionParams, n: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Draw ``n`` arrivals: interarrival times, classes (1 or 2) and crossing times."""
    total = params.lambda1 + params.lambda2
    if not total > 0:
        raise ParamsError(["zero-total-rate"], "simulation needs lambda1 + lambda2 > 0")
    dt = rng.standard_exponential(n) / total
    classes = np.where(rng.random(n) * total < params.lambda1, 1, 2)
    times = np.asarray(params.crossing.times)
    cdf = np.cumsum(params.crossing.probs)
    idx = np.minimum(np.searchsorted(cdf, rng.random(n), side="right"), len(times) - 1)
    return dt, classes, times[idx]


def sample_arrival(
    rng: np.random.Generator, params: IntersectionParams
) -> tuple[float, VehicleClass, float]:
    dt, classes, s = sample_arrivals(rng, params, 1)
    return float(dt[0]), VehicleClass(int(classes[0])), float(s[0])


def _decay_integral(x: float, a: float, b: float) -> float:
    """Integral over [a, b] of max(0, x - u) du, offsets measured from the last event."""
    if b <= a or x <= a:
        return 0.0
    b = min(b, x)
    return (b - a) * (x - 0.5 * (a + b))


def run_replication(
    params: IntersectionParams,
    horizon: float,
    warmup_fraction: float = DEFAULT_WARMUP,
    seed: int = 0,
    trace: bool = False,
) -> ReplicationResult:
    """Simulate one path over ``[0, horizon]`` from the empty state.

    Delay statistics cover vehicles arriving at or after
    ``warmup_fraction * horizon``; ``time_avg_x`` integrates ``x`` over the same
    window.  The first arrival past ``horizon`` is discarded.
    """
    validate_params(params)
    if not params.total_rate > 0:
        raise ParamsError(["zero-total-rate"], "simulation needs lambda1 + lambda2 > 0")
    SimConfig(horizon, warmup_fraction)
    rng = make_rng(seed)
    th1, th2 = params.theta1, params.theta2
    warm = warmup_fraction * horizon

    t = 0.0
    x = 0.0
    y = 1
    s = params.crossing.s_min
    warmup_x = 0.0 if warm == 0 else None
    area = 0.0
    delay_sum = 0.0
    max_delay = 0.0
    n_total = 0
    n_kept = 0
    counts = [0, 0]
    outcomes: list[VehicleOutcome] | None = [] if trace else None

    done = False
    while not done:
        dts, classes, crossing = sample_arrivals(rng, params, BLOCK)
        for dt, new_y, new_s in zip(dts.tolist(), classes.tolist(), crossing.tolist()):
            t_next = t + dt
            if t_next > horizon:
                done = True
                break
            if t_next >= warm:
                area += _decay_integral(x, max(warm - t, 0.0), dt)
            if warmup_x is None and t_next >= warm:
                warmup_x = max(0.0, x - (warm - t))
            x = x - dt if x > dt else 0.0
            x, delay = next_residual(x, y, s, new_y, new_s, th1, th2)
            y, s, t = new_y, new_s, t_next
            n_total += 1
            counts[new_y - 1] += 1
            if t >= warm:
                n_kept += 1
                delay_sum += delay
                if delay > max_delay:
                    max_delay = delay
            if outcomes is not None:
                outcomes.append(VehicleOutcome(t, VehicleClass(new_y), new_s, x, delay))

    if warmup_x is None:
        warmup_x = max(0.0, x - (warm - t))
    area += _decay_integral(x, max(warm - t, 0.0), horizon - t)
    final_x = max(0.0, x - (horizon - t))
    window = horizon - warm
    return ReplicationResult(
        vehicles_total=n_total,
        vehicles_after_warmup=n_kept,
        mean_delay=delay_sum / n_kept if n_kept else 0.0,
        max_delay=max_delay,
        time_avg_x=area / window,
        final_x=final_x,
        warmup_x=warmup_x,
        per_class_counts=(counts[0], counts[1]),
        growth_rate=(final_x - warmup_x) / window,
        trace=tuple(outcomes) if outcomes is not None else None,
    )


def summarize(values: Sequence[float]) -> SummaryStats:
    arr = np.asarray(values, dtype=float)
    n = len(arr)
    if n == 0:
        raise ValueError("no values to summarize")
    mean = float(arr.mean())
    if n == 1:
        return SummaryStats(mean, 0.0, 1)
    half = float(stats.t.ppf(0.975, n - 1) * arr.std(ddof=1) / math.sqrt(n))
    return SummaryStats(mean, half, n)


def _replicate(job):
    params, config, index = job
    seed = replication_seed(config.base_seed, index)
    return run_replication(params, config.horizon, config.warmup_fraction, seed)


def run_experiment(
    params: IntersectionParams, config: SimConfig, workers: int | None = 1
) -> ExperimentResult:
    """Run ``config.replications`` independent replications and aggregate them in order.

    ``workers > 1`` spreads replications over processes; results do not
    depend on the worker count.
    """
    validate_params(params)
    jobs = [(params, config, r) for r in range(config.replications)]
    if workers is not None and workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            reps = list(pool.map(_replicate, jobs))
    else:
        reps = [_replicate(job) for job in jobs]
    return ExperimentResult(
        delay=summarize([r.mean_delay for r in reps]),
        time_avg_x=summarize([r.time_avg_x for r in reps]),
        replications=tuple(reps),
    )


@dataclass(frozen=True)
class ProbePoint:
    horizon: float
    final_x: float
    time_avg_x: float


def divergence_probe(
    params: IntersectionParams,
    horizons: Sequence[float],
    seed: int = 0,
    warmup_fraction: float = 0.0,
) -> list[ProbePoint]:
    """One replication per horizon (same seed, so paths share their prefix)."""
    out = []
    for h in horizons:
        rep = run_replication(params, h, warmup_fraction, seed)
        out.append(ProbePoint(h, rep.final_x, rep.time_avg_x))
    return out


def growth_slope(points: Sequence[ProbePoint]) -> float:
    """Least-squares slope of ``final_x`` against horizon."""
    h = np.array([p.horizon for p in points], dtype=float)
    fx = np.array([p.final_x for p in points], dtype=float)
    return float(np.polyfit(h, fx, 1)[0])


TRACE_COLUMNS = ("arrival_time", "class", "crossing_time", "system_time", "delay")


def write_trace(path, outcomes: Sequence[VehicleOutcome]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRACE_COLUMNS)
        for o in outcomes:
            writer.writerow(
                [
                    f"{o.arrival_time:.6f}",
                    int(o.vehicle_class),
                    f"{o.crossing_time:.6f}",
                    f"{o.system_time:.6f}",
                    f"{o.delay:.6f}",
                ]
            )
