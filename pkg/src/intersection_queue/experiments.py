"""Rate sweeps (heatmap data) and equal-rate delay curves, with CSV output.

Sweep config files are JSON::

    {
      "preset": "cav",
      "params": {"theta1": 1, "theta2": 2, "pmf": [[2.77, 1.0]]},
      "lambda1_grid": [0.05, 0.10, 0.15],
      "lambda2_grid": {"start": 0.05, "stop": 0.35, "step": 0.05},
      "sim": {"horizon": 20000, "warmup_fraction": 0.2, "replications": 10, "base_seed": 0},
      "cutoff": 120,
      "divergence_rate": 0.01
    }

Either ``preset`` or ``params`` is required; when both are given, keys in
``params`` override the preset.  Missing grids default to 0.02..0.40 in steps
of 0.02.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .analysis import delay_upper_bound, stability_criterion
from .model import CrossingTimeDistribution, IntersectionParams, validate_params
from .scenarios import preset
from .simulation import SimConfig, run_experiment

DEFAULT_CUTOFF = 120.0
DEFAULT_DIVERGENCE_RATE = 0.01
DEFAULT_GRID = {"start": 0.02, "stop": 0.40, "step": 0.02}

SWEEP_COLUMNS = (
    "lambda1",
    "lambda2",
    "mean_delay",
    "ci_half_width",
    "bound",
    "criterion_lhs",
    "sufficient_stable",
    "diverged",
)
LINE_COLUMNS = ("lambda", "mean_delay", "ci_half_width", "bound", "sufficient_stable")


class ConfigError(ValueError):
    pass


class InvariantError(RuntimeError):
    pass


@dataclass(frozen=True)
class SweepSpec:
    lambda1_grid: tuple[float, ...]
    lambda2_grid: tuple[float, ...]
    base: IntersectionParams  # rates are ignored, taken from the grids
    sim: SimConfig
    cutoff: float = DEFAULT_CUTOFF
    divergence_rate: float = DEFAULT_DIVERGENCE_RATE
    label: str = "custom"

    def __post_init__(self):
        for name in ("lambda1_grid", "lambda2_grid"):
            check_grid(getattr(self, name), name)


@dataclass(frozen=True)
class SweepCell:
    lambda1: float
    lambda2: float
    mean_delay: float
    ci_half_width: float
    bound: float | None
    criterion_lhs: float
    sufficient_stable: bool
    diverged: bool


@dataclass(frozen=True)
class LinePoint:
    lam: float
    mean_delay: float
    ci_half_width: float
    bound: float | None
    sufficient_stable: bool


def check_grid(grid: Sequence[float], name: str = "grid") -> None:
    if len(grid) == 0:
        raise ConfigError(f"{name} is empty")
    if any(not (v >= 0 and math.isfinite(v)) for v in grid):
        raise ConfigError(f"{name} has negative or non-finite rates")
    if any(a >= b for a, b in zip(grid, grid[1:])):
        raise ConfigError(f"{name} must be strictly increasing")


def expand_grid(spec) -> tuple[float, ...]:
    """A grid is either an explicit list or ``{"start", "stop", "step"}`` (stop inclusive)."""
    if isinstance(spec, dict):
        try:
            start, stop, step = float(spec["start"]), float(spec["stop"]), float(spec["step"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad grid range {spec!r}") from exc
        if step <= 0 or stop < start:
            raise ConfigError(f"bad grid range {spec!r}")
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return tuple(round(start + i * step, 12) for i in range(n))
    if isinstance(spec, (list, tuple)):
        return tuple(float(v) for v in spec)
    raise ConfigError(f"grid must be a list or a range object, got {spec!r}")


def build_params(
    preset_name: str | None = None,
    theta1: float | None = None,
    theta2: float | None = None,
    pmf: CrossingTimeDistribution | None = None,
    lambda1: float = 0.0,
    lambda2: float = 0.0,
) -> IntersectionParams:
    """Resolve a preset plus explicit overrides into validated parameters."""
    if preset_name is not None:
        p = preset(preset_name)
        theta1 = p.theta1 if theta1 is None else theta1
        theta2 = p.theta2 if theta2 is None else theta2
        pmf = CrossingTimeDistribution.constant(p.crossing_time) if pmf is None else pmf
    missing = [n for n, v in (("theta1", theta1), ("theta2", theta2), ("pmf", pmf)) if v is None]
    if missing:
        raise ConfigError(f"without a preset, {', '.join(missing)} must be given")
    return validate_params(IntersectionParams(lambda1, lambda2, theta1, theta2, pmf))


def load_sweep_spec(path: str | os.PathLike, **overrides) -> SweepSpec:
    """Read a JSON sweep config; non-None ``overrides`` replace file values.

    Recognised overrides: preset, theta1, theta2, pmf, horizon,
    warmup_fraction, replications, base_seed, cutoff.
    """
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read sweep config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("sweep config must be a JSON object")
    ov = {k: v for k, v in overrides.items() if v is not None}

    inline = raw.get("params") or {}
    pmf = ov.get("pmf")
    if pmf is None and "pmf" in inline:
        pmf = CrossingTimeDistribution.from_pairs(tuple(a) for a in inline["pmf"])
    preset_name = ov.get("preset", raw.get("preset"))
    base = build_params(
        preset_name,
        ov.get("theta1", inline.get("theta1")),
        ov.get("theta2", inline.get("theta2")),
        pmf,
    )
    sim_raw = dict(raw.get("sim") or {})
    for key in ("horizon", "warmup_fraction", "replications", "base_seed"):
        if key in ov:
            sim_raw[key] = ov[key]
    try:
        sim = SimConfig(
            horizon=float(sim_raw.get("horizon", 20000.0)),
            warmup_fraction=float(sim_raw.get("warmup_fraction", 0.2)),
            replications=int(sim_raw.get("replications", 10)),
            base_seed=int(sim_raw.get("base_seed", 0)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad sim section: {exc}") from exc
    return SweepSpec(
        lambda1_grid=expand_grid(raw.get("lambda1_grid", DEFAULT_GRID)),
        lambda2_grid=expand_grid(raw.get("lambda2_grid", DEFAULT_GRID)),
        base=base,
        sim=sim,
        cutoff=float(ov.get("cutoff", raw.get("cutoff", DEFAULT_CUTOFF))),
        divergence_rate=float(raw.get("divergence_rate", DEFAULT_DIVERGENCE_RATE)),
        label=preset_name or "custom",
    )


def evaluate_point(
    params: IntersectionParams,
    sim: SimConfig,
    divergence_rate: float = DEFAULT_DIVERGENCE_RATE,
    workers: int | None = 1,
) -> SweepCell:
    """Simulate one rate pair and attach the analytical criterion and bound.

    ``diverged`` is set when ``x`` grows on average faster than
    ``divergence_rate`` seconds per second over the measured window.
    """
    report = stability_criterion(params)
    bound = delay_upper_bound(params)
    if params.total_rate == 0:
        mean, half, diverged = 0.0, 0.0, False
    else:
        result = run_experiment(params, sim, workers=workers)
        mean, half = result.delay.mean, result.delay.ci_half_width_95
        growth = sum(r.growth_rate for r in result.replications) / len(result.replications)
        diverged = growth > divergence_rate
        if not (mean >= 0 and math.isfinite(mean)):
            raise InvariantError(f"mean delay {mean} at {params.to_dict()}")
    return SweepCell(
        lambda1=params.lambda1,
        lambda2=params.lambda2,
        mean_delay=mean,
        ci_half_width=half,
        bound=bound.bound,
        criterion_lhs=report.lhs,
        sufficient_stable=report.sufficient_stable,
        diverged=diverged,
    )


def run_sweep(spec: SweepSpec, workers: int | None = 1) -> list[SweepCell]:
    """Cells in grid order: lambda1 outer, lambda2 inner."""
    return [
        evaluate_point(spec.base.with_rates(l1, l2), spec.sim, spec.divergence_rate, workers)
        for l1 in spec.lambda1_grid
        for l2 in spec.lambda2_grid
    ]


def run_line(
    base: IntersectionParams,
    lambdas: Sequence[float],
    sim: SimConfig,
    workers: int | None = 1,
) -> list[LinePoint]:
    """Equal rates ``lambda1 = lambda2 = lam`` for each ``lam``."""
    check_grid(lambdas, "lambdas")
    out = []
    for lam in lambdas:
        cell = evaluate_point(base.with_rates(lam, lam), sim, workers=workers)
        out.append(
            LinePoint(lam, cell.mean_delay, cell.ci_half_width, cell.bound, cell.sufficient_stable)
        )
    return out


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    return f"{value:.6f}"


def format_csv(columns: Sequence[str], rows: Iterable[Sequence]) -> str:
    lines = [",".join(columns)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def sweep_csv(cells: Sequence[SweepCell]) -> str:
    return format_csv(
        SWEEP_COLUMNS,
        (
            (
                c.lambda1,
                c.lambda2,
                c.mean_delay,
                c.ci_half_width,
                c.bound,
                c.criterion_lhs,
                c.sufficient_stable,
                c.diverged,
            )
            for c in cells
        ),
    )


def line_csv(points: Sequence[LinePoint]) -> str:
    return format_csv(
        LINE_COLUMNS,
        ((p.lam, p.mean_delay, p.ci_half_width, p.bound, p.sufficient_stable) for p in points),
    )


def atomic_write(path: str | os.PathLike, data: str | bytes) -> None:
    """Write via a temp file in the target directory, then rename over ``path``."""
    path = Path(path)
    payload = data.encode() if isinstance(data, str) else data
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise

