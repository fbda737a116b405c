"""Command line entry point: ``intersection-queue <subcommand> ...``.

Exit codes: 0 success, 2 usage or validation error (JSON on stderr),
3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import json
import sys

from .analysis import delay_upper_bound, stability_boundary, stability_criterion
from .experiments import (
    ConfigError,
    InvariantError,
    atomic_write,
    build_params,
    check_grid,
    line_csv,
    load_sweep_spec,
    run_line,
    run_sweep,
    sweep_csv,
)
from .generator import drift_coefficients
from .model import CrossingTimeDistribution, ParamsError, validate_params
from .scenarios import PRESET_NAMES, preset
from .simulation import SimConfig, run_experiment, run_replication, write_trace


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _pmf(text: str) -> CrossingTimeDistribution:
    try:
        return CrossingTimeDistribution.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _add_model_flags(p, rates=True):
    p.add_argument("--preset", choices=PRESET_NAMES, help="named parameter set")
    p.add_argument("--theta1", type=float, help="same-direction cooldown [s]")
    p.add_argument("--theta2", type=float, help="cross-direction cooldown [s]")
    p.add_argument("--pmf", type=_pmf, help='crossing-time PMF as "s:p,s:p"')
    if rates:
        p.add_argument("--lambda1", type=float, required=True, help="direction-1 rate [veh/s]")
        p.add_argument("--lambda2", type=float, required=True, help="direction-2 rate [veh/s]")


def _add_sim_flags(p, defaults=True):
    # defaults=False leaves values as None so a config file can supply them
    p.add_argument("--horizon", type=float, default=50000.0 if defaults else None)
    p.add_argument("--warmup", type=float, default=0.2 if defaults else None, help="warm-up fraction")
    p.add_argument("--reps", type=int, default=20 if defaults else None)
    p.add_argument("--seed", type=int, default=0 if defaults else None)
    p.add_argument("--workers", type=int, default=1, help="processes for replications")


def _params(args, lambda1=0.0, lambda2=0.0):
    return build_params(args.preset, args.theta1, args.theta2, args.pmf, lambda1, lambda2)


def _sim(args) -> SimConfig:
    return SimConfig(args.horizon, args.warmup, args.reps, args.seed)


def _analytics(params) -> dict:
    report = stability_criterion(params)
    bound = delay_upper_bound(params)
    coeffs = drift_coefficients(params)
    return {
        "criterion_lhs": report.lhs,
        "sufficient_stable": report.sufficient_stable,
        "margin": report.margin,
        "bound": bound.bound,
        "bound_defined": bound.defined,
        "drift_c": coeffs.c,
        "drift_d": coeffs.d,
    }


def _emit(obj) -> None:
    json.dump(obj, sys.stdout, indent=2)
    sys.stdout.write("\n")


def cmd_simulate(args) -> int:
    params = _params(args, args.lambda1, args.lambda2)
    if params.total_rate == 0:
        raise ParamsError(["zero-total-rate"], "simulation needs lambda1 + lambda2 > 0")
    sim = _sim(args)
    result = run_experiment(params, sim, workers=args.workers)
    if args.trace:
        rep = run_replication(params, sim.horizon, sim.warmup_fraction, sim.base_seed, trace=True)
        write_trace(args.trace, rep.trace)
    out = {
        "mean_delay": result.delay.mean,
        "ci_half_width": result.delay.ci_half_width_95,
        "ci_defined": result.delay.ci_defined,
        "time_avg_x": result.time_avg_x.mean,
        "time_avg_x_ci_half_width": result.time_avg_x.ci_half_width_95,
        **_analytics(params),
        "seed": sim.base_seed,
        "params": params.to_dict(),
        "sim": sim.to_dict(),
    }
    _emit(out)
    return 0


def cmd_sweep(args) -> int:
    spec = load_sweep_spec(
        args.config,
        preset=args.preset,
        theta1=args.theta1,
        theta2=args.theta2,
        pmf=args.pmf,
        horizon=args.horizon,
        warmup_fraction=args.warmup,
        replications=args.reps,
        base_seed=args.seed,
        cutoff=args.cutoff,
    )
    cells = run_sweep(spec, workers=args.workers)
    for cell in cells:
        if cell.sufficient_stable != (cell.criterion_lhs < 1.0):
            raise InvariantError(f"criterion flag mismatch at {cell}")
    atomic_write(args.out, sweep_csv(cells))
    if args.svg:
        from .plotting import heatmap_svg

        heatmap_svg(cells, stability_boundary(spec.base), args.svg, spec.cutoff, title=spec.label)
    return 0


def cmd_line(args) -> int:
    check_grid(args.lambdas, "lambdas")
    base = _params(args)
    points = run_line(base, args.lambdas, _sim(args), workers=args.workers)
    text = line_csv(points)
    if args.out:
        atomic_write(args.out, text)
    else:
        sys.stdout.write(text)
    if args.svg:
        from .plotting import line_svg

        boundary = stability_boundary(base)
        critical = boundary[1][0] if boundary else None
        line_svg([(args.preset or "custom", points, critical)], args.svg)
    return 0


def cmd_bound(args) -> int:
    params = _params(args, args.lambda1, args.lambda2)
    report = delay_upper_bound(params)
    coeffs = drift_coefficients(params)
    _emit({"bound": report.bound, "defined": report.defined, "c": coeffs.c, "d": coeffs.d, "params": params.to_dict()})
    return 0


def cmd_stability(args) -> int:
    params = _params(args, args.lambda1, args.lambda2)
    report = stability_criterion(params)
    _emit(
        {
            "lhs": report.lhs,
            "stable": report.sufficient_stable,
            "margin": report.margin,
            "params": params.to_dict(),
        }
    )
    return 0


def cmd_presets(args) -> int:
    out = {}
    for name in PRESET_NAMES:
        p = preset(name)
        validate_params(p.params(0.0, 0.0))
        out[name] = p.to_dict()
    _emit(out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="intersection-queue", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="replicated simulation at one rate pair (JSON)")
    _add_model_flags(p)
    _add_sim_flags(p)
    p.add_argument("--trace", help="write the per-vehicle trace of the first seed to this CSV")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="(lambda1, lambda2) grid from a JSON config (CSV, optional SVG)")
    p.add_argument("config", help="JSON sweep config")
    _add_model_flags(p, rates=False)
    _add_sim_flags(p, defaults=False)
    p.add_argument("--out", required=True, help="CSV output path")
    p.add_argument("--svg", help="heatmap SVG output path")
    p.add_argument("--cutoff", type=float, help="display cap for the heatmap shade [s]")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("line", help="equal-rate delay curve (CSV, optional SVG)")
    _add_model_flags(p, rates=False)
    _add_sim_flags(p)
    p.add_argument("--lambdas", type=_floats, required=True, help="comma-separated rates")
    p.add_argument("--out", help="CSV output path (default: stdout)")
    p.add_argument("--svg", help="line plot SVG output path")
    p.set_defaults(func=cmd_line)

    for name, func, text in (
        ("bound", cmd_bound, "mean-delay upper bound (JSON)"),
        ("stability", cmd_stability, "stability criterion (JSON)"),
    ):
        p = sub.add_parser(name, help=text)
        _add_model_flags(p)
        p.set_defaults(func=func)

    p = sub.add_parser("presets", help="list named presets (JSON)")
    p.set_defaults(func=cmd_presets)
    return parser


def _fail(code: int, kind: str, message: str, violations=None) -> int:
    err = {"error": kind, "message": message}
    if violations:
        err["violations"] = violations
    json.dump(err, sys.stderr)
    sys.stderr.write("\n")
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        return _fail(2, "usage", str(exc))
    except ParamsError as exc:
        return _fail(2, "invalid-params", str(exc), exc.violations)
    except (ConfigError, ValueError, OSError) as exc:
        return _fail(2, "invalid-input", str(exc))
    except (InvariantError, AssertionError) as exc:
        return _fail(3, "invariant-violation", str(exc))


if __name__ == "__main__":
    sys.exit(main())
