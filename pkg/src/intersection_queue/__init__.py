"""Queueing model of a two-direction signal-free intersection under FCFS."""

from .analysis import (
    DelayBoundReport,
    StabilityReport,
    delay_upper_bound,
    md1_waiting_time,
    stability_boundary,
    stability_criterion,
)
from .generator import (
    DriftCoefficients,
    GeneratorRegime,
    classify_regime,
    drift_coefficients,
    lv_closed_form,
    lv_numeric,
)
from .model import (
    CrossingTimeDistribution,
    IntersectionParams,
    ParamsError,
    QueueState,
    VehicleClass,
    VehicleOutcome,
    arrival_update,
    decay_state,
    pmf_stats,
    validate_params,
)
from .scenarios import (
    ScenarioPreset,
    cav_crossing_time,
    conventional_crossing_time,
    headway_safety_check,
    preset,
)
from .simulation import (
    SimConfig,
    SummaryStats,
    divergence_probe,
    run_experiment,
    run_replication,
    sample_arrival,
)

__version__ = "0.1.0"
