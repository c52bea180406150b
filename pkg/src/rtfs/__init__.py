"""Real-time frequency stability engine for low-inertia islanded grids.

Predicts the post-contingency frequency trajectory and nadir of a
single-mass system from live fleet snapshots, raises alarms when the
predicted nadir breaches the load-shedding threshold, and ships the offline
calibration tooling that estimates the model's non-observable parameters
from recorded disturbances.
"""

from .calibration import (
    CalibrationError,
    LagFit,
    LrfEstimate,
    UnitEventTrace,
    UnitPfrParams,
    estimate_lrf,
    fit_unit_lag,
    replay_unit_response,
)
from .contingency import (
    ScenarioError,
    build_scenario,
    largest_inertia_unit,
    largest_mw_unit,
    worst_case,
)
from .fleet import (
    FrequencyTrace,
    GeneratorUnit,
    SdrBlock,
    SdrTrip,
    SimulationConfig,
    SimulationResult,
    SnapshotValidationError,
    SystemSnapshot,
    Violation,
    iter_violations,
    total_generation_inertia,
    validate_snapshot,
)
from .inertia import (
    DEFAULT_LOAD_INERTIA_MODEL,
    DisturbanceRecord,
    EstimationError,
    LoadInertiaEstimate,
    LoadInertiaModel,
    estimate_system_inertia,
    fit_load_inertia_model,
    load_inertia_from_event,
    max_rocof,
    predict_load_inertia,
)
from .simulation import (
    OVER,
    UNDER,
    ContingencyScenario,
    SdrRelayBank,
    SimulationDiverged,
    SimulationError,
    deadband_adjust,
    droop_reference,
    lag_step,
    limit_reference,
    load_relief,
    ramp_limit,
    simulate,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # fleet
    "GeneratorUnit",
    "SdrBlock",
    "SystemSnapshot",
    "SimulationConfig",
    "FrequencyTrace",
    "SdrTrip",
    "SimulationResult",
    "Violation",
    "SnapshotValidationError",
    "iter_violations",
    "validate_snapshot",
    "total_generation_inertia",
    # simulation
    "UNDER",
    "OVER",
    "ContingencyScenario",
    "SimulationError",
    "SimulationDiverged",
    "deadband_adjust",
    "droop_reference",
    "limit_reference",
    "lag_step",
    "ramp_limit",
    "load_relief",
    "SdrRelayBank",
    "simulate",
    # contingency
    "ScenarioError",
    "largest_mw_unit",
    "largest_inertia_unit",
    "build_scenario",
    "worst_case",
    # inertia
    "DisturbanceRecord",
    "LoadInertiaModel",
    "LoadInertiaEstimate",
    "DEFAULT_LOAD_INERTIA_MODEL",
    "EstimationError",
    "max_rocof",
    "estimate_system_inertia",
    "load_inertia_from_event",
    "predict_load_inertia",
    "fit_load_inertia_model",
    # calibration
    "CalibrationError",
    "UnitPfrParams",
    "UnitEventTrace",
    "LagFit",
    "LrfEstimate",
    "estimate_lrf",
    "replay_unit_response",
    "fit_unit_lag",
]
