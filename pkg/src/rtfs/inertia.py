"""System and load inertia estimation from recorded disturbances.

The initial decline after a sudden generation loss is retarded only by
stored rotational energy, so the system inertia follows from the loss size
and the peak smoothed rate of change of frequency. Load inertia is the
remainder once the known generator contribution is subtracted, and a linear
model against pre-event system load turns the historical estimates into a
live predictor for the non-observable load term.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Literal, NamedTuple, Sequence

import numpy as np

from .fleet import FrequencyTrace

__all__ = [
    "DisturbanceRecord",
    "LoadInertiaModel",
    "DEFAULT_LOAD_INERTIA_MODEL",
    "EstimationError",
    "max_rocof",
    "estimate_system_inertia",
    "LoadInertiaEstimate",
    "load_inertia_from_event",
    "predict_load_inertia",
    "fit_load_inertia_model",
]

EventKind = Literal["sudden-trip", "ramp-down"]


class EstimationError(ValueError):
    """An estimate could not be produced from the given data."""


@dataclass(frozen=True)
class DisturbanceRecord:
    """High-speed recording of one historical disturbance.

    The frequency trace must cover at least 2 s before and 10 s after the
    event and be sampled at 20 Hz or faster; ``delta_p_mw`` is the lost
    generation (positive for a trip).
    """

    event_id: str
    frequency: FrequencyTrace
    delta_p_mw: float
    pre_event_load_mw: float
    ke_gen_at_event: float          # online generator inertia at the event, MW.s
    event_kind: EventKind = "sudden-trip"
    event_time_s: float = 2.0       # offset of the event within the trace

    def __post_init__(self) -> None:
        if self.frequency.time_step > 0.05:
            raise ValueError("frequency trace must be sampled at >= 20 samples/s")
        if self.event_time_s < 2.0:
            raise ValueError("trace must span at least 2 s before the event")
        if self.frequency.duration - self.event_time_s < 10.0:
            raise ValueError("trace must span at least 10 s after the event")


@dataclass(frozen=True)
class LoadInertiaModel:
    """Linear load-inertia predictor: ke = slope * (load - intercept_load_mw)."""

    slope: float                # MW.s per MW
    intercept_load_mw: float    # load at which predicted inertia crosses zero
    fit_r2: float = 0.0
    sample_count: int = 0

    def __post_init__(self) -> None:
        if self.slope <= 0:
            raise ValueError("slope must be positive")
        if not 0.0 <= self.fit_r2 <= 1.0:
            raise ValueError("fit_r2 must be within [0, 1]")


# Operational model fitted to the conservative lower cluster of historical
# load-inertia estimates; fit statistics of that manual selection were not
# retained with the coefficients.
DEFAULT_LOAD_INERTIA_MODEL = LoadInertiaModel(slope=2.2528, intercept_load_mw=783.0)


def max_rocof(trace: FrequencyTrace, window: float = 0.5) -> float:
    """Peak smoothed rate of change of frequency, Hz/s.

    Sample-by-sample first differences are smoothed by a centered moving
    average of the given width (truncated at the edges) and the maximum
    absolute value is returned. Affine traces are invariant under the
    smoothing, so their slope is recovered exactly.
    """
    dt = trace.time_step
    if trace.duration <= window:
        raise EstimationError(
            f"trace of {trace.duration:.3f} s is too short for a {window} s window"
        )
    deriv = np.diff(trace.samples) / dt
    width = max(int(round(window / dt)), 1)
    if width % 2 == 0:
        width += 1
    if width > 1:
        kernel = np.ones(width)
        sums = np.convolve(deriv, kernel, mode="same")
        counts = np.convolve(np.ones(deriv.size), kernel, mode="same")
        deriv = sums / counts
    return float(np.abs(deriv).max())


def estimate_system_inertia(
    record: DisturbanceRecord,
    f_n: float = 50.0,
    window: float = 0.5,
    min_rocof: float = 0.05,
) -> float:
    """System inertia in MW.s inferred from one sudden generator trip.

    ``KE_sys = 0.5 * f_n * dP / max|df/dt|`` with the smoothed peak RoCoF.
    Low-RoCoF events are rejected: for small trips the governor response
    pollutes the initial decline and the inertia-only assumption fails.
    """
    if record.event_kind != "sudden-trip":
        raise EstimationError(
            f"inertia estimation requires a sudden-trip record, got {record.event_kind!r}"
        )
    if record.delta_p_mw <= 0:
        raise EstimationError("delta_p_mw must be positive for a generation trip")
    rocof = max_rocof(record.frequency, window=window)
    if rocof < min_rocof:
        raise EstimationError(
            f"peak RoCoF {rocof:.4f} Hz/s below the {min_rocof} Hz/s confidence "
            "cutoff; estimate would not be inertia-dominated"
        )
    return 0.5 * f_n * record.delta_p_mw / rocof


class LoadInertiaEstimate(NamedTuple):
    """Load inertia for one event; ``suspect`` marks unphysical negatives."""

    ke_load_mws: float
    suspect: bool


def load_inertia_from_event(ke_sys: float, ke_gen: float) -> LoadInertiaEstimate:
    """Load inertia as the system estimate minus known generator inertia.

    Negative values are returned but flagged as estimation noise rather
    than clamped, so downstream regressions stay unbiased.
    """
    ke_load = ke_sys - ke_gen
    return LoadInertiaEstimate(ke_load, suspect=ke_load < 0.0)


def predict_load_inertia(
    p_load0: float, model: LoadInertiaModel = DEFAULT_LOAD_INERTIA_MODEL
) -> float:
    """Predicted load inertia in MW.s, floored at zero below the model root."""
    return max(model.slope * (p_load0 - model.intercept_load_mw), 0.0)


def fit_load_inertia_model(
    samples: Sequence[tuple[float, float]],
    subset: Callable[[float, float], bool] | None = None,
) -> LoadInertiaModel:
    """Least-squares fit of load inertia against pre-event system load.

    ``samples`` are (load MW, ke_load MW.s) pairs. ``subset`` is an explicit
    caller-supplied predicate selecting which points to fit (historical
    estimates cluster, and choosing the conservative cluster is a judgement
    call, not the fitter's).
    """
    if subset is not None:
        selected = [(p, ke) for p, ke in samples if subset(p, ke)]
    else:
        selected = list(samples)
    if len(selected) < 3:
        raise EstimationError(
            f"need at least 3 samples to fit, got {len(selected)} after selection"
        )
    load = np.array([p for p, _ in selected], dtype=float)
    ke = np.array([k for _, k in selected], dtype=float)
    if np.ptp(load) == 0.0:
        raise EstimationError("zero variance in system load; slope is undefined")
    design = np.column_stack([load, np.ones_like(load)])
    (slope, offset), *_ = np.linalg.lstsq(design, ke, rcond=None)
    residual = ke - (slope * load + offset)
    total = ke - ke.mean()
    ss_tot = float(total @ total)
    r2 = 1.0 - float(residual @ residual) / ss_tot if ss_tot > 0 else 1.0
    if slope <= 0:
        raise EstimationError(
            f"fitted slope {slope:.4f} is not positive; data does not support "
            "a load-inertia model"
        )
    return LoadInertiaModel(
        slope=float(slope),
        intercept_load_mw=float(-offset / slope),
        fit_r2=max(min(r2, 1.0), 0.0),
        sample_count=len(selected),
    )
