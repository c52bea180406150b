"""Offline calibration of non-observable model parameters.

Two estimators live here:

- the load relief factor, regressed from (frequency, load) pairs recorded
  across one disturbance, and
- each unit's governor gain and lag time constant, fitted by replaying the
  droop pipeline open-loop against the measured frequency and minimizing
  the squared error to the measured MW response.

Both consume high-speed recorder data; residual mismatch from supplementary
controls (AGC, special governor functions) is accepted as conservatism and
surfaces as a large fitted residual.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .fleet import FrequencyTrace, GeneratorUnit
from .simulation import (
    UNDER,
    deadband_adjust,
    droop_reference,
    lag_step,
    limit_reference,
    ramp_limit,
)

__all__ = [
    "CalibrationError",
    "UnitPfrParams",
    "UnitEventTrace",
    "LagFit",
    "LrfEstimate",
    "estimate_lrf",
    "replay_unit_response",
    "fit_unit_lag",
    "find_event_onset",
    "baseline_output",
]


class CalibrationError(ValueError):
    """Calibration input is unusable for the requested fit."""


@dataclass(frozen=True)
class UnitPfrParams:
    """Static droop-pipeline parameters of one unit during an event."""

    rated_mw: float
    spinning_reserve_mw: float
    mdrr: float                      # MW/s
    deadband_halfwidth: float = 0.025
    droop_fraction: float = 0.04
    nominal_frequency: float = 50.0


@dataclass(frozen=True)
class UnitEventTrace:
    """Recorded frequency and MW output of one unit across one event."""

    unit_id: str
    frequency: FrequencyTrace
    output_mw: np.ndarray            # aligned to the frequency trace
    pre_event_output_mw: float       # baseline, mean over the 2 s before onset
    params: UnitPfrParams

    def __post_init__(self) -> None:
        arr = np.array(self.output_mw, dtype=float, copy=True)
        if arr.shape != (len(self.frequency),):
            raise ValueError("output_mw must align sample-for-sample with frequency")
        if not np.all(np.isfinite(arr)):
            raise ValueError("output_mw contains non-finite values")
        if self.frequency.duration < 30.0:
            raise ValueError("event trace must cover at least 30 s")
        arr.flags.writeable = False
        object.__setattr__(self, "output_mw", arr)


@dataclass(frozen=True)
class LagFit:
    """Result of a (gain, time constant) fit for one unit."""

    gain: float
    time_constant: float
    sse: float                       # sum of squared MW errors over the fit window
    converged: bool
    diagnostic: str | None = None


class LrfEstimate(NamedTuple):
    k_p: float
    r2: float


def estimate_lrf(
    pairs: Sequence[tuple[float, float]],
    p_load0: float,
    f_n: float = 50.0,
) -> LrfEstimate:
    """Load relief factor from (frequency Hz, load MW) pairs of one event.

    Regresses the per-unit load drop against the per-unit frequency
    deviation; the slope is the relief factor. Pairs should span the whole
    excursion, from contingency onset to frequency recovery.
    """
    if len(pairs) < 10:
        raise CalibrationError(f"need at least 10 pairs, got {len(pairs)}")
    if p_load0 <= 0:
        raise CalibrationError("p_load0 must be positive")
    freq = np.array([f for f, _ in pairs], dtype=float)
    load = np.array([p for _, p in pairs], dtype=float)
    if np.ptp(freq) < 0.05:
        raise CalibrationError(
            f"frequency spread {np.ptp(freq) * 1e3:.1f} mHz is degenerate; "
            "need at least 50 mHz of excursion"
        )
    x = (f_n - freq) / f_n
    y = (p_load0 - load) / p_load0
    design = np.column_stack([x, np.ones_like(x)])
    (slope, offset), *_ = np.linalg.lstsq(design, y, rcond=None)
    residual = y - (slope * x + offset)
    total = y - y.mean()
    ss_tot = float(total @ total)
    r2 = 1.0 - float(residual @ residual) / ss_tot if ss_tot > 0 else 1.0
    return LrfEstimate(k_p=float(slope), r2=max(min(r2, 1.0), 0.0))


def _capped_references(freq: FrequencyTrace, params: UnitPfrParams) -> np.ndarray:
    """Deadband, droop and reserve cap applied to every sample at once.

    Vectorized equivalent of running deadband_adjust -> droop_reference ->
    limit_reference per sample for an under-frequency event.
    """
    dev = params.nominal_frequency - freq.samples
    dev_db = np.maximum(dev - params.deadband_halfwidth, 0.0)
    refs = params.rated_mw / (params.droop_fraction * params.nominal_frequency) * dev_db
    return np.minimum(refs, params.spinning_reserve_mw)


def _march_lag_and_ramp(
    refs: np.ndarray, gain: float, time_constant: float, mdrr: float, dt: float,
    cap: float,
) -> np.ndarray:
    """Run the stateful tail of the pipeline over a precomputed reference trace."""
    n = refs.size
    out = np.empty(n)
    decay = float(np.exp(-dt / time_constant))
    rise = gain * (1.0 - decay)
    limit = mdrr * dt
    lag = 0.0
    prev = 0.0
    out[0] = 0.0
    for k in range(n - 1):
        lag = lag * decay + rise * refs[k]
        change = lag - prev
        if change > limit:
            change = limit
        elif change < -limit:
            change = -limit
        prev = prev + change
        if prev > cap:
            prev = cap
        out[k + 1] = prev
    return out


def replay_unit_response(
    freq: FrequencyTrace,
    params: UnitPfrParams,
    gain: float,
    time_constant: float,
) -> np.ndarray:
    """Open-loop droop response of one unit to a measured frequency trace.

    Runs the full pipeline (deadband, droop gain, reserve limiter,
    first-order lag, ramp limiter) per sample, starting from zero response.
    Deterministic; the returned trace aligns with the input samples, with
    the response over sample k's interval attributed to sample k+1.
    """
    refs = _capped_references(freq, params)
    return _march_lag_and_ramp(
        refs,
        gain,
        time_constant,
        params.mdrr,
        freq.time_step,
        cap=params.spinning_reserve_mw,
    )


def _unit_for_params(params: UnitPfrParams, gain: float, time_constant: float) -> GeneratorUnit:
    return GeneratorUnit(
        id="replay",
        rated_mw=params.rated_mw,
        output_mw=0.0,
        kinetic_energy=0.0,
        spinning_reserve_mw=params.spinning_reserve_mw,
        droop_enabled=True,
        gain=gain,
        time_constant=time_constant,
        mdrr=params.mdrr,
    )


def replay_unit_response_scalar(
    freq: FrequencyTrace,
    params: UnitPfrParams,
    gain: float,
    time_constant: float,
) -> np.ndarray:
    """Reference implementation of :func:`replay_unit_response`.

    Drives the scalar pipeline blocks sample by sample; kept as an
    independent route for testing the vectorized replay.
    """
    unit = _unit_for_params(params, gain, time_constant)
    dt = freq.time_step
    out = np.empty(len(freq))
    out[0] = 0.0
    lag = 0.0
    prev = 0.0
    for k in range(len(freq) - 1):
        dev = params.nominal_frequency - float(freq.samples[k])
        dev_db = deadband_adjust(dev, UNDER, params.deadband_halfwidth)
        ref = droop_reference(unit, dev_db, params.nominal_frequency, params.droop_fraction)
        ref = limit_reference(unit, ref, UNDER)
        lag = lag_step(lag, ref, gain, time_constant, dt)
        prev = ramp_limit(prev, lag, params.mdrr, dt)
        prev = min(prev, params.spinning_reserve_mw)
        out[k + 1] = prev
    return out


def find_event_onset(freq: FrequencyTrace, params: UnitPfrParams) -> int:
    """Index of the first sample outside the governor deadband."""
    dev = np.abs(params.nominal_frequency - freq.samples)
    beyond = np.nonzero(dev > params.deadband_halfwidth)[0]
    if beyond.size == 0:
        raise CalibrationError(
            "frequency never leaves the deadband; no excursion to fit against"
        )
    return int(beyond[0])


def baseline_output(
    freq: FrequencyTrace,
    output_mw: np.ndarray,
    params: UnitPfrParams,
    window_s: float = 2.0,
) -> float:
    """Pre-event MW baseline: mean output over the 2 s before onset.

    Falls back to the first sample when the recording starts mid-event.
    """
    onset = find_event_onset(freq, params)
    if onset == 0:
        return float(output_mw[0])
    lo = max(onset - int(round(window_s / freq.time_step)), 0)
    return float(np.asarray(output_mw)[lo:onset].mean())


def _fit_window(trace: UnitEventTrace, window_s: float = 30.0) -> tuple[int, int]:
    """Sample range [onset, onset + window] for the residual computation."""
    onset = find_event_onset(trace.frequency, trace.params)
    stop = min(onset + int(round(window_s / trace.frequency.time_step)) + 1, len(trace.frequency))
    return onset, stop


def _grid(lo: float, hi: float, step: float) -> np.ndarray:
    n = int(np.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(n)


def fit_unit_lag(
    trace: UnitEventTrace,
    k_bounds: tuple[float, float] = (0.2, 1.5),
    t_bounds: tuple[float, float] = (0.5, 20.0),
    k_step: float = 0.05,
    t_step: float = 0.5,
    refine_to: float = 1e-3,
    flat_response_mw: float = 0.5,
) -> LagFit:
    """Fit (gain, time constant) to one unit's recorded event response.

    Coarse grid search over the bounds followed by shrinking local grid
    refinement; derivative-free on purpose, since the pipeline's clamps make
    the residual surface non-smooth. The residual is summed from event onset
    to 30 s after, against the measured output minus its pre-event baseline.
    """
    onset, stop = _fit_window(trace)
    target = trace.output_mw - trace.pre_event_output_mw
    refs = _capped_references(trace.frequency, trace.params)
    dt = trace.frequency.time_step
    params = trace.params

    if float(np.abs(target[onset:stop]).max(initial=0.0)) < flat_response_mw:
        return LagFit(
            gain=0.0,
            time_constant=t_bounds[0],
            sse=float(np.sum(target[onset:stop] ** 2)),
            converged=False,
            diagnostic="unit did not respond (flat output across the event)",
        )

    def sse_at(gain: float, time_constant: float) -> float:
        out = _march_lag_and_ramp(
            refs, gain, time_constant, params.mdrr, dt, cap=params.spinning_reserve_mw
        )
        err = out[onset:stop] - target[onset:stop]
        return float(err @ err)

    best_k = best_t = 0.0
    best_sse = np.inf
    for k in _grid(*k_bounds, k_step):
        for t in _grid(*t_bounds, t_step):
            sse = sse_at(k, t)
            if sse < best_sse:
                best_sse, best_k, best_t = sse, float(k), float(t)

    span_k, span_t = k_step, t_step
    while span_k > refine_to or span_t > refine_to:
        span_k = max(span_k / 4.0, refine_to)
        span_t = max(span_t / 4.0, refine_to)
        for k in np.clip(best_k + span_k * np.arange(-4, 5), *k_bounds):
            for t in np.clip(best_t + span_t * np.arange(-4, 5), *t_bounds):
                sse = sse_at(float(k), float(t))
                if sse < best_sse:
                    best_sse, best_k, best_t = sse, float(k), float(t)

    return LagFit(
        gain=best_k,
        time_constant=best_t,
        sse=best_sse,
        converged=True,
    )
