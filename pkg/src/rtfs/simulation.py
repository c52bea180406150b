"""Fixed-step frequency-response simulation for a single-mass system model.

The system is treated as one rotating mass: every online machine contributes
its stored energy to a common bus frequency governed by the swing equation

    df/dt = (f_n / 2) * dP(t) / KE_sys

where ``dP`` is the net power imbalance in MW and ``KE_sys`` the total stored
energy in MW.s. The imbalance aggregates four terms: the contingency itself,
the droop response of every spinning-reserve provider, frequency-dependent
load relief, and latched demand-response trips.

Each droop-enabled unit runs through a five-block pipeline once per step:
deadband, droop gain, reserve limiter, first-order governor lag, and ramp-rate
limiter. The lag uses its exact zero-order-hold discretization, so the march
is unconditionally stable for any step size; the bus frequency is advanced by
trapezoidal quadrature with an explicit predictor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .fleet import (
    FrequencyTrace,
    GeneratorUnit,
    SdrBlock,
    SdrTrip,
    SimulationConfig,
    SimulationResult,
    SnapshotValidationError,
    SystemSnapshot,
    iter_violations,
    total_generation_inertia,
)

__all__ = [
    "EventKind",
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
]

EventKind = Literal["under", "over"]
UNDER: EventKind = "under"
OVER: EventKind = "over"


class SimulationError(RuntimeError):
    """A simulation could not be run or completed."""


class SimulationDiverged(SimulationError):
    """The integration state left its validity region."""

    def __init__(self, message: str, step: int, time_s: float):
        super().__init__(f"{message} at step {step} (t = {time_s:.3f} s)")
        self.step = step
        self.time_s = time_s


@dataclass(frozen=True)
class ContingencyScenario:
    """A snapshot with the disturbance to be simulated.

    ``delta_p_cont`` is signed: negative for a generation loss, positive for
    a load loss. ``stages`` lists later MW changes as (delay s, MW) pairs,
    supporting staged trips such as a steam turbine following its gas
    turbine off the system.
    """

    base: SystemSnapshot
    delta_p_cont: float
    label: str = ""
    stages: tuple[tuple[float, float], ...] = ()

    def __post_init__(self) -> None:
        stages = tuple((float(d), float(mw)) for d, mw in self.stages)
        object.__setattr__(self, "stages", stages)
        prev = 0.0
        for delay, _ in stages:
            if delay <= prev:
                raise ValueError("stage delays must be positive and strictly increasing")
            prev = delay

    @property
    def net_change_mw(self) -> float:
        """Total MW change once all stages have applied."""
        return self.delta_p_cont + sum(mw for _, mw in self.stages)

    @property
    def event_kind(self) -> EventKind:
        return OVER if self.net_change_mw > 0 else UNDER

    @property
    def is_trivial(self) -> bool:
        return self.net_change_mw == 0.0 and self.delta_p_cont == 0.0


# ---------------------------------------------------------------------------
# Per-unit response blocks
# ---------------------------------------------------------------------------

def deadband_adjust(dev: float, event: EventKind, halfwidth: float) -> float:
    """Apply the governor deadband to a frequency deviation.

    ``dev`` is the canonical deviation (nominal minus actual, Hz). Returns 0
    strictly inside the band; outside it the deviation is shifted toward
    zero by the half-width, so response grows continuously from the band
    edge.
    """
    if event == UNDER:
        return max(dev - halfwidth, 0.0)
    return min(dev + halfwidth, 0.0)


def droop_reference(
    unit: GeneratorUnit, dev_db: float, f_n: float, droop_fraction: float
) -> float:
    """Droop target MW for a deadband-adjusted deviation.

    A unit on a ``droop_fraction`` setting delivers its full rating over a
    ``droop_fraction * f_n`` excursion, so the reference is proportional to
    the rating and the adjusted deviation.
    """
    return unit.rated_mw / (droop_fraction * f_n) * dev_db


def limit_reference(unit: GeneratorUnit, ref_mw: float, event: EventKind) -> float:
    """Cap a droop reference to the unit's available room.

    Under-frequency references are limited to spinning reserve,
    over-frequency (negative) references to load-rejection room. Never
    increases the magnitude of the reference.
    """
    if event == UNDER:
        return min(ref_mw, unit.spinning_reserve_mw)
    return max(ref_mw, -unit.load_rejection_mw)


def lag_step(
    state_mw: float, ref_mw: float, gain: float, time_constant: float, dt: float
) -> float:
    """Advance a first-order governor lag by one step.

    Exact zero-order-hold discretization: the output decays toward
    ``gain * ref_mw`` with the given time constant, for any step size.
    """
    decay = math.exp(-dt / time_constant)
    return state_mw * decay + gain * ref_mw * (1.0 - decay)


def ramp_limit(prev_mw: float, candidate_mw: float, mdrr: float, dt: float) -> float:
    """Clamp the per-step change of a response to the unit's ramp rate.

    Applied symmetrically: response withdraws at a bounded rate too, since
    physical actuators ramp both ways.
    """
    limit = mdrr * dt
    change = candidate_mw - prev_mw
    if change > limit:
        change = limit
    elif change < -limit:
        change = -limit
    return prev_mw + change


def load_relief(p_load0: float, k_p: float, dev: float, f_n: float) -> float:
    """Frequency-dependent load relief in MW.

    Motor-dominated load draws less power as frequency falls; with the
    canonical deviation convention the relief is positive during
    under-frequency and proportional to the relief factor ``k_p``.
    """
    return p_load0 * k_p * dev / f_n


class SdrRelayBank:
    """Under-frequency relay logic for a set of demand-response blocks.

    A block trips once frequency has stayed below its setting for its full
    pickup delay; trips latch for the remainder of the run. Disarmed blocks
    never trip.
    """

    def __init__(self, blocks: Sequence[SdrBlock]):
        self._blocks = [b for b in blocks if b.armed and b.amount_mw > 0.0]
        self._below_since: dict[str, float] = {}
        self._tripped: list[SdrTrip] = []
        self._tripped_mw = 0.0

    def step(self, f: float, t: float) -> float:
        """Feed one frequency sample at time ``t``; return total tripped MW."""
        if self._blocks:
            remaining = []
            for block in self._blocks:
                if f < block.trip_frequency:
                    since = self._below_since.setdefault(block.id, t)
                    if t - since >= block.pickup_delay:
                        self._tripped.append(SdrTrip(block.id, t, block.amount_mw))
                        self._tripped_mw += block.amount_mw
                        continue
                else:
                    self._below_since.pop(block.id, None)
                remaining.append(block)
            self._blocks = remaining
        return self._tripped_mw

    @property
    def tripped(self) -> tuple[SdrTrip, ...]:
        return tuple(self._tripped)

    @property
    def tripped_mw(self) -> float:
        return self._tripped_mw


# ---------------------------------------------------------------------------
# Time march
# ---------------------------------------------------------------------------

class _UnitState:
    """Mutable marching state for one droop-enabled unit."""

    __slots__ = ("unit", "lag_mw", "out_mw")

    def __init__(self, unit: GeneratorUnit):
        self.unit = unit
        self.lag_mw = 0.0   # governor lag output
        self.out_mw = 0.0   # ramp-limited, capped response

    def advance(
        self,
        dev: float,
        event: EventKind,
        halfwidth: float,
        f_n: float,
        droop_fraction: float,
        dt: float,
    ) -> float:
        u = self.unit
        dev_db = deadband_adjust(dev, event, halfwidth)
        ref = droop_reference(u, dev_db, f_n, droop_fraction)
        ref = limit_reference(u, ref, event)
        self.lag_mw = lag_step(self.lag_mw, ref, u.gain, u.time_constant, dt)
        out = ramp_limit(self.out_mw, self.lag_mw, u.mdrr, dt)
        # gains above 1 can push the lag past the available room; the
        # delivered response is still bounded by it
        if event == UNDER:
            if out > u.spinning_reserve_mw:
                out = u.spinning_reserve_mw
        else:
            if out < -u.load_rejection_mw:
                out = -u.load_rejection_mw
        self.out_mw = out
        return out


def simulate(
    scenario: ContingencyScenario,
    config: SimulationConfig,
    ke_load: float,
    validate: bool = True,
) -> SimulationResult:
    """Integrate the post-contingency frequency trajectory.

    ``ke_load`` is the non-observable load inertia in MW.s, added to the
    online generation inertia of the scenario fleet. The march is a fixed
    step over [0, horizon]: unit responses are advanced with the deviation
    sampled at the step midpoint (half-step predictor), frequency by
    trapezoidal quadrature of the swing equation. Raises
    :class:`SimulationDiverged` if the state becomes non-finite.
    """
    base = scenario.base
    if validate:
        violations = list(iter_violations(base, require_online_unit=False))
        if violations:
            raise SnapshotValidationError(violations)
    if ke_load < 0:
        raise SimulationError(f"ke_load must be non-negative, got {ke_load}")
    ke_sys = ke_load + total_generation_inertia(base)
    if ke_sys <= 0.0:
        raise SimulationError("total system inertia must be positive")

    dt = config.time_step
    n_steps = int(round(config.horizon / dt))
    f_n = base.nominal_frequency
    f0 = base.pre_contingency_frequency
    event = scenario.event_kind
    halfwidth = config.deadband_halfwidth
    droop_fraction = config.droop_fraction
    swing = f_n / (2.0 * ke_sys)           # Hz/s per MW
    lr_coeff = base.system_load_mw * base.load_relief_factor / f_n

    states = [
        _UnitState(u) for u in base.units if u.online and u.droop_enabled
    ]
    bank = SdrRelayBank(base.sdr_blocks)
    stages = scenario.stages

    freq = np.empty(n_steps + 1)
    imbalance = np.empty(n_steps + 1)
    relief = np.empty(n_steps + 1)
    pfr = {s.unit.id: np.zeros(n_steps + 1) for s in states}
    pfr_arrays = [pfr[s.unit.id] for s in states]

    # t = 0: pre-contingency equilibrium; responses measured from it, so the
    # relief term references f0 (zero at the operating point) while the
    # governor pipeline references nominal frequency as the hardware does.
    cont = scenario.delta_p_cont
    stage_idx = 0
    f = f0
    sdr_mw = bank.step(f, 0.0)
    lr = lr_coeff * (f0 - f)
    dp = cont + lr + sdr_mw
    freq[0] = f
    imbalance[0] = dp
    relief[0] = lr
    fdot = swing * dp

    for k in range(n_steps):
        t1 = (k + 1) * dt
        while stage_idx < len(stages) and stages[stage_idx][0] <= t1:
            cont += stages[stage_idx][1]
            stage_idx += 1

        pfr_sum = 0.0
        if states:
            dev_mid = f_n - (f + 0.5 * dt * fdot)
            for s in states:
                out = s.advance(dev_mid, event, halfwidth, f_n, droop_fraction, dt)
                pfr_sum += out

        f_pred = f + dt * fdot
        sdr_mw = bank.step(f_pred, t1)
        dp_pred = cont + pfr_sum + lr_coeff * (f0 - f_pred) + sdr_mw
        f_new = f + 0.5 * dt * (fdot + swing * dp_pred)

        if not math.isfinite(f_new):
            raise SimulationDiverged("non-finite frequency", k + 1, t1)

        lr = lr_coeff * (f0 - f_new)
        dp = cont + pfr_sum + lr + sdr_mw
        fdot = swing * dp
        f = f_new

        idx = k + 1
        freq[idx] = f
        imbalance[idx] = dp
        relief[idx] = lr
        for arr, s in zip(pfr_arrays, states):
            arr[idx] = s.out_mw

    nadir_idx = int(np.argmin(freq))        # earliest index on ties
    nadir_hz = float(freq[nadir_idx])
    nadir_time = nadir_idx * dt
    trace = FrequencyTrace(start_time=0.0, time_step=dt, samples=freq)
    if event == UNDER:
        alarm = nadir_hz < config.ufls_threshold
    else:
        alarm = float(freq.max()) > config.zenith_threshold

    return SimulationResult(
        frequency=trace,
        nadir_hz=nadir_hz,
        nadir_time=nadir_time,
        per_unit_pfr=pfr,
        load_relief=relief,
        sdr_tripped=bank.tripped,
        total_imbalance=imbalance,
        alarm=alarm,
        scenario_label=scenario.label,
    )
