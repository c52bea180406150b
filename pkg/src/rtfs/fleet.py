"""Domain model shared by the simulation, calibration and service layers.

Conventions used throughout the package:

- power in MW, stored rotational energy in MW.s, frequency in Hz, time in s
- frequency deviation ``dev = f_nominal - f``, positive during
  under-frequency excursions
- all records are immutable after construction; construction is permissive
  and :func:`validate_snapshot` produces a complete violation report rather
  than failing on the first bad field
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import datetime
from typing import Iterator, Mapping, NamedTuple, Sequence

import numpy as np

__all__ = [
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
]


@dataclass(frozen=True)
class GeneratorUnit:
    """Static ratings, live output and droop-response parameters of one machine."""

    id: str
    rated_mw: float                 # nameplate MW rating
    output_mw: float                # live MW output from telemetry
    kinetic_energy: float           # nameplate stored energy, MW.s (independent of loading)
    spinning_reserve_mw: float = 0.0    # headroom usable for under-frequency response
    load_rejection_mw: float = 0.0      # room usable for over-frequency response
    droop_enabled: bool = False
    gain: float = 1.0               # governor response gain, dimensionless
    time_constant: float = 8.0      # governor/turbine lag time constant, s
    mdrr: float = 0.0               # maximum droop ramp rate, MW/s
    online: bool = True


@dataclass(frozen=True)
class SdrBlock:
    """A contracted demand-response block tripped by an under-frequency relay."""

    id: str
    amount_mw: float
    trip_frequency: float           # relay pickup setting, Hz
    pickup_delay: float = 0.0       # time below setting before tripping, s
    armed: bool = True


@dataclass(frozen=True)
class SystemSnapshot:
    """One timestamped picture of the whole system, as received from telemetry."""

    timestamp: datetime
    units: tuple[GeneratorUnit, ...]
    system_load_mw: float                       # P_load0
    sdr_blocks: tuple[SdrBlock, ...] = ()
    pre_contingency_frequency: float = 50.0     # f0
    nominal_frequency: float = 50.0             # fn
    load_relief_factor: float = 2.0             # kp
    load_inertia_override: float | None = None  # MW.s, bypasses the load-inertia model
    extras: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "units", tuple(self.units))
        object.__setattr__(self, "sdr_blocks", tuple(self.sdr_blocks))

    def unit(self, unit_id: str) -> GeneratorUnit:
        for u in self.units:
            if u.id == unit_id:
                return u
        raise KeyError(f"no unit with id {unit_id!r}")

    @property
    def online_units(self) -> tuple[GeneratorUnit, ...]:
        return tuple(u for u in self.units if u.online)


@dataclass(frozen=True)
class SimulationConfig:
    """Fixed-step integration settings and alarm thresholds."""

    time_step: float = 0.01             # s
    horizon: float = 60.0               # s
    deadband_halfwidth: float = 0.025   # governor deadband half-width, Hz
    droop_fraction: float = 0.04        # droop setting (4% = full output per 2 Hz at 50 Hz)
    ufls_threshold: float = 48.75       # stage-1 under-frequency load-shedding level, Hz
    zenith_threshold: float = 51.0      # over-frequency alarm level, Hz

    def __post_init__(self) -> None:
        problems = []
        if not 0.0 < self.time_step <= 0.1:
            problems.append(f"time_step must be in (0, 0.1] s, got {self.time_step}")
        if self.horizon < 10.0:
            problems.append(f"horizon must be at least 10 s, got {self.horizon}")
        if self.deadband_halfwidth < 0.0:
            problems.append("deadband_halfwidth must be non-negative")
        if self.droop_fraction <= 0.0:
            problems.append("droop_fraction must be positive")
        if problems:
            raise ValueError("; ".join(problems))


# Plausibility band for measured frequency samples, Hz. Applied when traces
# enter from recorder files; predictive simulation output may leave it (that
# is precisely what the alarm is for).
FREQUENCY_FLOOR = 40.0
FREQUENCY_CEILING = 60.0


@dataclass(frozen=True, eq=False)
class FrequencyTrace:
    """A uniformly sampled frequency trace.

    Samples are validated at construction to be non-empty and finite.
    Measured traces are additionally held to the plausible [40, 60] Hz band
    via :meth:`assert_plausible` at the ingestion boundary.
    """

    start_time: float
    time_step: float
    samples: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.samples, dtype=float, copy=True)
        if self.time_step <= 0.0:
            raise ValueError(f"time_step must be positive, got {self.time_step}")
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("samples must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(arr)):
            raise ValueError("samples contain non-finite values")
        arr.flags.writeable = False
        object.__setattr__(self, "samples", arr)

    def assert_plausible(
        self, floor: float = FREQUENCY_FLOOR, ceiling: float = FREQUENCY_CEILING
    ) -> "FrequencyTrace":
        """Check the samples against the plausible measurement band."""
        lo, hi = float(self.samples.min()), float(self.samples.max())
        if lo < floor or hi > ceiling:
            raise ValueError(
                f"samples span [{lo:.3f}, {hi:.3f}] Hz, outside the plausible "
                f"[{floor}, {ceiling}] Hz band"
            )
        return self

    def __len__(self) -> int:
        return int(self.samples.size)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FrequencyTrace):
            return NotImplemented
        return (
            self.start_time == other.start_time
            and self.time_step == other.time_step
            and np.array_equal(self.samples, other.samples)
        )

    @property
    def times(self) -> np.ndarray:
        return self.start_time + np.arange(self.samples.size) * self.time_step

    @property
    def duration(self) -> float:
        return (self.samples.size - 1) * self.time_step


class SdrTrip(NamedTuple):
    """One latched demand-response trip observed during a simulation."""

    block_id: str
    time_s: float
    amount_mw: float


@dataclass(frozen=True, eq=False)
class SimulationResult:
    """Full output of one contingency simulation run."""

    frequency: FrequencyTrace
    nadir_hz: float
    nadir_time: float
    per_unit_pfr: Mapping[str, np.ndarray]     # unit id -> droop response MW trace
    load_relief: np.ndarray                     # MW trace
    sdr_tripped: tuple[SdrTrip, ...]
    total_imbalance: np.ndarray                 # MW trace, sum of all terms
    alarm: bool
    scenario_label: str

    @property
    def zenith_hz(self) -> float:
        return float(self.frequency.samples.max())


@dataclass(frozen=True)
class Violation:
    """One violated invariant, addressed to the offending unit/block."""

    subject: str        # "snapshot", "unit:<id>" or "sdr:<id>"
    message: str

    def __str__(self) -> str:
        return f"{self.subject}: {self.message}"


class SnapshotValidationError(ValueError):
    """Raised when a snapshot violates one or more invariants."""

    def __init__(self, violations: Sequence[Violation]):
        self.violations = tuple(violations)
        lines = "; ".join(str(v) for v in self.violations)
        super().__init__(f"snapshot failed validation: {lines}")


def _finite(value: float) -> bool:
    return isinstance(value, (int, float)) and math.isfinite(value)


def _unit_violations(unit: GeneratorUnit) -> Iterator[Violation]:
    subject = f"unit:{unit.id}"
    numeric = {
        "rated_mw": unit.rated_mw,
        "output_mw": unit.output_mw,
        "kinetic_energy": unit.kinetic_energy,
        "spinning_reserve_mw": unit.spinning_reserve_mw,
        "load_rejection_mw": unit.load_rejection_mw,
        "gain": unit.gain,
        "time_constant": unit.time_constant,
        "mdrr": unit.mdrr,
    }
    for name, value in numeric.items():
        if not _finite(value):
            yield Violation(subject, f"{name} is not a finite number")
            return  # further comparisons would be meaningless
    if unit.rated_mw <= 0:
        yield Violation(subject, f"rated_mw must be positive, got {unit.rated_mw}")
    if unit.kinetic_energy < 0:
        yield Violation(subject, "kinetic_energy must be non-negative")
    if unit.time_constant <= 0:
        yield Violation(subject, "time_constant must be positive")
    if not 0.0 < unit.gain <= 1.5:
        yield Violation(subject, f"gain must be in (0, 1.5], got {unit.gain}")
    if unit.output_mw < 0:
        yield Violation(subject, "output_mw must be non-negative")
    elif unit.output_mw > unit.rated_mw:
        yield Violation(subject, "output exceeds rating")
    if unit.spinning_reserve_mw < 0:
        yield Violation(subject, "spinning_reserve_mw must be non-negative")
    elif unit.spinning_reserve_mw > max(unit.rated_mw - unit.output_mw, 0.0):
        yield Violation(subject, "spinning reserve exceeds remaining headroom")
    if unit.load_rejection_mw < 0:
        yield Violation(subject, "load_rejection_mw must be non-negative")
    if unit.droop_enabled and unit.mdrr <= 0:
        yield Violation(subject, "mdrr must be positive for a droop-enabled unit")


def _sdr_violations(block: SdrBlock, nominal_frequency: float) -> Iterator[Violation]:
    subject = f"sdr:{block.id}"
    for name, value in (
        ("amount_mw", block.amount_mw),
        ("trip_frequency", block.trip_frequency),
        ("pickup_delay", block.pickup_delay),
    ):
        if not _finite(value):
            yield Violation(subject, f"{name} is not a finite number")
            return
    if block.amount_mw < 0:
        yield Violation(subject, "amount_mw must be non-negative")
    if block.trip_frequency >= nominal_frequency:
        yield Violation(subject, "trip_frequency must be below nominal frequency")
    if block.pickup_delay < 0:
        yield Violation(subject, "pickup_delay must be non-negative")


def iter_violations(
    snapshot: SystemSnapshot, require_online_unit: bool = True
) -> Iterator[Violation]:
    """Yield every violated invariant in the snapshot, never raising.

    ``require_online_unit`` is waived for post-contingency fleets, where
    tripping the only machine legitimately leaves nothing online.
    """
    for name, value in (
        ("system_load_mw", snapshot.system_load_mw),
        ("pre_contingency_frequency", snapshot.pre_contingency_frequency),
        ("nominal_frequency", snapshot.nominal_frequency),
        ("load_relief_factor", snapshot.load_relief_factor),
    ):
        if not _finite(value):
            yield Violation("snapshot", f"{name} is not a finite number")
            return
    if snapshot.system_load_mw <= 0:
        yield Violation("snapshot", "system_load_mw must be positive")
    if not 45.0 <= snapshot.pre_contingency_frequency <= 55.0:
        yield Violation(
            "snapshot",
            "pre_contingency_frequency must be within [45, 55] Hz, "
            f"got {snapshot.pre_contingency_frequency}",
        )
    if snapshot.nominal_frequency <= 0:
        yield Violation("snapshot", "nominal_frequency must be positive")
    if snapshot.load_relief_factor < 0:
        yield Violation("snapshot", "load_relief_factor must be non-negative")
    if snapshot.load_inertia_override is not None:
        if not _finite(snapshot.load_inertia_override) or snapshot.load_inertia_override < 0:
            yield Violation("snapshot", "load_inertia_override must be non-negative")
    if require_online_unit and not any(u.online for u in snapshot.units):
        yield Violation("snapshot", "no online units")
    seen: set[str] = set()
    for unit in snapshot.units:
        if unit.id in seen:
            yield Violation(f"unit:{unit.id}", "duplicate unit id")
        seen.add(unit.id)
        yield from _unit_violations(unit)
    seen.clear()
    for block in snapshot.sdr_blocks:
        if block.id in seen:
            yield Violation(f"sdr:{block.id}", "duplicate block id")
        seen.add(block.id)
        yield from _sdr_violations(block, snapshot.nominal_frequency)


def validate_snapshot(snapshot: SystemSnapshot) -> SystemSnapshot:
    """Return the snapshot unchanged iff every invariant holds.

    Raises :class:`SnapshotValidationError` carrying the full list of
    violations otherwise. Validation never coerces values; idempotent by
    construction (the same object is returned).
    """
    violations = list(iter_violations(snapshot))
    if violations:
        raise SnapshotValidationError(violations)
    return snapshot


def total_generation_inertia(snapshot: SystemSnapshot) -> float:
    """Sum of nameplate kinetic energy over online units, MW.s."""
    return float(sum(u.kinetic_energy for u in snapshot.units if u.online))
