"""Operational service: periodic worst-case calculation, alarms, what-if.

One scheduler thread owns cycle execution: it polls the snapshot directory
at telemetry cadence, runs the full worst-case calculation at the configured
period, persists the result and updates the alarm state. What-if requests
run against copies of the live snapshot and never touch operational state.
"""

from __future__ import annotations

import json
import logging
import math
import queue
import threading
import time
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Mapping

from .contingency import build_scenario, worst_case
from .fleet import (
    SimulationConfig,
    SimulationResult,
    SnapshotValidationError,
    SystemSnapshot,
    iter_violations,
    total_generation_inertia,
)
from .inertia import DEFAULT_LOAD_INERTIA_MODEL, LoadInertiaModel, predict_load_inertia
from .ingestion import ParseError, ResultStore, StoredResult, read_snapshot_file
from .simulation import ContingencyScenario, SimulationError

__all__ = [
    "ServiceConfig",
    "load_service_config",
    "WhatifError",
    "ManualScenario",
    "RtfsService",
    "ServiceRunner",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ServiceConfig:
    """Runtime configuration for the service and its scheduler."""

    snapshot_dir: Path
    results_path: Path
    simulation: SimulationConfig = field(default_factory=SimulationConfig)
    cycle_period_s: float = 300.0       # full worst-case calculation cadence
    poll_interval_s: float = 4.0        # snapshot directory polling cadence
    staleness_bound_s: float = 60.0     # snapshots older than this skip the cycle
    host: str = "127.0.0.1"
    port: int = 8470
    inertia_model: LoadInertiaModel = DEFAULT_LOAD_INERTIA_MODEL
    console_dir: Path | None = None     # static operator console, served at /ui


def load_service_config(path: str | Path, env: Mapping[str, str] | None = None) -> ServiceConfig:
    """Load configuration from a JSON file, honoring env-var overrides.

    ``RTFS_SNAPSHOT_DIR`` and ``RTFS_RESULTS_DIR`` override the file paths
    when set.
    """
    import os

    env = dict(os.environ if env is None else env)
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    sim = SimulationConfig(**obj.get("simulation", {}))
    model_obj = obj.get("inertia_model")
    model = (
        LoadInertiaModel(**model_obj) if model_obj else DEFAULT_LOAD_INERTIA_MODEL
    )
    snapshot_dir = Path(env.get("RTFS_SNAPSHOT_DIR", obj["snapshot_dir"]))
    results_dir = env.get("RTFS_RESULTS_DIR")
    if results_dir is not None:
        results_path = Path(results_dir) / "results.jsonl"
    else:
        results_path = Path(obj["results_path"])
    console_dir = obj.get("console_dir")
    return ServiceConfig(
        snapshot_dir=snapshot_dir,
        results_path=results_path,
        simulation=sim,
        cycle_period_s=float(obj.get("cycle_period_s", 300.0)),
        poll_interval_s=float(obj.get("poll_interval_s", 4.0)),
        staleness_bound_s=float(obj.get("staleness_bound_s", 60.0)),
        host=str(obj.get("host", "127.0.0.1")),
        port=int(obj.get("port", 8470)),
        inertia_model=model,
        console_dir=Path(console_dir) if console_dir else None,
    )


class WhatifError(ValueError):
    """A what-if request was rejected; carries per-unit diagnostics."""

    def __init__(self, errors: list[dict[str, str]]):
        self.errors = errors
        super().__init__(
            "what-if rejected: " + "; ".join(e["message"] for e in errors)
        )


@dataclass(frozen=True)
class ManualScenario:
    """Operator-specified scenario for test-mode simulation."""

    trip_unit: str | None = None
    delta_p_cont: float | None = None       # used when no unit is named
    stages: tuple[tuple[float, float], ...] = ()
    label: str | None = None


class RtfsService:
    """Cycle execution, alarm bookkeeping and what-if evaluation.

    Alarm policy: an alarm raises immediately when the predicted nadir
    breaches the load-shedding threshold and clears only after two
    consecutive non-breaching cycles, so a marginal system does not flap.
    The state is derivable from the last two stored results.
    """

    def __init__(
        self,
        config: ServiceConfig,
        store: ResultStore | None = None,
        clock: Callable[[], float] = time.time,
    ):
        self.config = config
        self.store = store if store is not None else ResultStore(config.results_path)
        self.clock = clock
        self._lock = threading.Lock()
        self.latest_snapshot: SystemSnapshot | None = None
        self.latest_result: StoredResult | None = None
        self.last_cycle_time: float | None = None
        self.alarm = False
        self.degraded = True
        self.degraded_reason: str | None = "no cycle has run yet"
        self._breach_history: tuple[bool, ...] = ()

    # -- cycle ------------------------------------------------------------

    def resolve_load_inertia(self, snapshot: SystemSnapshot) -> float:
        if snapshot.load_inertia_override is not None:
            return snapshot.load_inertia_override
        return predict_load_inertia(snapshot.system_load_mw, self.config.inertia_model)

    def run_cycle(self, snapshot: SystemSnapshot | None) -> SimulationResult | None:
        """Run one worst-case calculation; returns None if the cycle skipped.

        A missing or stale snapshot, a validation failure or a simulation
        failure degrades the service and retains the previous result; it
        never raises out of the scheduler loop.
        """
        if snapshot is None:
            self._degrade("no snapshot available")
            return None
        age = self.clock() - snapshot.timestamp.timestamp()
        if age > self.config.staleness_bound_s:
            self._degrade(
                f"snapshot is stale ({age:.0f} s old, bound "
                f"{self.config.staleness_bound_s:.0f} s)"
            )
            return None
        try:
            ke_load = self.resolve_load_inertia(snapshot)
            result = worst_case(snapshot, self.config.simulation, ke_load)
        except (SimulationError, SnapshotValidationError, ValueError) as exc:
            self._degrade(f"calculation failed: {exc}")
            return None

        ke_gen = total_generation_inertia(snapshot)
        stored = StoredResult(
            timestamp=snapshot.timestamp,
            result=result,
            ke_gen_mws=ke_gen,
            ke_load_mws=ke_load,
        )
        store_failed = False
        try:
            self.store.store_result(result, snapshot.timestamp, ke_gen, ke_load)
        except OSError as exc:
            # persistence trouble degrades the service but never stops the loop
            store_failed = True
            self._degrade(f"results store unavailable: {exc}")

        with self._lock:
            self.latest_snapshot = snapshot
            self.latest_result = stored
            self.last_cycle_time = self.clock()
            breach = result.alarm
            history = (self._breach_history + (breach,))[-2:]
            if breach:
                self.alarm = True
            elif len(history) == 2 and not any(history):
                self.alarm = False
            self._breach_history = history
            if not store_failed:
                self.degraded = False
                self.degraded_reason = None
        return result

    def _degrade(self, reason: str) -> None:
        with self._lock:
            self.degraded = True
            self.degraded_reason = reason
        logger.warning("service degraded: %s", reason)

    # -- what-if ----------------------------------------------------------

    def apply_redispatch(
        self,
        snapshot: SystemSnapshot,
        deltas: Mapping[str, float],
        allow_unbalanced: bool = False,
    ) -> SystemSnapshot:
        """Redispatched copy of a snapshot; rejects limit violations.

        Raising a unit consumes its spinning reserve MW-for-MW (and vice
        versa), clamped to the headroom that remains.
        """
        errors: list[dict[str, str]] = []
        by_id = {u.id: u for u in snapshot.units}
        for unit_id, delta in deltas.items():
            unit = by_id.get(unit_id)
            if unit is None:
                errors.append({"unit": unit_id, "message": f"unknown unit {unit_id!r}"})
                continue
            if not unit.online:
                errors.append({"unit": unit_id, "message": f"unit {unit_id!r} is offline"})
                continue
            if not math.isfinite(delta):
                errors.append({"unit": unit_id, "message": "delta must be finite"})
                continue
            new_output = unit.output_mw + delta
            if new_output > unit.rated_mw + 1e-9:
                errors.append(
                    {
                        "unit": unit_id,
                        "message": (
                            f"delta {delta:+.1f} MW would push output to "
                            f"{new_output:.1f} MW, above the {unit.rated_mw:.1f} MW rating"
                        ),
                    }
                )
            elif new_output < -1e-9:
                errors.append(
                    {
                        "unit": unit_id,
                        "message": f"delta {delta:+.1f} MW would drive output negative",
                    }
                )
        total = sum(deltas.values())
        if not allow_unbalanced and abs(total) > 1e-6:
            errors.append(
                {
                    "unit": "*",
                    "message": (
                        f"deltas are unbalanced by {total:+.3f} MW; balance them or "
                        "set allow_unbalanced"
                    ),
                }
            )
        if errors:
            raise WhatifError(errors)

        new_units = []
        for unit in snapshot.units:
            delta = deltas.get(unit.id, 0.0)
            if delta == 0.0:
                new_units.append(unit)
                continue
            output = min(max(unit.output_mw + delta, 0.0), unit.rated_mw)
            headroom = unit.rated_mw - output
            reserve = min(max(unit.spinning_reserve_mw - delta, 0.0), headroom)
            new_units.append(replace(unit, output_mw=output, spinning_reserve_mw=reserve))
        redispatched = replace(snapshot, units=tuple(new_units))
        violations = list(iter_violations(redispatched))
        if violations:
            raise WhatifError(
                [{"unit": v.subject, "message": v.message} for v in violations]
            )
        return redispatched

    def whatif(
        self,
        deltas: Mapping[str, float],
        scenario: ManualScenario | None = None,
        snapshot: SystemSnapshot | None = None,
        allow_unbalanced: bool = False,
    ) -> SimulationResult:
        """Test-mode simulation of a hypothetical redispatch.

        Runs the worst-case selection (or the supplied manual scenario)
        against a redispatched copy of the given or live snapshot. The
        result is labelled as a what-if, is not stored and does not touch
        the alarm state.
        """
        base = snapshot if snapshot is not None else self.latest_snapshot
        if base is None:
            raise WhatifError([{"unit": "*", "message": "no snapshot available"}])
        modified = self.apply_redispatch(base, deltas, allow_unbalanced=allow_unbalanced)
        ke_load = self.resolve_load_inertia(modified)
        if scenario is None:
            result = worst_case(modified, self.config.simulation, ke_load)
        else:
            result = self._run_manual(modified, scenario, ke_load)
        return replace(result, scenario_label=f"whatif:{result.scenario_label}")

    def _run_manual(
        self, snapshot: SystemSnapshot, manual: ManualScenario, ke_load: float
    ) -> SimulationResult:
        from .simulation import simulate

        if manual.trip_unit is not None:
            scn = build_scenario(
                snapshot, manual.trip_unit, stages=manual.stages, label=manual.label
            )
        elif manual.delta_p_cont is not None:
            scn = ContingencyScenario(
                base=snapshot,
                delta_p_cont=manual.delta_p_cont,
                label=manual.label or f"manual:{manual.delta_p_cont:+.0f}MW",
                stages=manual.stages,
            )
        else:
            raise WhatifError(
                [{"unit": "*", "message": "manual scenario needs trip_unit or delta_p_cont"}]
            )
        return simulate(scn, self.config.simulation, ke_load)

    # -- status -----------------------------------------------------------

    def status(self) -> dict[str, Any]:
        with self._lock:
            latest = self.latest_result
            snapshot = self.latest_snapshot
            now = self.clock()
            return {
                "status": "degraded" if self.degraded else "ok",
                "degraded": self.degraded,
                "degraded_reason": self.degraded_reason,
                "alarm": self.alarm,
                "last_cycle_time": self.last_cycle_time,
                "cycle_period_s": self.config.cycle_period_s,
                "poll_interval_s": self.config.poll_interval_s,
                "snapshot_timestamp": snapshot.timestamp.isoformat() if snapshot else None,
                "snapshot_age_s": (
                    now - snapshot.timestamp.timestamp() if snapshot else None
                ),
                "last_result": None
                if latest is None
                else {
                    "timestamp": latest.timestamp.isoformat(),
                    "scenario_label": latest.scenario_label,
                    "nadir_hz": latest.result.nadir_hz,
                    "alarm": latest.result.alarm,
                },
            }


def _newest_snapshot_file(directory: Path) -> Path | None:
    candidates = sorted(
        directory.glob("*.json"),
        key=lambda p: (p.stat().st_mtime, p.name),
    )
    return candidates[-1] if candidates else None


class ServiceRunner(threading.Thread):
    """Scheduler loop: snapshot polling plus periodic cycle execution.

    Polling only refreshes the in-memory snapshot; a full calculation runs
    when the configured cycle period has elapsed (immediately for the first
    snapshot seen). Subscribers receive status and new-result events.
    """

    def __init__(self, service: RtfsService):
        super().__init__(name="rtfs-scheduler", daemon=True)
        self.service = service
        self._stop_event = threading.Event()
        self._seen: tuple[str, float] | None = None
        self._pending: SystemSnapshot | None = None
        self._subscribers: list[queue.Queue] = []
        self._sub_lock = threading.Lock()
        self._last_cycle_at: float | None = None

    def stop(self) -> None:
        self._stop_event.set()

    def subscribe(self) -> "queue.Queue[dict[str, Any]]":
        q: queue.Queue = queue.Queue(maxsize=100)
        with self._sub_lock:
            self._subscribers.append(q)
        return q

    def unsubscribe(self, q: queue.Queue) -> None:
        with self._sub_lock:
            if q in self._subscribers:
                self._subscribers.remove(q)

    def publish(self, event_type: str, data: dict[str, Any]) -> None:
        with self._sub_lock:
            subscribers = list(self._subscribers)
        for q in subscribers:
            try:
                q.put_nowait({"type": event_type, "data": data})
            except queue.Full:
                pass  # slow consumer; it will resync from /status

    def poll_once(self) -> None:
        """One scheduler tick: refresh the snapshot, run the cycle if due."""
        service = self.service
        directory = service.config.snapshot_dir
        try:
            newest = _newest_snapshot_file(directory)
        except OSError as exc:
            service._degrade(f"snapshot directory unreadable: {exc}")
            newest = None
        if newest is not None:
            tag = (str(newest), newest.stat().st_mtime)
            if tag != self._seen:
                try:
                    self._pending = read_snapshot_file(newest)
                    self._seen = tag
                except (ParseError, SnapshotValidationError, OSError) as exc:
                    service._degrade(f"snapshot {newest.name} rejected: {exc}")
                    self._seen = tag

        now = service.clock()
        due = (
            self._last_cycle_at is None
            or now - self._last_cycle_at >= service.config.cycle_period_s
        )
        if due and self._pending is not None:
            self._last_cycle_at = now
            result = service.run_cycle(self._pending)
            if result is not None:
                self.publish("result", service.status()["last_result"])
        self.publish("status", self.service.status())

    def run(self) -> None:
        while not self._stop_event.is_set():
            started = time.monotonic()
            try:
                self.poll_once()
            except Exception:  # pragma: no cover - belt and braces
                logger.exception("scheduler tick failed")
            elapsed = time.monotonic() - started
            wait = max(self.service.config.poll_interval_s - elapsed, 0.01)
            self._stop_event.wait(wait)


def utc_now() -> datetime:
    return datetime.now(timezone.utc)
