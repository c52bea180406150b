"""HTTP API for the operator console and other clients.

Endpoints:

- ``GET /status``                 service health, cycle age, alarm state
- ``GET /result/latest``          most recent result, traces downsampled
- ``GET /result/history``         stored result metadata in a time window
- ``POST /whatif``                test-mode redispatch simulation
- ``GET /stream``                 server-sent events: status and new results

Traces are decimated to at most 1000 points for transport; decimation always
retains the extreme samples, so the served nadir sample is exact.
"""

from __future__ import annotations

import json
import queue
from datetime import datetime
from typing import Any, Iterator, Mapping

import numpy as np
from fastapi import FastAPI, HTTPException, Query
from fastapi.responses import StreamingResponse
from pydantic import BaseModel, Field

from .ingestion import StoredResult
from .service import ManualScenario, RtfsService, ServiceRunner, WhatifError

__all__ = ["create_app", "downsample_indices", "result_payload"]

MAX_TRACE_POINTS = 1000


def downsample_indices(n: int, max_points: int = MAX_TRACE_POINTS,
                       keep: tuple[int, ...] = ()) -> np.ndarray:
    """Indices of a decimated trace, always retaining the ``keep`` samples."""
    if n <= max_points:
        return np.arange(n)
    base = np.linspace(0, n - 1, max_points).round().astype(int)
    return np.unique(np.concatenate([base, np.asarray(keep, dtype=int)]))


def result_payload(
    stored: StoredResult, ufls_threshold: float, max_points: int = MAX_TRACE_POINTS
) -> dict[str, Any]:
    """JSON payload for one result with aligned, decimated traces."""
    result = stored.result
    freq = result.frequency
    samples = freq.samples
    keep = (int(np.argmin(samples)), int(np.argmax(samples)))
    idx = downsample_indices(samples.size, max_points, keep=keep)
    times = freq.times
    return {
        "timestamp": stored.timestamp.isoformat(),
        "scenario_label": result.scenario_label,
        "nadir_hz": result.nadir_hz,
        "nadir_time_s": result.nadir_time,
        "alarm": result.alarm,
        "ufls_threshold_hz": ufls_threshold,
        "ke_gen_mws": stored.ke_gen_mws,
        "ke_load_mws": stored.ke_load_mws,
        "ke_sys_mws": stored.ke_sys_mws,
        "frequency": {
            "time_s": times[idx].tolist(),
            "hz": samples[idx].tolist(),
        },
        "per_unit_pfr_mw": {
            unit_id: np.asarray(trace)[idx].tolist()
            for unit_id, trace in result.per_unit_pfr.items()
        },
        "load_relief_mw": np.asarray(result.load_relief)[idx].tolist(),
        "total_imbalance_mw": np.asarray(result.total_imbalance)[idx].tolist(),
        "sdr_tripped": [
            {"block_id": t.block_id, "time_s": t.time_s, "amount_mw": t.amount_mw}
            for t in result.sdr_tripped
        ],
    }


class ScenarioBody(BaseModel):
    trip_unit: str | None = None
    delta_p_cont: float | None = None
    stages: list[tuple[float, float]] = Field(default_factory=list)
    label: str | None = None


class WhatifBody(BaseModel):
    deltas: dict[str, float] = Field(default_factory=dict)
    scenario: ScenarioBody | None = None
    allow_unbalanced: bool = False


def _parse_iso(value: str | None, name: str) -> datetime | None:
    if value is None:
        return None
    try:
        return datetime.fromisoformat(value.replace("Z", "+00:00"))
    except ValueError:
        raise HTTPException(status_code=400, detail=f"{name}: not an ISO-8601 timestamp")


def create_app(service: RtfsService, runner: ServiceRunner | None = None) -> FastAPI:
    app = FastAPI(title="rtfs", version="0.1.0")

    console_dir = service.config.console_dir
    if console_dir is not None and console_dir.is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=console_dir, html=True), name="console")

    @app.get("/status")
    def status() -> dict[str, Any]:
        return service.status()

    @app.get("/result/latest")
    def latest() -> dict[str, Any]:
        stored = service.latest_result
        if stored is None:
            raise HTTPException(status_code=404, detail="no result available yet")
        return result_payload(stored, service.config.simulation.ufls_threshold)

    @app.get("/result/history")
    def history(
        from_: str | None = Query(default=None, alias="from"),
        to: str | None = Query(default=None),
    ) -> list[dict[str, Any]]:
        start = _parse_iso(from_, "from")
        end = _parse_iso(to, "to")
        records = service.store.load_history(start, end)
        return [
            {
                "timestamp": r.timestamp.isoformat(),
                "scenario_label": r.scenario_label,
                "nadir_hz": r.result.nadir_hz,
                "nadir_time_s": r.result.nadir_time,
                "alarm": r.result.alarm,
            }
            for r in records
        ]

    @app.post("/whatif")
    def whatif(body: WhatifBody) -> dict[str, Any]:
        manual = None
        if body.scenario is not None:
            manual = ManualScenario(
                trip_unit=body.scenario.trip_unit,
                delta_p_cont=body.scenario.delta_p_cont,
                stages=tuple(body.scenario.stages),
                label=body.scenario.label,
            )
        try:
            result = service.whatif(
                body.deltas, scenario=manual, allow_unbalanced=body.allow_unbalanced
            )
        except WhatifError as exc:
            raise HTTPException(status_code=422, detail={"errors": exc.errors})
        snapshot = service.latest_snapshot
        stored = StoredResult(
            timestamp=snapshot.timestamp if snapshot else datetime.now(),
            result=result,
        )
        return result_payload(stored, service.config.simulation.ufls_threshold)

    @app.get("/stream")
    def stream(
        max_events: int | None = Query(default=None, ge=1),
    ) -> StreamingResponse:
        """Server-sent events; ``max_events`` bounds the stream for probing."""
        if runner is None:
            raise HTTPException(status_code=503, detail="event stream not running")

        def events() -> Iterator[str]:
            q = runner.subscribe()
            sent = 0
            try:
                yield _sse("status", service.status())
                sent += 1
                while max_events is None or sent < max_events:
                    try:
                        event = q.get(timeout=2.0)
                    except queue.Empty:
                        yield ": keepalive\n\n"
                        continue
                    yield _sse(event["type"], event["data"])
                    sent += 1
            finally:
                runner.unsubscribe(q)

        return StreamingResponse(events(), media_type="text/event-stream")

    return app


def _sse(event_type: str, data: Mapping[str, Any] | None) -> str:
    return f"event: {event_type}\ndata: {json.dumps(data)}\n\n"
