"""File formats and persistence at the system boundary.

Three artifacts cross it:

- snapshot documents: one JSON object per telemetry snapshot (see
  ``SNAPSHOT_SCHEMA_VERSION``); unknown fields are rejected in strict mode
  and carried through untouched in lenient mode
- trace files: delimited text with a ``# key: value`` header carrying event
  id, start time, sample rate and channel names, then one row per sample of
  time offset and channel values; auditable fault-recorder exports
- the results store: append-only JSON-lines, one record per calculation,
  keyed by snapshot timestamp plus scenario label

Live telemetry protocol drivers are out of scope; the snapshot document is
the integration boundary.
"""

from __future__ import annotations

import json
import math
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .fleet import (
    FrequencyTrace,
    GeneratorUnit,
    SdrBlock,
    SdrTrip,
    SimulationResult,
    SystemSnapshot,
    validate_snapshot,
)

__all__ = [
    "ParseError",
    "SNAPSHOT_SCHEMA_VERSION",
    "RESULT_SCHEMA_VERSION",
    "parse_snapshot",
    "read_snapshot_file",
    "serialize_snapshot",
    "write_snapshot_file",
    "TraceFile",
    "parse_trace_file",
    "read_trace_file",
    "result_to_dict",
    "result_from_dict",
    "StoredResult",
    "ResultStore",
]

SNAPSHOT_SCHEMA_VERSION = 1
RESULT_SCHEMA_VERSION = 1


class ParseError(ValueError):
    """Malformed input document; the message names the offending field."""


# ---------------------------------------------------------------------------
# Snapshot documents
# ---------------------------------------------------------------------------

_UNIT_FIELDS: dict[str, tuple[str, Any]] = {
    # json name -> (attribute, default); REQUIRED means no default
    "id": ("id", ...),
    "rated_mw": ("rated_mw", ...),
    "output_mw": ("output_mw", ...),
    "kinetic_energy_mws": ("kinetic_energy", ...),
    "spinning_reserve_mw": ("spinning_reserve_mw", 0.0),
    "load_rejection_mw": ("load_rejection_mw", 0.0),
    "droop_enabled": ("droop_enabled", False),
    "gain": ("gain", 1.0),
    "time_constant_s": ("time_constant", 8.0),
    "mdrr_mw_per_s": ("mdrr", 0.0),
    "online": ("online", True),
}

_SDR_FIELDS: dict[str, tuple[str, Any]] = {
    "id": ("id", ...),
    "amount_mw": ("amount_mw", ...),
    "trip_frequency_hz": ("trip_frequency", ...),
    "pickup_delay_s": ("pickup_delay", 0.0),
    "armed": ("armed", True),
}


def _number(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"{where}: expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ParseError(f"{where}: non-finite number")
    return float(value)


def _boolean(value: Any, where: str) -> bool:
    if not isinstance(value, bool):
        raise ParseError(f"{where}: expected a boolean, got {value!r}")
    return value


def _string(value: Any, where: str) -> str:
    if not isinstance(value, str) or not value:
        raise ParseError(f"{where}: expected a non-empty string, got {value!r}")
    return value


def _timestamp(value: Any, where: str) -> datetime:
    text = _string(value, where)
    try:
        ts = datetime.fromisoformat(text.replace("Z", "+00:00"))
    except ValueError as exc:
        raise ParseError(f"{where}: not an ISO-8601 timestamp: {text!r}") from exc
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts


def _convert(value: Any, attr: str, where: str) -> Any:
    if attr in ("droop_enabled", "online", "armed"):
        return _boolean(value, where)
    if attr == "id":
        return _string(value, where)
    return _number(value, where)


def _parse_record(
    obj: Any, fields: Mapping[str, tuple[str, Any]], where: str, strict: bool
) -> dict[str, Any]:
    if not isinstance(obj, Mapping):
        raise ParseError(f"{where}: expected an object")
    kwargs: dict[str, Any] = {}
    for name, (attr, default) in fields.items():
        if name in obj:
            kwargs[attr] = _convert(obj[name], attr, f"{where}.{name}")
        elif default is ...:
            raise ParseError(f"{where}.{name}: required field is missing")
        else:
            kwargs[attr] = default
    if strict:
        unknown = set(obj) - set(fields)
        if unknown:
            raise ParseError(f"{where}: unknown fields {sorted(unknown)}")
    return kwargs


def parse_snapshot(
    document: str | bytes | Mapping[str, Any], strict: bool = False
) -> SystemSnapshot:
    """Parse and validate one snapshot document.

    Accepts a JSON string/bytes or an already-decoded mapping. Omitted
    optional fields take operational defaults (50 Hz nominal, relief factor
    2). Strict mode rejects unknown fields; lenient mode preserves them in
    ``snapshot.extras`` so round trips are lossless.
    """
    if isinstance(document, (str, bytes)):
        try:
            obj = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ParseError(f"document is not valid JSON: {exc}") from exc
    else:
        obj = document
    if not isinstance(obj, Mapping):
        raise ParseError("document root must be a JSON object")

    version = obj.get("schema_version")
    if version != SNAPSHOT_SCHEMA_VERSION:
        raise ParseError(
            f"schema_version: expected {SNAPSHOT_SCHEMA_VERSION}, got {version!r}"
        )

    known = {
        "schema_version",
        "timestamp",
        "system_load_mw",
        "pre_contingency_frequency_hz",
        "nominal_frequency_hz",
        "load_relief_factor",
        "load_inertia_override_mws",
        "units",
        "sdr_blocks",
    }
    unknown = set(obj) - known
    if strict and unknown:
        raise ParseError(f"unknown fields {sorted(unknown)}")

    for required in ("timestamp", "system_load_mw", "units"):
        if required not in obj:
            raise ParseError(f"{required}: required field is missing")

    units_obj = obj["units"]
    if not isinstance(units_obj, Sequence) or isinstance(units_obj, (str, bytes)):
        raise ParseError("units: expected an array")
    units = tuple(
        GeneratorUnit(**_parse_record(u, _UNIT_FIELDS, f"units[{i}]", strict))
        for i, u in enumerate(units_obj)
    )
    blocks_obj = obj.get("sdr_blocks", [])
    if not isinstance(blocks_obj, Sequence) or isinstance(blocks_obj, (str, bytes)):
        raise ParseError("sdr_blocks: expected an array")
    blocks = tuple(
        SdrBlock(**_parse_record(b, _SDR_FIELDS, f"sdr_blocks[{i}]", strict))
        for i, b in enumerate(blocks_obj)
    )

    nominal = _number(obj.get("nominal_frequency_hz", 50.0), "nominal_frequency_hz")
    override = obj.get("load_inertia_override_mws")
    snapshot = SystemSnapshot(
        timestamp=_timestamp(obj["timestamp"], "timestamp"),
        units=units,
        sdr_blocks=blocks,
        system_load_mw=_number(obj["system_load_mw"], "system_load_mw"),
        pre_contingency_frequency=_number(
            obj.get("pre_contingency_frequency_hz", nominal),
            "pre_contingency_frequency_hz",
        ),
        nominal_frequency=nominal,
        load_relief_factor=_number(obj.get("load_relief_factor", 2.0), "load_relief_factor"),
        load_inertia_override=None
        if override is None
        else _number(override, "load_inertia_override_mws"),
        extras={k: obj[k] for k in sorted(unknown)},
    )
    return validate_snapshot(snapshot)


def serialize_snapshot(snapshot: SystemSnapshot) -> dict[str, Any]:
    """Snapshot as a JSON-ready document; inverse of :func:`parse_snapshot`."""
    doc: dict[str, Any] = {
        "schema_version": SNAPSHOT_SCHEMA_VERSION,
        "timestamp": snapshot.timestamp.isoformat(),
        "system_load_mw": snapshot.system_load_mw,
        "pre_contingency_frequency_hz": snapshot.pre_contingency_frequency,
        "nominal_frequency_hz": snapshot.nominal_frequency,
        "load_relief_factor": snapshot.load_relief_factor,
        "load_inertia_override_mws": snapshot.load_inertia_override,
        "units": [
            {name: getattr(u, attr) for name, (attr, _) in _UNIT_FIELDS.items()}
            for u in snapshot.units
        ],
        "sdr_blocks": [
            {name: getattr(b, attr) for name, (attr, _) in _SDR_FIELDS.items()}
            for b in snapshot.sdr_blocks
        ],
    }
    doc.update(snapshot.extras)
    return doc


def read_snapshot_file(path: str | Path, strict: bool = False) -> SystemSnapshot:
    return parse_snapshot(Path(path).read_text(encoding="utf-8"), strict=strict)


def write_snapshot_file(snapshot: SystemSnapshot, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(serialize_snapshot(snapshot), indent=2) + "\n", encoding="utf-8"
    )


# ---------------------------------------------------------------------------
# Trace files
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TraceFile:
    """A parsed multi-channel recorder file on a uniform time grid."""

    event_id: str
    start_utc: datetime
    sample_rate_hz: float
    channel_names: tuple[str, ...]
    time_s: np.ndarray
    channels: Mapping[str, np.ndarray]

    def channel(self, name: str) -> np.ndarray:
        if name not in self.channels:
            raise ParseError(
                f"channel {name!r} not present; file has {list(self.channel_names)}"
            )
        return self.channels[name]

    def frequency_trace(self, name: str = "frequency_hz") -> FrequencyTrace:
        trace = FrequencyTrace(
            start_time=float(self.time_s[0]),
            time_step=1.0 / self.sample_rate_hz,
            samples=self.channel(name),
        )
        return trace.assert_plausible()


_HEADER_KEYS = {"event", "start", "sample_rate_hz", "channels"}


def parse_trace_file(text: str) -> TraceFile:
    """Parse a delimited trace file with a commented header.

    Timestamps must be strictly increasing. Grids uniform to within 1 ppm
    are taken as-is; jitter up to 1 ms is repaired by linear interpolation
    onto the declared-rate grid; anything worse is rejected.
    """
    header: dict[str, str] = {}
    rows: list[list[float]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if ":" not in body:
                raise ParseError(f"line {lineno}: malformed header line {raw!r}")
            key, _, value = body.partition(":")
            header[key.strip()] = value.strip()
            continue
        parts = line.split(",")
        try:
            rows.append([float(p) for p in parts])
        except ValueError as exc:
            raise ParseError(f"line {lineno}: non-numeric value in {raw!r}") from exc

    missing = _HEADER_KEYS - set(header)
    if missing:
        raise ParseError(f"header missing keys: {sorted(missing)}")
    names = tuple(n.strip() for n in header["channels"].split(",") if n.strip())
    if not names:
        raise ParseError("header channels: no channel names declared")
    if not _is_float(header["sample_rate_hz"]):
        raise ParseError(f"header sample_rate_hz: not a number: {header['sample_rate_hz']!r}")
    rate = float(header["sample_rate_hz"])
    if not math.isfinite(rate) or rate <= 0:
        raise ParseError("header sample_rate_hz: must be a positive number")
    if len(rows) < 2:
        raise ParseError("trace must contain at least two samples")
    width = 1 + len(names)
    for i, row in enumerate(rows):
        if len(row) != width:
            raise ParseError(
                f"data row {i}: expected {width} columns (time + {len(names)} channels), "
                f"got {len(row)}"
            )

    data = np.array(rows, dtype=float)
    t = data[:, 0]
    if np.any(np.diff(t) <= 0.0):
        bad = int(np.nonzero(np.diff(t) <= 0.0)[0][0]) + 1
        raise ParseError(f"data row {bad}: timestamps must be strictly increasing")

    dt = 1.0 / rate
    ideal = t[0] + dt * np.arange(t.size)
    deviation = float(np.abs(t - ideal).max())
    if deviation <= 1e-6 * dt:
        grid = t
        values = {name: data[:, 1 + i] for i, name in enumerate(names)}
    elif deviation <= 1e-3:
        grid = ideal
        values = {
            name: np.interp(ideal, t, data[:, 1 + i]) for i, name in enumerate(names)
        }
    else:
        raise ParseError(
            f"timestamps deviate from the declared {rate} samples/s grid by "
            f"{deviation * 1e3:.3f} ms (limit 1 ms)"
        )

    return TraceFile(
        event_id=header["event"],
        start_utc=_timestamp(header["start"], "header start"),
        sample_rate_hz=rate,
        channel_names=names,
        time_s=grid,
        channels=values,
    )


def _is_float(text: str) -> bool:
    try:
        float(text)
        return True
    except ValueError:
        return False


def read_trace_file(path: str | Path) -> TraceFile:
    return parse_trace_file(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# Results store
# ---------------------------------------------------------------------------

def result_to_dict(result: SimulationResult) -> dict[str, Any]:
    """Lossless JSON-ready form of a simulation result."""
    return {
        "frequency": {
            "start_time_s": result.frequency.start_time,
            "time_step_s": result.frequency.time_step,
            "samples_hz": result.frequency.samples.tolist(),
        },
        "nadir_hz": result.nadir_hz,
        "nadir_time_s": result.nadir_time,
        "per_unit_pfr_mw": {k: np.asarray(v).tolist() for k, v in result.per_unit_pfr.items()},
        "load_relief_mw": np.asarray(result.load_relief).tolist(),
        "sdr_tripped": [
            {"block_id": t.block_id, "time_s": t.time_s, "amount_mw": t.amount_mw}
            for t in result.sdr_tripped
        ],
        "total_imbalance_mw": np.asarray(result.total_imbalance).tolist(),
        "alarm": result.alarm,
        "scenario_label": result.scenario_label,
    }


def result_from_dict(obj: Mapping[str, Any]) -> SimulationResult:
    freq = obj["frequency"]
    return SimulationResult(
        frequency=FrequencyTrace(
            start_time=float(freq["start_time_s"]),
            time_step=float(freq["time_step_s"]),
            samples=np.array(freq["samples_hz"], dtype=float),
        ),
        nadir_hz=float(obj["nadir_hz"]),
        nadir_time=float(obj["nadir_time_s"]),
        per_unit_pfr={
            k: np.array(v, dtype=float) for k, v in obj["per_unit_pfr_mw"].items()
        },
        load_relief=np.array(obj["load_relief_mw"], dtype=float),
        sdr_tripped=tuple(
            SdrTrip(t["block_id"], float(t["time_s"]), float(t["amount_mw"]))
            for t in obj["sdr_tripped"]
        ),
        total_imbalance=np.array(obj["total_imbalance_mw"], dtype=float),
        alarm=bool(obj["alarm"]),
        scenario_label=str(obj["scenario_label"]),
    )


@dataclass(frozen=True)
class StoredResult:
    """One stored calculation with its operational context."""

    timestamp: datetime
    result: SimulationResult
    ke_gen_mws: float | None = None
    ke_load_mws: float | None = None

    @property
    def scenario_label(self) -> str:
        return self.result.scenario_label

    @property
    def ke_sys_mws(self) -> float | None:
        if self.ke_gen_mws is None or self.ke_load_mws is None:
            return None
        return self.ke_gen_mws + self.ke_load_mws


class ResultStore:
    """Append-only JSON-lines persistence of calculation results.

    Single writer, many readers: appends are serialized by a lock, reads
    re-scan the file. Records are keyed by snapshot timestamp plus scenario
    label; storing two results for the same instant under different labels
    retains both.
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()

    def store_result(
        self,
        result: SimulationResult,
        timestamp: datetime,
        ke_gen_mws: float | None = None,
        ke_load_mws: float | None = None,
    ) -> None:
        record = {
            "schema_version": RESULT_SCHEMA_VERSION,
            "timestamp": timestamp.isoformat(),
            "scenario_label": result.scenario_label,
            "ke_gen_mws": ke_gen_mws,
            "ke_load_mws": ke_load_mws,
            "result": result_to_dict(result),
        }
        line = json.dumps(record, separators=(",", ":"))
        with self._lock:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(line + "\n")

    def _iter_records(self) -> Iterable[StoredResult]:
        if not self.path.exists():
            return
        with self.path.open("r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise ParseError(f"{self.path}:{lineno}: corrupt record: {exc}") from exc
                if obj.get("schema_version") != RESULT_SCHEMA_VERSION:
                    raise ParseError(
                        f"{self.path}:{lineno}: unsupported schema_version "
                        f"{obj.get('schema_version')!r}"
                    )
                yield StoredResult(
                    timestamp=_timestamp(obj["timestamp"], "timestamp"),
                    result=result_from_dict(obj["result"]),
                    ke_gen_mws=obj.get("ke_gen_mws"),
                    ke_load_mws=obj.get("ke_load_mws"),
                )

    def load_history(
        self,
        start: datetime | None = None,
        end: datetime | None = None,
    ) -> list[StoredResult]:
        """All stored results whose timestamp falls within [start, end]."""
        out = []
        for record in self._iter_records():
            if start is not None and record.timestamp < start:
                continue
            if end is not None and record.timestamp > end:
                continue
            out.append(record)
        return out

    def latest(self) -> StoredResult | None:
        newest: StoredResult | None = None
        for record in self._iter_records():
            if newest is None or record.timestamp >= newest.timestamp:
                newest = record
        return newest
