"""Snapshot documents, trace files and the results store."""

import json
from datetime import datetime, timedelta, timezone

import numpy as np
import pytest

from rtfs import ContingencyScenario, SimulationConfig, simulate
from rtfs.ingestion import (
    ParseError,
    ResultStore,
    parse_snapshot,
    parse_trace_file,
    result_from_dict,
    result_to_dict,
    serialize_snapshot,
)

from conftest import TS, make_snapshot, make_unit

MINIMAL_DOC = {
    "schema_version": 1,
    "timestamp": "2026-08-10T01:00:00+00:00",
    "system_load_mw": 1900.0,
    "units": [
        {
            "id": "G1",
            "rated_mw": 400.0,
            "output_mw": 300.0,
            "kinetic_energy_mws": 9000.0,
        }
    ],
}


class TestParseSnapshot:
    def test_minimal_document_gets_defaults(self):
        snap = parse_snapshot(json.dumps(MINIMAL_DOC))
        assert snap.nominal_frequency == 50.0
        assert snap.pre_contingency_frequency == 50.0
        assert snap.load_relief_factor == 2.0
        assert snap.sdr_blocks == ()
        assert snap.load_inertia_override is None
        assert snap.units[0].online
        assert not snap.units[0].droop_enabled

    def test_malformed_numeric_field_named(self):
        doc = json.loads(json.dumps(MINIMAL_DOC))
        doc["units"][0]["rated_mw"] = "four hundred"
        with pytest.raises(ParseError, match=r"units\[0\].rated_mw"):
            parse_snapshot(doc)

    def test_missing_required_field_named(self):
        doc = json.loads(json.dumps(MINIMAL_DOC))
        del doc["units"][0]["output_mw"]
        with pytest.raises(ParseError, match=r"units\[0\].output_mw"):
            parse_snapshot(doc)

    def test_round_trip_identity(self):
        doc = dict(MINIMAL_DOC)
        doc["sdr_blocks"] = [
            {"id": "B1", "amount_mw": 40.0, "trip_frequency_hz": 49.0}
        ]
        snap = parse_snapshot(json.dumps(doc))
        again = parse_snapshot(json.dumps(serialize_snapshot(snap)))
        assert again == snap

    def test_strict_mode_rejects_unknown_fields(self):
        doc = dict(MINIMAL_DOC)
        doc["operator_note"] = "breaker work at 0200"
        with pytest.raises(ParseError, match="unknown fields"):
            parse_snapshot(doc, strict=True)

    def test_strict_mode_rejects_unknown_unit_fields(self):
        doc = json.loads(json.dumps(MINIMAL_DOC))
        doc["units"][0]["colour"] = "teal"
        with pytest.raises(ParseError, match=r"units\[0\].*colour"):
            parse_snapshot(doc, strict=True)
        parsed = parse_snapshot(doc)  # lenient mode tolerates it
        assert parsed.units[0].rated_mw == 400.0

    def test_lenient_mode_preserves_unknown_fields(self):
        doc = dict(MINIMAL_DOC)
        doc["operator_note"] = "breaker work at 0200"
        snap = parse_snapshot(doc)
        assert snap.extras["operator_note"] == "breaker work at 0200"
        assert serialize_snapshot(snap)["operator_note"] == "breaker work at 0200"

    def test_validation_failures_propagate(self):
        from rtfs import SnapshotValidationError

        doc = json.loads(json.dumps(MINIMAL_DOC))
        doc["units"][0]["output_mw"] = 500.0  # above rating
        with pytest.raises(SnapshotValidationError):
            parse_snapshot(doc)

    def test_wrong_schema_version_rejected(self):
        doc = dict(MINIMAL_DOC)
        doc["schema_version"] = 99
        with pytest.raises(ParseError, match="schema_version"):
            parse_snapshot(doc)

    def test_not_json_rejected(self):
        with pytest.raises(ParseError, match="JSON"):
            parse_snapshot("{nope")

    def test_timestamp_z_suffix_accepted(self):
        doc = dict(MINIMAL_DOC)
        doc["timestamp"] = "2026-08-10T01:00:00Z"
        snap = parse_snapshot(doc)
        assert snap.timestamp == datetime(2026, 8, 10, 1, 0, tzinfo=timezone.utc)


def trace_text(rows: list[str], rate: float = 50.0,
               channels: str = "frequency_hz,output_mw") -> str:
    header = [
        "# event: EVT-1",
        "# start: 2026-02-08T14:03:22Z",
        f"# sample_rate_hz: {rate}",
        f"# channels: {channels}",
    ]
    return "\n".join(header + rows) + "\n"


class TestParseTraceFile:
    def test_uniform_trace_parsed(self):
        rows = [f"{k * 0.02:.6f},{50.0 - 0.01 * k:.5f},{100.0 + k:.2f}" for k in range(100)]
        tf = parse_trace_file(trace_text(rows))
        assert tf.event_id == "EVT-1"
        assert tf.sample_rate_hz == 50.0
        assert tf.channel_names == ("frequency_hz", "output_mw")
        trace = tf.frequency_trace()
        assert trace.time_step == pytest.approx(0.02)
        assert len(trace) == 100
        assert tf.channel("output_mw")[3] == pytest.approx(103.0)

    def test_duplicate_timestamp_rejected(self):
        rows = ["0.00,50.0,1.0", "0.02,50.0,1.0", "0.02,50.0,1.0"]
        with pytest.raises(ParseError, match="strictly increasing"):
            parse_trace_file(trace_text(rows))

    def test_missing_channel_rejected(self):
        rows = [f"{k * 0.02:.4f},50.0,1.0" for k in range(40)]
        tf = parse_trace_file(trace_text(rows))
        with pytest.raises(ParseError, match="not present"):
            tf.channel("voltage_kv")

    def test_small_jitter_resampled(self):
        rng = np.random.default_rng(1)
        times = 0.02 * np.arange(200) + rng.uniform(-4e-4, 4e-4, size=200)
        times[0] = 0.0
        rows = [f"{t:.6f},{50.0 - 0.05 * t:.6f},0.0" for t in times]
        tf = parse_trace_file(trace_text(rows))
        assert np.allclose(np.diff(tf.time_s), 0.02)
        slope = np.polyfit(tf.time_s, tf.channel("frequency_hz"), 1)[0]
        assert slope == pytest.approx(-0.05, rel=0.01)

    def test_large_jitter_rejected(self):
        times = 0.02 * np.arange(100)
        times[50] += 0.01  # 10 ms off the grid
        rows = [f"{t:.6f},50.0,0.0" for t in times]
        with pytest.raises(ParseError, match="deviate"):
            parse_trace_file(trace_text(rows))

    def test_rate_mismatch_rejected(self):
        rows = [f"{k * 0.04:.4f},50.0,0.0" for k in range(100)]  # actually 25 Hz
        with pytest.raises(ParseError, match="deviate"):
            parse_trace_file(trace_text(rows))

    def test_header_required(self):
        with pytest.raises(ParseError, match="header missing"):
            parse_trace_file("0.0,50.0\n0.02,50.0\n")

    def test_non_numeric_cell_rejected(self):
        rows = ["0.00,50.0,1.0", "0.02,fifty,1.0"]
        with pytest.raises(ParseError, match="non-numeric"):
            parse_trace_file(trace_text(rows))

    def test_column_count_enforced(self):
        rows = ["0.00,50.0,1.0", "0.02,50.0"]
        with pytest.raises(ParseError, match="columns"):
            parse_trace_file(trace_text(rows))

    def test_implausible_frequency_rejected_at_trace_construction(self):
        rows = [f"{k * 0.02:.4f},{30.0},0.0" for k in range(40)]
        tf = parse_trace_file(trace_text(rows))
        with pytest.raises(ValueError, match="plausible"):
            tf.frequency_trace()


def small_result():
    snap = make_snapshot(
        (make_unit("G1", rated_mw=800.0, output_mw=500.0, kinetic_energy=12000.0),),
        load_relief_factor=2.0,
    )
    scn = ContingencyScenario(base=snap, delta_p_cont=-180.0, label="trip:G1[test]")
    return simulate(scn, SimulationConfig(time_step=0.02, horizon=12.0), ke_load=2500.0)


class TestResultSerialization:
    def test_round_trip_lossless(self):
        result = small_result()
        clone = result_from_dict(json.loads(json.dumps(result_to_dict(result))))
        assert clone.nadir_hz == result.nadir_hz
        assert clone.nadir_time == result.nadir_time
        assert clone.alarm == result.alarm
        assert clone.scenario_label == result.scenario_label
        assert clone.frequency == result.frequency
        assert np.array_equal(clone.load_relief, result.load_relief)
        assert np.array_equal(clone.total_imbalance, result.total_imbalance)
        assert clone.sdr_tripped == result.sdr_tripped
        assert set(clone.per_unit_pfr) == set(result.per_unit_pfr)


class TestResultStore:
    def test_store_then_load_window(self, tmp_path):
        store = ResultStore(tmp_path / "results.jsonl")
        result = small_result()
        store.store_result(result, TS, ke_gen_mws=12000.0, ke_load_mws=2500.0)
        records = store.load_history(TS - timedelta(minutes=1), TS + timedelta(minutes=1))
        assert len(records) == 1
        assert records[0].scenario_label == "trip:G1[test]"
        assert records[0].ke_sys_mws == pytest.approx(14500.0)
        assert records[0].result.nadir_hz == pytest.approx(result.nadir_hz)

    def test_empty_window(self, tmp_path):
        store = ResultStore(tmp_path / "results.jsonl")
        store.store_result(small_result(), TS)
        assert store.load_history(TS + timedelta(hours=1), TS + timedelta(hours=2)) == []

    def test_same_timestamp_different_labels_both_retained(self, tmp_path):
        store = ResultStore(tmp_path / "results.jsonl")
        result = small_result()
        store.store_result(result, TS)
        from dataclasses import replace

        store.store_result(replace(result, scenario_label="trip:G1[other]"), TS)
        records = store.load_history()
        assert len(records) == 2
        assert {r.scenario_label for r in records} == {
            "trip:G1[test]", "trip:G1[other]",
        }

    def test_latest(self, tmp_path):
        store = ResultStore(tmp_path / "results.jsonl")
        assert store.latest() is None
        result = small_result()
        store.store_result(result, TS)
        store.store_result(result, TS + timedelta(minutes=5))
        assert store.latest().timestamp == TS + timedelta(minutes=5)

    def test_missing_file_is_empty_history(self, tmp_path):
        store = ResultStore(tmp_path / "nothing.jsonl")
        assert store.load_history() == []

    def test_history_survives_process_restart(self, tmp_path):
        path = tmp_path / "results.jsonl"
        ResultStore(path).store_result(small_result(), TS, ke_gen_mws=12000.0)
        reopened = ResultStore(path)  # fresh instance, same file
        records = reopened.load_history()
        assert len(records) == 1
        assert records[0].ke_gen_mws == 12000.0
