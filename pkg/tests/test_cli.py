"""Command-line interface smoke tests."""

import json

import numpy as np
import pytest
from click.testing import CliRunner

from rtfs.cli import main
from rtfs.ingestion import serialize_snapshot

from conftest import make_snapshot, pfr_fleet_units


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def snapshot_file(tmp_path):
    path = tmp_path / "snapshot.json"
    path.write_text(json.dumps(serialize_snapshot(make_snapshot(pfr_fleet_units()))))
    return path


def write_trace(path, rows, channels="frequency_hz,output_mw", rate=50.0):
    header = [
        "# event: EVT-CLI",
        "# start: 2026-02-08T14:03:22Z",
        f"# sample_rate_hz: {rate}",
        f"# channels: {channels}",
    ]
    path.write_text("\n".join(header + rows) + "\n")
    return path


class TestSimulateCommand:
    def test_worst_case_summary(self, runner, snapshot_file):
        result = runner.invoke(main, ["simulate", "--snapshot", str(snapshot_file)])
        assert result.exit_code == 0, result.output
        body = json.loads(result.output)
        assert body["scenario_label"].startswith("trip:")
        assert 48.0 < body["nadir_hz"] < 50.0

    def test_named_unit_and_output_file(self, runner, snapshot_file, tmp_path):
        out = tmp_path / "result.json"
        result = runner.invoke(
            main,
            ["simulate", "--snapshot", str(snapshot_file), "--unit", "CC1",
             "--output", str(out)],
        )
        assert result.exit_code == 0, result.output
        assert "CC1" in json.loads(result.output)["scenario_label"]
        full = json.loads(out.read_text())
        assert len(full["frequency"]["samples_hz"]) == 6001


class TestEstimateInertiaCommand:
    def test_ramp_trace(self, runner, tmp_path):
        dt = 0.02
        rows = [f"{k * dt:.4f},{50.0 - 0.4 * k * dt:.6f},0.0" for k in range(int(15 / dt))]
        trace = write_trace(tmp_path / "trace.csv", rows)
        result = runner.invoke(
            main, ["estimate-inertia", "--trace", str(trace), "--delta-p", "300"]
        )
        assert result.exit_code == 0, result.output
        body = json.loads(result.output)
        assert body["ke_sys_mws"] == pytest.approx(0.5 * 50 * 300 / 0.4, rel=1e-3)


class TestCalibrateCommands:
    def test_lrf(self, runner, tmp_path):
        dt = 0.02
        n = 2000
        t = np.arange(n) * dt
        dev = 4.0 * (1 - np.exp(-t / 3.0)) * np.exp(-t / 25.0)
        load = 2000.0 * (1 - 2.0 * dev / 50.0)
        rows = [f"{tt:.4f},{50 - d:.6f},{p:.4f}" for tt, d, p in zip(t, dev, load)]
        trace = write_trace(tmp_path / "lrf.csv", rows, channels="frequency_hz,load_mw")
        result = runner.invoke(
            main, ["calibrate", "lrf", "--input", str(trace), "--p-load0", "2000"]
        )
        assert result.exit_code == 0, result.output
        assert json.loads(result.output)["k_p"] == pytest.approx(2.0, abs=1e-3)

    def test_lag(self, runner, tmp_path):
        from rtfs import FrequencyTrace, UnitPfrParams, replay_unit_response

        dt = 0.05
        t = np.arange(0.0, 38.0 + dt / 2, dt)
        te = np.maximum(t - 3.0, 0.0)  # recorder captures 3 s of pre-event data
        freq = FrequencyTrace(
            start_time=0.0, time_step=dt,
            samples=50.0 - 0.8 * (np.exp(-te / 12.0) - np.exp(-te / 1.5)),
        )
        params = UnitPfrParams(rated_mw=300.0, spinning_reserve_mw=100.0, mdrr=30.0)
        response = replay_unit_response(freq, params, gain=0.9, time_constant=4.0)
        rows = [
            f"{tt:.4f},{f:.6f},{180.0 + r:.5f}"
            for tt, f, r in zip(t, freq.samples, response)
        ]
        trace = write_trace(tmp_path / "lag.csv", rows, rate=20.0)
        result = runner.invoke(
            main,
            ["calibrate", "lag", "--input", str(trace), "--rated-mw", "300",
             "--reserve-mw", "100", "--mdrr", "30"],
        )
        assert result.exit_code == 0, result.output
        body = json.loads(result.output)
        assert body["gain"] == pytest.approx(0.9, rel=0.05)
        assert body["time_constant_s"] == pytest.approx(4.0, rel=0.05)
        assert body["converged"]


class TestCalibrateInertiaCommand:
    def test_fits_model_from_event_manifest(self, runner, tmp_path):
        # three synthetic trips whose load inertia follows ke = 2.1*(P - 750)
        events = []
        for i, load in enumerate((1400.0, 2000.0, 2600.0)):
            ke_load = 2.1 * (load - 750.0)
            ke_gen = 9000.0 + 400.0 * i
            ke_sys = ke_gen + ke_load
            rocof = 0.45
            delta_p = rocof * 2.0 * ke_sys / 50.0
            dt = 0.02
            pre = [50.0] * int(2.5 / dt)
            post = [50.0 - rocof * k * dt for k in range(int(12.0 / dt))]
            samples = pre + post
            rows = [f"{k * dt:.4f},{f:.6f}" for k, f in enumerate(samples)]
            name = f"evt{i}.csv"
            write_trace(tmp_path / name, rows, channels="frequency_hz")
            events.append(
                {
                    "trace": name,
                    "delta_p_mw": delta_p,
                    "pre_event_load_mw": load,
                    "ke_gen_mws": ke_gen,
                    "event_time_s": 2.5,
                }
            )
        manifest = tmp_path / "events.json"
        manifest.write_text(json.dumps({"events": events}))
        result = runner.invoke(main, ["calibrate", "inertia", "--input", str(manifest)])
        assert result.exit_code == 0, result.output
        body = json.loads(result.output)
        assert body["sample_count"] == 3
        assert body["slope_mws_per_mw"] == pytest.approx(2.1, rel=0.05)
        assert body["intercept_load_mw"] == pytest.approx(750.0, rel=0.1)


class TestHistoryCommand:
    def test_lists_stored_results(self, runner, tmp_path, snapshot_file):
        from datetime import datetime, timezone

        from rtfs import SimulationConfig, worst_case
        from rtfs.ingestion import ResultStore, read_snapshot_file

        snap = read_snapshot_file(snapshot_file)
        result = worst_case(snap, SimulationConfig(horizon=20.0), 2516.4)
        store = ResultStore(tmp_path / "results.jsonl")
        store.store_result(result, datetime(2026, 8, 10, tzinfo=timezone.utc))
        out = runner.invoke(main, ["history", "--results", str(tmp_path / "results.jsonl")])
        assert out.exit_code == 0, out.output
        assert "nadir" in out.output
        assert "trip:" in out.output
