"""Command-line entry points."""

from __future__ import annotations

import json
from pathlib import Path

import click

from .calibration import (
    UnitEventTrace,
    UnitPfrParams,
    baseline_output,
    estimate_lrf,
    fit_unit_lag,
)
from .contingency import build_scenario, worst_case
from .inertia import (
    DisturbanceRecord,
    estimate_system_inertia,
    fit_load_inertia_model,
    load_inertia_from_event,
    max_rocof,
)
from .ingestion import ResultStore, read_snapshot_file, read_trace_file, result_to_dict
from .service import RtfsService, ServiceRunner, load_service_config
from .simulation import simulate


@click.group()
def main() -> None:
    """Real-time frequency stability tool."""


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--host", default=None, help="Override the configured bind host.")
@click.option("--port", default=None, type=int, help="Override the configured port.")
def serve(config_path: str, host: str | None, port: int | None) -> None:
    """Run the periodic calculation service and its HTTP API."""
    import uvicorn

    from .api import create_app

    config = load_service_config(config_path)
    service = RtfsService(config)
    runner = ServiceRunner(service)
    runner.start()
    app = create_app(service, runner)
    try:
        uvicorn.run(
            app,
            host=host or config.host,
            port=port or config.port,
            log_level="warning",
        )
    finally:
        runner.stop()


@main.command("simulate")
@click.option("--snapshot", "snapshot_path", required=True, type=click.Path(exists=True))
@click.option("--unit", "unit_id", default=None, help="Trip this unit instead of the worst case.")
@click.option("--ke-load", default=None, type=float, help="Load inertia MW.s (else modelled).")
@click.option("--output", "output_path", default=None, type=click.Path(),
              help="Write the full result JSON here.")
def simulate_cmd(
    snapshot_path: str, unit_id: str | None, ke_load: float | None, output_path: str | None
) -> None:
    """Simulate one snapshot and print the nadir summary."""
    from .fleet import SimulationConfig
    from .inertia import predict_load_inertia

    snapshot = read_snapshot_file(snapshot_path)
    config = SimulationConfig()
    if ke_load is None:
        if snapshot.load_inertia_override is not None:
            ke_load = snapshot.load_inertia_override
        else:
            ke_load = predict_load_inertia(snapshot.system_load_mw)
    if unit_id is None:
        result = worst_case(snapshot, config, ke_load)
    else:
        result = simulate(build_scenario(snapshot, unit_id), config, ke_load)
    summary = {
        "scenario_label": result.scenario_label,
        "nadir_hz": round(result.nadir_hz, 4),
        "nadir_time_s": round(result.nadir_time, 3),
        "alarm": result.alarm,
        "ke_load_mws": round(ke_load, 1),
        "sdr_tripped": [t._asdict() for t in result.sdr_tripped],
    }
    click.echo(json.dumps(summary, indent=2))
    if output_path:
        Path(output_path).write_text(json.dumps(result_to_dict(result), indent=2))


@main.command("estimate-inertia")
@click.option("--trace", "trace_path", required=True, type=click.Path(exists=True))
@click.option("--delta-p", required=True, type=float, help="Lost generation, MW.")
@click.option("--channel", default="frequency_hz")
@click.option("--f-n", default=50.0, type=float)
@click.option("--window", default=0.5, type=float, help="RoCoF smoothing window, s.")
@click.option("--event-time", default=2.0, type=float, help="Event offset in the trace, s.")
def estimate_inertia_cmd(
    trace_path: str, delta_p: float, channel: str, f_n: float, window: float,
    event_time: float,
) -> None:
    """Estimate system inertia from one recorded generator trip."""
    trace_file = read_trace_file(trace_path)
    trace = trace_file.frequency_trace(channel)
    record = DisturbanceRecord(
        event_id=trace_file.event_id,
        frequency=trace,
        delta_p_mw=delta_p,
        pre_event_load_mw=0.0,
        ke_gen_at_event=0.0,
        event_time_s=event_time,
    )
    ke_sys = estimate_system_inertia(record, f_n=f_n, window=window)
    click.echo(
        json.dumps(
            {
                "event": trace_file.event_id,
                "max_rocof_hz_per_s": round(max_rocof(trace, window), 5),
                "ke_sys_mws": round(ke_sys, 1),
            },
            indent=2,
        )
    )


@main.group()
def calibrate() -> None:
    """Parameter calibration from recorded event data."""


@calibrate.command("lag")
@click.option("--input", "trace_path", required=True, type=click.Path(exists=True))
@click.option("--rated-mw", required=True, type=float)
@click.option("--reserve-mw", required=True, type=float)
@click.option("--mdrr", required=True, type=float, help="Maximum droop ramp rate, MW/s.")
@click.option("--freq-channel", default="frequency_hz")
@click.option("--mw-channel", default="output_mw")
@click.option("--pre-event-mw", default=None, type=float,
              help="Baseline output; default is the mean over the 2 s before onset.")
def calibrate_lag_cmd(
    trace_path: str, rated_mw: float, reserve_mw: float, mdrr: float,
    freq_channel: str, mw_channel: str, pre_event_mw: float | None,
) -> None:
    """Fit a unit's governor gain and lag time constant."""
    trace_file = read_trace_file(trace_path)
    freq = trace_file.frequency_trace(freq_channel)
    output = trace_file.channel(mw_channel)
    params = UnitPfrParams(rated_mw=rated_mw, spinning_reserve_mw=reserve_mw, mdrr=mdrr)
    if pre_event_mw is None:
        pre_event_mw = baseline_output(freq, output, params)
    trace = UnitEventTrace(
        unit_id=trace_file.event_id,
        frequency=freq,
        output_mw=output,
        pre_event_output_mw=pre_event_mw,
        params=params,
    )
    fit = fit_unit_lag(trace)
    click.echo(
        json.dumps(
            {
                "gain": round(fit.gain, 4),
                "time_constant_s": round(fit.time_constant, 4),
                "sse_mw2": round(fit.sse, 3),
                "converged": fit.converged,
                "diagnostic": fit.diagnostic,
            },
            indent=2,
        )
    )


@calibrate.command("lrf")
@click.option("--input", "trace_path", required=True, type=click.Path(exists=True))
@click.option("--p-load0", required=True, type=float)
@click.option("--freq-channel", default="frequency_hz")
@click.option("--load-channel", default="load_mw")
@click.option("--f-n", default=50.0, type=float)
def calibrate_lrf_cmd(
    trace_path: str, p_load0: float, freq_channel: str, load_channel: str, f_n: float
) -> None:
    """Estimate the load relief factor from one event recording."""
    trace_file = read_trace_file(trace_path)
    freq = trace_file.channel(freq_channel)
    load = trace_file.channel(load_channel)
    estimate = estimate_lrf(list(zip(freq, load)), p_load0, f_n=f_n)
    click.echo(json.dumps({"k_p": round(estimate.k_p, 4), "r2": round(estimate.r2, 4)}, indent=2))


@calibrate.command("inertia")
@click.option("--input", "manifest_path", required=True, type=click.Path(exists=True),
              help="JSON manifest listing events: trace file, delta_p_mw, "
                   "pre_event_load_mw, ke_gen_mws.")
@click.option("--f-n", default=50.0, type=float)
@click.option("--min-load", default=None, type=float,
              help="Fit only events at or below this pre-event load (cluster selection).")
def calibrate_inertia_cmd(manifest_path: str, f_n: float, min_load: float | None) -> None:
    """Fit the load-inertia model from a set of recorded trips."""
    manifest = json.loads(Path(manifest_path).read_text(encoding="utf-8"))
    root = Path(manifest_path).parent
    samples = []
    for entry in manifest["events"]:
        trace_file = read_trace_file(root / entry["trace"])
        record = DisturbanceRecord(
            event_id=trace_file.event_id,
            frequency=trace_file.frequency_trace(entry.get("channel", "frequency_hz")),
            delta_p_mw=float(entry["delta_p_mw"]),
            pre_event_load_mw=float(entry["pre_event_load_mw"]),
            ke_gen_at_event=float(entry["ke_gen_mws"]),
            event_time_s=float(entry.get("event_time_s", 2.0)),
        )
        ke_sys = estimate_system_inertia(record, f_n=f_n)
        estimate = load_inertia_from_event(ke_sys, record.ke_gen_at_event)
        samples.append((record.pre_event_load_mw, estimate.ke_load_mws))
    subset = None if min_load is None else (lambda p, _ke: p <= min_load)
    model = fit_load_inertia_model(samples, subset=subset)
    click.echo(
        json.dumps(
            {
                "slope_mws_per_mw": round(model.slope, 4),
                "intercept_load_mw": round(model.intercept_load_mw, 1),
                "r2": round(model.fit_r2, 4),
                "sample_count": model.sample_count,
            },
            indent=2,
        )
    )


@main.command("history")
@click.option("--results", "results_path", required=True, type=click.Path(exists=True))
@click.option("--from", "from_ts", default=None)
@click.option("--to", "to_ts", default=None)
def history_cmd(results_path: str, from_ts: str | None, to_ts: str | None) -> None:
    """List stored results in a time window."""
    from datetime import datetime

    store = ResultStore(results_path)
    start = datetime.fromisoformat(from_ts.replace("Z", "+00:00")) if from_ts else None
    end = datetime.fromisoformat(to_ts.replace("Z", "+00:00")) if to_ts else None
    for record in store.load_history(start, end):
        click.echo(
            f"{record.timestamp.isoformat()}  {record.scenario_label:40s}  "
            f"nadir {record.result.nadir_hz:.3f} Hz  alarm={record.result.alarm}"
        )


if __name__ == "__main__":
    main()
