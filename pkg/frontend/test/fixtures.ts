import type { ResultPayload, StatusPayload } from "../src/types.js";

export function statusPayload(overrides: Partial<StatusPayload> = {}): StatusPayload {
  return {
    status: "ok",
    degraded: false,
    degraded_reason: null,
    alarm: false,
    last_cycle_time: 1_700_000_000,
    cycle_period_s: 300,
    poll_interval_s: 4,
    snapshot_timestamp: "2026-08-10T01:00:00+00:00",
    snapshot_age_s: 2.5,
    last_result: {
      timestamp: "2026-08-10T01:00:00+00:00",
      scenario_label: "trip:GT1[largest-mw]",
      nadir_hz: 49.41,
      alarm: false,
    },
    ...overrides,
  };
}

export function resultPayload(overrides: Partial<ResultPayload> = {}): ResultPayload {
  return {
    timestamp: "2026-08-10T01:00:00+00:00",
    scenario_label: "trip:GT1[largest-mw]",
    nadir_hz: 49.412345,
    nadir_time_s: 3.87,
    alarm: false,
    ufls_threshold_hz: 48.75,
    ke_gen_mws: 11500,
    ke_load_mws: 2516.4,
    ke_sys_mws: 14016.4,
    frequency: {
      time_s: [0, 1, 2, 3, 4, 5, 6],
      hz: [50, 49.8, 49.6, 49.45, 49.42, 49.5, 49.6],
    },
    per_unit_pfr_mw: { CC1: [0, 5, 12, 20, 26, 30, 31], GT2: [0, 2, 6, 10, 13, 15, 16] },
    load_relief_mw: [0, 10, 20, 27, 29, 25, 20],
    total_imbalance_mw: [-244, -200, -150, -80, -20, 10, 5],
    sdr_tripped: [],
    ...overrides,
  };
}
