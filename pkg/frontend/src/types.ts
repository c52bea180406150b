/** Payload shapes of the rtfs HTTP API. */

export interface StatusPayload {
  status: "ok" | "degraded";
  degraded: boolean;
  degraded_reason: string | null;
  alarm: boolean;
  last_cycle_time: number | null;
  cycle_period_s: number;
  poll_interval_s: number;
  snapshot_timestamp: string | null;
  snapshot_age_s: number | null;
  last_result: ResultSummary | null;
}

export interface ResultSummary {
  timestamp: string;
  scenario_label: string;
  nadir_hz: number;
  alarm: boolean;
}

export interface TracePayload {
  time_s: number[];
  hz: number[];
}

export interface SdrTripPayload {
  block_id: string;
  time_s: number;
  amount_mw: number;
}

export interface ResultPayload {
  timestamp: string;
  scenario_label: string;
  nadir_hz: number;
  nadir_time_s: number;
  alarm: boolean;
  ufls_threshold_hz: number;
  ke_gen_mws: number | null;
  ke_load_mws: number | null;
  ke_sys_mws: number | null;
  frequency: TracePayload;
  per_unit_pfr_mw: Record<string, number[]>;
  load_relief_mw: number[];
  total_imbalance_mw: number[];
  sdr_tripped: SdrTripPayload[];
}

export interface WhatifRequest {
  deltas: Record<string, number>;
  scenario?: {
    trip_unit?: string | null;
    delta_p_cont?: number | null;
    stages?: [number, number][];
    label?: string | null;
  } | null;
  allow_unbalanced?: boolean;
}

export interface WhatifDiagnostic {
  unit: string;
  message: string;
}

/** Minimal EventSource surface, injectable for tests. */
export interface EventStream {
  addEventListener(type: string, listener: (event: { data: string }) => void): void;
  close(): void;
  // `any` keeps the browser EventSource assignable despite its this-typing
  onerror: ((ev: any) => any) | null;
  onopen: ((ev: any) => any) | null;
}

export type EventStreamFactory = (url: string) => EventStream;

export type FetchLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<{ status: number; ok: boolean; json(): Promise<unknown> }>;
