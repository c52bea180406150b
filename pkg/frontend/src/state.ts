/**
 * Console state: a small store with pure transitions.
 *
 * The rendered nadir always comes from the result's nadir_hz field; it is
 * never recomputed from the (downsampled) trace points.
 */

import type { ResultPayload, StatusPayload } from "./types.js";

export type BannerState = "ok" | "alarm" | "degraded" | "stale" | "disconnected";

export interface ConsoleState {
  status: StatusPayload | null;
  result: ResultPayload | null;
  overlay: ResultPayload | null; // what-if result shown on top, test mode only
  connected: boolean;
  lastEventAt: number | null; // ms epoch of the last stream event
  stale: boolean;
}

export const initialState: ConsoleState = {
  status: null,
  result: null,
  overlay: null,
  connected: false,
  lastEventAt: null,
  stale: false,
};

export type Listener = (state: ConsoleState) => void;

export class ConsoleStore {
  private state: ConsoleState = { ...initialState };
  private listeners: Listener[] = [];

  get(): ConsoleState {
    return this.state;
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private commit(next: ConsoleState): void {
    this.state = next;
    for (const listener of this.listeners) listener(next);
  }

  applyStatus(status: StatusPayload, now: number): void {
    this.commit({
      ...this.state,
      status,
      connected: true,
      lastEventAt: now,
      stale: false,
    });
  }

  applyResult(result: ResultPayload, now: number): void {
    this.commit({
      ...this.state,
      result,
      connected: true,
      lastEventAt: now,
      stale: false,
    });
  }

  /** A what-if response; rendered as an overlay and never as operational data. */
  applyOverlay(overlay: ResultPayload | null): void {
    this.commit({ ...this.state, overlay });
  }

  setConnected(connected: boolean): void {
    this.commit({ ...this.state, connected });
  }

  /**
   * Mark the view stale when no stream event arrived for more than two
   * refresh intervals; call periodically with the current time.
   */
  checkStaleness(now: number, refreshIntervalS: number): void {
    const stale =
      this.state.lastEventAt !== null &&
      now - this.state.lastEventAt > 2 * refreshIntervalS * 1000;
    if (stale !== this.state.stale) this.commit({ ...this.state, stale });
  }
}

export interface ViewModel {
  banner: BannerState;
  bannerText: string;
  nadirHz: number | null; // exact nadir_hz field of the latest result
  nadirTimeS: number | null;
  scenarioLabel: string;
  alarmAudible: boolean;
  keGen: number | null;
  keLoad: number | null;
  keSys: number | null;
  cycleAgeS: number | null;
  lastGoodTimestamp: string | null;
}

export function deriveViewModel(state: ConsoleState): ViewModel {
  const result = state.result;
  const status = state.status;
  const alarm = (status?.alarm ?? false) || (result?.alarm ?? false);

  let banner: BannerState = "ok";
  let bannerText = "System secure";
  if (!state.connected) {
    banner = "disconnected";
    bannerText = "STREAM DISCONNECTED - showing last known data";
  } else if (state.stale) {
    banner = "stale";
    bannerText = "STALE DATA - no update from the service";
  } else if (alarm) {
    banner = "alarm";
    bannerText = "ALARM - predicted nadir breaches the load-shedding threshold";
  } else if (status?.degraded) {
    banner = "degraded";
    bannerText = `DEGRADED - ${status.degraded_reason ?? "reason unknown"}`;
  }

  return {
    banner,
    bannerText,
    nadirHz: result ? result.nadir_hz : null,
    nadirTimeS: result ? result.nadir_time_s : null,
    scenarioLabel: result?.scenario_label ?? "",
    alarmAudible: banner === "alarm",
    keGen: result?.ke_gen_mws ?? null,
    keLoad: result?.ke_load_mws ?? null,
    keSys: result?.ke_sys_mws ?? null,
    cycleAgeS: status?.snapshot_age_s ?? null,
    lastGoodTimestamp: result?.timestamp ?? status?.snapshot_timestamp ?? null,
  };
}
