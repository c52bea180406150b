import { describe, expect, it } from "vitest";

import { ConsoleStore, deriveViewModel } from "../src/state.js";
import { resultPayload, statusPayload } from "./fixtures.js";

describe("ConsoleStore", () => {
  it("notifies synchronously when a result arrives", () => {
    const store = new ConsoleStore();
    let renders = 0;
    store.subscribe(() => renders++);
    store.applyResult(resultPayload(), 1000);
    expect(renders).toBe(1); // same tick as the stream event, no deferral
    expect(store.get().result?.nadir_hz).toBe(49.412345);
  });

  it("keeps the last result when the connection drops", () => {
    const store = new ConsoleStore();
    store.applyResult(resultPayload(), 1000);
    store.setConnected(false);
    expect(store.get().result).not.toBeNull();
    expect(store.get().connected).toBe(false);
  });

  it("marks the view stale after two refresh intervals without events", () => {
    const store = new ConsoleStore();
    store.applyStatus(statusPayload(), 10_000);
    store.checkStaleness(10_000 + 2 * 4_000, 4); // exactly 2 intervals: not yet
    expect(store.get().stale).toBe(false);
    store.checkStaleness(10_000 + 2 * 4_000 + 1, 4);
    expect(store.get().stale).toBe(true);
    store.applyStatus(statusPayload(), 20_000); // fresh event clears it
    expect(store.get().stale).toBe(false);
  });
});

describe("deriveViewModel", () => {
  it("exposes the nadir_hz field exactly, not a trace minimum", () => {
    const store = new ConsoleStore();
    // downsampled points intentionally do NOT contain the nadir value
    const payload = resultPayload({
      nadir_hz: 49.123456789,
      frequency: { time_s: [0, 1, 2], hz: [50, 49.3, 49.4] },
    });
    store.applyResult(payload, 1000);
    const vm = deriveViewModel(store.get());
    expect(vm.nadirHz).toBe(49.123456789);
    expect(vm.nadirHz).not.toBe(Math.min(...payload.frequency.hz));
  });

  it("maps states to banners with alarm taking priority", () => {
    const store = new ConsoleStore();
    store.applyStatus(statusPayload({ alarm: true }), 1000);
    store.applyResult(resultPayload({ alarm: true, nadir_hz: 48.2 }), 1000);
    const vm = deriveViewModel(store.get());
    expect(vm.banner).toBe("alarm");
    expect(vm.alarmAudible).toBe(true);
  });

  it("shows degraded reasons", () => {
    const store = new ConsoleStore();
    store.applyStatus(
      statusPayload({ status: "degraded", degraded: true, degraded_reason: "snapshot is stale" }),
      1000,
    );
    const vm = deriveViewModel(store.get());
    expect(vm.banner).toBe("degraded");
    expect(vm.bannerText).toContain("snapshot is stale");
  });

  it("flags disconnection over everything else and keeps last-good timestamp", () => {
    const store = new ConsoleStore();
    store.applyResult(resultPayload(), 1000);
    store.setConnected(false);
    const vm = deriveViewModel(store.get());
    expect(vm.banner).toBe("disconnected");
    expect(vm.lastGoodTimestamp).toBe("2026-08-10T01:00:00+00:00");
  });

  it("surfaces inertia readouts", () => {
    const store = new ConsoleStore();
    store.applyResult(resultPayload(), 1000);
    const vm = deriveViewModel(store.get());
    expect(vm.keSys).toBe(14016.4);
    expect(vm.keGen).toBe(11500);
    expect(vm.keLoad).toBe(2516.4);
  });
});
