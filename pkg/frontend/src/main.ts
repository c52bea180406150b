/** Control-room console wiring: stream subscription, rendering, what-if form. */

import { ApiClient, openStream } from "./api.js";
import { beep } from "./audio.js";
import { buildChart } from "./chart.js";
import { formatHz, formatMws, formatSeconds, formatTimestamp } from "./format.js";
import { ConsoleStore, deriveViewModel } from "./state.js";
import type { ResultPayload } from "./types.js";
import { mapServerErrors, parseForm } from "./whatif.js";

const FALLBACK_POLL_MS = 5000;
const SVG_NS = "http://www.w3.org/2000/svg";

const baseUrl = "";
const api = new ApiClient(baseUrl, (url, init) => fetch(url, init));
const store = new ConsoleStore();

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function byId<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

let lastBanner = "ok";

function render(): void {
  const state = store.get();
  const vm = deriveViewModel(state);

  const banner = byId<HTMLDivElement>("banner");
  banner.className = `banner ${vm.banner}`;
  banner.textContent = vm.bannerText;
  if (vm.alarmAudible && lastBanner !== "alarm") beep();
  lastBanner = vm.banner;

  // nadir readout comes straight from the nadir_hz field
  byId("nadir").textContent = formatHz(vm.nadirHz);
  byId("nadir-time").textContent = vm.nadirTimeS === null ? "--" : `${vm.nadirTimeS.toFixed(2)} s`;
  byId("scenario").textContent = vm.scenarioLabel || "--";
  byId("ke-sys").textContent = formatMws(vm.keSys);
  byId("ke-gen").textContent = formatMws(vm.keGen);
  byId("ke-load").textContent = formatMws(vm.keLoad);
  byId("cycle-age").textContent = formatSeconds(vm.cycleAgeS);
  byId("last-good").textContent = formatTimestamp(vm.lastGoodTimestamp);

  renderChart(state.result, state.overlay);
  renderWhatifRows(state.result);
}

function renderChart(result: ResultPayload | null, overlay: ResultPayload | null): void {
  const host = byId<HTMLDivElement>("chart");
  host.textContent = "";
  if (!result) {
    host.appendChild(el("div", "empty", "No result yet"));
    return;
  }
  const geom = buildChart(result, overlay);
  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", "0 0 860 360");

  const add = (name: string, attrs: Record<string, string>, text?: string) => {
    const node = document.createElementNS(SVG_NS, name);
    for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
    if (text) node.textContent = text;
    svg.appendChild(node);
    return node;
  };

  for (const tick of geom.yTicks) {
    add("line", {
      x1: "56", x2: "844", y1: `${tick.y}`, y2: `${tick.y}`, class: "grid",
    });
    add("text", { x: "50", y: `${tick.y + 4}`, class: "tick y" }, tick.label);
  }
  for (const tick of geom.xTicks) {
    add("text", { x: `${tick.x}`, y: "352", class: "tick x" }, tick.label);
  }
  add("line", {
    x1: "56", x2: "844",
    y1: `${geom.thresholdY}`, y2: `${geom.thresholdY}`,
    class: "threshold",
  });
  add("text", {
    x: "840", y: `${geom.thresholdY - 5}`, class: "threshold-label",
  }, `UFLS ${result.ufls_threshold_hz.toFixed(2)} Hz`);
  add("path", { d: geom.tracePath, class: "trace" });
  if (geom.overlayPath) {
    add("path", { d: geom.overlayPath, class: "overlay" });
  }
  add("circle", { cx: `${geom.nadirX}`, cy: `${geom.nadirY}`, r: "4", class: "nadir" });
  add("text", {
    x: `${Math.min(geom.nadirX + 8, 760)}`, y: `${geom.nadirY - 8}`, class: "nadir-label",
  }, formatHz(result.nadir_hz));
  host.appendChild(svg);
}

function renderWhatifRows(result: ResultPayload | null): void {
  const tbody = byId<HTMLTableSectionElement>("whatif-rows");
  const known = new Set(
    Array.from(tbody.querySelectorAll<HTMLInputElement>("input[data-unit]")).map(
      (input) => input.dataset.unit,
    ),
  );
  if (!result) return;
  for (const unitId of Object.keys(result.per_unit_pfr_mw)) {
    if (known.has(unitId)) continue;
    const row = el("tr");
    const name = el("td", "unit-id", unitId);
    const cell = el("td");
    const input = el("input");
    input.type = "text";
    input.placeholder = "0";
    input.dataset.unit = unitId;
    cell.appendChild(input);
    const errCell = el("td", "row-error");
    errCell.id = `whatif-err-${unitId}`;
    row.append(name, cell, errCell);
    tbody.appendChild(row);
  }
}

function clearWhatifErrors(): void {
  for (const node of document.querySelectorAll(".row-error")) node.textContent = "";
  byId("whatif-global-error").textContent = "";
}

async function submitWhatif(): Promise<void> {
  clearWhatifErrors();
  const inputs = Array.from(
    document.querySelectorAll<HTMLInputElement>("#whatif-rows input[data-unit]"),
  );
  const entries = inputs.map((input) => ({ unitId: input.dataset.unit ?? "", text: input.value }));
  const allowUnbalanced = byId<HTMLInputElement>("whatif-unbalanced").checked;
  const form = parseForm(entries, []);
  for (const [unit, message] of Object.entries(form.fieldErrors)) {
    const cell = document.getElementById(`whatif-err-${unit}`);
    if (cell) cell.textContent = message;
  }
  if (Object.keys(form.fieldErrors).length > 0) return;

  const outcome = await api.whatif({ deltas: form.deltas, allow_unbalanced: allowUnbalanced });
  if (!outcome.ok) {
    const mapped = mapServerErrors(outcome.errors);
    for (const [unit, message] of Object.entries(mapped)) {
      const cell = document.getElementById(`whatif-err-${unit}`);
      if (cell) cell.textContent = message;
      else byId("whatif-global-error").textContent = `${unit}: ${message}`;
    }
    if (mapped["*"]) byId("whatif-global-error").textContent = mapped["*"];
    return;
  }
  store.applyOverlay(outcome.result);
  byId("overlay-nadir").textContent = `test-mode nadir ${formatHz(outcome.result.nadir_hz)}`;
}

function clearOverlay(): void {
  store.applyOverlay(null);
  byId("overlay-nadir").textContent = "";
  clearWhatifErrors();
}

async function refreshFromApi(): Promise<void> {
  try {
    const [status, result] = await Promise.all([api.status(), api.latestResult()]);
    store.applyStatus(status, Date.now());
    if (result) store.applyResult(result, Date.now());
  } catch {
    store.setConnected(false);
  }
}

function start(): void {
  store.subscribe(render);
  render();

  byId("whatif-run").addEventListener("click", () => void submitWhatif());
  byId("whatif-clear").addEventListener("click", clearOverlay);

  openStream(baseUrl, (url) => new EventSource(url), {
    onStatus: (status) => store.applyStatus(status, Date.now()),
    onResult: () => void refreshFromApi(), // fetch the full traces on new results
    onConnection: (up) => store.setConnected(up),
  });

  void refreshFromApi();
  setInterval(() => {
    const state = store.get();
    store.checkStaleness(Date.now(), state.status?.poll_interval_s ?? 5);
    if (!state.connected) void refreshFromApi(); // 5 s fallback polling
  }, FALLBACK_POLL_MS);
}

start();
