/**
 * Frequency-trajectory chart geometry, computed as pure data.
 *
 * The renderer draws SVG from these numbers; keeping the math here makes it
 * testable without a DOM.
 */

import type { ResultPayload, TracePayload } from "./types.js";

export interface ChartLayout {
  width: number;
  height: number;
  padLeft: number;
  padRight: number;
  padTop: number;
  padBottom: number;
}

export const DEFAULT_LAYOUT: ChartLayout = {
  width: 860,
  height: 360,
  padLeft: 56,
  padRight: 16,
  padTop: 12,
  padBottom: 28,
};

export interface ChartGeometry {
  tracePath: string;
  overlayPath: string | null;
  thresholdY: number;
  nadirX: number;
  nadirY: number;
  yTicks: { y: number; label: string }[];
  xTicks: { x: number; label: string }[];
  yMin: number;
  yMax: number;
}

interface Scale {
  x(t: number): number;
  y(f: number): number;
}

function makeScale(
  layout: ChartLayout,
  tMin: number,
  tMax: number,
  fMin: number,
  fMax: number,
): Scale {
  const innerW = layout.width - layout.padLeft - layout.padRight;
  const innerH = layout.height - layout.padTop - layout.padBottom;
  return {
    x: (t) => layout.padLeft + ((t - tMin) / (tMax - tMin)) * innerW,
    y: (f) => layout.padTop + ((fMax - f) / (fMax - fMin)) * innerH,
  };
}

export function tracePath(trace: TracePayload, scale: Scale): string {
  const parts: string[] = [];
  for (let i = 0; i < trace.time_s.length; i++) {
    const cmd = i === 0 ? "M" : "L";
    parts.push(`${cmd}${scale.x(trace.time_s[i]).toFixed(1)},${scale.y(trace.hz[i]).toFixed(1)}`);
  }
  return parts.join(" ");
}

/**
 * Geometry for a result plus an optional what-if overlay. The vertical
 * range always includes the threshold line and both traces with headroom.
 */
export function buildChart(
  result: ResultPayload,
  overlay: ResultPayload | null = null,
  layout: ChartLayout = DEFAULT_LAYOUT,
): ChartGeometry {
  const traces = overlay ? [result.frequency, overlay.frequency] : [result.frequency];
  let fMin = result.ufls_threshold_hz;
  let fMax = 50.0;
  let tMax = 0;
  for (const t of traces) {
    for (const v of t.hz) {
      if (v < fMin) fMin = v;
      if (v > fMax) fMax = v;
    }
    tMax = Math.max(tMax, t.time_s[t.time_s.length - 1]);
  }
  const margin = Math.max((fMax - fMin) * 0.08, 0.02);
  fMin -= margin;
  fMax += margin;
  const scale = makeScale(layout, 0, tMax, fMin, fMax);

  const yTicks: { y: number; label: string }[] = [];
  const span = fMax - fMin;
  const step = span > 2 ? 0.5 : span > 0.8 ? 0.2 : 0.1;
  for (let v = Math.ceil(fMin / step) * step; v <= fMax + 1e-9; v += step) {
    yTicks.push({ y: scale.y(v), label: v.toFixed(1) });
  }
  const xTicks: { x: number; label: string }[] = [];
  const xStep = tMax > 30 ? 10 : 5;
  for (let t = 0; t <= tMax + 1e-9; t += xStep) {
    xTicks.push({ x: scale.x(t), label: `${t.toFixed(0)}s` });
  }

  return {
    tracePath: tracePath(result.frequency, scale),
    overlayPath: overlay ? tracePath(overlay.frequency, scale) : null,
    thresholdY: scale.y(result.ufls_threshold_hz),
    // the marker is placed at the exact nadir fields, not at a trace sample
    nadirX: scale.x(result.nadir_time_s),
    nadirY: scale.y(result.nadir_hz),
    yTicks,
    xTicks,
    yMin: fMin,
    yMax: fMax,
  };
}
