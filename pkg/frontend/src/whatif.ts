/**
 * What-if form model: delta parsing, client-side checks, and mapping of
 * server diagnostics back onto rows. Test mode only; nothing here touches
 * operational state.
 */

import type { WhatifDiagnostic, WhatifRequest } from "./types.js";

export interface UnitRow {
  unitId: string;
  ratedMw: number;
  outputMw: number;
}

export interface FormEntry {
  unitId: string;
  text: string; // raw operator input
}

export interface ParsedForm {
  deltas: Record<string, number>;
  fieldErrors: Record<string, string>;
  totalDelta: number;
}

export function parseForm(entries: FormEntry[], rows: UnitRow[]): ParsedForm {
  const byId = new Map(rows.map((r) => [r.unitId, r]));
  const deltas: Record<string, number> = {};
  const fieldErrors: Record<string, string> = {};
  let total = 0;
  for (const entry of entries) {
    const text = entry.text.trim();
    if (text === "" || text === "0") continue;
    const value = Number(text);
    if (!Number.isFinite(value)) {
      fieldErrors[entry.unitId] = `not a number: "${entry.text}"`;
      continue;
    }
    const row = byId.get(entry.unitId);
    if (row) {
      const newOutput = row.outputMw + value;
      if (newOutput > row.ratedMw) {
        fieldErrors[entry.unitId] =
          `would reach ${newOutput.toFixed(1)} MW, above the ${row.ratedMw.toFixed(0)} MW rating`;
      } else if (newOutput < 0) {
        fieldErrors[entry.unitId] = "would drive output negative";
      }
    }
    deltas[entry.unitId] = value;
    total += value;
  }
  return { deltas, fieldErrors, totalDelta: total };
}

export function buildRequest(form: ParsedForm, allowUnbalanced: boolean): WhatifRequest {
  return { deltas: form.deltas, allow_unbalanced: allowUnbalanced };
}

/**
 * Index server 422 diagnostics by unit id for inline display; fleet-level
 * messages (unit "*") land under the "*" key.
 */
export function mapServerErrors(errors: WhatifDiagnostic[]): Record<string, string> {
  const mapped: Record<string, string> = {};
  for (const err of errors) {
    mapped[err.unit] = mapped[err.unit] ? `${mapped[err.unit]}; ${err.message}` : err.message;
  }
  return mapped;
}
