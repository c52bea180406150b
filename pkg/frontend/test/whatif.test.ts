import { describe, expect, it } from "vitest";

import { buildRequest, mapServerErrors, parseForm } from "../src/whatif.js";

const ROWS = [
  { unitId: "GT1", ratedMw: 340, outputMw: 244 },
  { unitId: "CC1", ratedMw: 300, outputMw: 210 },
];

describe("parseForm", () => {
  it("collects numeric deltas and skips blanks", () => {
    const form = parseForm(
      [
        { unitId: "GT1", text: "-50" },
        { unitId: "CC1", text: " 50 " },
        { unitId: "GT2", text: "" },
      ],
      ROWS,
    );
    expect(form.deltas).toEqual({ GT1: -50, CC1: 50 });
    expect(form.totalDelta).toBe(0);
    expect(form.fieldErrors).toEqual({});
  });

  it("flags non-numeric input per row", () => {
    const form = parseForm([{ unitId: "GT1", text: "ten" }], ROWS);
    expect(form.fieldErrors.GT1).toContain("not a number");
  });

  it("pre-checks rating limits when unit data is known", () => {
    const form = parseForm([{ unitId: "GT1", text: "200" }], ROWS);
    expect(form.fieldErrors.GT1).toContain("rating");
  });

  it("defers limit checks to the server when unit data is unknown", () => {
    const form = parseForm([{ unitId: "GT1", text: "200" }], []);
    expect(form.fieldErrors).toEqual({});
    expect(form.deltas.GT1).toBe(200);
  });
});

describe("buildRequest", () => {
  it("carries deltas and the unbalance flag", () => {
    const form = parseForm([{ unitId: "GT1", text: "-30" }], ROWS);
    expect(buildRequest(form, true)).toEqual({
      deltas: { GT1: -30 },
      allow_unbalanced: true,
    });
  });
});

describe("mapServerErrors", () => {
  it("indexes diagnostics by unit for inline rendering", () => {
    const mapped = mapServerErrors([
      { unit: "GT1", message: "delta +500.0 MW would push output to 744.0 MW, above the 340.0 MW rating" },
      { unit: "*", message: "deltas are unbalanced by +500.000 MW" },
    ]);
    expect(mapped.GT1).toContain("above the 340.0 MW rating");
    expect(mapped["*"]).toContain("unbalanced");
  });

  it("joins multiple messages for one unit", () => {
    const mapped = mapServerErrors([
      { unit: "GT1", message: "first" },
      { unit: "GT1", message: "second" },
    ]);
    expect(mapped.GT1).toBe("first; second");
  });
});
