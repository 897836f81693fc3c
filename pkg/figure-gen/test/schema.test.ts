import { readFileSync } from "node:fs";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

import { parseResult, parseTrace, SchemaError, TRACE_COLUMNS } from "../src/schema.js";

const FIXTURES = join(__dirname, "fixtures");
const HEADER = TRACE_COLUMNS.join(",");

describe("trace parsing", () => {
  it("parses the golden trace with summary and inner rows", () => {
    const rows = parseTrace(readFileSync(join(FIXTURES, "ipg_trace.csv"), "utf-8"), "ipg");
    expect(rows.length).toBeGreaterThan(0);
    const summary = rows.filter((r) => r.i === -1);
    const inner = rows.filter((r) => r.i !== -1);
    expect(summary.length).toBeGreaterThan(0);
    expect(inner.length).toBeGreaterThan(0);
    expect(summary.every((r) => r.alpha === null)).toBe(true);
    expect(inner.every((r) => r.err_xhat === null)).toBe(true);
  });

  it("names the missing column", () => {
    const text = "k,i,alpha,err_w,err_xhat,precond_residual\n1,0,0.5,0.1,,0.2\n";
    expect(() => parseTrace(text, "broken.csv")).toThrowError(/missing required column "err_K"/);
  });

  it("rejects an empty trace by naming the expected columns", () => {
    expect(() => parseTrace(`${HEADER}\n`, "empty.csv")).toThrowError(SchemaError);
    expect(() => parseTrace(`${HEADER}\n`, "empty.csv")).toThrowError(/no rows under columns "k,/);
  });

  it("rejects unexpected columns", () => {
    const text = `${HEADER},extra\n1,0,0.5,0.1,,0.2,0.3,9\n`;
    expect(() => parseTrace(text, "wide.csv")).toThrowError(/unexpected columns/);
  });

  it("rejects non-numeric cells by column name", () => {
    const text = `${HEADER}\n1,0,abc,0.1,,0.2,0.3\n`;
    expect(() => parseTrace(text, "bad.csv")).toThrowError(/column "alpha"/);
  });
});

describe("result parsing", () => {
  it("reads the condition audit mu", () => {
    const doc = parseResult(readFileSync(join(FIXTURES, "ipg_result.json"), "utf-8"), "r");
    expect(doc.conditions?.mu).toBe(1.25);
  });

  it("tolerates a missing audit", () => {
    const doc = parseResult('{"conditions": null, "fitted_mu": 2.0}', "r");
    expect(doc.conditions).toBeNull();
  });

  it("rejects invalid JSON", () => {
    expect(() => parseResult("{nope", "r")).toThrowError(SchemaError);
  });

  it("rejects a malformed audit by field name", () => {
    expect(() => parseResult('{"conditions": {"mu": "fast"}}', "r")).toThrowError(
      /conditions.mu/
    );
  });
});
