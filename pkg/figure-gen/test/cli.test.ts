import { existsSync, mkdtempSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

import { main } from "../src/cli.js";

const FIXTURES = join(__dirname, "fixtures");

describe("figure command", () => {
  it("writes an error_decay figure and exits 0", async () => {
    const out = join(mkdtempSync(join(tmpdir(), "figcli-")), "decay.svg");
    const code = await main([
      "--kind", "error_decay",
      "--in", join(FIXTURES, "ipg_trace.csv"),
      "--report", join(FIXTURES, "ipg_result.json"),
      "--out", out,
    ]);
    expect(code).toBe(0);
    expect(existsSync(out)).toBe(true);
  });

  it("writes an overlay from two traces", async () => {
    const out = join(mkdtempSync(join(tmpdir(), "figcli-")), "overlay.svg");
    const code = await main([
      "--kind", "ipg_vs_newton",
      "--in", join(FIXTURES, "ipg_trace.csv"), join(FIXTURES, "newton_trace.csv"),
      "--out", out,
    ]);
    expect(code).toBe(0);
    expect(existsSync(out)).toBe(true);
  });

  it("reports schema problems with exit code 2", async () => {
    const dir = mkdtempSync(join(tmpdir(), "figcli-"));
    const code = await main([
      "--kind", "error_decay",
      "--in", join(FIXTURES, "ipg_result.json"), // JSON is not a trace CSV
      "--out", join(dir, "x.svg"),
    ]);
    expect(code).toBe(2);
  });
});
