/**
 * Figure assembly: turns parsed artifacts into SVG documents. Rendering is
 * read-only with respect to inputs and deterministic for identical inputs
 * and spec; warnings (filtered non-positive values, missing report) are
 * collected on the result instead of printed.
 */

import { basename } from "node:path";
import { readFile, writeFile } from "node:fs/promises";

import {
  envelope,
  filterPositive,
  fitRate,
  perInstantErrors,
  precondResiduals,
  Point,
} from "./data.js";
import { parseResult, parseTrace, ResultDoc, SchemaError, TraceRow } from "./schema.js";
import { renderLogChart, renderTable, Series } from "./svg.js";

export const FIGURE_KINDS = ["error_decay", "precond_decay", "ipg_vs_newton", "rate_table"] as const;
export type FigureKind = (typeof FIGURE_KINDS)[number];

export interface FigureSpec {
  kind: FigureKind;
  inputs: string[];
  output: string;
  report?: string;
  title?: string;
  labels?: string[];
}

export interface FigureResult {
  svg: string;
  warnings: string[];
}

const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2"];

function requireInputs(spec: FigureSpec, count: number | "many"): void {
  if (count === "many") {
    if (spec.inputs.length < 1) {
      throw new SchemaError(`${spec.kind} needs at least one input trace`);
    }
    return;
  }
  if (spec.inputs.length !== count) {
    throw new SchemaError(
      `${spec.kind} needs exactly ${count} input trace${count === 1 ? "" : "s"}, ` +
        `got ${spec.inputs.length}`
    );
  }
}

function seriesLabel(spec: FigureSpec, index: number): string {
  if (spec.labels && spec.labels[index]) return spec.labels[index];
  return basename(spec.inputs[index]).replace(/\.csv$/, "");
}

function positiveSeries(points: Point[], what: string, warnings: string[]): Point[] {
  const filtered = filterPositive(points);
  if (filtered.dropped > 0) {
    warnings.push(
      `${what}: dropped ${filtered.dropped} non-positive value(s) from the log-scale plot`
    );
  }
  return filtered.points;
}

export function buildFigure(
  spec: FigureSpec,
  traces: TraceRow[][],
  report: ResultDoc | null
): FigureResult {
  const warnings: string[] = [];
  switch (spec.kind) {
    case "error_decay": {
      const errors = positiveSeries(
        perInstantErrors(traces[0]),
        "estimate error",
        warnings
      );
      if (errors.length === 0) {
        throw new SchemaError(
          `${spec.inputs[0]}: no positive per-instant values under column "err_xhat"`
        );
      }
      const series: Series[] = [
        { label: seriesLabel(spec, 0), points: errors, color: PALETTE[0] },
      ];
      if (report && report.conditions) {
        const mu = report.conditions.mu;
        series.push({
          label: `envelope err0*(1/mu)^k, mu = ${mu}`,
          points: envelope(errors, mu),
          color: "#555555",
          dashed: true,
        });
      } else {
        warnings.push(
          report === null
            ? "no condition report supplied; guarantee envelope omitted"
            : "report carries no condition audit; guarantee envelope omitted"
        );
      }
      const svg = renderLogChart({
        title: spec.title ?? "Estimate error per sampling instant",
        xLabel: "sampling instant k",
        yLabel: "|xhat - x|",
        series,
      });
      return { svg, warnings };
    }
    case "precond_decay": {
      const residuals = positiveSeries(
        precondResiduals(traces[0]),
        "preconditioner residual",
        warnings
      );
      if (residuals.length === 0) {
        throw new SchemaError(
          `${spec.inputs[0]}: no positive values under column "precond_residual"`
        );
      }
      const svg = renderLogChart({
        title: spec.title ?? "Preconditioner residual over inner iterations",
        xLabel: "inner iteration (cumulative)",
        yLabel: "|Hx(w) K - I|",
        series: [{ label: seriesLabel(spec, 0), points: residuals, color: PALETTE[0] }],
      });
      return { svg, warnings };
    }
    case "ipg_vs_newton": {
      const series: Series[] = traces.map((rows, index) => ({
        label: seriesLabel(spec, index),
        points: positiveSeries(
          perInstantErrors(rows),
          `trace ${index + 1} estimate error`,
          warnings
        ),
        color: PALETTE[index % PALETTE.length],
      }));
      if (series.every((s) => s.points.length === 0)) {
        throw new SchemaError(
          `no positive per-instant values under column "err_xhat" in any input`
        );
      }
      const svg = renderLogChart({
        title: spec.title ?? "Observer comparison",
        xLabel: "sampling instant k",
        yLabel: "|xhat - x|",
        series,
      });
      return { svg, warnings };
    }
    case "rate_table": {
      const rows = traces.map((trace, index) => {
        const errors = perInstantErrors(trace);
        const fit = fitRate(errors);
        return [
          seriesLabel(spec, index),
          fit.muHat.toPrecision(6),
          fit.rSquared.toFixed(4),
          String(fit.points),
        ];
      });
      const svg = renderTable({
        title: spec.title ?? "Fitted per-instant convergence rates",
        header: ["run", "mu_hat", "r^2", "points"],
        rows,
      });
      return { svg, warnings };
    }
  }
}

export async function render(spec: FigureSpec): Promise<FigureResult> {
  requireInputs(spec, spec.kind === "ipg_vs_newton" ? 2 : spec.kind === "rate_table" ? "many" : 1);
  const traces = await Promise.all(
    spec.inputs.map(async (path) => parseTrace(await readFile(path, "utf-8"), path))
  );
  let report: ResultDoc | null = null;
  if (spec.report) {
    report = parseResult(await readFile(spec.report, "utf-8"), spec.report);
  }
  const result = buildFigure(spec, traces, report);
  await writeFile(spec.output, result.svg, "utf-8");
  return result;
}
