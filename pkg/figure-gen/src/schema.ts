/**
 * Parsers for the observer-run artifacts this tool consumes: the
 * per-iteration trace CSV and the result/condition-report JSON. Both are
 * validated against the documented public contract; any column or field
 * mismatch is reported by name.
 */

import Papa from "papaparse";
import { z } from "zod";

export const TRACE_COLUMNS = [
  "k",
  "i",
  "alpha",
  "err_w",
  "err_xhat",
  "precond_residual",
  "err_K",
] as const;

export type TraceColumn = (typeof TRACE_COLUMNS)[number];

export interface TraceRow {
  k: number;
  i: number;
  alpha: number | null;
  err_w: number | null;
  err_xhat: number | null;
  precond_residual: number | null;
  err_K: number | null;
}

export class SchemaError extends Error {}

function cell(value: string | undefined, column: TraceColumn, source: string): number | null {
  if (value === undefined || value === "") return null;
  const parsed = Number(value);
  if (!Number.isFinite(parsed)) {
    throw new SchemaError(`${source}: column "${column}" holds a non-numeric cell "${value}"`);
  }
  return parsed;
}

export function parseTrace(csvText: string, source: string): TraceRow[] {
  const parsed = Papa.parse<Record<string, string>>(csvText.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  const fields = parsed.meta.fields ?? [];
  for (const column of TRACE_COLUMNS) {
    if (!fields.includes(column)) {
      throw new SchemaError(`${source}: missing required column "${column}"`);
    }
  }
  const extra = fields.filter((f) => !(TRACE_COLUMNS as readonly string[]).includes(f));
  if (extra.length > 0) {
    throw new SchemaError(`${source}: unexpected columns ${JSON.stringify(extra)}`);
  }
  if (parsed.data.length === 0) {
    throw new SchemaError(`${source}: no rows under columns "${TRACE_COLUMNS.join(",")}"`);
  }
  return parsed.data.map((raw, index) => {
    const k = cell(raw.k, "k", source);
    const i = cell(raw.i, "i", source);
    if (k === null || i === null || !Number.isInteger(k) || !Number.isInteger(i)) {
      throw new SchemaError(`${source}: row ${index + 1} needs integer "k" and "i" cells`);
    }
    return {
      k,
      i,
      alpha: cell(raw.alpha, "alpha", source),
      err_w: cell(raw.err_w, "err_w", source),
      err_xhat: cell(raw.err_xhat, "err_xhat", source),
      precond_residual: cell(raw.precond_residual, "precond_residual", source),
      err_K: cell(raw.err_K, "err_K", source),
    };
  });
}

const resultSchema = z
  .object({
    conditions: z
      .object({ mu: z.number() })
      .passthrough()
      .nullable()
      .optional(),
    fitted_mu: z.number().nullable().optional(),
    system: z.string().optional(),
    observer_kind: z.string().optional(),
  })
  .passthrough();

export type ResultDoc = z.infer<typeof resultSchema>;

export function parseResult(jsonText: string, source: string): ResultDoc {
  let doc: unknown;
  try {
    doc = JSON.parse(jsonText);
  } catch (err) {
    throw new SchemaError(`${source}: not valid JSON (${(err as Error).message})`);
  }
  const outcome = resultSchema.safeParse(doc);
  if (!outcome.success) {
    const issue = outcome.error.issues[0];
    throw new SchemaError(
      `${source}: field "${issue.path.join(".")}" ${issue.message.toLowerCase()}`
    );
  }
  return outcome.data;
}
