/**
 * Series extraction and small numeric helpers. Everything here is pure:
 * rows in, points out, warnings returned to the caller instead of printed.
 */

import { TraceRow } from "./schema.js";

export interface Point {
  x: number;
  y: number;
}

export const SUMMARY_I = -1;

/** Per-instant estimate errors: summary rows carrying err_xhat. */
export function perInstantErrors(rows: TraceRow[]): Point[] {
  return rows
    .filter((r) => r.i === SUMMARY_I && r.err_xhat !== null)
    .map((r) => ({ x: r.k, y: r.err_xhat as number }));
}

/** Preconditioner residuals of the inner iterations, in recorded order. */
export function precondResiduals(rows: TraceRow[]): Point[] {
  return rows
    .filter((r) => r.i !== SUMMARY_I && r.precond_residual !== null)
    .map((r, index) => ({ x: index, y: r.precond_residual as number }));
}

export interface PositiveFilter {
  points: Point[];
  dropped: number;
}

/** Log-scale plots cannot show non-positive values; drop and count them. */
export function filterPositive(points: Point[]): PositiveFilter {
  const kept = points.filter((p) => p.y > 0);
  return { points: kept, dropped: points.length - kept.length };
}

/** Guaranteed-decay envelope anchored at the first error: err0 * (1/mu)^(x - x0). */
export function envelope(errors: Point[], mu: number): Point[] {
  if (errors.length === 0) return [];
  const first = errors[0];
  return errors.map((p) => ({ x: p.x, y: first.y * Math.pow(1 / mu, p.x - first.x) }));
}

export interface RateFit {
  muHat: number;
  rSquared: number;
  points: number;
}

const FIT_FLOOR = 1e-12;

/** Least-squares slope of log(error) vs. instant; same floor as the harness. */
export function fitRate(points: Point[]): RateFit {
  const usable = points.filter((p) => p.y > FIT_FLOOR);
  if (usable.length < 3) {
    throw new Error(`rate fit needs at least 3 errors above ${FIT_FLOOR}, got ${usable.length}`);
  }
  const xs = usable.map((p) => p.x);
  const ys = usable.map((p) => Math.log(p.y));
  const n = usable.length;
  const meanX = xs.reduce((a, b) => a + b, 0) / n;
  const meanY = ys.reduce((a, b) => a + b, 0) / n;
  let sxy = 0;
  let sxx = 0;
  for (let j = 0; j < n; j += 1) {
    sxy += (xs[j] - meanX) * (ys[j] - meanY);
    sxx += (xs[j] - meanX) * (xs[j] - meanX);
  }
  const slope = sxy / sxx;
  const intercept = meanY - slope * meanX;
  let ssRes = 0;
  let ssTot = 0;
  for (let j = 0; j < n; j += 1) {
    ssRes += (ys[j] - (slope * xs[j] + intercept)) ** 2;
    ssTot += (ys[j] - meanY) ** 2;
  }
  const rSquared = ssTot === 0 ? 1 : 1 - ssRes / ssTot;
  return { muHat: Math.exp(-slope), rSquared, points: n };
}
