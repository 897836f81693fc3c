/**
 * Minimal deterministic SVG chart renderer: semilog-y line charts and a
 * plain table. No DOM, no randomness, fixed number formatting, so the same
 * inputs always produce byte-identical markup.
 */

import { Point } from "./data.js";

export interface Series {
  label: string;
  points: Point[];
  color: string;
  dashed?: boolean;
}

export interface ChartOptions {
  title: string;
  xLabel: string;
  yLabel: string;
  series: Series[];
  width?: number;
  height?: number;
}

const MARGIN = { top: 42, right: 24, bottom: 46, left: 76 };

function fmt(value: number): string {
  return Number(value.toPrecision(6)).toString();
}

function tickLabel(exponent: number): string {
  return `1e${exponent}`;
}

function xTicks(min: number, max: number, count = 6): number[] {
  if (min === max) return [min];
  const rawStep = (max - min) / (count - 1);
  const magnitude = Math.pow(10, Math.floor(Math.log10(rawStep)));
  const step = [1, 2, 5, 10].map((m) => m * magnitude).find((s) => (max - min) / s <= count - 1)!;
  const start = Math.ceil(min / step) * step;
  const ticks: number[] = [];
  for (let v = start; v <= max + 1e-9; v += step) ticks.push(Number(v.toPrecision(12)));
  return ticks;
}

export function renderLogChart(options: ChartOptions): string {
  const width = options.width ?? 720;
  const height = options.height ?? 480;
  const plotW = width - MARGIN.left - MARGIN.right;
  const plotH = height - MARGIN.top - MARGIN.bottom;

  const all = options.series.flatMap((s) => s.points);
  if (all.length === 0) {
    throw new Error("nothing to draw: every series is empty");
  }
  const xMin = Math.min(...all.map((p) => p.x));
  const xMax = Math.max(...all.map((p) => p.x));
  const expMin = Math.floor(Math.log10(Math.min(...all.map((p) => p.y))));
  const expMax = Math.ceil(Math.log10(Math.max(...all.map((p) => p.y))));
  const expHi = expMax === expMin ? expMin + 1 : expMax;

  const sx = (x: number) =>
    MARGIN.left + (xMax === xMin ? plotW / 2 : ((x - xMin) / (xMax - xMin)) * plotW);
  const sy = (y: number) =>
    MARGIN.top + plotH - ((Math.log10(y) - expMin) / (expHi - expMin)) * plotH;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
      `viewBox="0 0 ${width} ${height}" font-family="Helvetica, Arial, sans-serif">`
  );
  parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);
  parts.push(
    `<text x="${width / 2}" y="24" text-anchor="middle" font-size="15" font-weight="bold">` +
      `${escapeXml(options.title)}</text>`
  );

  // horizontal grid and y tick labels at decade boundaries
  const decadeStep = Math.max(1, Math.ceil((expHi - expMin) / 8));
  for (let e = expMin; e <= expHi; e += decadeStep) {
    const y = sy(Math.pow(10, e));
    parts.push(
      `<line x1="${MARGIN.left}" y1="${fmt(y)}" x2="${width - MARGIN.right}" y2="${fmt(y)}" ` +
        `stroke="#dddddd" stroke-width="1"/>`
    );
    parts.push(
      `<text x="${MARGIN.left - 8}" y="${fmt(y + 4)}" text-anchor="end" font-size="11">` +
        `${tickLabel(e)}</text>`
    );
  }

  for (const tick of xTicks(xMin, xMax)) {
    const x = sx(tick);
    parts.push(
      `<line x1="${fmt(x)}" y1="${MARGIN.top}" x2="${fmt(x)}" y2="${height - MARGIN.bottom}" ` +
        `stroke="#eeeeee" stroke-width="1"/>`
    );
    parts.push(
      `<text x="${fmt(x)}" y="${height - MARGIN.bottom + 18}" text-anchor="middle" ` +
        `font-size="11">${fmt(tick)}</text>`
    );
  }

  // axes
  parts.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${plotW}" height="${plotH}" ` +
      `fill="none" stroke="#333333" stroke-width="1"/>`
  );
  parts.push(
    `<text x="${MARGIN.left + plotW / 2}" y="${height - 10}" text-anchor="middle" font-size="12">` +
      `${escapeXml(options.xLabel)}</text>`
  );
  parts.push(
    `<text x="18" y="${MARGIN.top + plotH / 2}" text-anchor="middle" font-size="12" ` +
      `transform="rotate(-90 18 ${MARGIN.top + plotH / 2})">${escapeXml(options.yLabel)}</text>`
  );

  for (const series of options.series) {
    if (series.points.length === 0) continue;
    const coords = series.points.map((p) => `${fmt(sx(p.x))},${fmt(sy(p.y))}`).join(" ");
    const dash = series.dashed ? ' stroke-dasharray="7 5"' : "";
    parts.push(
      `<polyline points="${coords}" fill="none" stroke="${series.color}" stroke-width="1.8"${dash}/>`
    );
    for (const p of series.points) {
      parts.push(
        `<circle cx="${fmt(sx(p.x))}" cy="${fmt(sy(p.y))}" r="2.2" fill="${series.color}"/>`
      );
    }
  }

  // legend
  let legendY = MARGIN.top + 12;
  for (const series of options.series) {
    const x0 = width - MARGIN.right - 230;
    const dash = series.dashed ? ' stroke-dasharray="7 5"' : "";
    parts.push(
      `<line x1="${x0}" y1="${legendY - 4}" x2="${x0 + 26}" y2="${legendY - 4}" ` +
        `stroke="${series.color}" stroke-width="1.8"${dash}/>`
    );
    parts.push(
      `<text x="${x0 + 32}" y="${legendY}" font-size="11">${escapeXml(series.label)}</text>`
    );
    legendY += 16;
  }

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}

export interface TableOptions {
  title: string;
  header: string[];
  rows: string[][];
  width?: number;
}

export function renderTable(options: TableOptions): string {
  const width = options.width ?? 640;
  const rowH = 26;
  const height = 70 + rowH * (options.rows.length + 1);
  const colW = (width - 40) / options.header.length;
  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
      `viewBox="0 0 ${width} ${height}" font-family="Helvetica, Arial, sans-serif">`
  );
  parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);
  parts.push(
    `<text x="${width / 2}" y="26" text-anchor="middle" font-size="15" font-weight="bold">` +
      `${escapeXml(options.title)}</text>`
  );
  const cellsY = (row: number) => 54 + rowH * row;
  options.header.forEach((label, column) => {
    parts.push(
      `<text x="${20 + colW * column + 6}" y="${cellsY(0) + 17}" font-size="12" ` +
        `font-weight="bold">${escapeXml(label)}</text>`
    );
  });
  options.rows.forEach((row, rowIndex) => {
    row.forEach((value, column) => {
      parts.push(
        `<text x="${20 + colW * column + 6}" y="${cellsY(rowIndex + 1) + 17}" font-size="12">` +
          `${escapeXml(value)}</text>`
      );
    });
  });
  for (let r = 0; r <= options.rows.length + 1; r += 1) {
    parts.push(
      `<line x1="20" y1="${cellsY(r)}" x2="${width - 20}" y2="${cellsY(r)}" ` +
        `stroke="#999999" stroke-width="1"/>`
    );
  }
  parts.push("</svg>");
  return parts.join("\n") + "\n";
}

function escapeXml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}
