/**
 * SVG rendering of log2-log2 RMSE convergence charts.
 *
 * One series per method, dashed reference guides anchored at the last
 * rqmc-family point so shifted constants never hide slope comparisons.
 * Output is a plain deterministic SVG string: same input, same bytes.
 */

import { methodsOf, type ResultRow } from "./csv.js";

export interface PlotSpec {
  rows: ResultRow[];
  methods?: string[];
  guides?: number[]; // reference slopes, default [-1, -1.5]
  title?: string;
}

const WIDTH = 760;
const HEIGHT = 520;
const MARGIN = { top: 56, right: 200, bottom: 64, left: 86 };

const SERIES_COLORS = [
  "#1f77b4",
  "#d62728",
  "#2ca02c",
  "#9467bd",
  "#ff7f0e",
  "#8c564b",
  "#17becf",
];

const MARKERS = ["circle", "square", "diamond", "triangle"] as const;

interface Scale {
  (v: number): number;
}

function linearScale(d0: number, d1: number, r0: number, r1: number): Scale {
  const span = d1 - d0 || 1;
  return (v) => r0 + ((v - d0) / span) * (r1 - r0);
}

function fmt(v: number): string {
  return Number(v.toFixed(3)).toString();
}

function marker(kind: (typeof MARKERS)[number], x: number, y: number, color: string): string {
  const s = 4;
  switch (kind) {
    case "circle":
      return `<circle cx="${fmt(x)}" cy="${fmt(y)}" r="${s}" fill="${color}"/>`;
    case "square":
      return `<rect x="${fmt(x - s)}" y="${fmt(y - s)}" width="${2 * s}" height="${2 * s}" fill="${color}"/>`;
    case "diamond":
      return `<path d="M ${fmt(x)} ${fmt(y - s - 1)} L ${fmt(x + s + 1)} ${fmt(y)} L ${fmt(x)} ${fmt(y + s + 1)} L ${fmt(x - s - 1)} ${fmt(y)} Z" fill="${color}"/>`;
    case "triangle":
      return `<path d="M ${fmt(x)} ${fmt(y - s - 1)} L ${fmt(x + s + 1)} ${fmt(y + s)} L ${fmt(x - s - 1)} ${fmt(y + s)} Z" fill="${color}"/>`;
  }
}

export function renderSvg(spec: PlotSpec): string {
  const selected = spec.methods?.length
    ? spec.rows.filter((r) => spec.methods!.includes(r.method))
    : spec.rows;
  if (selected.length === 0) {
    throw new Error("no rows left after applying the method filter");
  }
  const methods = methodsOf(selected);
  const guides = spec.guides ?? [-1, -1.5];

  const pts = selected.map((r) => ({
    method: r.method,
    x: Math.log2(r.n),
    y: Math.log2(r.rmse),
  }));
  if (pts.some((p) => !Number.isFinite(p.y))) {
    throw new Error("rmse values must be positive to plot on a log scale");
  }

  const xs = pts.map((p) => p.x);
  const ys = pts.map((p) => p.y);
  const xMin = Math.min(...xs);
  const xMax = Math.max(...xs);
  let yMin = Math.min(...ys);
  let yMax = Math.max(...ys);

  // guides anchored at the last point of the rqmc-family series (or the
  // last series point overall when no rqmc method is present)
  const anchorMethod =
    methods.find((m) => m === "rqmc") ??
    methods.find((m) => m.endsWith("rqmc")) ??
    methods[methods.length - 1];
  const anchorPts = pts.filter((p) => p.method === anchorMethod);
  const anchor = anchorPts.reduce((a, b) => (b.x > a.x ? b : a), anchorPts[0]);
  for (const g of guides) {
    yMin = Math.min(yMin, anchor.y + g * (xMin - anchor.x));
    yMax = Math.max(yMax, anchor.y + g * (xMax - anchor.x));
  }

  const sx = linearScale(xMin, xMax, MARGIN.left, WIDTH - MARGIN.right);
  const sy = linearScale(yMin - 0.5, yMax + 0.5, HEIGHT - MARGIN.bottom, MARGIN.top);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="Helvetica, Arial, sans-serif">`,
  );
  parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`);
  if (spec.title) {
    parts.push(
      `<text x="${WIDTH / 2}" y="30" text-anchor="middle" font-size="17">${escapeXml(spec.title)}</text>`,
    );
  }

  // axes and ticks
  const axisY = HEIGHT - MARGIN.bottom;
  parts.push(
    `<line x1="${MARGIN.left}" y1="${axisY}" x2="${WIDTH - MARGIN.right}" y2="${axisY}" stroke="black"/>`,
    `<line x1="${MARGIN.left}" y1="${MARGIN.top}" x2="${MARGIN.left}" y2="${axisY}" stroke="black"/>`,
  );
  for (let m = Math.ceil(xMin); m <= Math.floor(xMax); m++) {
    const x = sx(m);
    parts.push(
      `<line x1="${fmt(x)}" y1="${axisY}" x2="${fmt(x)}" y2="${axisY + 5}" stroke="black"/>`,
      `<text x="${fmt(x)}" y="${axisY + 20}" text-anchor="middle" font-size="12">2^${m}</text>`,
    );
  }
  for (let e = Math.ceil(yMin - 0.5); e <= Math.floor(yMax + 0.5); e += 2) {
    const y = sy(e);
    parts.push(
      `<line x1="${MARGIN.left - 5}" y1="${fmt(y)}" x2="${MARGIN.left}" y2="${fmt(y)}" stroke="black"/>`,
      `<text x="${MARGIN.left - 9}" y="${fmt(y + 4)}" text-anchor="end" font-size="12">2^${e}</text>`,
    );
  }
  parts.push(
    `<text x="${(MARGIN.left + WIDTH - MARGIN.right) / 2}" y="${HEIGHT - 18}" text-anchor="middle" font-size="14">n</text>`,
    `<text x="24" y="${(MARGIN.top + axisY) / 2}" text-anchor="middle" font-size="14" transform="rotate(-90 24 ${(MARGIN.top + axisY) / 2})">RMSE</text>`,
  );

  // reference guides
  for (const g of guides) {
    const y0 = anchor.y + g * (xMin - anchor.x);
    const y1 = anchor.y + g * (xMax - anchor.x);
    parts.push(
      `<line class="guide" x1="${fmt(sx(xMin))}" y1="${fmt(sy(y0))}" x2="${fmt(sx(xMax))}" y2="${fmt(sy(y1))}" stroke="#999999" stroke-dasharray="7,5"/>`,
      `<text x="${fmt(sx(xMin) + 6)}" y="${fmt(sy(y0) - 6)}" font-size="12" fill="#777777">slope ${g}</text>`,
    );
  }

  // series
  methods.forEach((method, i) => {
    const color = SERIES_COLORS[i % SERIES_COLORS.length];
    const mk = MARKERS[i % MARKERS.length];
    const series = pts
      .filter((p) => p.method === method)
      .sort((a, b) => a.x - b.x);
    const path = series.map((p) => `${fmt(sx(p.x))},${fmt(sy(p.y))}`).join(" ");
    parts.push(
      `<polyline class="series" data-method="${escapeXml(method)}" points="${path}" fill="none" stroke="${color}" stroke-width="1.8"/>`,
    );
    for (const p of series) {
      parts.push(marker(mk, sx(p.x), sy(p.y), color));
    }
    const ly = MARGIN.top + 18 * i;
    const lx = WIDTH - MARGIN.right + 18;
    parts.push(
      `<line x1="${lx}" y1="${ly}" x2="${lx + 26}" y2="${ly}" stroke="${color}" stroke-width="1.8"/>`,
      marker(mk, lx + 13, ly, color),
      `<text x="${lx + 34}" y="${ly + 4}" font-size="13">${escapeXml(legendLabel(method))}</text>`,
    );
  });

  parts.push("</svg>");
  return parts.join("\n");
}

function legendLabel(method: string): string {
  const names: Record<string, string> = {
    mc: "MC",
    "is-mc": "IS-MC",
    qmc: "QMC",
    rqmc: "RQMC",
    pqmc: "P-QMC",
    "is-pqmc": "IS-P-QMC",
    "is-rqmc": "IS-RQMC",
  };
  return names[method] ?? method;
}

function escapeXml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Title text derived from the rows (d, M, nu are constant per sweep). */
export function defaultTitle(rows: ResultRow[]): string {
  const { d, M, nu } = rows[0];
  return `RMSE convergence (d=${d}, M=${M}, nu=${nu})`;
}
