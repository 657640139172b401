/**
 * Reader for the gaussqmc results CSV.
 *
 * The column contract is consumed bit-for-bit: the header must match
 * exactly, otherwise parsing fails with a column diff so the caller can
 * exit nonzero with a useful message.
 */

export const RESULT_COLUMNS = [
  "method",
  "d",
  "M",
  "nu",
  "m",
  "n",
  "reps",
  "rmse",
  "mean_estimate",
  "R_used",
  "seed",
  "wall_time_ms",
] as const;

export interface ResultRow {
  method: string;
  d: number;
  M: number;
  nu: number;
  m: number;
  n: number;
  reps: number;
  rmse: number;
  meanEstimate: number;
  rUsed: number | null;
  seed: number;
  wallTimeMs: number;
}

export class SchemaMismatchError extends Error {
  constructor(expected: readonly string[], got: readonly string[]) {
    const missing = expected.filter((c) => !got.includes(c));
    const extra = got.filter((c) => !(expected as readonly string[]).includes(c));
    super(
      `results CSV does not match the column contract\n` +
        `  expected: ${expected.join(",")}\n` +
        `  got:      ${got.join(",")}\n` +
        `  missing:  ${missing.length ? missing.join(",") : "(none)"}\n` +
        `  extra:    ${extra.length ? extra.join(",") : "(none)"}`,
    );
    this.name = "SchemaMismatchError";
  }
}

function toNumber(raw: string, column: string, line: number): number {
  const value = Number(raw);
  if (raw.trim() === "" || Number.isNaN(value)) {
    throw new Error(`line ${line}: bad numeric value ${JSON.stringify(raw)} in column ${column}`);
  }
  return value;
}

export function parseResultsCsv(text: string): ResultRow[] {
  const lines = text.split(/\r?\n/).filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new SchemaMismatchError(RESULT_COLUMNS, []);
  }
  const header = lines[0].split(",");
  if (
    header.length !== RESULT_COLUMNS.length ||
    header.some((h, i) => h !== RESULT_COLUMNS[i])
  ) {
    throw new SchemaMismatchError(RESULT_COLUMNS, header);
  }
  const rows: ResultRow[] = [];
  for (let i = 1; i < lines.length; i++) {
    const parts = lines[i].split(",");
    if (parts.length !== RESULT_COLUMNS.length) {
      throw new Error(`line ${i + 1}: expected ${RESULT_COLUMNS.length} fields, got ${parts.length}`);
    }
    rows.push({
      method: parts[0],
      d: toNumber(parts[1], "d", i + 1),
      M: toNumber(parts[2], "M", i + 1),
      nu: toNumber(parts[3], "nu", i + 1),
      m: toNumber(parts[4], "m", i + 1),
      n: toNumber(parts[5], "n", i + 1),
      reps: toNumber(parts[6], "reps", i + 1),
      rmse: toNumber(parts[7], "rmse", i + 1),
      meanEstimate: toNumber(parts[8], "mean_estimate", i + 1),
      rUsed: parts[9] === "" ? null : toNumber(parts[9], "R_used", i + 1),
      seed: toNumber(parts[10], "seed", i + 1),
      wallTimeMs: toNumber(parts[11], "wall_time_ms", i + 1),
    });
  }
  if (rows.length === 0) {
    throw new Error("results CSV has a valid header but no data rows");
  }
  return rows;
}

/** Distinct methods in first-appearance order. */
export function methodsOf(rows: ResultRow[]): string[] {
  const seen: string[] = [];
  for (const row of rows) {
    if (!seen.includes(row.method)) seen.push(row.method);
  }
  return seen;
}
