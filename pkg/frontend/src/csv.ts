/** Reading and validating the benchmark harness CSV schema. */

import { readFileSync } from "node:fs";

export const SCHEMA = "ifed-bench-v1";

export const BASE_COLUMNS = [
  "schema", "benchmark", "scheme", "element", "kernel", "mfac", "n_cells",
  "dofs", "dx", "dX", "dt", "t_final", "error_l1", "error_l2", "error_linf",
  "qoi", "reference", "kappa_s", "eta_s", "kappa_b", "eta_b", "load",
];

export const TIMING_COLUMNS = [
  "time_assembly", "time_projection", "time_spreading",
  "time_interpolation", "time_fluid", "structure_solve_iterations",
];

export class SchemaError extends Error {}

export interface BenchRow {
  [key: string]: string;
}

export interface BenchTable {
  columns: string[];
  rows: BenchRow[];
  hasTimings: boolean;
}

export function parseCsv(text: string): BenchTable {
  const lines = text.split("\n").filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new SchemaError("empty file: no header row");
  }
  const columns = lines[0].split(",");
  for (let i = 0; i < BASE_COLUMNS.length; i++) {
    if (columns[i] !== BASE_COLUMNS[i]) {
      throw new SchemaError(
        `header mismatch at column ${i}: expected '${BASE_COLUMNS[i]}', got '${columns[i] ?? "<missing>"}'`,
      );
    }
  }
  const extra = columns.slice(BASE_COLUMNS.length);
  const hasTimings = extra.length > 0;
  if (hasTimings) {
    for (let i = 0; i < extra.length; i++) {
      if (extra[i] !== TIMING_COLUMNS[i]) {
        throw new SchemaError(`unknown trailing column '${extra[i]}'`);
      }
    }
  }
  const rows: BenchRow[] = [];
  for (const line of lines.slice(1)) {
    const parts = line.split(",");
    if (parts.length !== columns.length) {
      throw new SchemaError(
        `row has ${parts.length} fields, header has ${columns.length}`,
      );
    }
    const row: BenchRow = {};
    columns.forEach((c, i) => (row[c] = parts[i]));
    if (row["schema"] !== SCHEMA) {
      throw new SchemaError(
        `schema version mismatch: expected '${SCHEMA}', got '${row["schema"]}'`,
      );
    }
    rows.push(row);
  }
  return { columns, rows, hasTimings };
}

export function readCsv(path: string): BenchTable {
  return parseCsv(readFileSync(path, "utf8"));
}

export function num(row: BenchRow, column: string): number | null {
  const v = row[column];
  if (v === undefined || v === "") return null;
  const x = Number(v);
  return Number.isFinite(x) ? x : null;
}
