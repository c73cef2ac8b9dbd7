/** The three figure kinds regenerated from harness CSVs:
 *  - mfac-error: velocity error vs mesh factor, one curve per scheme
 *  - dof-convergence: QoI displacement vs solid DoF count, with an
 *    optional horizontal reference line from the CSV's reference column
 *  - timing: per-phase wall-time bars comparing schemes
 */

import { BenchTable, BenchRow, num, SchemaError, TIMING_COLUMNS } from "./csv.js";
import {
  drawFrame,
  linearScale,
  logScale,
  MARKERS,
  PALETTE,
  Scale,
  SvgCanvas,
} from "./svg.js";

export type FigureKind = "mfac-error" | "dof-convergence" | "timing";

export interface FigureSpec {
  kind: FigureKind;
  tables: BenchTable[];
  norm?: "l1" | "l2" | "linf";
  logY?: boolean;
}

const REGION = { x0: 80, x1: 600, y0: 40, y1: 420 };

function seriesKey(row: BenchRow): string {
  return row["scheme"];
}

function groupBy(rows: BenchRow[], key: (r: BenchRow) => string): Map<string, BenchRow[]> {
  const out = new Map<string, BenchRow[]>();
  for (const r of rows) {
    const k = key(r);
    if (!out.has(k)) out.set(k, []);
    out.get(k)!.push(r);
  }
  return out;
}

function allRows(tables: BenchTable[]): BenchRow[] {
  return tables.flatMap((t) => t.rows);
}

export function renderFigure(spec: FigureSpec): string {
  switch (spec.kind) {
    case "mfac-error":
      return mfacErrorFigure(spec);
    case "dof-convergence":
      return dofConvergenceFigure(spec);
    case "timing":
      return timingFigure(spec);
  }
}

function emptyAxes(title: string, xLabel: string, yLabel: string): string {
  const canvas = new SvgCanvas();
  const xs = linearScale(0, 1, REGION.x0, REGION.x1);
  const ys = linearScale(0, 1, REGION.y1, REGION.y0);
  drawFrame(canvas, xs, ys, xLabel, yLabel, title, REGION);
  canvas.text((REGION.x0 + REGION.x1) / 2, (REGION.y0 + REGION.y1) / 2, "no data", "middle", 12);
  return canvas.render();
}

function legend(canvas: SvgCanvas, names: string[]): void {
  names.forEach((name, i) => {
    const y = REGION.y0 + 14 + 16 * i;
    const x = REGION.x1 - 130;
    const color = PALETTE[i % PALETTE.length];
    canvas.marker(x, y - 3, MARKERS[i % MARKERS.length], color, 4);
    canvas.text(x + 10, y, name, "start", 11);
  });
}

export function mfacErrorFigure(spec: FigureSpec): string {
  const rows = allRows(spec.tables).filter((r) => r["mfac"] !== "" && Number(r["mfac"]) > 0);
  const norm = spec.norm ?? "l2";
  const col = { l1: "error_l1", l2: "error_l2", linf: "error_linf" }[norm];
  const benchmark = rows[0]?.["benchmark"] ?? "benchmark";
  const title = `${benchmark}: velocity error (${norm.toUpperCase()}) vs mesh factor`;
  const usable = rows.filter((r) => num(r, col) !== null);
  if (usable.length === 0) return emptyAxes(title, "mesh factor", `error (${norm})`);

  const mfacs = usable.map((r) => num(r, "mfac")!);
  const errs = usable.map((r) => num(r, col)!);
  const xs = linearScale(Math.min(...mfacs), Math.max(...mfacs), REGION.x0, REGION.x1);
  const ys = logScale(Math.min(...errs), Math.max(...errs), REGION.y1, REGION.y0);
  const canvas = new SvgCanvas();
  drawFrame(canvas, xs, ys, "mesh factor", `error (${norm})`, title, REGION);

  const groups = [...groupBy(usable, seriesKey).entries()].sort((a, b) =>
    a[0].localeCompare(b[0]),
  );
  groups.forEach(([name, series], i) => {
    const color = PALETTE[i % PALETTE.length];
    const pts = series
      .map((r) => [num(r, "mfac")!, num(r, col)!] as [number, number])
      .sort((a, b) => a[0] - b[0]);
    canvas.polyline(pts.map(([x, y]) => [xs(x), ys(y)]), color);
    for (const [x, y] of pts) canvas.marker(xs(x), ys(y), MARKERS[i % MARKERS.length], color);
  });
  legend(canvas, groups.map(([name]) => name));
  return canvas.render();
}

export function dofConvergenceFigure(spec: FigureSpec): string {
  const rows = allRows(spec.tables);
  const benchmark = rows[0]?.["benchmark"] ?? "benchmark";
  const title = `${benchmark}: displacement vs solid DoF count`;
  const usable = rows.filter((r) => num(r, "qoi") !== null && num(r, "dofs") !== null);
  if (usable.length === 0) return emptyAxes(title, "solid DoFs", "y-displacement (cm)");

  const dofs = usable.map((r) => num(r, "dofs")!);
  const qois = usable.map((r) => num(r, "qoi")!);
  const refs = usable.map((r) => num(r, "reference")).filter((v): v is number => v !== null);
  const yVals = qois.concat(refs);
  const pad = 0.1 * (Math.max(...yVals) - Math.min(...yVals) || 1);
  const xs = logScale(Math.min(...dofs), Math.max(...dofs), REGION.x0, REGION.x1);
  const ys = linearScale(Math.min(...yVals) - pad, Math.max(...yVals) + pad, REGION.y1, REGION.y0);
  const canvas = new SvgCanvas();
  drawFrame(canvas, xs, ys, "solid DoFs", "y-displacement (cm)", title, REGION);

  if (refs.length > 0) {
    const ref = refs[0];
    canvas.line(REGION.x0, ys(ref), REGION.x1, ys(ref), "#888888", 1);
    canvas.text(REGION.x1 - 4, ys(ref) - 4, "reference", "end", 10);
  }
  const groups = [...groupBy(usable, seriesKey).entries()].sort((a, b) =>
    a[0].localeCompare(b[0]),
  );
  groups.forEach(([name, series], i) => {
    const color = PALETTE[i % PALETTE.length];
    const pts = series
      .map((r) => [num(r, "dofs")!, num(r, "qoi")!] as [number, number])
      .sort((a, b) => a[0] - b[0]);
    canvas.polyline(pts.map(([x, y]) => [xs(x), ys(y)]), color);
    for (const [x, y] of pts) canvas.marker(xs(x), ys(y), MARKERS[i % MARKERS.length], color);
  });
  legend(canvas, groups.map(([name]) => name));
  return canvas.render();
}

const PHASES = ["time_assembly", "time_projection", "time_spreading", "time_interpolation", "time_fluid"];

export function timingFigure(spec: FigureSpec): string {
  for (const t of spec.tables) {
    if (!t.hasTimings) {
      throw new SchemaError(
        `timing figure needs the timing columns (${TIMING_COLUMNS.join(", ")}); ` +
          "re-run the harness with timings enabled",
      );
    }
  }
  const rows = allRows(spec.tables);
  const title = "coupling phase wall time by scheme";
  if (rows.length === 0) return emptyAxes(title, "phase", "wall time (s)");

  const groups = [...groupBy(rows, seriesKey).entries()].sort((a, b) =>
    a[0].localeCompare(b[0]),
  );
  const means = groups.map(([name, series]) => ({
    name,
    values: PHASES.map(
      (p) => series.reduce((acc, r) => acc + (num(r, p) ?? 0), 0) / series.length,
    ),
  }));
  const maxVal = Math.max(...means.flatMap((m) => m.values), 1e-12);
  const xs = linearScale(0, PHASES.length, REGION.x0, REGION.x1);
  const ys = linearScale(0, 1.1 * maxVal, REGION.y1, REGION.y0);
  const canvas = new SvgCanvas();
  drawFrame(canvas, xs, ys, "phase", "wall time (s)", title, REGION, { xTicks: false });

  const slot = (REGION.x1 - REGION.x0) / PHASES.length;
  const barWidth = (slot * 0.7) / Math.max(means.length, 1);
  means.forEach((m, i) => {
    const color = PALETTE[i % PALETTE.length];
    m.values.forEach((v, p) => {
      const x = REGION.x0 + slot * p + slot * 0.15 + i * barWidth;
      canvas.rect(x, ys(v), barWidth, REGION.y1 - ys(v), color);
    });
  });
  PHASES.forEach((p, i) => {
    canvas.text(REGION.x0 + slot * (i + 0.5), REGION.y1 + 18, p.replace("time_", ""), "middle", 10);
  });
  legend(canvas, means.map((m) => m.name));
  return canvas.render();
}
