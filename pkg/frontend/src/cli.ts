#!/usr/bin/env node
/** ifed-figs <kind> --csv <path> [--csv <path> ...] --out <path> [--norm l2] */

import { writeFileSync } from "node:fs";
import { readCsv, SchemaError } from "./csv.js";
import { FigureKind, renderFigure } from "./figures.js";

const KINDS: FigureKind[] = ["mfac-error", "dof-convergence", "timing"];

function usage(): never {
  process.stderr.write(
    "usage: ifed-figs <mfac-error|dof-convergence|timing> --csv FILE [--csv FILE ...] --out FILE.svg [--norm l1|l2|linf]\n",
  );
  process.exit(2);
}

export function main(argv: string[]): number {
  if (argv.length === 0) usage();
  const kind = argv[0] as FigureKind;
  if (!KINDS.includes(kind)) usage();
  const csvs: string[] = [];
  let out = "";
  let norm: "l1" | "l2" | "linf" = "l2";
  for (let i = 1; i < argv.length; i++) {
    const a = argv[i];
    if (a === "--csv") csvs.push(argv[++i]);
    else if (a === "--out") out = argv[++i];
    else if (a === "--norm") norm = argv[++i] as typeof norm;
    else usage();
  }
  if (csvs.length === 0 || !out) usage();
  try {
    const tables = csvs.map(readCsv);
    const svg = renderFigure({ kind, tables, norm });
    writeFileSync(out, svg, "utf8");
    process.stderr.write(`wrote ${out}\n`);
    return 0;
  } catch (err) {
    if (err instanceof SchemaError) {
      process.stderr.write(`schema error: ${err.message}\n`);
      return 1;
    }
    throw err;
  }
}

process.exit(main(process.argv.slice(2)));
