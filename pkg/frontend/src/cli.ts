#!/usr/bin/env node
/**
 * plot <kind> <inputs...> -o <out.png|out.svg>
 *
 * Kinds:
 *   loglog       one convergence-report CSV  -> log-log error plot with
 *                slope-1/slope-2 guides and the fitted slope
 *   diagnostics  one diagnostics CSV         -> four-panel time series
 *   snapshots    one or more snapshot CSVs   -> overlaid labeled curves
 *
 * Exits nonzero with a schema diagnostic when an input does not conform.
 */

import { basename } from "node:path";
import { curveSnapshots, diagnosticsPanel, loglogConvergence } from "./charts.js";
import { readConvergence, readDiagnostics, readSnapshot } from "./csv.js";
import { writeFigure } from "./render.js";

const KINDS: Record<string, string> = {
  loglog: "loglog",
  loglog_convergence: "loglog",
  diagnostics: "diagnostics",
  diagnostics_panel: "diagnostics",
  snapshots: "snapshots",
  curve_snapshots: "snapshots",
};

function usage(): string {
  return "usage: plot <loglog|diagnostics|snapshots> <inputs...> -o <out.png|out.svg>";
}

export async function main(argv: string[]): Promise<number> {
  const args = [...argv];
  const outIdx = args.findIndex((a) => a === "-o" || a === "--out");
  if (outIdx < 0 || outIdx + 1 >= args.length) {
    console.error(usage());
    return 2;
  }
  const outPath = args[outIdx + 1];
  args.splice(outIdx, 2);
  const [kindArg, ...inputs] = args;
  const kind = KINDS[kindArg ?? ""];
  if (!kind || inputs.length === 0) {
    console.error(usage());
    return 2;
  }
  try {
    if (kind === "loglog") {
      if (inputs.length !== 1) throw new Error("loglog takes exactly one report CSV");
      const report = readConvergence(inputs[0]);
      const { option, fittedSlope } = loglogConvergence(report, basename(inputs[0]));
      await writeFigure(option, outPath, { width: 640, height: 480 });
      console.log(`wrote ${outPath} (fitted slope ${fittedSlope.toFixed(3)})`);
    } else if (kind === "diagnostics") {
      if (inputs.length !== 1) throw new Error("diagnostics takes exactly one series CSV");
      const series = readDiagnostics(inputs[0]);
      await writeFigure(diagnosticsPanel(series, basename(inputs[0])), outPath,
                        { width: 900, height: 640 });
      console.log(`wrote ${outPath}`);
    } else {
      const snaps = inputs.map(readSnapshot);
      await writeFigure(curveSnapshots(snaps), outPath, { width: 640, height: 640 });
      console.log(`wrote ${outPath} (${snaps.length} snapshots)`);
    }
  } catch (err) {
    console.error(`plot: ${err instanceof Error ? err.message : err}`);
    return 1;
  }
  return 0;
}

const invokedDirectly = process.argv[1] !== undefined &&
  import.meta.url.endsWith(basename(process.argv[1]));
if (invokedDirectly) {
  main(process.argv.slice(2)).then((code) => {
    process.exitCode = code;
  });
}
