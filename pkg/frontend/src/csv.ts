/**
 * Readers for the geomflow CSV artifacts.
 *
 * Three schemas are understood:
 *  - convergence reports:  tau,error,order,seconds   (order empty on row 1)
 *  - diagnostics series:   t,dA,L_ratio,Psi,mr_count
 *  - curve snapshots:      "# t=<time>, N=<count>" header then x,y rows
 *
 * Schema violations raise with the name of the missing column so a bad file
 * is diagnosable from the CLI error alone.
 */

import { readFileSync } from "node:fs";
import Papa from "papaparse";

export interface ConvergenceReport {
  tau: number[];
  error: number[];
  /** order[i] pairs with tau[i+1]: there is no order on the first level */
  order: number[];
  seconds: number[];
}

export interface DiagnosticsSeries {
  t: number[];
  dA: number[];
  lRatio: number[];
  psi: number[];
  mrCount: number[];
}

export interface CurveSnapshot {
  t: number;
  x: number[];
  y: number[];
}

function parseTable(path: string, required: string[]): Record<string, number[]> {
  const text = readFileSync(path, "utf8");
  const parsed = Papa.parse<Record<string, string>>(text.trim(), {
    header: true,
    delimiter: ",",
    skipEmptyLines: true,
  });
  const fields = (parsed.meta.fields ?? []).filter((f) => f !== "");
  for (const column of required) {
    if (!fields.includes(column)) {
      throw new Error(`${path}: missing column '${column}' (found: ${fields.join(", ") || "none"})`);
    }
  }
  if (parsed.errors.length > 0) {
    throw new Error(`${path}: ${parsed.errors[0].message} (row ${parsed.errors[0].row})`);
  }
  if (parsed.data.length === 0) {
    throw new Error(`${path}: no data rows under header ${fields.join(",")}`);
  }
  const table: Record<string, number[]> = {};
  for (const column of required) table[column] = [];
  parsed.data.forEach((row, i) => {
    for (const column of required) {
      const raw = (row[column] ?? "").trim();
      if (raw === "") continue; // convergence reports leave order blank on row 1
      const value = Number(raw);
      if (!Number.isFinite(value)) {
        throw new Error(`${path}: row ${i + 1}, column '${column}': cannot parse '${raw}'`);
      }
      table[column].push(value);
    }
  });
  return table;
}

export function readConvergence(path: string): ConvergenceReport {
  const t = parseTable(path, ["tau", "error", "order", "seconds"]);
  if (t.order.length !== t.tau.length - 1) {
    throw new Error(
      `${path}: expected ${t.tau.length - 1} order entries for ${t.tau.length} levels, got ${t.order.length}`);
  }
  return { tau: t.tau, error: t.error, order: t.order, seconds: t.seconds };
}

export function readDiagnostics(path: string): DiagnosticsSeries {
  const t = parseTable(path, ["t", "dA", "L_ratio", "Psi", "mr_count"]);
  return { t: t.t, dA: t.dA, lRatio: t.L_ratio, psi: t.Psi, mrCount: t.mr_count };
}

export function readSnapshot(path: string): CurveSnapshot {
  const lines = readFileSync(path, "utf8").trim().split(/\r?\n/);
  const header = lines[0] ?? "";
  const match = header.match(/^#\s*t=([^,]+),\s*N=(\d+)\s*$/);
  if (!match) {
    throw new Error(`${path}: missing snapshot header '# t=<time>, N=<count>'`);
  }
  const t = Number(match[1]);
  const n = Number(match[2]);
  const x: number[] = [];
  const y: number[] = [];
  for (const line of lines.slice(1)) {
    const [xs, ys, ...rest] = line.split(",");
    const xv = Number(xs);
    const yv = Number(ys);
    if (rest.length > 0 || !Number.isFinite(xv) || !Number.isFinite(yv)) {
      throw new Error(`${path}: bad vertex row '${line}'`);
    }
    x.push(xv);
    y.push(yv);
  }
  if (x.length !== n) {
    throw new Error(`${path}: header claims N=${n} but file has ${x.length} vertex rows`);
  }
  return { t, x, y };
}
