/**
 * Chart builders: each figure kind maps a parsed artifact onto an ECharts
 * option object.  No numeric post-processing happens here beyond the display
 * fit of the convergence slope; errors and orders come from the files.
 */

import type { EChartsOption, SeriesOption } from "echarts";
import type { ConvergenceReport, CurveSnapshot, DiagnosticsSeries } from "./csv.js";

/** Least-squares slope of log(error) against log(tau). */
export function fitLogLogSlope(tau: number[], error: number[]): number {
  const pts = tau
    .map((t, i) => [Math.log(t), Math.log(error[i])])
    .filter(([lt, le]) => Number.isFinite(lt) && Number.isFinite(le));
  if (pts.length < 2) throw new Error("slope fit needs at least two finite points");
  const n = pts.length;
  const mx = pts.reduce((s, p) => s + p[0], 0) / n;
  const my = pts.reduce((s, p) => s + p[1], 0) / n;
  let sxx = 0;
  let sxy = 0;
  for (const [px, py] of pts) {
    sxx += (px - mx) * (px - mx);
    sxy += (px - mx) * (py - my);
  }
  return sxy / sxx;
}

function slopeGuide(report: ConvergenceReport, slope: number): [number, number][] {
  // anchored below the data at the coarsest tau, spanning the full ladder
  const tMax = Math.max(...report.tau);
  const tMin = Math.min(...report.tau);
  const eAtMax = report.error[report.tau.indexOf(tMax)] * 0.5;
  return [
    [tMin, eAtMax * Math.pow(tMin / tMax, slope)],
    [tMax, eAtMax],
  ];
}

export interface LogLogFigure {
  option: EChartsOption;
  fittedSlope: number;
}

export function loglogConvergence(report: ConvergenceReport, title = "temporal convergence"): LogLogFigure {
  const fittedSlope = fitLogLogSlope(report.tau, report.error);
  const data = report.tau.map((t, i) => [t, report.error[i]] as [number, number]);
  const option: EChartsOption = {
    animation: false,
    backgroundColor: "#ffffff",
    title: {
      text: title,
      subtext: `fitted slope ${fittedSlope.toFixed(2)}`,
      left: "center",
    },
    grid: { left: 80, right: 30, top: 70, bottom: 55 },
    xAxis: { type: "log", name: "tau", nameLocation: "middle", nameGap: 30 },
    yAxis: { type: "log", name: "error", nameLocation: "middle", nameGap: 55 },
    series: [
      {
        type: "line",
        name: "error",
        data,
        symbolSize: 8,
        lineStyle: { width: 2 },
      },
      {
        type: "line",
        name: "slope 1",
        data: slopeGuide(report, 1),
        symbol: "none",
        lineStyle: { type: "dashed", width: 1, color: "#999" },
      },
      {
        type: "line",
        name: "slope 2",
        data: slopeGuide(report, 2),
        symbol: "none",
        lineStyle: { type: "dotted", width: 1.5, color: "#555" },
      },
    ],
    legend: { bottom: 0 },
  };
  return { option, fittedSlope };
}

export function diagnosticsPanel(series: DiagnosticsSeries, title = "geometric diagnostics"): EChartsOption {
  const panels: { name: string; values: number[] }[] = [
    { name: "relative area loss", values: series.dA },
    { name: "normalized perimeter", values: series.lRatio },
    { name: "mesh ratio", values: series.psi },
    { name: "regularizations", values: series.mrCount },
  ];
  const grids = [
    { left: "9%", right: "55%", top: 70, height: "32%" },
    { left: "55%", right: "5%", top: 70, height: "32%" },
    { left: "9%", right: "55%", bottom: "8%", height: "32%" },
    { left: "55%", right: "5%", bottom: "8%", height: "32%" },
  ];
  const option: EChartsOption = {
    animation: false,
    backgroundColor: "#ffffff",
    title: { text: title, left: "center" },
    xAxis: panels.map((_, i) => ({ gridIndex: i, type: "value", name: "t", nameGap: 18 })),
    yAxis: panels.map((p, i) => ({ gridIndex: i, type: "value", name: p.name, nameGap: 8 })),
    grid: grids,
    series: panels.map((p, i): SeriesOption => ({
      type: "line",
      name: p.name,
      xAxisIndex: i,
      yAxisIndex: i,
      showSymbol: false,
      data: series.t.map((t, j) => [t, p.values[j]] as [number, number]),
    })),
  };
  return option;
}

export function curveSnapshots(snapshots: CurveSnapshot[], title = "curve evolution"): EChartsOption {
  if (snapshots.length === 0) throw new Error("need at least one snapshot to draw");
  let xMin = Infinity;
  let xMax = -Infinity;
  let yMin = Infinity;
  let yMax = -Infinity;
  for (const snap of snapshots) {
    xMin = Math.min(xMin, ...snap.x);
    xMax = Math.max(xMax, ...snap.x);
    yMin = Math.min(yMin, ...snap.y);
    yMax = Math.max(yMax, ...snap.y);
  }
  // a square data window keeps the aspect ratio true on a square canvas
  const half = 0.55 * Math.max(xMax - xMin, yMax - yMin);
  const cx = 0.5 * (xMin + xMax);
  const cy = 0.5 * (yMin + yMax);
  const option: EChartsOption = {
    animation: false,
    backgroundColor: "#ffffff",
    title: { text: title, left: "center" },
    grid: { left: 60, right: 30, top: 60, bottom: 60 },
    xAxis: { type: "value", min: cx - half, max: cx + half },
    yAxis: { type: "value", min: cy - half, max: cy + half },
    legend: { bottom: 0 },
    series: snapshots.map((snap): SeriesOption => ({
      type: "line",
      name: `t = ${snap.t}`,
      showSymbol: false,
      // close the ring for drawing
      data: [...snap.x.map((x, i) => [x, snap.y[i]] as [number, number]),
             [snap.x[0], snap.y[0]] as [number, number]],
    })),
  };
  return option;
}
