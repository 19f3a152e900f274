/**
 * Headless rendering: ECharts server-side SVG, optionally rasterized to PNG.
 * The output format follows the file extension (.svg or .png).
 */

import { writeFileSync } from "node:fs";
import * as echarts from "echarts";
import type { EChartsOption } from "echarts";

export interface RenderSize {
  width: number;
  height: number;
}

export function renderSvg(option: EChartsOption, size: RenderSize): string {
  const chart = echarts.init(null, null, {
    renderer: "svg",
    ssr: true,
    width: size.width,
    height: size.height,
  });
  try {
    chart.setOption(option);
    // zrender numbers instances, style classes, and clip-path ids with
    // process-global counters; renumber by first appearance so identical
    // inputs give identical bytes
    const map = new Map<string, string>();
    return chart.renderToSVGString().replace(
      /zr\d+-(cls|c)-?(\d+)/g,
      (token, kind) => {
        if (!map.has(token)) map.set(token, `zr-${kind}-${map.size}`);
        return map.get(token)!;
      });
  } finally {
    chart.dispose();
  }
}

export async function writeFigure(option: EChartsOption, outPath: string,
                                  size: RenderSize): Promise<void> {
  const svg = renderSvg(option, size);
  if (outPath.endsWith(".svg")) {
    writeFileSync(outPath, svg);
    return;
  }
  const { Resvg } = await import("@resvg/resvg-js");
  const png = new Resvg(svg, { fitTo: { mode: "width", value: size.width } })
    .render()
    .asPng();
  writeFileSync(outPath, png);
}
