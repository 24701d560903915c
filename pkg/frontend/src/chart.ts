import type { TimeSample } from "./types";

export interface ChartPoint {
  timestamp: string;
  t: number; // epoch ms
  mean: number;
  count: number;
  x: number; // pixel coordinates inside the plot area
  y: number;
}

export interface ChartModel {
  points: ChartPoint[];
  width: number;
  height: number;
  yMin: number;
  yMax: number;
  empty: boolean;
}

const PAD = { left: 44, right: 10, top: 10, bottom: 22 };

/** Lay the series out in pixel space. Samples without a mean are skipped. */
export function chartModel(samples: TimeSample[], width = 360, height = 160): ChartModel {
  const usable = samples.filter((s) => s.mean !== null);
  if (usable.length === 0) {
    return { points: [], width, height, yMin: 0, yMax: 0, empty: true };
  }
  const ts = usable.map((s) => Date.parse(s.timestamp));
  const means = usable.map((s) => s.mean as number);
  const tMin = Math.min(...ts);
  const tMax = Math.max(...ts);
  let yMin = Math.min(...means);
  let yMax = Math.max(...means);
  if (yMin === yMax) {
    yMin -= 1;
    yMax += 1;
  }
  const plotW = width - PAD.left - PAD.right;
  const plotH = height - PAD.top - PAD.bottom;
  const points = usable.map((s, i) => ({
    timestamp: s.timestamp,
    t: ts[i],
    mean: means[i],
    count: s.count,
    x: PAD.left + (tMax === tMin ? plotW / 2 : ((ts[i] - tMin) / (tMax - tMin)) * plotW),
    y: PAD.top + plotH - ((means[i] - yMin) / (yMax - yMin)) * plotH,
  }));
  return { points, width, height, yMin, yMax, empty: false };
}

/**
 * Timestamp of the largest jump between consecutive means — the onset
 * reading a user would take off the graph. Null when below `minJump`.
 */
export function detectStep(samples: TimeSample[], minJump = 1.0): string | null {
  const usable = samples.filter((s) => s.mean !== null);
  let best: { jump: number; timestamp: string } | null = null;
  for (let i = 1; i < usable.length; i++) {
    const jump = Math.abs((usable[i].mean as number) - (usable[i - 1].mean as number));
    if (jump >= minJump && (best === null || jump > best.jump)) {
      best = { jump, timestamp: usable[i].timestamp };
    }
  }
  return best?.timestamp ?? null;
}

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

/** Render the model as an SVG string (polyline, dots, axes, step marker). */
export function renderChartSvg(model: ChartModel, stepAt: string | null = null): string {
  const { width, height } = model;
  if (model.empty) {
    return (
      `<svg viewBox="0 0 ${width} ${height}" class="chart">` +
      `<text x="${width / 2}" y="${height / 2}" text-anchor="middle" class="chart-empty">no data</text></svg>`
    );
  }
  const path = model.points.map((p, i) => `${i ? "L" : "M"}${p.x.toFixed(1)},${p.y.toFixed(1)}`).join(" ");
  const dots = model.points
    .map(
      (p) =>
        `<circle cx="${p.x.toFixed(1)}" cy="${p.y.toFixed(1)}" r="3" data-ts="${esc(p.timestamp)}">` +
        `<title>${esc(p.timestamp)}: ${p.mean.toFixed(2)} dB (${p.count} px)</title></circle>`
    )
    .join("");
  const stepPoint = stepAt ? model.points.find((p) => p.timestamp === stepAt) : undefined;
  const marker = stepPoint
    ? `<line x1="${stepPoint.x.toFixed(1)}" y1="${PAD.top}" x2="${stepPoint.x.toFixed(1)}" y2="${height - PAD.bottom}" class="chart-step"/>` +
      `<text x="${stepPoint.x.toFixed(1)}" y="${height - 6}" text-anchor="middle" class="chart-step-label">${esc(
        stepAt!.slice(0, 10)
      )}</text>`
    : "";
  const yLabels =
    `<text x="4" y="${PAD.top + 10}" class="chart-axis">${model.yMax.toFixed(1)}</text>` +
    `<text x="4" y="${height - PAD.bottom}" class="chart-axis">${model.yMin.toFixed(1)}</text>`;
  const first = model.points[0];
  const last = model.points[model.points.length - 1];
  const xLabels =
    `<text x="${first.x.toFixed(1)}" y="${height - 6}" class="chart-axis">${esc(first.timestamp.slice(0, 10))}</text>` +
    (stepPoint
      ? ""
      : `<text x="${last.x.toFixed(1)}" y="${height - 6}" text-anchor="end" class="chart-axis">${esc(
          last.timestamp.slice(0, 10)
        )}</text>`);
  return (
    `<svg viewBox="0 0 ${width} ${height}" class="chart">` +
    `<path d="${path}" class="chart-line"/>` +
    marker +
    dots +
    yLabels +
    xLabels +
    `</svg>`
  );
}
