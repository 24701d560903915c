import { describe, expect, it } from "vitest";
import { chartModel, detectStep, renderChartSvg } from "../src/chart";
import type { TimeSample } from "../src/types";

function syntheticStepSeries(onset: string): TimeSample[] {
  const stamps = [
    "2021-01-01", "2021-01-06", "2021-01-11", "2021-01-16", "2021-01-21",
    "2021-01-26", "2021-01-31", "2021-02-05", "2021-02-10", "2021-02-15",
  ];
  return stamps.map((d) => ({
    timestamp: `${d}T00:00:00Z`,
    mean: d >= onset.slice(0, 10) ? -6.0 : -12.0,
    count: 400,
  }));
}

describe("time-series chart", () => {
  it("detected step date equals the ground-truth onset", () => {
    const onset = "2021-01-26T00:00:00Z";
    const series = syntheticStepSeries(onset);
    expect(detectStep(series)).toBe(onset);
  });

  it("step detection survives gaps (samples without a mean)", () => {
    const onset = "2021-01-26T00:00:00Z";
    const series = syntheticStepSeries(onset);
    series[3] = { timestamp: series[3].timestamp, mean: null, count: 0 };
    expect(detectStep(series)).toBe(onset);
  });

  it("no step in a flat series", () => {
    const flat: TimeSample[] = syntheticStepSeries("2099-01-01");
    expect(detectStep(flat)).toBeNull();
  });

  it("lays points out left-to-right with increasing means going up", () => {
    const series = syntheticStepSeries("2021-01-26");
    const model = chartModel(series);
    expect(model.empty).toBe(false);
    expect(model.points).toHaveLength(10);
    for (let i = 1; i < model.points.length; i++) {
      expect(model.points[i].x).toBeGreaterThan(model.points[i - 1].x);
    }
    // -6 dB sits above -12 dB on screen (smaller y)
    expect(model.points[9].y).toBeLessThan(model.points[0].y);
  });

  it("renders an SVG with one dot per sample and the step marker", () => {
    const series = syntheticStepSeries("2021-01-26");
    const svg = renderChartSvg(chartModel(series), detectStep(series));
    expect(svg).toContain("<svg");
    expect(svg.match(/<circle/g)).toHaveLength(10);
    expect(svg).toContain("chart-step");
    expect(svg).toContain("2021-01-26");
  });

  it("empty series renders a no-data placeholder", () => {
    const svg = renderChartSvg(chartModel([]));
    expect(svg).toContain("no data");
    const gaps: TimeSample[] = [{ timestamp: "2021-01-01T00:00:00Z", mean: null, count: 0 }];
    expect(renderChartSvg(chartModel(gaps))).toContain("no data");
  });
});
