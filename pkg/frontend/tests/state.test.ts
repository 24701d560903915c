import { describe, expect, it } from "vitest";
import { clampSplit, orderedDates, stateFromHash, stateToHash } from "../src/state";
import type { ViewState } from "../src/types";

describe("view state <-> URL hash", () => {
  it("round-trips the full view", () => {
    const state: ViewState = {
      lon: 139.123456,
      lat: 35.654321,
      zoom: 13,
      date1: "2021-01-10",
      date2: "2021-02-20",
      kind: "sar_change",
      split: 0.25,
    };
    const restored = stateFromHash(stateToHash(state));
    expect(restored).toEqual(state);
  });

  it("round-trips every layer kind and split extremes", () => {
    for (const kind of ["rgb_composite", "sar_intensity", "sar_change", "pumice"] as const) {
      for (const split of [0, 0.5, 1]) {
        const state: ViewState = {
          lon: -1.5,
          lat: 47.25,
          zoom: 9,
          date1: "2021-03-01",
          date2: "2021-03-31",
          kind,
          split,
        };
        expect(stateFromHash(stateToHash(state))).toEqual(state);
      }
    }
  });

  it("falls back to defaults on junk and clamps split", () => {
    const state = stateFromHash("#c=abc&z=x&split=7");
    expect(state.lon).toBe(0);
    expect(state.zoom).toBe(2);
    expect(state.split).toBe(1);
  });

  it("enforces date1 <= date2 by swapping", () => {
    expect(orderedDates("2021-05-01", "2021-01-01")).toEqual(["2021-01-01", "2021-05-01"]);
    const state = stateFromHash("#d1=2022-02-02&d2=2021-01-01");
    expect(state.date1 <= state.date2).toBe(true);
  });

  it("clamps split into [0, 1]", () => {
    expect(clampSplit(-0.2)).toBe(0);
    expect(clampSplit(1.7)).toBe(1);
    expect(clampSplit(0.42)).toBe(0.42);
    expect(clampSplit(NaN)).toBe(0.5);
  });
});
