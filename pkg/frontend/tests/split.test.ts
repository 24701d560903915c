import { describe, expect, it } from "vitest";
import { splitClips } from "../src/split";

describe("split pane clipping", () => {
  it("visible widths partition the viewport at every position", () => {
    for (const pos of [0, 0.1, 0.25, 0.5, 0.731, 0.9, 1]) {
      const { leftWidth, rightWidth } = splitClips(pos, 1024);
      expect(leftWidth + rightWidth).toBe(1024);
      expect(leftWidth).toBeGreaterThanOrEqual(0);
      expect(rightWidth).toBeGreaterThanOrEqual(0);
    }
  });

  it("split 0 shows only the date2 pane", () => {
    const { leftWidth, rightWidth } = splitClips(0, 800);
    expect(leftWidth).toBe(0);
    expect(rightWidth).toBe(800);
  });

  it("split 1 shows only the date1 pane", () => {
    const { leftWidth, rightWidth } = splitClips(1, 800);
    expect(leftWidth).toBe(800);
    expect(rightWidth).toBe(0);
  });

  it("out-of-range positions are clamped", () => {
    expect(splitClips(-3, 500).leftWidth).toBe(0);
    expect(splitClips(42, 500).leftWidth).toBe(500);
  });

  it("emits pixel-clip insets for the panes", () => {
    const clips = splitClips(0.5, 600);
    expect(clips.left).toBe("inset(0 300px 0 0)");
    expect(clips.right).toBe("inset(0 0 0 300px)");
  });
});
