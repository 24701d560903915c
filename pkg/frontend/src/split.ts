import { clampSplit } from "./state";

export interface SplitClips {
  /** CSS clip-path for the date1 (left) pane. */
  left: string;
  /** CSS clip-path for the date2 (right) pane. */
  right: string;
  leftWidth: number;
  rightWidth: number;
}

/**
 * Clip rectangles for the two layer panes at a splitter position.
 * The visible widths always partition the viewport: leftWidth + rightWidth
 * equals the viewport width at every position; at 0 only the right pane is
 * visible, at 1 only the left.
 */
export function splitClips(position: number, viewportWidth: number): SplitClips {
  const x = Math.round(clampSplit(position) * viewportWidth);
  return {
    left: `inset(0 ${viewportWidth - x}px 0 0)`,
    right: `inset(0 0 0 ${x}px)`,
    leftWidth: x,
    rightWidth: viewportWidth - x,
  };
}
