import type { LayerKind, ViewState } from "./types";

const KINDS: LayerKind[] = ["rgb_composite", "sar_intensity", "sar_change", "pumice"];

export const DEFAULT_STATE: ViewState = {
  lon: 0,
  lat: 0,
  zoom: 2,
  date1: "",
  date2: "",
  kind: "rgb_composite",
  split: 0.5,
};

export function clampSplit(value: number): number {
  if (!Number.isFinite(value)) return 0.5;
  return Math.min(1, Math.max(0, value));
}

/** date1 <= date2 is enforced by swapping, mirroring the UI constraint. */
export function orderedDates(date1: string, date2: string): [string, string] {
  if (date1 && date2 && date1 > date2) return [date2, date1];
  return [date1, date2];
}

/** Serialize the view into a URL hash; deep links reproduce the view. */
export function stateToHash(state: ViewState): string {
  const params = new URLSearchParams({
    c: `${state.lon.toFixed(6)},${state.lat.toFixed(6)}`,
    z: String(state.zoom),
    d1: state.date1,
    d2: state.date2,
    layer: state.kind,
    split: state.split.toFixed(3),
  });
  return `#${params.toString()}`;
}

export function stateFromHash(hash: string, fallback: ViewState = DEFAULT_STATE): ViewState {
  const params = new URLSearchParams(hash.replace(/^#/, ""));
  const state = { ...fallback };
  const center = params.get("c");
  if (center) {
    const [lon, lat] = center.split(",").map(Number);
    if (Number.isFinite(lon) && Number.isFinite(lat)) {
      state.lon = lon;
      state.lat = lat;
    }
  }
  const zoom = Number(params.get("z"));
  if (Number.isFinite(zoom) && params.get("z") !== null) state.zoom = zoom;
  const d1 = params.get("d1");
  if (d1 !== null) state.date1 = d1;
  const d2 = params.get("d2");
  if (d2 !== null) state.date2 = d2;
  const kind = params.get("layer");
  if (kind && (KINDS as string[]).includes(kind)) state.kind = kind as LayerKind;
  const split = params.get("split");
  if (split !== null) state.split = clampSplit(Number(split));
  [state.date1, state.date2] = orderedDates(state.date1, state.date2);
  return state;
}
