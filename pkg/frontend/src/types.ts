export type LayerKind = "rgb_composite" | "sar_intensity" | "sar_change" | "pumice";

export interface SensorSummary {
  count: number;
  first: string;
  last: string;
}

export interface CatalogSummary {
  version: string;
  scene_count: number;
  bbox: [number, number, number, number] | null;
  sensors: Record<string, SensorSummary>;
  scenes: { id: string; sensor: string; timestamp: string; bbox: number[] }[];
}

export interface ViewerConfig {
  api_base: string;
  basemap_url: string;
  basemap_attribution?: string;
}

export interface SarCalibration {
  constructed: [number, number][];
  destructed: [number, number][];
}

export interface PumiceCalibration {
  pumice: [number, number][];
  non_pumice: [number, number][];
}

export interface LayerResponse {
  layer_id: string;
  kind?: string;
  thresholds?: { blue: number; red: number };
  threshold?: number;
  scene_id?: string;
}

export interface TimeSample {
  timestamp: string;
  mean: number | null;
  count: number;
}

export interface TimeSeriesResponse {
  samples: TimeSample[];
}

/** Full view state; every field round-trips through the URL hash. */
export interface ViewState {
  lon: number;
  lat: number;
  zoom: number;
  date1: string;
  date2: string;
  kind: LayerKind;
  split: number;
}
