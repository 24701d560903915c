import type {
  CatalogSummary,
  LayerKind,
  LayerResponse,
  PumiceCalibration,
  SarCalibration,
  TimeSeriesResponse,
  ViewerConfig,
} from "./types";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    detail: string
  ) {
    super(detail);
  }
}

async function request<T>(base: string, path: string, init?: RequestInit): Promise<T> {
  const res = await fetch(base + path, init);
  if (!res.ok) {
    let code = `HTTP ${res.status}`;
    let detail = res.statusText;
    try {
      const body = await res.json();
      if (body.error) code = body.error;
      if (body.detail) detail = typeof body.detail === "string" ? body.detail : JSON.stringify(body.detail);
    } catch {
      /* non-JSON error body */
    }
    throw new ApiError(res.status, code, detail);
  }
  return res.json() as Promise<T>;
}

export type LayerSpec =
  | { kind: "rgb_composite"; date: string }
  | { kind: "sar_intensity"; date: string }
  | { kind: "sar_change"; date1: string; date2: string; calibration: SarCalibration }
  | { kind: "pumice"; date: string; calibration: PumiceCalibration };

/** All numbers shown in the UI originate from these responses. */
export class Api {
  constructor(public base: string = "") {}

  config(): Promise<ViewerConfig> {
    return request(this.base, "/config");
  }

  catalog(): Promise<CatalogSummary> {
    return request(this.base, "/catalog");
  }

  createLayer(spec: LayerSpec): Promise<LayerResponse> {
    return request(this.base, "/layers", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(spec),
    });
  }

  timeseries(polygon: [number, number][], sensor = "SAR", band = "vv"): Promise<TimeSeriesResponse> {
    return request(this.base, "/analysis/timeseries", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ polygon, sensor, band }),
    });
  }

  tileUrlTemplate(layerId: string): string {
    return `${this.base}/tiles/${layerId}/{z}/{x}/{y}.png`;
  }
}

export function compareKind(kind: LayerKind): "rgb_composite" | "sar_intensity" {
  return kind === "sar_intensity" ? "sar_intensity" : "rgb_composite";
}

/**
 * Supersede guard: when inputs change faster than responses arrive, only the
 * latest request's result is delivered; stale resolutions yield undefined.
 */
export class Latest {
  private seq = 0;

  async wrap<T>(work: Promise<T>): Promise<T | undefined> {
    const ticket = ++this.seq;
    const result = await work;
    return ticket === this.seq ? result : undefined;
  }

  cancel(): void {
    this.seq++;
  }
}
