import { Api, ApiError, Latest, compareKind, type LayerSpec } from "./api";
import { clampSplit, orderedDates, stateToHash } from "./state";
import type {
  LayerKind,
  PumiceCalibration,
  SarCalibration,
  TimeSample,
  ViewState,
} from "./types";

/** Thin surface the controller drives; implemented over Leaflet in map.ts. */
export interface MapPanes {
  setLeftLayer(urlTemplate: string | null): void;
  setRightLayer(urlTemplate: string | null): void;
  setOverlayLayer(urlTemplate: string | null): void;
  setSplit(position: number): void;
  setView(lon: number, lat: number, zoom: number): void;
}

export interface ControllerHooks {
  onLegend?(legend: { blue?: number; red?: number; threshold?: number } | null): void;
  onSeries?(samples: TimeSample[] | null): void;
  onHint?(message: string): void;
  onError?(code: string, detail: string): void;
  onHashChange?(hash: string): void;
}

/**
 * Orchestrates view state, layer creation and analysis calls. Contains no
 * analysis math: every displayed number comes from an API response.
 */
export class ViewerController {
  state: ViewState;
  sarCalibration: SarCalibration | null = null;
  pumiceCalibration: PumiceCalibration | null = null;
  polygon: [number, number][] | null = null;

  private layerRequests = new Latest();
  private seriesRequests = new Latest();

  constructor(
    private api: Api,
    private map: MapPanes,
    private hooks: ControllerHooks,
    initial: ViewState
  ) {
    this.state = { ...initial };
  }

  /** Apply a restored or navigated-to state end to end (deep links). */
  async restore(state: ViewState): Promise<void> {
    this.state = { ...state };
    [this.state.date1, this.state.date2] = orderedDates(state.date1, state.date2);
    this.state.split = clampSplit(state.split);
    this.map.setView(this.state.lon, this.state.lat, this.state.zoom);
    this.map.setSplit(this.state.split);
    await this.refreshLayers();
    this.emitHash();
  }

  async setDates(date1: string, date2: string): Promise<void> {
    [this.state.date1, this.state.date2] = orderedDates(date1, date2);
    await this.refreshLayers();
    this.emitHash();
  }

  async setKind(kind: LayerKind): Promise<void> {
    this.state.kind = kind;
    await this.refreshLayers();
    this.emitHash();
  }

  setSplit(position: number): void {
    this.state.split = clampSplit(position);
    this.map.setSplit(this.state.split);
    this.emitHash();
  }

  onMapMoved(lon: number, lat: number, zoom: number): void {
    this.state.lon = lon;
    this.state.lat = lat;
    this.state.zoom = zoom;
    this.emitHash();
  }

  /** Re-create the layers for the current dates/kind and refresh tiles. */
  async refreshLayers(): Promise<void> {
    const { date1, date2, kind } = this.state;
    if (!date1 && !date2) return;
    try {
      if (kind === "sar_change") {
        if (!this.sarCalibration) {
          this.hooks.onHint?.("load a change calibration file first");
          return;
        }
        const spec: LayerSpec = {
          kind,
          date1,
          date2,
          calibration: this.sarCalibration,
        };
        const layer = await this.layerRequests.wrap(this.api.createLayer(spec));
        if (!layer) return;
        this.map.setLeftLayer(null);
        this.map.setRightLayer(null);
        this.map.setOverlayLayer(this.api.tileUrlTemplate(layer.layer_id));
        this.hooks.onLegend?.(layer.thresholds ?? null);
      } else if (kind === "pumice") {
        if (!this.pumiceCalibration) {
          this.hooks.onHint?.("load a pumice calibration file first");
          return;
        }
        const spec: LayerSpec = { kind, date: date2 || date1, calibration: this.pumiceCalibration };
        const layer = await this.layerRequests.wrap(this.api.createLayer(spec));
        if (!layer) return;
        this.map.setLeftLayer(null);
        this.map.setRightLayer(null);
        this.map.setOverlayLayer(this.api.tileUrlTemplate(layer.layer_id));
        this.hooks.onLegend?.(layer.threshold !== undefined ? { threshold: layer.threshold } : null);
      } else {
        // split comparison: date1 imagery left, date2 right
        const paneKind = compareKind(kind);
        const results = await this.layerRequests.wrap(
          Promise.all([
            this.api.createLayer({ kind: paneKind, date: date1 }),
            this.api.createLayer({ kind: paneKind, date: date2 }),
          ])
        );
        if (!results) return;
        const [left, right] = results;
        this.map.setOverlayLayer(null);
        this.map.setLeftLayer(this.api.tileUrlTemplate(left.layer_id));
        this.map.setRightLayer(this.api.tileUrlTemplate(right.layer_id));
        this.hooks.onLegend?.(null);
      }
    } catch (err) {
      this.reportError(err);
    }
  }

  /** Commit a drawn polygon; rejects rings with fewer than 3 vertices. */
  async polygonDrawn(ring: [number, number][]): Promise<boolean> {
    if (ring.length < 3) {
      this.hooks.onHint?.("a polygon needs at least 3 vertices");
      return false;
    }
    this.polygon = ring;
    try {
      const res = await this.seriesRequests.wrap(this.api.timeseries(ring));
      if (!res) return true;
      this.hooks.onSeries?.(res.samples);
    } catch (err) {
      this.reportError(err);
    }
    return true;
  }

  clearPolygon(): void {
    this.polygon = null;
    this.seriesRequests.cancel();
    this.hooks.onSeries?.(null);
  }

  toHash(): string {
    return stateToHash(this.state);
  }

  private emitHash(): void {
    this.hooks.onHashChange?.(this.toHash());
  }

  private reportError(err: unknown): void {
    if (err instanceof ApiError) {
      this.hooks.onError?.(err.code, err.message);
    } else {
      this.hooks.onError?.("NetworkError", String(err));
    }
  }
}
