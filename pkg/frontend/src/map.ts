import L from "leaflet";
import type { MapPanes } from "./controller";
import { splitClips } from "./split";

const PANES = { left: "compare-left", right: "compare-right", overlay: "analysis" } as const;

/**
 * Leaflet adapter: a single synchronized map with two clipped tile panes
 * (split comparison) plus one overlay pane for change/pumice layers.
 */
export class LeafletPanes implements MapPanes {
  readonly map: L.Map;
  private layers: { left: L.TileLayer | null; right: L.TileLayer | null; overlay: L.TileLayer | null } = {
    left: null,
    right: null,
    overlay: null,
  };
  private split = 0.5;
  private divider: HTMLElement;

  constructor(container: HTMLElement, basemapUrl: string, attribution: string) {
    this.map = L.map(container, { center: [0, 0], zoom: 2, zoomControl: true });
    L.tileLayer(basemapUrl, { attribution, maxZoom: 19 }).addTo(this.map);
    for (const pane of Object.values(PANES)) {
      this.map.createPane(pane);
    }
    this.map.getPane(PANES.left)!.style.zIndex = "310";
    this.map.getPane(PANES.right)!.style.zIndex = "311";
    this.map.getPane(PANES.overlay)!.style.zIndex = "320";

    this.divider = document.createElement("div");
    this.divider.className = "split-divider hidden";
    container.appendChild(this.divider);
    this.wireDividerDrag(container);

    this.map.on("move zoom viewreset resize", () => this.applyClips());
  }

  onSplitDragged: ((position: number) => void) | null = null;

  private wireDividerDrag(container: HTMLElement): void {
    let dragging = false;
    this.divider.addEventListener("pointerdown", (e) => {
      dragging = true;
      this.divider.setPointerCapture(e.pointerId);
      e.preventDefault();
    });
    this.divider.addEventListener("pointermove", (e) => {
      if (!dragging) return;
      const rect = container.getBoundingClientRect();
      const position = (e.clientX - rect.left) / rect.width;
      this.onSplitDragged?.(position);
    });
    this.divider.addEventListener("pointerup", () => {
      dragging = false;
    });
  }

  private setLayer(slot: keyof typeof PANES, urlTemplate: string | null): void {
    const existing = this.layers[slot];
    if (existing) {
      existing.remove();
      this.layers[slot] = null;
    }
    if (urlTemplate) {
      this.layers[slot] = L.tileLayer(urlTemplate, { pane: PANES[slot], maxZoom: 19 }).addTo(this.map);
    }
    this.updateDividerVisibility();
    this.applyClips();
  }

  setLeftLayer(urlTemplate: string | null): void {
    this.setLayer("left", urlTemplate);
  }

  setRightLayer(urlTemplate: string | null): void {
    this.setLayer("right", urlTemplate);
  }

  setOverlayLayer(urlTemplate: string | null): void {
    this.setLayer("overlay", urlTemplate);
  }

  setSplit(position: number): void {
    this.split = position;
    this.applyClips();
  }

  setView(lon: number, lat: number, zoom: number): void {
    this.map.setView([lat, lon], zoom);
  }

  private updateDividerVisibility(): void {
    const comparing = this.layers.left !== null || this.layers.right !== null;
    this.divider.classList.toggle("hidden", !comparing);
  }

  /** Clip the two panes in layer coordinates so the cut stays put on screen. */
  private applyClips(): void {
    const size = this.map.getSize();
    const { leftWidth } = splitClips(this.split, size.x);
    const nw = this.map.containerPointToLayerPoint([0, 0]);
    const se = this.map.containerPointToLayerPoint([size.x, size.y]);
    const cut = nw.x + leftWidth;
    const leftPane = this.map.getPane(PANES.left);
    const rightPane = this.map.getPane(PANES.right);
    if (leftPane) {
      leftPane.style.clipPath = `polygon(${nw.x}px ${nw.y}px, ${cut}px ${nw.y}px, ${cut}px ${se.y}px, ${nw.x}px ${se.y}px)`;
    }
    if (rightPane) {
      rightPane.style.clipPath = `polygon(${cut}px ${nw.y}px, ${se.x}px ${nw.y}px, ${se.x}px ${se.y}px, ${cut}px ${se.y}px)`;
    }
    this.divider.style.left = `${leftWidth}px`;
  }
}

/** Click-to-draw polygon tool; double-click closes the ring. */
export class PolygonDraw {
  private vertices: [number, number][] = [];
  private preview: L.Polyline | null = null;
  private markers: L.CircleMarker[] = [];
  private committed: L.Polygon | null = null;
  private active = false;

  constructor(
    private map: L.Map,
    private onComplete: (ring: [number, number][]) => Promise<boolean>
  ) {
    this.map.on("click", (e: L.LeafletMouseEvent) => this.handleClick(e));
    this.map.on("dblclick", () => this.handleFinish());
  }

  start(): void {
    this.clear();
    this.active = true;
    this.map.doubleClickZoom.disable();
    this.map.getContainer().classList.add("drawing");
  }

  private handleClick(e: L.LeafletMouseEvent): void {
    if (!this.active) return;
    this.vertices.push([e.latlng.lng, e.latlng.lat]);
    this.markers.push(
      L.circleMarker(e.latlng, { radius: 4, className: "draw-vertex" }).addTo(this.map)
    );
    const latlngs = this.vertices.map(([lon, lat]) => L.latLng(lat, lon));
    if (!this.preview) {
      this.preview = L.polyline(latlngs, { dashArray: "4 4", weight: 2 }).addTo(this.map);
    } else {
      this.preview.setLatLngs(latlngs);
    }
  }

  private async handleFinish(): Promise<void> {
    if (!this.active) return;
    const ring = [...this.vertices];
    const ok = await this.onComplete(ring);
    if (!ok) return; // too few vertices: keep drawing
    this.active = false;
    this.map.doubleClickZoom.enable();
    this.map.getContainer().classList.remove("drawing");
    this.removePreview();
    this.committed = L.polygon(
      ring.map(([lon, lat]) => L.latLng(lat, lon)),
      { weight: 2, fillOpacity: 0.08 }
    ).addTo(this.map);
  }

  clear(): void {
    this.active = false;
    this.vertices = [];
    this.removePreview();
    if (this.committed) {
      this.committed.remove();
      this.committed = null;
    }
    this.map.doubleClickZoom.enable();
    this.map.getContainer().classList.remove("drawing");
  }

  private removePreview(): void {
    this.preview?.remove();
    this.preview = null;
    for (const m of this.markers) m.remove();
    this.markers = [];
    this.vertices = [];
  }
}
