import "leaflet/dist/leaflet.css";
import "./style.css";
import { Api } from "./api";
import { chartModel, detectStep, renderChartSvg } from "./chart";
import { ViewerController } from "./controller";
import { LeafletPanes, PolygonDraw } from "./map";
import { DEFAULT_STATE, stateFromHash } from "./state";
import type {
  CatalogSummary,
  LayerKind,
  PumiceCalibration,
  SarCalibration,
  ViewState,
} from "./types";

function el<T extends HTMLElement>(id: string): T {
  return document.getElementById(id) as T;
}

function toast(message: string, isError = false): void {
  const box = el<HTMLDivElement>("toast");
  box.textContent = message;
  box.className = isError ? "toast error" : "toast";
  box.classList.remove("hidden");
  window.setTimeout(() => box.classList.add("hidden"), 5000);
}

function dateExtent(catalog: CatalogSummary): [string, string] | null {
  const summaries = Object.values(catalog.sensors);
  if (summaries.length === 0) return null;
  const first = summaries.map((s) => s.first).sort()[0];
  const last = summaries.map((s) => s.last).sort().slice(-1)[0];
  return [first.slice(0, 10), last.slice(0, 10)];
}

async function boot(): Promise<void> {
  const api = new Api("");
  const config = await api.config();
  let catalog: CatalogSummary;
  try {
    catalog = await api.catalog();
  } catch (err) {
    toast(`catalog unavailable: ${err}`, true);
    return;
  }

  const extent = dateExtent(catalog);
  const initial: ViewState = { ...DEFAULT_STATE };
  if (catalog.bbox) {
    initial.lon = (catalog.bbox[0] + catalog.bbox[2]) / 2;
    initial.lat = (catalog.bbox[1] + catalog.bbox[3]) / 2;
    initial.zoom = 11;
  }
  if (extent) {
    initial.date1 = extent[0];
    initial.date2 = extent[1];
  }
  const fromUrl = window.location.hash.length > 1;
  const startState = fromUrl ? stateFromHash(window.location.hash, initial) : initial;

  const panes = new LeafletPanes(
    el("map"),
    config.basemap_url,
    config.basemap_attribution ?? ""
  );

  const date1 = el<HTMLInputElement>("date1");
  const date2 = el<HTMLInputElement>("date2");
  const kindSelect = el<HTMLSelectElement>("layer-kind");
  const legend = el<HTMLDivElement>("legend");
  const chartBox = el<HTMLDivElement>("chart-box");

  if (extent) {
    for (const input of [date1, date2]) {
      input.min = extent[0];
      input.max = extent[1];
    }
  }

  const controller = new ViewerController(api, panes, {
    onLegend(data) {
      if (!data) {
        legend.classList.add("hidden");
        legend.innerHTML = "";
        return;
      }
      legend.classList.remove("hidden");
      if (data.threshold !== undefined) {
        legend.innerHTML =
          `<span class="swatch pumice"></span>pumice (NDWI &lt; ${data.threshold.toFixed(3)})`;
      } else {
        legend.innerHTML =
          `<span class="swatch blue"></span>backscatter up (&ge; ${data.blue?.toFixed(2)} dB)<br>` +
          `<span class="swatch red"></span>backscatter down (&le; ${data.red?.toFixed(2)} dB)`;
      }
    },
    onSeries(samples) {
      if (!samples) {
        chartBox.innerHTML = "";
        chartBox.classList.add("hidden");
        return;
      }
      chartBox.classList.remove("hidden");
      const model = chartModel(samples);
      chartBox.innerHTML = renderChartSvg(model, detectStep(samples));
    },
    onHint(message) {
      toast(message);
    },
    onError(code, detail) {
      toast(`${code}: ${detail}`, true);
    },
    onHashChange(hash) {
      history.replaceState(null, "", hash);
    },
  }, startState);

  panes.onSplitDragged = (p) => {
    controller.setSplit(p);
    splitSlider.value = String(Math.round(controller.state.split * 100));
  };
  panes.map.on("moveend zoomend", () => {
    const c = panes.map.getCenter();
    controller.onMapMoved(c.lng, c.lat, panes.map.getZoom());
  });

  const draw = new PolygonDraw(panes.map, (ring) => controller.polygonDrawn(ring));

  date1.addEventListener("change", () => controller.setDates(date1.value, date2.value).then(sync));
  date2.addEventListener("change", () => controller.setDates(date1.value, date2.value).then(sync));
  kindSelect.addEventListener("change", () =>
    controller.setKind(kindSelect.value as LayerKind).then(sync)
  );
  const splitSlider = el<HTMLInputElement>("split-slider");
  splitSlider.addEventListener("input", () => controller.setSplit(Number(splitSlider.value) / 100));

  el<HTMLButtonElement>("draw-btn").addEventListener("click", () => {
    draw.start();
    toast("click to add vertices, double-click to finish");
  });
  el<HTMLButtonElement>("clear-btn").addEventListener("click", () => {
    draw.clear();
    controller.clearPolygon();
  });

  function wireCalibrationInput(id: string, apply: (obj: unknown) => void): void {
    el<HTMLInputElement>(id).addEventListener("change", async (e) => {
      const file = (e.target as HTMLInputElement).files?.[0];
      if (!file) return;
      try {
        apply(JSON.parse(await file.text()));
        await controller.refreshLayers();
      } catch (err) {
        toast(`calibration file: ${err}`, true);
      }
    });
  }
  wireCalibrationInput("sar-calib", (obj) => {
    controller.sarCalibration = obj as SarCalibration;
  });
  wireCalibrationInput("pumice-calib", (obj) => {
    controller.pumiceCalibration = obj as PumiceCalibration;
  });

  function sync(): void {
    date1.value = controller.state.date1;
    date2.value = controller.state.date2;
    kindSelect.value = controller.state.kind;
    splitSlider.value = String(Math.round(controller.state.split * 100));
  }

  window.addEventListener("hashchange", () => {
    controller.restore(stateFromHash(window.location.hash, controller.state)).then(sync);
  });

  await controller.restore(startState);
  sync();
}

boot().catch((err) => toast(String(err), true));
