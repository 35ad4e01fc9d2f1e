/** DOM wiring for the sensitivity explorer. */

import { ApiClient } from "./api";
import { ExplorerStore, SLIDER_MAX, SLIDER_STEP } from "./state";
import { isMember, nearestIndex } from "./threshold";
import { approximateContour, cellAt, drawHeatmap } from "./views/heatmap";
import { renderIntervalPanel } from "./views/intervalPanel";
import { parseStatsForm } from "./views/statsForm";

const params = new URLSearchParams(window.location.search);
const baseUrl =
  params.get("service") ?? localStorage.getItem("confound.service") ?? "http://127.0.0.1:8787";
localStorage.setItem("confound.service", baseUrl);

const api = new ApiClient(baseUrl);
const store = new ExplorerStore(api);

const el = <T extends HTMLElement>(id: string): T => {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
};

const intervalPanel = el<HTMLDivElement>("interval-panel");
const statsSummary = el<HTMLDivElement>("stats-summary");
const errorBox = el<HTMLDivElement>("error-box");
const bxSlider = el<HTMLInputElement>("bx-slider");
const bySlider = el<HTMLInputElement>("by-slider");
const bxNumber = el<HTMLInputElement>("bx-number");
const byNumber = el<HTMLInputElement>("by-number");
const betaStarInput = el<HTMLInputElement>("beta-star");
const betaStarSlider = el<HTMLInputElement>("beta-star-slider");
const directionSelect = el<HTMLSelectElement>("direction");
const canvas = el<HTMLCanvasElement>("surface-canvas");
const regionInfo = el<HTMLDivElement>("region-info");
const serviceLabel = el<HTMLSpanElement>("service-url");

serviceLabel.textContent = baseUrl;

function syncSliderBounds(): void {
  const min = store.sliderMin();
  for (const [input, lo] of [
    [bxSlider, min.bx],
    [bxNumber, min.bx],
    [bySlider, min.by],
    [byNumber, min.by],
  ] as [HTMLInputElement, number][]) {
    input.min = String(lo);
    input.max = String(SLIDER_MAX);
    input.step = String(SLIDER_STEP);
  }
}

function render(): void {
  const state = store.getState();
  intervalPanel.innerHTML = renderIntervalPanel(
    state,
    store.signIdentified(),
    store.intervalIsCurrent(),
  );
  errorBox.textContent = state.error ?? "";
  errorBox.style.display = state.error ? "block" : "none";

  if (state.stats) {
    const s = state.stats;
    statsSummary.innerHTML =
      `<strong>${state.statsLabel}</strong> — sd_ratio ${s.sd_ratio}, ` +
      `rho_xy ${s.rho_xy}, r2_wx ${s.r2_wx}, r2_wy ${s.r2_wy}` +
      (s.n ? `, n ${s.n}` : "");
  }
  bxSlider.value = String(state.bx);
  bxNumber.value = String(state.bx);
  bySlider.value = String(state.by);
  byNumber.value = String(state.by);

  if (state.surface) {
    const ctx = canvas.getContext("2d");
    if (ctx) {
      drawHeatmap(
        ctx,
        state.surface,
        state.mask,
        approximateContour(state.surface, state.betaStar),
        canvas.width,
        canvas.height,
      );
    }
    const member =
      state.mask !== null &&
      isMember(state.surface, state.mask, state.bx, state.by);
    regionInfo.innerHTML = state.surfaceInFlight
      ? `<span class="muted">updating surface…</span>`
      : `current bounds are <strong>${member ? "inside" : "outside"}</strong> ` +
        `the region where the adjusted slope is guaranteed ` +
        `${state.direction === "below" ? "at or below" : "at or above"} ` +
        `beta* = ${state.betaStar}`;
  } else {
    regionInfo.innerHTML = state.surfaceInFlight
      ? `<span class="muted">fetching surface…</span>`
      : "";
  }
}

store.subscribe(render);

// ---------------------------------------------------------------------------
// stats entry
// ---------------------------------------------------------------------------

el<HTMLButtonElement>("load-stats").addEventListener("click", () => {
  try {
    const stats = parseStatsForm({
      sd_ratio: el<HTMLInputElement>("f-sd-ratio").value,
      rho_xy: el<HTMLInputElement>("f-rho-xy").value,
      r2_wx: el<HTMLInputElement>("f-r2-wx").value,
      r2_wy: el<HTMLInputElement>("f-r2-wy").value,
    });
    store.setStats(stats, "manual entry");
    syncSliderBounds();
    void store.setSliders(stats.r2_wx, stats.r2_wy);
    void store.refreshSurface();
  } catch (err) {
    errorBox.textContent = err instanceof Error ? err.message : String(err);
    errorBox.style.display = "block";
  }
});

el<HTMLButtonElement>("upload-csv").addEventListener("click", async () => {
  const fileInput = el<HTMLInputElement>("csv-file");
  const file = fileInput.files?.[0];
  if (!file) {
    errorBox.textContent = "choose a CSV file first";
    errorBox.style.display = "block";
    return;
  }
  try {
    const roles = {
      y: el<HTMLInputElement>("role-y").value,
      x: el<HTMLInputElement>("role-x").value,
      w: el<HTMLInputElement>("role-w")
        .value.split(",")
        .map((s) => s.trim())
        .filter(Boolean),
    };
    const uploaded = await api.uploadCsv(file, file.name, roles);
    store.setStats(uploaded.stats, uploaded.label);
    syncSliderBounds();
    void store.setSliders(uploaded.stats.r2_wx, uploaded.stats.r2_wy);
    void store.refreshSurface();
  } catch (err) {
    errorBox.textContent = err instanceof Error ? err.message : String(err);
    errorBox.style.display = "block";
  }
});

// ---------------------------------------------------------------------------
// sliders: interval refresh fires on release (change), numeric entry on change
// ---------------------------------------------------------------------------

function sliderHandler(): void {
  void store.setSliders(Number(bxSlider.value), Number(bySlider.value));
}
function numberHandler(): void {
  void store.setSliders(Number(bxNumber.value), Number(byNumber.value));
}
bxSlider.addEventListener("change", sliderHandler);
bySlider.addEventListener("change", sliderHandler);
bxNumber.addEventListener("change", numberHandler);
byNumber.addEventListener("change", numberHandler);

// ---------------------------------------------------------------------------
// threshold: re-shades the cached grid client-side, no server round-trip
// ---------------------------------------------------------------------------

function betaStarHandler(value: number): void {
  betaStarInput.value = String(value);
  betaStarSlider.value = String(value);
  store.setBetaStar(value);
}
betaStarSlider.addEventListener("input", () =>
  betaStarHandler(Number(betaStarSlider.value)),
);
betaStarInput.addEventListener("change", () =>
  betaStarHandler(Number(betaStarInput.value)),
);
directionSelect.addEventListener("change", () => {
  store.setDirection(directionSelect.value === "above" ? "above" : "below");
});

// clicking a surface cell moves the sliders to that bound pair
canvas.addEventListener("click", (event) => {
  const state = store.getState();
  if (!state.surface) return;
  const rect = canvas.getBoundingClientRect();
  const hit = cellAt(
    state.surface,
    event.clientX - rect.left,
    event.clientY - rect.top,
    rect.width,
    rect.height,
  );
  if (!hit) return;
  void store.setSliders(
    state.surface.bx_axis[hit.i],
    state.surface.by_axis[hit.j],
  );
});

// expose for debugging in the console
declare global {
  interface Window {
    explorer: { store: ExplorerStore; api: ApiClient };
  }
}
window.explorer = { store, api };

void api.health().then((ok) => {
  if (!ok) {
    errorBox.textContent =
      `service not reachable at ${baseUrl} — start it with ` +
      `'confound-serve' or pass ?service=http://host:port`;
    errorBox.style.display = "block";
  }
});

render();
