import { describe, expect, it } from "vitest";

import type { ApiClient } from "../src/api";
import { clampSlider, ExplorerStore, SLIDER_MAX } from "../src/state";
import type { IntervalResponse, Stats, SurfaceResponse } from "../src/types";

const WIND: Stats = { sd_ratio: 1.62, rho_xy: -0.48, r2_wx: 0.14, r2_wy: 0.28 };

function fakeInterval(bx: number, by: number, lower = -1, upper = 1): IntervalResponse {
  return {
    lower,
    upper,
    bx,
    by,
    lower_witness: { rx: 0, ry: 0, rho_f: 0 },
    upper_witness: { rx: 0, ry: 0, rho_f: 0 },
    method_meta: {},
  };
}

type Resolver = (value: IntervalResponse) => void;

/** ApiClient stand-in whose interval() promises resolve on demand. */
function makeManualApi() {
  const pending: { bx: number; by: number; resolve: Resolver }[] = [];
  const api = {
    interval(_stats: Stats, bx: number, by: number) {
      return new Promise<IntervalResponse>((resolve) => {
        pending.push({ bx, by, resolve });
      });
    },
    surface(): Promise<SurfaceResponse> {
      return Promise.resolve({
        stats: WIND,
        bx_axis: [0.14, 0.5],
        by_axis: [0.28, 0.6],
        lower: [
          [-0.7776, -1.2],
          [-1.1, -1.9],
        ],
        upper: [
          [-0.7776, -0.5],
          [-0.6, -0.2],
        ],
      });
    },
  } as unknown as ApiClient;
  return { api, pending };
}

describe("clampSlider", () => {
  it("clamps into [min, 0.999]", () => {
    expect(clampSlider(0.5, 0.14)).toBe(0.5);
    expect(clampSlider(0.01, 0.14)).toBe(0.14);
    expect(clampSlider(1.2, 0.14)).toBe(SLIDER_MAX);
  });
});

describe("ExplorerStore", () => {
  it("initializes slider bounds from the measured R2", () => {
    const { api } = makeManualApi();
    const store = new ExplorerStore(api);
    store.setStats(WIND, "manual");
    expect(store.sliderMin()).toEqual({ bx: 0.14, by: 0.28 });
    const state = store.getState();
    expect(state.bx).toBeGreaterThanOrEqual(0.14);
    expect(state.by).toBeGreaterThanOrEqual(0.28);
  });

  it("clamps slider moves below the measured R2", async () => {
    const { api, pending } = makeManualApi();
    const store = new ExplorerStore(api);
    store.setStats(WIND, "manual");
    const move = store.setSliders(0.0, 0.0);
    expect(store.getState().bx).toBe(0.14);
    expect(store.getState().by).toBe(0.28);
    pending[0].resolve(fakeInterval(0.14, 0.28));
    await move;
  });

  it("discards stale interval responses by sequence number", async () => {
    const { api, pending } = makeManualApi();
    const store = new ExplorerStore(api);
    store.setStats(WIND, "manual");

    const first = store.setSliders(0.5, 0.5);
    const second = store.setSliders(0.7, 0.7);
    expect(pending.length).toBe(2);

    // resolve newest first, then the stale one
    pending[1].resolve(fakeInterval(0.7, 0.7, -2, -0.5));
    await second;
    expect(store.getState().interval?.bx).toBe(0.7);

    pending[0].resolve(fakeInterval(0.5, 0.5, -9, 9));
    await first;
    // stale response must not overwrite the newer one
    expect(store.getState().interval?.bx).toBe(0.7);
    expect(store.getState().interval?.lower).toBe(-2);
    expect(store.intervalIsCurrent()).toBe(true);
  });

  it("flags the interval as stale while sliders move", async () => {
    const { api, pending } = makeManualApi();
    const store = new ExplorerStore(api);
    store.setStats(WIND, "manual");
    const move = store.setSliders(0.5, 0.5);
    pending[0].resolve(fakeInterval(0.5, 0.5));
    await move;
    expect(store.intervalIsCurrent()).toBe(true);
    const move2 = store.setSliders(0.6, 0.5);
    expect(store.intervalIsCurrent()).toBe(false); // displayed values moved on
    pending[1].resolve(fakeInterval(0.6, 0.5));
    await move2;
    expect(store.intervalIsCurrent()).toBe(true);
  });

  it("sign badge reflects whether zero is excluded", async () => {
    const { api, pending } = makeManualApi();
    const store = new ExplorerStore(api);
    store.setStats(WIND, "manual");
    const move = store.setSliders(0.5, 0.5);
    pending[0].resolve(fakeInterval(0.5, 0.5, -2.9, -0.44));
    await move;
    expect(store.signIdentified()).toBe(true);
    const move2 = store.setSliders(0.6, 0.6);
    pending[1].resolve(fakeInterval(0.6, 0.6, -64, 44));
    await move2;
    expect(store.signIdentified()).toBe(false);
  });

  it("re-shades the cached surface client-side without a new request", async () => {
    const { api } = makeManualApi();
    const store = new ExplorerStore(api);
    store.setStats(WIND, "manual");
    await store.refreshSurface();
    expect(store.getState().surface).not.toBeNull();
    store.setBetaStar(-0.55);
    expect(store.getState().mask).toEqual([
      [true, false],
      [true, false],
    ]);
    store.setBetaStar(-0.1);
    expect(store.getState().mask).toEqual([
      [true, true],
      [true, true],
    ]);
    store.setDirection("above");
    // lower surface is everywhere below -0.1, so nothing qualifies
    expect(store.getState().mask).toEqual([
      [false, false],
      [false, false],
    ]);
  });
});
