/** Explorer state machine.
 *
 * The what-if loop: load stats, move the (bx, by) sliders, watch the interval
 * update; drag the beta* threshold and watch the region re-shade from the
 * cached surface.  Interval values always come from the service; overlapping
 * requests are resolved by monotone sequence numbers so the displayed
 * interval always corresponds to the displayed slider values.
 */

import { ApiClient } from "./api";
import { computeMask } from "./threshold";
import type {
  Direction,
  IntervalResponse,
  Stats,
  SurfaceResponse,
} from "./types";

export const SLIDER_MAX = 0.999;
export const SLIDER_STEP = 0.005;

export interface ExplorerState {
  stats: Stats | null;
  statsLabel: string;
  bx: number;
  by: number;
  betaStar: number;
  direction: Direction;
  rhoFBounds: [number, number] | null;
  interval: IntervalResponse | null;
  /** Slider values the displayed interval was computed for. */
  intervalAt: { bx: number; by: number } | null;
  surface: SurfaceResponse | null;
  mask: boolean[][] | null;
  intervalInFlight: boolean;
  surfaceInFlight: boolean;
  error: string | null;
}

type Listener = (state: ExplorerState) => void;

export function clampSlider(value: number, min: number): number {
  return Math.min(SLIDER_MAX, Math.max(min, value));
}

export class ExplorerStore {
  private state: ExplorerState = {
    stats: null,
    statsLabel: "",
    bx: SLIDER_MAX,
    by: SLIDER_MAX,
    betaStar: 0,
    direction: "below",
    rhoFBounds: null,
    interval: null,
    intervalAt: null,
    surface: null,
    mask: null,
    intervalInFlight: false,
    surfaceInFlight: false,
    error: null,
  };

  private listeners: Listener[] = [];
  private intervalSeq = 0;
  private surfaceSeq = 0;

  constructor(
    private readonly api: ApiClient,
    private readonly surfaceResolution = 41,
  ) {}

  getState(): Readonly<ExplorerState> {
    return this.state;
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private update(patch: Partial<ExplorerState>): void {
    this.state = { ...this.state, ...patch };
    for (const listener of this.listeners) listener(this.state);
  }

  /** Load sufficient statistics (manual entry or an upload response) and
   * initialize the sliders at the measured determination coefficients. */
  setStats(stats: Stats, label: string): void {
    this.update({
      stats,
      statsLabel: label,
      bx: clampSlider(this.state.bx, stats.r2_wx),
      by: clampSlider(this.state.by, stats.r2_wy),
      interval: null,
      intervalAt: null,
      surface: null,
      mask: null,
      error: null,
    });
  }

  sliderMin(): { bx: number; by: number } {
    const stats = this.state.stats;
    return { bx: stats ? stats.r2_wx : 0, by: stats ? stats.r2_wy : 0 };
  }

  /** Move the sliders (clamped to [r2, 0.999]) and refresh the interval. */
  async setSliders(bx: number, by: number): Promise<void> {
    const stats = this.state.stats;
    if (!stats) return;
    this.update({
      bx: clampSlider(bx, stats.r2_wx),
      by: clampSlider(by, stats.r2_wy),
    });
    await this.refreshInterval();
  }

  /** Fetch the interval for the current sliders; stale responses (an older
   * request resolving after a newer one) are discarded. */
  async refreshInterval(): Promise<void> {
    const { stats, bx, by, rhoFBounds } = this.state;
    if (!stats) return;
    const seq = ++this.intervalSeq;
    this.update({ intervalInFlight: true });
    try {
      const interval = await this.api.interval(
        stats,
        bx,
        by,
        rhoFBounds ?? undefined,
      );
      if (seq !== this.intervalSeq) return; // stale
      this.update({
        interval,
        intervalAt: { bx, by },
        intervalInFlight: false,
        error: null,
      });
    } catch (err) {
      if (seq !== this.intervalSeq) return;
      this.update({
        intervalInFlight: false,
        error: err instanceof Error ? err.message : String(err),
      });
    }
  }

  /** Fetch the surface for the loaded stats and shade it at the current
   * threshold.  The interval panel stays live while this runs. */
  async refreshSurface(): Promise<void> {
    const { stats, rhoFBounds } = this.state;
    if (!stats) return;
    const seq = ++this.surfaceSeq;
    this.update({ surfaceInFlight: true });
    try {
      const surface = await this.api.surface(
        stats,
        this.surfaceResolution,
        rhoFBounds ?? undefined,
      );
      if (seq !== this.surfaceSeq) return;
      this.update({
        surface,
        mask: computeMask(surface, this.state.betaStar, this.state.direction),
        surfaceInFlight: false,
      });
    } catch (err) {
      if (seq !== this.surfaceSeq) return;
      this.update({
        surfaceInFlight: false,
        error: err instanceof Error ? err.message : String(err),
      });
    }
  }

  /** Re-shade the cached grid locally; no server round-trip. */
  setBetaStar(betaStar: number): void {
    const { surface, direction } = this.state;
    this.update({
      betaStar,
      mask: surface ? computeMask(surface, betaStar, direction) : null,
    });
  }

  setDirection(direction: Direction): void {
    const { surface, betaStar } = this.state;
    this.update({
      direction,
      mask: surface ? computeMask(surface, betaStar, direction) : null,
    });
  }

  /** True when the interval excludes zero: the sign of the adjusted slope is
   * identified for every confounder within the bounds. */
  signIdentified(): boolean {
    const ci = this.state.interval;
    return ci !== null && (ci.upper < 0 || ci.lower > 0);
  }

  /** Displayed interval must match the displayed sliders. */
  intervalIsCurrent(): boolean {
    const at = this.state.intervalAt;
    return (
      at !== null && at.bx === this.state.bx && at.by === this.state.by
    );
  }
}
