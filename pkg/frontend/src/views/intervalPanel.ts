/** Interval panel: the service's numbers, verbatim, plus the sign badge. */

import type { ExplorerState } from "../state";

/** Exact decimal text of a service value (no rounding, no recomputation). */
export function verbatim(value: number): string {
  return String(value);
}

export function renderIntervalPanel(
  state: ExplorerState,
  signIdentified: boolean,
  current: boolean,
): string {
  if (!state.stats) {
    return `<p class="muted">Load a dataset or paste sufficient statistics to begin.</p>`;
  }
  const ci = state.interval;
  if (!ci || !current) {
    return `<p class="muted">Computing interval for (bx=${state.bx.toFixed(3)}, by=${state.by.toFixed(3)})…</p>`;
  }
  const badge = signIdentified
    ? `<span class="badge badge-on" data-testid="sign-badge">sign identified</span>`
    : `<span class="badge badge-off" data-testid="sign-badge-off">sign not identified</span>`;
  const degenerate = ci.lower === ci.upper;
  return `
    <div class="interval" data-testid="interval-panel">
      <div class="interval-values">
        <span data-testid="interval-lower">${verbatim(ci.lower)}</span>
        <span class="interval-sep">&le; adjusted slope &le;</span>
        <span data-testid="interval-upper">${verbatim(ci.upper)}</span>
      </div>
      <div class="interval-meta">
        at bounds (bx=${verbatim(ci.bx)}, by=${verbatim(ci.by)})
        ${degenerate ? '<span class="badge badge-on">point identified</span>' : ""}
        ${badge}
      </div>
    </div>`;
}
