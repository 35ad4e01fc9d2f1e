/** Client-side practical-significance thresholding of a cached surface.
 *
 * Mirrors the service's region semantics exactly (direction "below":
 * upper <= beta*; "above": lower >= beta*) so re-shading while the analyst
 * drags the threshold needs no server round-trip, and the computed mask is
 * cell-for-cell identical to a /v1/region response for the same grid.
 */

import type { Direction, SurfaceResponse } from "./types";

export function computeMask(
  surface: SurfaceResponse,
  betaStar: number,
  direction: Direction,
): boolean[][] {
  const source = direction === "below" ? surface.upper : surface.lower;
  return source.map((row) =>
    row.map((value) => (direction === "below" ? value <= betaStar : value >= betaStar)),
  );
}

export function maskIsEmpty(mask: boolean[][]): boolean {
  return !mask.some((row) => row.some(Boolean));
}

/** Index of the axis value closest to v. */
export function nearestIndex(axis: number[], v: number): number {
  let best = 0;
  let bestDist = Infinity;
  for (let i = 0; i < axis.length; i++) {
    const d = Math.abs(axis[i] - v);
    if (d < bestDist) {
      bestDist = d;
      best = i;
    }
  }
  return best;
}

export function isMember(
  surface: SurfaceResponse,
  mask: boolean[][],
  bx: number,
  by: number,
): boolean {
  const i = nearestIndex(surface.bx_axis, bx);
  const j = nearestIndex(surface.by_axis, by);
  return mask[i][j];
}

export function masksEqual(a: boolean[][], b: boolean[][]): boolean {
  if (a.length !== b.length) return false;
  for (let i = 0; i < a.length; i++) {
    if (a[i].length !== b[i].length) return false;
    for (let j = 0; j < a[i].length; j++) {
      if (a[i][j] !== b[i][j]) return false;
    }
  }
  return true;
}
