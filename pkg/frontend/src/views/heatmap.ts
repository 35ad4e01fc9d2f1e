/** Heatmap geometry and painting for the upper surface U(bx, by), with the
 * practical-significance mask shaded on top and the threshold contour drawn
 * as a polyline.  Pure helpers are split out so they can be unit tested
 * without a canvas. */

import type { SurfaceResponse } from "../types";

export interface CellRect {
  x: number;
  y: number;
  w: number;
  h: number;
}

/** Pixel rectangle of cell (i, j); bx runs left-to-right, by bottom-to-top. */
export function cellRect(
  surface: SurfaceResponse,
  i: number,
  j: number,
  width: number,
  height: number,
): CellRect {
  const nx = surface.bx_axis.length;
  const ny = surface.by_axis.length;
  const w = width / nx;
  const h = height / ny;
  return { x: i * w, y: height - (j + 1) * h, w, h };
}

/** Cell indices under a pixel position, or null outside the plot. */
export function cellAt(
  surface: SurfaceResponse,
  px: number,
  py: number,
  width: number,
  height: number,
): { i: number; j: number } | null {
  if (px < 0 || py < 0 || px >= width || py >= height) return null;
  const nx = surface.bx_axis.length;
  const ny = surface.by_axis.length;
  const i = Math.floor((px / width) * nx);
  const j = Math.floor(((height - py) / height) * ny);
  if (i < 0 || i >= nx || j < 0 || j >= ny) return null;
  return { i, j };
}

/** Map a value to a diverging blue-white-red color (blue negative). */
export function divergingColor(value: number, absMax: number): string {
  const t = absMax > 0 ? Math.max(-1, Math.min(1, value / absMax)) : 0;
  const lift = (c: number) => Math.round(255 - (255 - c) * Math.abs(t));
  if (t < 0) return `rgb(${lift(33)},${lift(102)},${lift(172)})`;
  return `rgb(${lift(178)},${lift(24)},${lift(43)})`;
}

export function drawHeatmap(
  ctx: CanvasRenderingContext2D,
  surface: SurfaceResponse,
  mask: boolean[][] | null,
  contour: [number, number][] | null,
  width: number,
  height: number,
): void {
  const values = surface.upper;
  let absMax = 0;
  for (const row of values) {
    for (const v of row) absMax = Math.max(absMax, Math.abs(v));
  }
  ctx.clearRect(0, 0, width, height);
  for (let i = 0; i < surface.bx_axis.length; i++) {
    for (let j = 0; j < surface.by_axis.length; j++) {
      const r = cellRect(surface, i, j, width, height);
      ctx.fillStyle = divergingColor(values[i][j], absMax);
      ctx.fillRect(r.x, r.y, r.w + 0.5, r.h + 0.5);
      if (mask && mask[i][j]) {
        ctx.fillStyle = "rgba(40, 40, 40, 0.45)";
        ctx.fillRect(r.x, r.y, r.w + 0.5, r.h + 0.5);
      }
    }
  }
  if (contour && contour.length > 1) {
    ctx.strokeStyle = "#111";
    ctx.lineWidth = 2;
    ctx.beginPath();
    contour.forEach(([bx, by], k) => {
      const px = axisToPixel(surface.bx_axis, bx, width);
      const py = height - axisToPixel(surface.by_axis, by, height);
      if (k === 0) ctx.moveTo(px, py);
      else ctx.lineTo(px, py);
    });
    ctx.stroke();
  }
}

export function axisToPixel(axis: number[], value: number, extent: number): number {
  const lo = axis[0];
  const hi = axis[axis.length - 1];
  if (hi === lo) return 0;
  return ((value - lo) / (hi - lo)) * extent;
}

/** Client-side contour of U = beta* along grid rows (linear interpolation),
 * for live feedback while dragging; the authoritative contour comes from the
 * service's region response. */
export function approximateContour(
  surface: SurfaceResponse,
  betaStar: number,
): [number, number][] {
  const points: [number, number][] = [];
  const { bx_axis, by_axis, upper } = surface;
  for (let i = 0; i < bx_axis.length; i++) {
    for (let j = 0; j + 1 < by_axis.length; j++) {
      const a = upper[i][j] - betaStar;
      const b = upper[i][j + 1] - betaStar;
      if (a === 0) {
        points.push([bx_axis[i], by_axis[j]]);
      } else if (a * b < 0) {
        const t = a / (a - b);
        points.push([bx_axis[i], by_axis[j] + t * (by_axis[j + 1] - by_axis[j])]);
      }
    }
  }
  points.sort((p, q) => p[0] - q[0] || q[1] - p[1]);
  return points;
}
