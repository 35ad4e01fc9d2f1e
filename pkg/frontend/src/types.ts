/** JSON shapes produced by the confound service (field names are the contract). */

export interface Stats {
  sd_ratio: number;
  rho_xy: number;
  r2_wx: number;
  r2_wy: number;
  beta_xy_given_w?: number | null;
  n?: number | null;
}

export interface AdjustmentPoint {
  rx: number;
  ry: number;
  rho_f: number;
}

export interface IntervalResponse {
  lower: number;
  upper: number;
  bx: number;
  by: number;
  lower_witness: AdjustmentPoint;
  upper_witness: AdjustmentPoint;
  method_meta: Record<string, unknown>;
}

export interface SurfaceResponse {
  stats: Stats | null;
  bx_axis: number[];
  by_axis: number[];
  lower: number[][];
  upper: number[][];
}

export interface RegionResponse {
  beta_star: number;
  direction: Direction;
  bx_axis: number[];
  by_axis: number[];
  mask: boolean[][];
  contour: [number, number][];
  empty: boolean;
}

export interface StatsUploadResponse {
  session_id: string;
  label: string;
  created_at: number;
  stats: Stats;
  prepare_report: {
    rows_in: number;
    rows_missing_dropped: number;
    rows_filter_dropped: number;
    rows_outlier_dropped: number;
    rows_out: number;
  };
}

export type Direction = "below" | "above";

export interface ColumnRoles {
  y: string;
  x: string;
  w: string[];
  label?: string;
}
