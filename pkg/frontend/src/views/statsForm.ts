/** Manual sufficient-statistics entry: parse and validate the four numbers. */

import type { Stats } from "../types";

export interface StatsFormInput {
  sd_ratio: string;
  rho_xy: string;
  r2_wx: string;
  r2_wy: string;
}

export function parseStatsForm(input: StatsFormInput): Stats {
  const parse = (name: keyof StatsFormInput): number => {
    const value = Number(input[name]);
    if (!Number.isFinite(value)) {
      throw new Error(`${name} must be a number, got '${input[name]}'`);
    }
    return value;
  };
  const stats: Stats = {
    sd_ratio: parse("sd_ratio"),
    rho_xy: parse("rho_xy"),
    r2_wx: parse("r2_wx"),
    r2_wy: parse("r2_wy"),
  };
  if (stats.sd_ratio <= 0) throw new Error("sd_ratio must be positive");
  if (stats.rho_xy < -1 || stats.rho_xy > 1) {
    throw new Error("rho_xy must lie in [-1, 1]");
  }
  for (const key of ["r2_wx", "r2_wy"] as const) {
    if (stats[key] < 0 || stats[key] >= 1) {
      throw new Error(`${key} must lie in [0, 1)`);
    }
  }
  return stats;
}
