/** Typed HTTP client for the confound service. All numbers displayed in the
 * explorer come from these responses; the client never recomputes them. */

import type {
  ColumnRoles,
  Direction,
  IntervalResponse,
  RegionResponse,
  Stats,
  StatsUploadResponse,
  SurfaceResponse,
} from "./types";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`service error ${status}: ${detail}`);
  }
}

async function parseError(response: Response): Promise<never> {
  let detail = response.statusText;
  try {
    const body = (await response.json()) as { detail?: string };
    if (body.detail) detail = body.detail;
  } catch {
    // non-JSON error body: keep the status text
  }
  throw new ApiError(response.status, detail);
}

export class ApiClient {
  constructor(readonly baseUrl: string) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/$/, "") + path;
  }

  private async post<T>(path: string, body: unknown): Promise<T> {
    const response = await fetch(this.url(path), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!response.ok) await parseError(response);
    return (await response.json()) as T;
  }

  async health(): Promise<boolean> {
    try {
      const response = await fetch(this.url("/v1/health"));
      return response.ok;
    } catch {
      return false;
    }
  }

  async uploadCsv(
    file: Blob,
    filename: string,
    roles: ColumnRoles,
    outlierIqr?: number,
  ): Promise<StatsUploadResponse> {
    const form = new FormData();
    form.append("file", file, filename);
    form.append("roles", JSON.stringify(roles));
    if (outlierIqr !== undefined) form.append("outlier_iqr", String(outlierIqr));
    const response = await fetch(this.url("/v1/stats"), {
      method: "POST",
      body: form,
    });
    if (!response.ok) await parseError(response);
    return (await response.json()) as StatsUploadResponse;
  }

  interval(
    stats: Stats,
    bx: number,
    by: number,
    rhoFBounds?: [number, number],
  ): Promise<IntervalResponse> {
    const body: Record<string, unknown> = { stats, bx, by };
    if (rhoFBounds) body.rho_f_bounds = rhoFBounds;
    return this.post<IntervalResponse>("/v1/interval", body);
  }

  surface(
    stats: Stats,
    resolution: number,
    rhoFBounds?: [number, number],
  ): Promise<SurfaceResponse> {
    const body: Record<string, unknown> = { stats, resolution };
    if (rhoFBounds) body.rho_f_bounds = rhoFBounds;
    return this.post<SurfaceResponse>("/v1/surface", body);
  }

  region(
    stats: Stats,
    resolution: number,
    betaStar: number,
    direction: Direction,
    rhoFBounds?: [number, number],
  ): Promise<RegionResponse> {
    const body: Record<string, unknown> = {
      stats,
      resolution,
      beta_star: betaStar,
      direction,
    };
    if (rhoFBounds) body.rho_f_bounds = rhoFBounds;
    return this.post<RegionResponse>("/v1/region", body);
  }
}
