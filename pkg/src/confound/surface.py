"""Sensitivity surfaces over bound grids, threshold contours and regions.

A surface evaluates the confounding interval on a grid of (bx, by) bounds;
every cell goes through the same batched grid+refinement optimizer as a
direct interval call, just at a cell-level search resolution chosen so a
full 201 x 201 surface stays interactive.  Monotone nesting (upper
non-decreasing, lower non-increasing along both axes) is a structural fact
of growing feasible sets; a running max/min pass guards it against
sub-tolerance discretization noise so the invariant holds exactly.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .identify import DEFAULT_RHO_F_BOUNDS, SearchConfig, _check_rho_f_bounds, _optimize_cells
from .regression import SufficientStats

AXIS_UPPER_MARGIN = 1e-3  # bounds must stay strictly below 1

# Cell-level optimizer defaults: coarser grid than a direct interval call,
# refined to well below plotting/interpolation accuracy.
SURFACE_SEARCH = SearchConfig(grid_points=41, refine_iters=30, refine_tol=1e-9)

DIRECTIONS = ("below", "above")


@dataclass(frozen=True)
class SurfaceGrid:
    """L and U evaluated over a grid of bound pairs; matrices indexed [bx][by]."""

    bx_axis: np.ndarray
    by_axis: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    stats: SufficientStats | None = None
    meta: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ThresholdRegion:
    """Bound pairs whose interval clears a practical-significance threshold.

    direction 'below': cells where the entire interval lies at or below
    beta_star (upper <= beta_star); 'above': cells where it lies at or above
    (lower >= beta_star).  The mask is downward closed (staircase) and the
    contour traces the threshold level set of U (or L) by linear
    interpolation along grid edges, ordered by increasing bx.
    """

    beta_star: float
    direction: str
    bx_axis: np.ndarray
    by_axis: np.ndarray
    mask: np.ndarray
    contour: list
    empty: bool


def compute_surface(
    stats: SufficientStats,
    resolution: int,
    rho_f_bounds: tuple[float, float] | None = None,
    search: SearchConfig | None = None,
) -> SurfaceGrid:
    """Evaluate L(bx, by) and U(bx, by) over a resolution^2 grid of bounds.

    Axes run from the measured coefficients of determination up to
    1 - 1e-3 (the slope formula is singular at 1).
    """
    stats.validate()
    if resolution < 2:
        raise InputError("surface resolution must be at least 2")
    cap = 1.0 - AXIS_UPPER_MARGIN
    if stats.r2_wx >= cap or stats.r2_wy >= cap:
        raise InputError("measured R2 leaves no room for a bounds grid below 1")
    rho_f = _check_rho_f_bounds(rho_f_bounds or DEFAULT_RHO_F_BOUNDS)
    search = search or SURFACE_SEARCH

    bx_axis = np.linspace(stats.r2_wx, cap, resolution)
    by_axis = np.linspace(stats.r2_wy, cap, resolution)
    tbx = (bx_axis - stats.r2_wx) / (1.0 - stats.r2_wx)
    tby = (by_axis - stats.r2_wy) / (1.0 - stats.r2_wy)
    tbx_cells = np.repeat(tbx, resolution)
    tby_cells = np.tile(tby, resolution)

    lower, upper, _, _, sweeps = _optimize_cells(
        stats, tbx_cells, tby_cells, rho_f, search
    )
    lower = lower.reshape(resolution, resolution)
    upper = upper.reshape(resolution, resolution)
    # Guard monotone nesting against discretization noise below the
    # refinement tolerance.
    upper = np.maximum.accumulate(np.maximum.accumulate(upper, axis=0), axis=1)
    lower = np.minimum.accumulate(np.minimum.accumulate(lower, axis=0), axis=1)
    return SurfaceGrid(
        bx_axis=bx_axis,
        by_axis=by_axis,
        lower=lower,
        upper=upper,
        stats=stats,
        meta={
            "resolution": resolution,
            "grid_points": search.grid_points,
            "refine_sweeps": int(sweeps),
            "realizability": search.realizability,
            "rho_f_bounds": list(rho_f),
        },
    )


def threshold_region(
    grid: SurfaceGrid, beta_star: float, direction: str
) -> ThresholdRegion:
    """Cells of a surface whose interval clears beta_star, plus the contour."""
    if direction not in DIRECTIONS:
        raise InputError(f"direction must be one of {DIRECTIONS}, got '{direction}'")
    if direction == "below":
        mask = grid.upper <= beta_star
        level_of = grid.upper
    else:
        mask = grid.lower >= beta_star
        level_of = grid.lower
    contour = _level_contour(grid.bx_axis, grid.by_axis, level_of, beta_star)
    return ThresholdRegion(
        beta_star=float(beta_star),
        direction=direction,
        bx_axis=grid.bx_axis,
        by_axis=grid.by_axis,
        mask=mask,
        contour=contour,
        empty=not bool(mask.any()),
    )


def _level_contour(bx_axis, by_axis, values, level) -> list:
    """Level-set polyline of a monotone field on a structured grid.

    Crossing locations are linearly interpolated along grid rows and columns;
    because the field is monotone along both axes the level set is a single
    monotone curve, so sorting vertices by bx (descending by on ties) yields
    an ordered polyline.
    """
    verts = []
    nx, ny = values.shape
    for i in range(nx):
        row = values[i]
        for j in range(ny - 1):
            a, b = row[j] - level, row[j + 1] - level
            if a == 0.0:
                verts.append((float(bx_axis[i]), float(by_axis[j])))
            elif a * b < 0.0:
                t = a / (a - b)
                verts.append(
                    (
                        float(bx_axis[i]),
                        float(by_axis[j] + t * (by_axis[j + 1] - by_axis[j])),
                    )
                )
        if row[ny - 1] == level:
            verts.append((float(bx_axis[i]), float(by_axis[ny - 1])))
    for j in range(ny):
        col = values[:, j]
        for i in range(nx - 1):
            a, b = col[i] - level, col[i + 1] - level
            if a * b < 0.0:
                t = a / (a - b)
                verts.append(
                    (
                        float(bx_axis[i] + t * (bx_axis[i + 1] - bx_axis[i])),
                        float(by_axis[j]),
                    )
                )
    verts = sorted(set(verts), key=lambda v: (v[0], -v[1]))
    return [list(v) for v in verts]


# ---------------------------------------------------------------------------
# Serialization: fixed field names, lossless floats (shortest round-trip repr).
# ---------------------------------------------------------------------------


def export_surface(obj, format: str) -> bytes:
    """Serialize a SurfaceGrid or ThresholdRegion to JSON or CSV bytes."""
    if isinstance(obj, SurfaceGrid):
        if format == "json":
            return _dumps(surface_to_dict(obj)).encode()
        if format == "csv":
            return _surface_csv(obj).encode()
    elif isinstance(obj, ThresholdRegion):
        if format == "json":
            return _dumps(region_to_dict(obj)).encode()
    raise InputError(
        f"unsupported export format '{format}' for {type(obj).__name__}"
    )


def import_surface(data: bytes, format: str) -> SurfaceGrid:
    """Inverse of export_surface for grids; CSV carries no stats block."""
    if format == "json":
        return surface_from_dict(json.loads(data.decode()))
    if format == "csv":
        reader = csv.reader(io.StringIO(data.decode()))
        header = next(reader)
        if header != ["bx", "by", "L", "U"]:
            raise InputError(f"unexpected CSV header {header}")
        rows = [(float(a), float(b), float(c), float(d)) for a, b, c, d in reader]
        bx_axis = sorted(dict.fromkeys(r[0] for r in rows))
        by_axis = sorted(dict.fromkeys(r[1] for r in rows))
        nx, ny = len(bx_axis), len(by_axis)
        if len(rows) != nx * ny:
            raise InputError("CSV rows do not form a full grid")
        lower = np.array([r[2] for r in rows]).reshape(nx, ny)
        upper = np.array([r[3] for r in rows]).reshape(nx, ny)
        return SurfaceGrid(
            bx_axis=np.array(bx_axis),
            by_axis=np.array(by_axis),
            lower=lower,
            upper=upper,
        )
    raise InputError(f"unsupported import format '{format}'")


def surface_to_dict(grid: SurfaceGrid) -> dict:
    from .serialize import stats_to_dict

    return {
        "stats": stats_to_dict(grid.stats) if grid.stats is not None else None,
        "bx_axis": [float(v) for v in grid.bx_axis],
        "by_axis": [float(v) for v in grid.by_axis],
        "lower": [[float(v) for v in row] for row in grid.lower],
        "upper": [[float(v) for v in row] for row in grid.upper],
    }


def surface_from_dict(d: dict) -> SurfaceGrid:
    from .serialize import stats_from_dict

    return SurfaceGrid(
        bx_axis=np.array(d["bx_axis"], dtype=float),
        by_axis=np.array(d["by_axis"], dtype=float),
        lower=np.array(d["lower"], dtype=float),
        upper=np.array(d["upper"], dtype=float),
        stats=stats_from_dict(d["stats"]) if d.get("stats") else None,
    )


def region_to_dict(region: ThresholdRegion) -> dict:
    return {
        "beta_star": float(region.beta_star),
        "direction": region.direction,
        "bx_axis": [float(v) for v in region.bx_axis],
        "by_axis": [float(v) for v in region.by_axis],
        "mask": [[bool(v) for v in row] for row in region.mask],
        "contour": [[float(a), float(b)] for a, b in region.contour],
        "empty": bool(region.empty),
    }


def region_from_dict(d: dict) -> ThresholdRegion:
    return ThresholdRegion(
        beta_star=float(d["beta_star"]),
        direction=d["direction"],
        bx_axis=np.array(d["bx_axis"], dtype=float),
        by_axis=np.array(d["by_axis"], dtype=float),
        mask=np.array(d["mask"], dtype=bool),
        contour=[list(map(float, v)) for v in d["contour"]],
        empty=bool(d["empty"]),
    )


def _surface_csv(grid: SurfaceGrid) -> str:
    lines = ["bx,by,L,U"]
    for i, bx in enumerate(grid.bx_axis):
        for j, by in enumerate(grid.by_axis):
            lines.append(
                f"{float(bx)!r},{float(by)!r},"
                f"{float(grid.lower[i, j])!r},{float(grid.upper[i, j])!r}"
            )
    return "\n".join(lines) + "\n"


def _dumps(obj) -> str:
    from .serialize import dumps

    return dumps(obj)
