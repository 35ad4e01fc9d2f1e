"""Confounding-interval engine.

Bounds on joint coefficients of determination are transformed into bounds on
coefficients of partial determination, and the adjusted slope

    beta(rx, ry, rho_f) = sd_ratio * (rho_xy - rx*ry*rho_f) / (1 - rx^2)

is optimized over the box rx in [0, sqrt(tbx)], ry in [0, sqrt(tby)],
rho_f in rho_f_bounds, intersected with the set of points realizable by
actual confounder columns.

Realizability is the positive semidefiniteness of the structured 4x4
correlation matrix M of the unit vectors (treatment residual, outcome
residual, fitted treatment direction, fitted outcome direction), where the
fitted directions span the hypothetical confounder subspace.  Orthogonality
of least-squares residuals to that subspace forces the off-diagonal pattern

    M[0,1] = rho_xy, M[0,2] = rx, M[0,3] = rx*rho_f,
    M[1,2] = ry*rho_f, M[1,3] = ry, M[2,3] = rho_f,

and PSD of M is equivalent to the scalar condition

    (rho_xy - rx*ry*rho_f)^2 <= (1 - rx^2) * (1 - ry^2),

which the optimizer uses in vectorized form.  A two-column confounder
suffices for every extremal value, and construct_witness builds it
explicitly by square-root factorization of M.

Optimization is a dense grid scan over the (rx, ry) axes with the rho_f
coordinate resolved in closed form per grid point (beta is monotone in
rho_f, so its optimum over the admissible rho_f window sits at a window
end), followed by coordinate-wise refinement with bisected shrinking
neighborhoods.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    InfeasibleBoundsError,
    InfeasiblePointError,
    InputError,
    OracleFailureError,
    SingularityError,
)
from .regression import SufficientStats, partial_determination

DEFAULT_RHO_F_BOUNDS = (-1.0, 1.0)

# Slack on the squared realizability condition; keeps exact boundary points
# (where the extrema live) inside the feasible set despite rounding.
_FEAS_SLACK = 1e-12


@dataclass(frozen=True)
class BoundsSpec:
    """User upper bounds on the joint coefficients of determination."""

    bx: float
    by: float

    def validate(self, stats: SufficientStats) -> None:
        if self.bx >= 1.0 or self.by >= 1.0:
            raise InfeasibleBoundsError(
                f"bounds must be below 1, got bx={self.bx}, by={self.by}"
            )
        if self.bx < stats.r2_wx:
            raise InfeasibleBoundsError(
                f"bx={self.bx} is below the measured R2 of the treatment on the "
                f"covariates ({stats.r2_wx})"
            )
        if self.by < stats.r2_wy:
            raise InfeasibleBoundsError(
                f"by={self.by} is below the measured R2 of the outcome on the "
                f"covariates ({stats.r2_wy})"
            )


@dataclass(frozen=True)
class TransformedBounds:
    """Bounds transported to the residual scale (partial determination)."""

    tbx: float
    tby: float


@dataclass(frozen=True)
class AdjustmentPoint:
    """Sensitivity coordinates: nonnegative roots rx, ry and fitted correlation."""

    rx: float
    ry: float
    rho_f: float


@dataclass(frozen=True)
class SearchConfig:
    """Optimizer knobs.

    grid_points is the per-axis resolution of the initial scan;
    refine_iters the minimum number of refinement sweeps; refine_tol the
    relative endpoint movement below which refinement may stop.  With
    realizability=False the PSD constraint is dropped and the slope formula
    is optimized over the raw box, reproducing the conservative relaxation
    used by earlier tools (see README); endpoints can then fall outside the
    range achievable by any actual confounder.
    """

    grid_points: int = 201
    refine_iters: int = 40
    refine_tol: float = 1e-10
    realizability: bool = True


@dataclass(frozen=True)
class ConfoundingInterval:
    lower: float
    upper: float
    lower_witness: AdjustmentPoint
    upper_witness: AdjustmentPoint
    method_meta: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Witness:
    """Constructed confounder columns realizing an adjustment point.

    x_column/y_column are the synthetic residual pair the confounder was
    built against; regressing y_column on [x_column, u_columns] yields
    achieved_beta on the x_column regressor.
    """

    u_columns: np.ndarray
    achieved_beta: float
    achieved_r2x: float
    achieved_r2y: float
    x_column: np.ndarray = None  # type: ignore[assignment]
    y_column: np.ndarray = None  # type: ignore[assignment]
    meta: dict = field(default_factory=dict)


def transform_bounds(stats: SufficientStats, bounds: BoundsSpec) -> TransformedBounds:
    """Map (bx, by) to bounds on the residual-scale coefficients of determination."""
    bounds.validate(stats)
    return TransformedBounds(
        tbx=partial_determination(bounds.bx, stats.r2_wx),
        tby=partial_determination(bounds.by, stats.r2_wy),
    )


def beta_adjusted(stats: SufficientStats, point: AdjustmentPoint) -> float:
    """Adjusted slope at an adjustment point (y-units per x-unit)."""
    if point.rx >= 1.0:
        raise SingularityError(
            "rx = 1 means the treatment residual is fully explained by the "
            "confounder; the adjusted slope is undefined"
        )
    return stats.sd_ratio * (
        (stats.rho_xy - (point.rx * point.ry) * point.rho_f)
        / (1.0 - point.rx * point.rx)
    )


def adjustment_matrix(rho_xy: float, point: AdjustmentPoint) -> np.ndarray:
    """Structured correlation matrix of (x-resid, y-resid, fitted-x, fitted-y)."""
    rx, ry, rf = point.rx, point.ry, point.rho_f
    return np.array(
        [
            [1.0, rho_xy, rx, rx * rf],
            [rho_xy, 1.0, ry * rf, ry],
            [rx, ry * rf, 1.0, rf],
            [rx * rf, ry, rf, 1.0],
        ]
    )


def is_feasible(rho_xy: float, point: AdjustmentPoint, tol: float = 1e-10) -> bool:
    """Whether an adjustment point is realizable by actual confounder columns.

    True iff the structured 4x4 correlation matrix is positive semidefinite
    (smallest eigenvalue >= -tol).
    """
    eigs = np.linalg.eigvalsh(adjustment_matrix(rho_xy, point))
    return bool(eigs[0] >= -tol)


# ---------------------------------------------------------------------------
# Vectorized objective core.  All arithmetic is on the unit-scale factor
# (rho - rx*ry*rho_f) / (1 - rx^2); the sd ratio multiplies only at the end so
# that endpoints are exactly scale equivariant.
# ---------------------------------------------------------------------------


def _rf_window(rho, rx, ry, lo, hi, realizability):
    """Admissible rho_f window per point, and per-point feasibility.

    Intersects [lo, hi] with the realizable rho_f interval
    [(rho - D)/P, (rho + D)/P] where P = rx*ry and D = sqrt((1-rx^2)(1-ry^2)).
    Where P == 0 the slope does not depend on rho_f and the point is feasible
    iff rho^2 <= D^2; the window degenerates to a single admissible value.
    """
    p = rx * ry
    dd = (1.0 - rx * rx) * (1.0 - ry * ry)
    if not realizability:
        shape = np.broadcast(rx, ry).shape
        full = np.ones(shape, dtype=bool)
        return np.broadcast_to(np.float64(lo), shape), np.broadcast_to(
            np.float64(hi), shape
        ), full
    d = np.sqrt(dd)
    with np.errstate(divide="ignore", invalid="ignore"):
        flo = np.where(p > 0.0, (rho - d) / np.where(p > 0.0, p, 1.0), lo)
        fhi = np.where(p > 0.0, (rho + d) / np.where(p > 0.0, p, 1.0), hi)
    lo_eff = np.maximum(lo, flo)
    hi_eff = np.minimum(hi, fhi)
    feas = lo_eff <= hi_eff
    zero = p == 0.0
    if np.any(zero):
        mid = min(max(0.0, lo), hi)
        feas = np.where(zero, rho * rho <= dd * (1.0 + _FEAS_SLACK), feas)
        lo_eff = np.where(zero, mid, lo_eff)
        hi_eff = np.where(zero, mid, hi_eff)
    return lo_eff, hi_eff, feas


def _core_minmax(rho, rx, ry, lo, hi, realizability):
    """Per-point extremes of the unit-scale slope factor over admissible rho_f.

    Returns (core_max, core_min, rf_at_max, rf_at_min, feasible).  The factor
    is non-increasing in rho_f (P = rx*ry >= 0), so the max sits at the window
    low end and the min at the high end.
    """
    lo_eff, hi_eff, feas = _rf_window(rho, rx, ry, lo, hi, realizability)
    p = rx * ry
    den = 1.0 - rx * rx
    core_max = (rho - p * lo_eff) / den
    core_min = (rho - p * hi_eff) / den
    return core_max, core_min, lo_eff, hi_eff, feas


def _grid_scan(rho, rxmax, rymax, lo, hi, realizability, g):
    """Dense scan over the scaled (rx, ry) grid with closed-form rho_f.

    rxmax/rymax are (C,) arrays of per-cell box limits; returns per-cell
    starting points for refinement: arrays (rx, ry, rf, core) for the max and
    the min side.  Ties resolve to the first point in row-major (rx-major)
    order, matching a brute-force enumeration.
    """
    rel = np.linspace(0.0, 1.0, g)
    rx = rxmax[:, None, None] * rel[None, :, None]
    ry = rymax[:, None, None] * rel[None, None, :]
    core_max, core_min, rf_max, rf_min, feas = _core_minmax(
        rho, rx, ry, lo, hi, realizability
    )
    neg = np.where(feas, core_max, -np.inf).reshape(len(rxmax), -1)
    pos = np.where(feas, core_min, np.inf).reshape(len(rxmax), -1)
    imax = np.argmax(neg, axis=1)
    imin = np.argmin(pos, axis=1)
    cells = np.arange(len(rxmax))

    def take(idx, rf):
        i, j = np.divmod(idx, g)
        return (
            rxmax * rel[i],
            rymax * rel[j],
            rf.reshape(len(rxmax), -1)[cells, idx],
        )

    rx_u, ry_u, rf_u = take(imax, rf_max)
    rx_l, ry_l, rf_l = take(imin, rf_min)
    return (
        (rx_u, ry_u, rf_u, neg[cells, imax]),
        (rx_l, ry_l, rf_l, pos[cells, imin]),
    )


def _refine(
    rho, rxmax, rymax, lo, hi, realizability, start, sense, step0, min_iters, tol
):
    """Coordinate-wise refinement with bisected shrinking neighborhoods.

    Vectorized over cells.  The rho_f coordinate is resolved in closed form at
    every visited (rx, ry) (its 1-D optimum is a window end), so refinement
    moves in rx and ry with steps halved whenever no move improves.  Runs at
    least min_iters sweeps and stops once steps fall below tol relative to the
    axis lengths.  Returns (rx, ry, rf, core, sweeps).
    """
    rx, ry, rf, val = (a.copy() for a in start)
    sign = 1.0 if sense == "max" else -1.0
    it = 0
    cap = max(min_iters, 40) + 160
    step_x = rxmax * step0
    step_y = rymax * step0
    for it in range(1, cap + 1):
        improved = np.zeros(rx.shape, dtype=bool)
        for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            crx = np.clip(rx + dx * step_x, 0.0, rxmax)
            cry = np.clip(ry + dy * step_y, 0.0, rymax)
            cmax, cmin, rfmax, rfmin, feas = _core_minmax(
                rho, crx, cry, lo, hi, realizability
            )
            cval = cmax if sense == "max" else cmin
            crf = rfmax if sense == "max" else rfmin
            better = feas & (sign * cval > sign * val)
            rx = np.where(better, crx, rx)
            ry = np.where(better, cry, ry)
            rf = np.where(better, crf, rf)
            val = np.where(better, cval, val)
            improved |= better
        halve = ~improved
        step_x = np.where(halve, step_x * 0.5, step_x)
        step_y = np.where(halve, step_y * 0.5, step_y)
        if it >= min_iters:
            rel_x = step_x / np.where(rxmax > 0, rxmax, 1.0)
            rel_y = step_y / np.where(rymax > 0, rymax, 1.0)
            if float(np.max(np.maximum(rel_x, rel_y))) < max(tol * 1e-2, 1e-14):
                break
    return rx, ry, rf, val, it


def _optimize_cells(
    stats: SufficientStats,
    tbx: np.ndarray,
    tby: np.ndarray,
    rho_f_bounds: tuple[float, float],
    search: SearchConfig,
):
    """Joint grid + refinement optimization for a batch of (tbx, tby) cells.

    Returns (lower, upper, lower_points, upper_points, sweeps) with arrays
    shaped like tbx.  A single confounding interval is the one-cell batch, so
    surfaces and direct interval calls share this exact code path.
    """
    rho = stats.rho_xy
    lo, hi = rho_f_bounds
    g = search.grid_points
    rxmax = np.sqrt(np.asarray(tbx, dtype=float))
    rymax = np.sqrt(np.asarray(tby, dtype=float))
    # Scan in chunks so batch * g^2 intermediates stay within ~32 MB per array.
    chunk = max(1, 4_000_000 // (g * g))
    up_parts, low_parts = [], []
    for s in range(0, len(rxmax), chunk):
        u, l = _grid_scan(
            rho, rxmax[s : s + chunk], rymax[s : s + chunk], lo, hi,
            search.realizability, g,
        )
        up_parts.append(u)
        low_parts.append(l)
    up_start = tuple(np.concatenate([p[k] for p in up_parts]) for k in range(4))
    low_start = tuple(np.concatenate([p[k] for p in low_parts]) for k in range(4))
    step0 = 1.0 / (g - 1)  # one grid spacing, relative to the axis length
    su = _refine(
        rho,
        rxmax,
        rymax,
        lo,
        hi,
        search.realizability,
        up_start,
        "max",
        step0,
        search.refine_iters,
        search.refine_tol,
    )
    sl = _refine(
        rho,
        rxmax,
        rymax,
        lo,
        hi,
        search.realizability,
        low_start,
        "min",
        step0,
        search.refine_iters,
        search.refine_tol,
    )
    upper = stats.sd_ratio * su[3]
    lower = stats.sd_ratio * sl[3]
    return lower, upper, (sl[0], sl[1], sl[2]), (su[0], su[1], su[2]), max(su[4], sl[4])


def _check_rho_f_bounds(rho_f_bounds):
    lo, hi = rho_f_bounds
    if not (-1.0 <= lo <= hi <= 1.0):
        raise InputError(
            f"rho_f bounds must satisfy -1 <= lo <= hi <= 1, got ({lo}, {hi})"
        )
    return float(lo), float(hi)


def confounding_interval(
    stats: SufficientStats,
    bounds: BoundsSpec,
    rho_f_bounds: tuple[float, float] | None = None,
    search: SearchConfig | None = None,
) -> ConfoundingInterval:
    """Partial-identification interval [L, U] for the adjusted slope.

    Minimum and maximum of the adjusted slope over all realizable adjustment
    points within the transformed bounds, found by dense grid search plus
    coordinate-wise refinement.  The witnesses record the extremizing points;
    beta_adjusted at a witness reproduces the corresponding endpoint exactly.
    """
    stats.validate()
    search = search or SearchConfig()
    if search.grid_points < 2:
        raise InputError("grid_points must be at least 2")
    lo, hi = _check_rho_f_bounds(rho_f_bounds or DEFAULT_RHO_F_BOUNDS)
    tb = transform_bounds(stats, bounds)
    lower, upper, low_pt, up_pt, sweeps = _optimize_cells(
        stats,
        np.array([tb.tbx]),
        np.array([tb.tby]),
        (lo, hi),
        search,
    )
    return ConfoundingInterval(
        lower=float(lower[0]),
        upper=float(upper[0]),
        lower_witness=AdjustmentPoint(
            float(low_pt[0][0]), float(low_pt[1][0]), float(low_pt[2][0])
        ),
        upper_witness=AdjustmentPoint(
            float(up_pt[0][0]), float(up_pt[1][0]), float(up_pt[2][0])
        ),
        method_meta={
            "grid_points": search.grid_points,
            "refine_sweeps": int(sweeps),
            "realizability": search.realizability,
            "rho_f_bounds": [lo, hi],
        },
    )


def interval_by_sampling_oracle(
    stats: SufficientStats,
    bounds: BoundsSpec,
    samples: int,
    seed: int,
    rho_f_bounds: tuple[float, float] | None = None,
) -> ConfoundingInterval:
    """Brute-force validation oracle, independent of the grid optimizer.

    Rejection-samples adjustment points uniformly in the constraint box,
    keeps the realizable ones and returns the min/max of the adjusted slope.
    Deterministic given the seed.
    """
    stats.validate()
    if samples < 10**5:
        raise InputError("oracle needs at least 1e5 samples")
    lo, hi = _check_rho_f_bounds(rho_f_bounds or DEFAULT_RHO_F_BOUNDS)
    tb = transform_bounds(stats, bounds)
    rng = np.random.default_rng(seed)
    u = rng.random((samples, 3))
    rx = u[:, 0] * np.sqrt(tb.tbx)
    ry = u[:, 1] * np.sqrt(tb.tby)
    rf = lo + u[:, 2] * (hi - lo)
    num = stats.rho_xy - rx * ry * rf
    feas = num * num <= (1.0 - rx * rx) * (1.0 - ry * ry) + _FEAS_SLACK
    if not np.any(feas):
        raise OracleFailureError("no feasible samples in the constraint box")
    core = num[feas] / (1.0 - rx[feas] * rx[feas])
    imax = int(np.argmax(core))
    imin = int(np.argmin(core))
    rxf, ryf, rff = rx[feas], ry[feas], rf[feas]
    return ConfoundingInterval(
        lower=float(stats.sd_ratio * core[imin]),
        upper=float(stats.sd_ratio * core[imax]),
        lower_witness=AdjustmentPoint(
            float(rxf[imin]), float(ryf[imin]), float(rff[imin])
        ),
        upper_witness=AdjustmentPoint(
            float(rxf[imax]), float(ryf[imax]), float(rff[imax])
        ),
        method_meta={
            "method": "sampling-oracle",
            "samples": samples,
            "seed": seed,
            "kept": int(np.count_nonzero(feas)),
            "rho_f_bounds": [lo, hi],
        },
    )


def construct_witness(
    stats: SufficientStats, point: AdjustmentPoint, n: int
) -> Witness:
    """Build explicit confounder columns realizing an adjustment point.

    Produces four centered length-n vectors whose correlation matrix matches
    the structured matrix of is_feasible, scaled so the treatment-like vector
    has unit standard deviation and the outcome-like vector sd_ratio.  The
    confounder is the span of the two fitted directions (two columns).  When
    rho_f = +-1 the two directions coincide; the second column is then the
    first plus a relative perturbation below 1e-12 in a direction orthogonal
    to everything else, which leaves the regression slope untouched.

    Regressing the outcome-like vector on the treatment-like vector and the
    confounder columns recovers beta_adjusted(stats, point).
    """
    if n < 6:
        raise InputError(f"witness construction needs n >= 6 rows, got {n}")
    if not is_feasible(stats.rho_xy, point, tol=1e-9):
        raise InfeasiblePointError(
            f"adjustment point (rx={point.rx}, ry={point.ry}, rho_f={point.rho_f}) "
            "is not realizable by any confounder geometry"
        )
    m = adjustment_matrix(stats.rho_xy, point)
    eigval, eigvec = np.linalg.eigh(m)
    eigval = np.clip(eigval, 0.0, None)
    root = eigvec @ np.diag(np.sqrt(eigval))  # m = root @ root.T

    basis = _centered_orthonormal_basis(n, 5)
    vecs = basis[:, :4] @ root.T  # columns: x-like, y-like, fitted-x, fitted-y
    x_col = vecs[:, 0] * np.sqrt(n)  # population sd 1
    y_col = vecs[:, 1] * (stats.sd_ratio * np.sqrt(n))
    fx, fy = vecs[:, 2], vecs[:, 3]

    rank_deficient = abs(abs(point.rho_f) - 1.0) < 1e-12
    if rank_deficient:
        u2 = fx + 1e-12 * basis[:, 4]
        u = np.column_stack([fx, u2])
    else:
        u = np.column_stack([fx, fy])

    # Rank-tolerant solves: at rho_f = +-1 the confounder columns are nearly
    # parallel by design, which the strict collinearity gate would reject.
    def _fit(response, design):
        coef, _, _, _ = np.linalg.lstsq(design, response, rcond=None)
        return coef, design @ coef

    coef, _ = _fit(y_col, np.column_stack([x_col, u]))
    achieved_beta = float(coef[0])
    _, fitted_x = _fit(x_col, u)
    _, fitted_y = _fit(y_col, u)
    achieved_r2x = float(fitted_x @ fitted_x) / float(x_col @ x_col)
    achieved_r2y = float(fitted_y @ fitted_y) / float(y_col @ y_col)
    return Witness(
        u_columns=u,
        achieved_beta=achieved_beta,
        achieved_r2x=achieved_r2x,
        achieved_r2y=achieved_r2y,
        x_column=x_col,
        y_column=y_col,
        meta={
            "n": n,
            "rank_deficient": bool(rank_deficient),
            "point": {"rx": point.rx, "ry": point.ry, "rho_f": point.rho_f},
        },
    )


def _centered_orthonormal_basis(n: int, k: int) -> np.ndarray:
    """Deterministic n x k matrix with centered orthonormal columns."""
    if k > n - 1:
        raise InputError(f"need n >= {k + 1} rows for {k} centered directions")
    t = np.arange(1, n + 1, dtype=float)
    cols = [np.cos(np.pi * j * (t - 0.5) / n) for j in range(1, k + 1)]
    b = np.column_stack(cols)
    b = b - b.mean(axis=0)
    q, r = np.linalg.qr(b)
    # Fix signs for determinism.
    q = q * np.sign(np.diag(r))
    return q
