"""Canonical JSON/CSV serialization shared by the CLI and the HTTP service.

Field names are part of the external contract (consumed by the explorer UI
and the tests): lower, upper, sd_ratio, rho_xy, r2_wx, r2_wy, bx, by,
beta_star.  Floats serialize via their shortest round-trip representation,
so exports re-import losslessly.  The CLI and the service both emit exactly
the byte string produced by dumps(), which is what makes their outputs
bit-identical for identical inputs.
"""

from __future__ import annotations

import json

from .errors import InputError
from .identify import AdjustmentPoint, ConfoundingInterval, Witness
from .regression import PrepareReport, SufficientStats

STATS_FIELDS = ("sd_ratio", "rho_xy", "r2_wx", "r2_wy")


def dumps(obj) -> str:
    return json.dumps(obj, separators=(",", ":"), allow_nan=False)


def stats_to_dict(stats: SufficientStats) -> dict:
    return {
        "sd_ratio": float(stats.sd_ratio),
        "rho_xy": float(stats.rho_xy),
        "r2_wx": float(stats.r2_wx),
        "r2_wy": float(stats.r2_wy),
        "beta_xy_given_w": float(stats.beta_xy_given_w),
        "n": int(stats.n) if stats.n is not None else None,
    }


def stats_from_dict(d: dict) -> SufficientStats:
    if not isinstance(d, dict):
        raise InputError("stats must be a JSON object")
    missing = [k for k in STATS_FIELDS if k not in d]
    if missing:
        raise InputError(f"stats JSON is missing fields: {', '.join(missing)}")
    try:
        kwargs = {k: float(d[k]) for k in STATS_FIELDS}
    except (TypeError, ValueError):
        raise InputError("stats fields must be numbers") from None
    if d.get("beta_xy_given_w") is not None:
        kwargs["beta_xy_given_w"] = float(d["beta_xy_given_w"])
    n = d.get("n")
    stats = SufficientStats(n=int(n) if n is not None else None, **kwargs)
    stats.validate()
    return stats


def point_to_dict(point: AdjustmentPoint) -> dict:
    return {
        "rx": float(point.rx),
        "ry": float(point.ry),
        "rho_f": float(point.rho_f),
    }


def interval_to_dict(ci: ConfoundingInterval, bx: float, by: float) -> dict:
    return {
        "lower": float(ci.lower),
        "upper": float(ci.upper),
        "bx": float(bx),
        "by": float(by),
        "lower_witness": point_to_dict(ci.lower_witness),
        "upper_witness": point_to_dict(ci.upper_witness),
        "method_meta": ci.method_meta,
    }


def report_to_dict(report: PrepareReport) -> dict:
    return {
        "rows_in": report.rows_in,
        "rows_missing_dropped": report.rows_missing_dropped,
        "rows_filter_dropped": report.rows_filter_dropped,
        "rows_outlier_dropped": report.rows_outlier_dropped,
        "rows_out": report.rows_out,
    }


def witness_to_csv(witness: Witness) -> str:
    """Witness columns as CSV: the synthetic residual pair plus confounders.

    Regressing y_resid on [x_resid, u1, ...] reproduces the achieved slope.
    """
    u = witness.u_columns
    n, q = u.shape
    header = ["x_resid", "y_resid"] + [f"u{k + 1}" for k in range(q)]
    lines = [",".join(header)]
    for i in range(n):
        row = [repr(float(witness.x_column[i])), repr(float(witness.y_column[i]))]
        row += [repr(float(u[i, k])) for k in range(q)]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def witness_summary_dict(witness: Witness) -> dict:
    return {
        "achieved_beta": float(witness.achieved_beta),
        "achieved_r2x": float(witness.achieved_r2x),
        "achieved_r2y": float(witness.achieved_r2y),
        "n": int(witness.meta.get("n", witness.u_columns.shape[0])),
        "q": int(witness.u_columns.shape[1]),
        "rank_deficient": bool(witness.meta.get("rank_deficient", False)),
        "point": witness.meta.get("point"),
    }
