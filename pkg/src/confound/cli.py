"""Command-line interface.

Commands: stats, interval, surface, region, witness, report.  Data comes
from a CSV file (first row headers, UTF-8, '.' decimal) with column roles
given by flags, or -- for interval/surface/region/witness -- from
--stats-json, which runs the engine straight from sufficient statistics.

Exit codes: 0 success, 2 usage errors, 3 data errors (collinearity,
degenerate residuals), 4 infeasible bounds.  CONFOUND_OUTPUT_DIR sets the
default output directory.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np
import pandas as pd

from . import serialize
from .errors import (
    ConfoundError,
    DegenerateDataError,
    InfeasibleBoundsError,
    InputError,
)
from .identify import (
    BoundsSpec,
    SearchConfig,
    confounding_interval,
    construct_witness,
    interval_by_sampling_oracle,
)
from .regression import IqrRule, prepare_dataset, sufficient_stats
from .surface import compute_surface, export_surface, threshold_region, region_to_dict

EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_BOUNDS = 4


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InfeasibleBoundsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BOUNDS
    except (DegenerateDataError,) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (InputError, ConfoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="confound",
        description="Partial identification of regression slopes under "
        "unmeasured confounding.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_data_flags(p, stats_json=True):
        p.add_argument("--input", help="CSV file with a header row")
        p.add_argument("--outcome", help="outcome column name")
        p.add_argument("--treatment", help="treatment column name")
        p.add_argument(
            "--covariates",
            default="",
            help="comma-separated covariate column names (may be empty)",
        )
        p.add_argument(
            "--outlier-iqr",
            type=float,
            default=None,
            metavar="K",
            help="drop rows with treatment above Q3 + K*IQR",
        )
        p.add_argument(
            "--outlier-two-sided",
            action="store_true",
            help="also drop rows below Q1 - K*IQR",
        )
        p.add_argument(
            "--filter",
            action="append",
            default=[],
            metavar="COL:LO:HI",
            help="keep rows with COL in [LO, HI] (empty end = unbounded); "
            "repeatable",
        )
        if stats_json:
            p.add_argument(
                "--stats-json",
                help="sufficient statistics as JSON "
                '(e.g. \'{"sd_ratio":1.62,"rho_xy":-0.48,'
                '"r2_wx":0.14,"r2_wy":0.28}\'); replaces --input',
            )

    def add_search_flags(p):
        p.add_argument("--rho-f", nargs=2, type=float, default=None,
                       metavar=("LO", "HI"),
                       help="bounds on the fitted-direction correlation")
        p.add_argument("--grid-points", type=int, default=201)
        p.add_argument("--refine-iters", type=int, default=40)
        p.add_argument(
            "--box-relaxation",
            action="store_true",
            help="optimize over the raw parameter box without the "
            "realizability constraint (conservative relaxation)",
        )

    p = sub.add_parser("stats", help="print sufficient statistics as JSON")
    add_data_flags(p, stats_json=False)
    p.add_argument("--output", help="also write the JSON to a file")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("interval", help="confounding interval for bounds (bx, by)")
    add_data_flags(p)
    p.add_argument("--bx", type=float, required=True)
    p.add_argument("--by", type=float, required=True)
    add_search_flags(p)
    p.add_argument("--output", help="also write the JSON to a file")
    p.set_defaults(func=cmd_interval)

    p = sub.add_parser("surface", help="L/U sensitivity surfaces over a bounds grid")
    add_data_flags(p)
    p.add_argument("--resolution", type=int, required=True)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    add_search_flags(p)
    p.add_argument("--output", help="output file (default: stdout)")
    p.set_defaults(func=cmd_surface)

    p = sub.add_parser("region", help="bound pairs whose interval clears beta*")
    add_data_flags(p)
    p.add_argument("--beta-star", type=float, required=True)
    p.add_argument("--direction", choices=("below", "above"), required=True)
    p.add_argument("--resolution", type=int, default=101)
    add_search_flags(p)
    p.add_argument("--output", help="output file (default: stdout)")
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("witness", help="confounder columns attaining an endpoint")
    add_data_flags(p)
    p.add_argument("--bx", type=float, required=True)
    p.add_argument("--by", type=float, required=True)
    p.add_argument("--side", choices=("lower", "upper"), required=True)
    p.add_argument("--n", type=int, required=True, help="rows to construct")
    add_search_flags(p)
    p.add_argument("--output", help="CSV output file (default: stdout)")
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("report", help="run all analyses into a directory")
    add_data_flags(p)
    p.add_argument("--bx", type=float, required=True)
    p.add_argument("--by", type=float, required=True)
    p.add_argument("--beta-star", type=float, required=True)
    p.add_argument("--direction", choices=("below", "above"), default="below")
    p.add_argument("--resolution", type=int, default=101)
    add_search_flags(p)
    p.add_argument("--seed", type=int, default=0,
                   help="seed for the sampling-oracle cross-check")
    p.add_argument("--output-dir", help="report directory "
                   "(default: $CONFOUND_OUTPUT_DIR or ./confound-report)")
    p.set_defaults(func=cmd_report)
    return parser


# ---------------------------------------------------------------------------


def _parse_filters(specs):
    filters = {}
    for spec in specs:
        parts = spec.split(":")
        if len(parts) != 3:
            raise InputError(f"--filter expects COL:LO:HI, got '{spec}'")
        col, lo, hi = parts
        filters[col] = (
            float(lo) if lo != "" else None,
            float(hi) if hi != "" else None,
        )
    return filters


def _stats_from_args(args):
    """Load stats from --stats-json or compute them from the CSV flags."""
    stats_json = getattr(args, "stats_json", None)
    if stats_json:
        try:
            payload = json.loads(stats_json)
        except json.JSONDecodeError as exc:
            raise InputError(f"--stats-json is not valid JSON: {exc}") from None
        return serialize.stats_from_dict(payload), None
    data, report = _dataset_from_args(args)
    return sufficient_stats(data), report


def _dataset_from_args(args):
    if not args.input:
        raise InputError("either --input or --stats-json is required")
    if not args.outcome or not args.treatment:
        raise InputError("--outcome and --treatment are required with --input")
    frame = pd.read_csv(args.input)
    covariates = [c for c in args.covariates.split(",") if c]
    rule = (
        IqrRule(args.outlier_iqr, args.outlier_two_sided)
        if args.outlier_iqr is not None
        else None
    )
    raw = {name: frame[name].to_numpy() for name in frame.columns}
    return prepare_dataset(
        raw,
        roles={"y": args.outcome, "x": args.treatment, "w": covariates},
        outlier_rule=rule,
        range_filters=_parse_filters(args.filter),
    )


def _search_from_args(args) -> SearchConfig:
    return SearchConfig(
        grid_points=args.grid_points,
        refine_iters=args.refine_iters,
        realizability=not args.box_relaxation,
    )


def _rho_f_from_args(args):
    return tuple(args.rho_f) if args.rho_f is not None else None


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text if text.endswith("\n") else text + "\n")
    print(text, end="" if text.endswith("\n") else "\n")


# ---------------------------------------------------------------------------


def cmd_stats(args) -> int:
    data, report = _dataset_from_args(args)
    stats = sufficient_stats(data)
    payload = serialize.stats_to_dict(stats)
    payload["prepare_report"] = serialize.report_to_dict(report)
    _emit(serialize.dumps(payload), args.output)
    return 0


def cmd_interval(args) -> int:
    stats, _ = _stats_from_args(args)
    ci = confounding_interval(
        stats,
        BoundsSpec(args.bx, args.by),
        rho_f_bounds=_rho_f_from_args(args),
        search=_search_from_args(args),
    )
    _emit(serialize.dumps(serialize.interval_to_dict(ci, args.bx, args.by)),
          args.output)
    return 0


def cmd_surface(args) -> int:
    stats, _ = _stats_from_args(args)
    grid = compute_surface(stats, args.resolution,
                           rho_f_bounds=_rho_f_from_args(args))
    _emit(export_surface(grid, args.format).decode(), args.output)
    return 0


def cmd_region(args) -> int:
    stats, _ = _stats_from_args(args)
    grid = compute_surface(stats, args.resolution,
                           rho_f_bounds=_rho_f_from_args(args))
    region = threshold_region(grid, args.beta_star, args.direction)
    _emit(serialize.dumps(region_to_dict(region)), args.output)
    return 0


def cmd_witness(args) -> int:
    stats, _ = _stats_from_args(args)
    ci = confounding_interval(
        stats,
        BoundsSpec(args.bx, args.by),
        rho_f_bounds=_rho_f_from_args(args),
        search=_search_from_args(args),
    )
    point = ci.upper_witness if args.side == "upper" else ci.lower_witness
    witness = construct_witness(stats, point, args.n)
    _emit(serialize.witness_to_csv(witness), args.output)
    summary = serialize.witness_summary_dict(witness)
    print(serialize.dumps(summary), file=sys.stderr)
    return 0


def cmd_report(args) -> int:
    out_dir = Path(
        args.output_dir
        or os.environ.get("CONFOUND_OUTPUT_DIR", "confound-report")
    )
    out_dir.mkdir(parents=True, exist_ok=True)
    stats, report = _stats_from_args(args)
    search = _search_from_args(args)
    rho_f = _rho_f_from_args(args)

    stats_payload = serialize.stats_to_dict(stats)
    if report is not None:
        stats_payload["prepare_report"] = serialize.report_to_dict(report)
    (out_dir / "stats.json").write_text(serialize.dumps(stats_payload) + "\n")

    ci = confounding_interval(stats, BoundsSpec(args.bx, args.by),
                              rho_f_bounds=rho_f, search=search)
    (out_dir / "interval.json").write_text(
        serialize.dumps(serialize.interval_to_dict(ci, args.bx, args.by)) + "\n"
    )

    grid = compute_surface(stats, args.resolution, rho_f_bounds=rho_f)
    (out_dir / "surface.json").write_bytes(export_surface(grid, "json") + b"\n")
    (out_dir / "surface.csv").write_bytes(export_surface(grid, "csv"))

    region = threshold_region(grid, args.beta_star, args.direction)
    (out_dir / "region.json").write_text(
        serialize.dumps(region_to_dict(region)) + "\n"
    )

    n = stats.n or 60
    witnesses = {}
    for side, point in (("lower", ci.lower_witness), ("upper", ci.upper_witness)):
        w = construct_witness(stats, point, n)
        (out_dir / f"witness_{side}.csv").write_text(serialize.witness_to_csv(w))
        witnesses[side] = w

    oracle = interval_by_sampling_oracle(
        stats, BoundsSpec(args.bx, args.by), samples=2 * 10**5, seed=args.seed,
        rho_f_bounds=rho_f,
    )
    (out_dir / "summary.md").write_text(
        _summary_md(args, stats, ci, region, witnesses, oracle)
    )
    print(str(out_dir))
    return 0


def _summary_md(args, stats, ci, region, witnesses, oracle) -> str:
    sign = "identified" if ci.upper < 0 or ci.lower > 0 else "not identified"
    inside = "inside" if (
        region.mask[
            int(np.argmin(np.abs(region.bx_axis - args.bx))),
            int(np.argmin(np.abs(region.by_axis - args.by))),
        ]
    ) else "outside"
    lines = [
        "# Confounding sensitivity report",
        "",
        "## Sufficient statistics",
        f"- sd_ratio: {stats.sd_ratio}",
        f"- rho_xy: {stats.rho_xy}",
        f"- r2_wx: {stats.r2_wx}",
        f"- r2_wy: {stats.r2_wy}",
        f"- fitted slope (no unmeasured confounding): {stats.beta_xy_given_w}",
        "",
        f"## Interval at (bx={args.bx}, by={args.by})",
        f"- [{ci.lower}, {ci.upper}]",
        f"- sign of the adjusted slope: {sign}",
        f"- sampling-oracle cross-check (seed {args.seed}): "
        f"[{oracle.lower}, {oracle.upper}]",
        "",
        f"## Practical significance (beta* = {args.beta_star}, {args.direction})",
        f"- region {'is empty' if region.empty else 'is non-empty'}; "
        f"requested bounds fall {inside} the region",
        "",
        "## Witnesses",
    ]
    for side, w in witnesses.items():
        lines.append(
            f"- {side}: achieved slope {w.achieved_beta} with "
            f"R2(x|u) = {w.achieved_r2x}, R2(y|u) = {w.achieved_r2y}"
        )
    lines.append("")
    return "\n".join(lines)


if __name__ == "__main__":
    sys.exit(main())
