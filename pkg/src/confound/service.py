"""Stateless HTTP+JSON facade serving the explorer UI.

Every computational endpoint accepts inline sufficient statistics, so any
request succeeds against a fresh server; session identifiers returned by
/v1/stats are an in-memory convenience cache only.  Responses are emitted
through the same canonical serializer as the CLI, byte-identical to CLI
output for identical inputs.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import threading
import time
import uuid

import pandas as pd
from fastapi import FastAPI, File, Form, UploadFile
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response

from . import serialize
from .errors import ConfoundError, InputError
from .identify import BoundsSpec, SearchConfig, confounding_interval
from .regression import IqrRule, prepare_dataset, sufficient_stats
from .surface import compute_surface, region_to_dict, surface_to_dict, threshold_region


class _SessionStore:
    """Thread-safe in-memory cache of uploaded-dataset statistics."""

    def __init__(self):
        self._lock = threading.Lock()
        self._items: dict[str, dict] = {}

    def put(self, entry: dict) -> str:
        session_id = uuid.uuid4().hex
        with self._lock:
            self._items[session_id] = entry
        return session_id

    def get(self, session_id: str) -> dict | None:
        with self._lock:
            return self._items.get(session_id)


def _canonical(payload: dict, status_code: int = 200) -> Response:
    return Response(
        content=serialize.dumps(payload),
        media_type="application/json",
        status_code=status_code,
    )


def _error(status_code: int, message: str) -> Response:
    return JSONResponse(status_code=status_code, content={"detail": message})


def _resolve_stats(body: dict, sessions: _SessionStore):
    if body.get("stats") is not None:
        return serialize.stats_from_dict(body["stats"])
    session_id = body.get("session_id")
    if not session_id:
        raise InputError("request needs either 'stats' or 'session_id'")
    entry = sessions.get(session_id)
    if entry is None:
        raise InputError(f"unknown session_id '{session_id}'")
    return entry["stats"]


def _search_from_body(body: dict) -> SearchConfig:
    return SearchConfig(
        grid_points=int(body.get("grid_points", 201)),
        refine_iters=int(body.get("refine_iters", 40)),
        realizability=bool(body.get("realizability", True)),
    )


def _rho_f_from_body(body: dict):
    bounds = body.get("rho_f_bounds")
    if bounds is None:
        return None
    if not isinstance(bounds, (list, tuple)) or len(bounds) != 2:
        raise InputError("rho_f_bounds must be a [lo, hi] pair")
    return float(bounds[0]), float(bounds[1])


def create_app() -> FastAPI:
    app = FastAPI(title="confound", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    sessions = _SessionStore()

    @app.exception_handler(InputError)
    async def _input_error(request, exc: InputError):
        return _error(400, str(exc))

    @app.exception_handler(ConfoundError)
    async def _confound_error(request, exc: ConfoundError):
        # Degenerate data, collinearity, infeasible bounds, singularities.
        return _error(422, str(exc))

    @app.get("/v1/health")
    async def health():
        return {"status": "ok", "version": "0.1.0"}

    @app.post("/v1/stats")
    async def stats_endpoint(
        file: UploadFile = File(...),
        roles: str = Form(...),
        outlier_iqr: float | None = Form(default=None),
        outlier_two_sided: bool = Form(default=False),
    ):
        try:
            roles_obj = json.loads(roles)
        except json.JSONDecodeError as exc:
            return _error(400, f"roles is not valid JSON: {exc}")
        raw_bytes = await file.read()
        try:
            frame = pd.read_csv(io.BytesIO(raw_bytes))
        except Exception as exc:
            return _error(400, f"could not parse CSV: {exc}")
        rule = (
            IqrRule(outlier_iqr, outlier_two_sided)
            if outlier_iqr is not None
            else None
        )
        raw = {str(name): frame[name].to_numpy() for name in frame.columns}
        data, report = prepare_dataset(raw, roles_obj, outlier_rule=rule)
        stats = sufficient_stats(data)
        label = roles_obj.get("label") or (file.filename or "upload")
        entry = {
            "stats": stats,
            "label": label,
            "created_at": time.time(),
        }
        session_id = sessions.put(entry)
        return _canonical(
            {
                "session_id": session_id,
                "label": label,
                "created_at": entry["created_at"],
                "stats": serialize.stats_to_dict(stats),
                "prepare_report": serialize.report_to_dict(report),
            }
        )

    @app.post("/v1/interval")
    async def interval_endpoint(body: dict):
        stats = _resolve_stats(body, sessions)
        if "bx" not in body or "by" not in body:
            raise InputError("request needs 'bx' and 'by'")
        bx, by = float(body["bx"]), float(body["by"])
        ci = confounding_interval(
            stats,
            BoundsSpec(bx, by),
            rho_f_bounds=_rho_f_from_body(body),
            search=_search_from_body(body),
        )
        return _canonical(serialize.interval_to_dict(ci, bx, by))

    @app.post("/v1/surface")
    async def surface_endpoint(body: dict):
        stats = _resolve_stats(body, sessions)
        resolution = int(body.get("resolution", 101))
        grid = compute_surface(
            stats, resolution, rho_f_bounds=_rho_f_from_body(body)
        )
        return _canonical(surface_to_dict(grid))

    @app.post("/v1/region")
    async def region_endpoint(body: dict):
        stats = _resolve_stats(body, sessions)
        if "beta_star" not in body:
            raise InputError("request needs 'beta_star'")
        resolution = int(body.get("resolution", 101))
        direction = body.get("direction", "below")
        grid = compute_surface(
            stats, resolution, rho_f_bounds=_rho_f_from_body(body)
        )
        region = threshold_region(grid, float(body["beta_star"]), direction)
        return _canonical(region_to_dict(region))

    return app


app = create_app()


def main(argv=None) -> int:
    import uvicorn

    parser = argparse.ArgumentParser(prog="confound-serve")
    parser.add_argument(
        "--host", default=os.environ.get("CONFOUND_HOST", "127.0.0.1")
    )
    parser.add_argument(
        "--port", type=int, default=int(os.environ.get("CONFOUND_PORT", "8787"))
    )
    args = parser.parse_args(argv)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


if __name__ == "__main__":
    main()
