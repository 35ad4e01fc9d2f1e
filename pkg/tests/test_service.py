import io
import json
import threading

import numpy as np
import pytest
from fastapi.testclient import TestClient

from confound.service import create_app

WIND = {"sd_ratio": 1.62, "rho_xy": -0.48, "r2_wx": 0.14, "r2_wy": 0.28}


@pytest.fixture
def client():
    return TestClient(create_app())


def make_csv(n=80, seed=51, collinear=False):
    rng = np.random.default_rng(seed)
    w = rng.standard_normal(n)
    x = 0.5 * w + rng.standard_normal(n)
    y = -1.2 * x + 0.3 * w + rng.standard_normal(n)
    lines = ["y,x,w1,w2"]
    for i in range(n):
        w2 = 2.0 * w[i] if collinear else rng.standard_normal()
        lines.append(f"{y[i]},{x[i]},{w[i]},{w2}")
    return ("\n".join(lines) + "\n").encode()


def upload(client, body, roles=None, **form):
    roles = roles or {"y": "y", "x": "x", "w": ["w1", "w2"]}
    return client.post(
        "/v1/stats",
        files={"file": ("data.csv", io.BytesIO(body), "text/csv")},
        data={"roles": json.dumps(roles), **form},
    )


def test_health(client):
    r = client.get("/v1/health")
    assert r.status_code == 200
    assert r.json()["status"] == "ok"


def test_stats_upload_matches_library(client):
    body = make_csv()
    r = upload(client, body)
    assert r.status_code == 200
    payload = r.json()
    assert "session_id" in payload

    import pandas as pd

    from confound.regression import prepare_dataset, sufficient_stats

    frame = pd.read_csv(io.BytesIO(body))
    data, _ = prepare_dataset(
        {c: frame[c].to_numpy() for c in frame.columns},
        roles={"y": "y", "x": "x", "w": ["w1", "w2"]},
    )
    stats = sufficient_stats(data)
    assert payload["stats"]["sd_ratio"] == stats.sd_ratio
    assert payload["stats"]["rho_xy"] == stats.rho_xy
    assert payload["stats"]["r2_wx"] == stats.r2_wx


def test_stats_empty_covariates(client):
    r = upload(client, make_csv(), roles={"y": "y", "x": "x", "w": []})
    assert r.status_code == 200
    payload = r.json()
    assert payload["stats"]["r2_wx"] == 0.0
    assert payload["stats"]["r2_wy"] == 0.0


def test_stats_collinear_is_422_with_column(client):
    r = upload(client, make_csv(collinear=True))
    assert r.status_code == 422
    assert "w2" in r.json()["detail"]


def test_stats_bad_csv_is_400(client):
    r = client.post(
        "/v1/stats",
        files={"file": ("data.csv", io.BytesIO(b"\x00\x01\x02"), "text/csv")},
        data={"roles": json.dumps({"y": "y", "x": "x"})},
    )
    assert r.status_code in (400, 422)


def test_interval_published_values(client):
    r = client.post("/v1/interval", json={"stats": WIND, "bx": 0.60, "by": 0.45})
    assert r.status_code == 200
    payload = r.json()
    assert payload["upper"] == pytest.approx(-0.44, rel=0.02)


def test_interval_via_session(client):
    sid = upload(client, make_csv()).json()["session_id"]
    r = client.post("/v1/interval", json={"session_id": sid, "bx": 0.7, "by": 0.7})
    assert r.status_code == 200
    assert r.json()["lower"] <= r.json()["upper"]


def test_interval_degenerate_bounds(client):
    r = client.post("/v1/interval", json={"stats": WIND, "bx": 0.14, "by": 0.28})
    payload = r.json()
    assert payload["lower"] == payload["upper"]


def test_interval_infeasible_is_422(client):
    r = client.post("/v1/interval", json={"stats": WIND, "bx": 0.01, "by": 0.45})
    assert r.status_code == 422
    assert "0.14" in r.json()["detail"]


def test_missing_stats_is_400(client):
    r = client.post("/v1/interval", json={"bx": 0.5, "by": 0.5})
    assert r.status_code == 400


def test_unknown_session_is_400(client):
    r = client.post("/v1/interval", json={"session_id": "nope", "bx": 0.5, "by": 0.5})
    assert r.status_code == 400


def test_statelessness_fresh_server(client):
    # any request carrying full stats succeeds on a brand-new app
    fresh = TestClient(create_app())
    r = fresh.post("/v1/interval", json={"stats": WIND, "bx": 0.5, "by": 0.5})
    assert r.status_code == 200


def test_surface_resolution_2(client):
    r = client.post("/v1/surface", json={"stats": WIND, "resolution": 2})
    assert r.status_code == 200
    payload = r.json()
    assert len(payload["lower"]) == 2
    assert payload["lower"][0][0] == pytest.approx(-0.7776, abs=1e-6)
    assert payload["upper"][0][0] == pytest.approx(-0.7776, abs=1e-6)


def test_region_published_pair(client):
    r = client.post(
        "/v1/region",
        json={"stats": WIND, "resolution": 41, "beta_star": -0.1,
              "direction": "below"},
    )
    assert r.status_code == 200
    payload = r.json()
    bx = np.asarray(payload["bx_axis"])
    by = np.asarray(payload["by_axis"])
    i = int(np.argmin(np.abs(bx - 0.25)))
    j = int(np.argmin(np.abs(by - 0.40)))
    assert payload["mask"][i][j] is True


def test_cors_headers(client):
    r = client.options(
        "/v1/interval",
        headers={
            "Origin": "http://localhost:5173",
            "Access-Control-Request-Method": "POST",
        },
    )
    assert r.headers.get("access-control-allow-origin") == "*"


def test_parity_with_cli_bytes(client, capsys, tmp_path):
    from confound.cli import main

    stats_json = json.dumps(WIND)
    rc = main(["interval", "--stats-json", stats_json, "--bx", "0.6", "--by", "0.45"])
    assert rc == 0
    cli_bytes = capsys.readouterr().out.rstrip("\n").encode()
    r = client.post("/v1/interval", json={"stats": WIND, "bx": 0.6, "by": 0.45})
    assert r.content == cli_bytes

    rc = main(["surface", "--stats-json", stats_json, "--resolution", "5"])
    cli_bytes = capsys.readouterr().out.rstrip("\n").encode()
    r = client.post("/v1/surface", json={"stats": WIND, "resolution": 5})
    assert r.content == cli_bytes

    rc = main(["region", "--stats-json", stats_json, "--beta-star", "-0.5",
               "--direction", "below", "--resolution", "7"])
    cli_bytes = capsys.readouterr().out.rstrip("\n").encode()
    r = client.post(
        "/v1/region",
        json={"stats": WIND, "resolution": 7, "beta_star": -0.5,
              "direction": "below"},
    )
    assert r.content == cli_bytes


def test_concurrent_session_cache(client):
    body = make_csv()
    ids, errors = [], []

    def worker(k):
        try:
            r = upload(client, body)
            assert r.status_code == 200
            sid = r.json()["session_id"]
            r2 = client.post(
                "/v1/interval", json={"session_id": sid, "bx": 0.6, "by": 0.6}
            )
            assert r2.status_code == 200
            ids.append(sid)
        except Exception as exc:  # pragma: no cover
            errors.append(exc)

    threads = [threading.Thread(target=worker, args=(k,)) for k in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert not errors
    assert len(set(ids)) == 8
