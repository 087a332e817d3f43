"""Frame server endpoints, validation and parity with the CLI."""

import json

import numpy as np
import pytest
from fastapi.testclient import TestClient

from fiblight import BakeConfig, bake
from fiblight.scenes import constant_scene
from fiblight.server import create_app


@pytest.fixture(scope="module")
def small_field():
    return bake(constant_scene(), BakeConfig(m=32, n=64, spp=2, seed=1))


@pytest.fixture(scope="module")
def client(small_field):
    with TestClient(create_app(field=small_field)) as c:
        yield c


def _pose(width=48, height=48, mode="filtered"):
    return {"eye": [2.5, 0.0, 0.5], "look_at": [0.0, 0.0, 0.0],
            "up": [0.0, 0.0, 1.0], "fov_deg": 45.0,
            "width": width, "height": height, "mode": mode}


def test_metadata(client, small_field):
    meta = client.get("/metadata").json()
    assert meta["m"] == small_field.m
    assert meta["n"] == small_field.n
    assert meta["radius"] == small_field.radius
    assert meta["center"] == [0.0, 0.0, 0.0]
    assert meta["hemisphere"] is False
    assert meta["texel_format"] == "rgba8"
    assert meta["suggested_orbit_radius"] == pytest.approx(2.5)


def test_frame_returns_png_with_headers(client):
    res = client.post("/frame", json=_pose())
    assert res.status_code == 200
    assert res.headers["content-type"] == "image/png"
    assert res.content[:8] == b"\x89PNG\r\n\x1a\n"
    assert int(res.headers["X-Render-Micros"]) > 0
    assert 0.0 < float(res.headers["X-Coverage-Percent"]) <= 100.0


def test_frame_modes_differ_only_in_sampling(client):
    filtered = client.post("/frame", json=_pose(mode="filtered"))
    nearest = client.post("/frame", json=_pose(mode="nearest"))
    assert filtered.status_code == nearest.status_code == 200
    # a constant field renders identically under both samplers
    assert filtered.content == nearest.content


def test_frame_matches_cli_render(client, small_field, tmp_path):
    from click.testing import CliRunner

    from fiblight import save
    from fiblight.cli import main

    field_path = tmp_path / "f.lplf"
    save(small_field, field_path)
    pose = _pose()
    pose_path = tmp_path / "pose.json"
    pose_path.write_text(json.dumps(pose))
    runner = CliRunner()
    res = runner.invoke(main, ["render", "--field", str(field_path),
                               "--pose-json", str(pose_path),
                               "--out", str(tmp_path / "cli.png")])
    assert res.exit_code == 0, res.output
    served = client.post("/frame", json=pose)
    assert served.content == (tmp_path / "cli.png").read_bytes()


def test_validation_errors_name_the_field(client):
    pose = _pose()
    pose["eye"] = [float("nan"), 0.0, 0.0]
    res = client.post("/frame", content=json.dumps(pose),
                      headers={"content-type": "application/json"})
    assert res.status_code == 400
    assert "eye" in res.json()["error"]

    pose = _pose()
    pose["mode"] = "bicubic"
    res = client.post("/frame", json=pose)
    assert res.status_code == 400
    assert "mode" in res.json()["error"]

    pose = _pose()
    del pose["fov_deg"]
    res = client.post("/frame", json=pose)
    assert res.status_code == 400
    assert "fov_deg" in res.json()["error"]


def test_frame_size_limits(client):
    assert client.post("/frame", json=_pose(width=8)).status_code == 413
    assert client.post("/frame", json=_pose(height=4096)).status_code == 413


def test_unloaded_field_gives_503():
    with TestClient(create_app()) as c:
        assert c.get("/metadata").status_code == 503
        assert c.post("/frame", json=_pose()).status_code == 503


def test_cors_header_present(small_field):
    with TestClient(create_app(field=small_field,
                               allow_origin="http://localhost:5173")) as c:
        res = c.get("/metadata",
                    headers={"Origin": "http://localhost:5173"})
        assert res.headers["access-control-allow-origin"] == \
            "http://localhost:5173"
