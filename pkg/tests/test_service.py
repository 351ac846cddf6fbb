"""HTTP service tests via the in-process test client."""

from __future__ import annotations

import numpy as np
import pytest
from fastapi.testclient import TestClient

from omnizoom.cli import main
from omnizoom.image import ErpImage, save_png
from omnizoom.service import create_app


@pytest.fixture()
def pano_dir(tmp_path):
    rng = np.random.default_rng(60)
    d = tmp_path / "panos"
    d.mkdir()
    save_png(ErpImage(rng.uniform(size=(32, 64, 3))), d / "alpha.png")
    save_png(ErpImage(rng.uniform(size=(16, 32, 3))), d / "beta.png")
    return d


@pytest.fixture()
def client(pano_dir):
    return TestClient(create_app(panorama_dir=str(pano_dir)))


def decode_png_bytes(data: bytes) -> np.ndarray:
    import cv2

    arr = cv2.imdecode(np.frombuffer(data, np.uint8), cv2.IMREAD_UNCHANGED)
    return cv2.cvtColor(arr, cv2.COLOR_BGR2RGB)


class TestPanoramas:
    def test_list(self, client):
        resp = client.get("/api/panoramas")
        assert resp.status_code == 200
        items = resp.json()
        assert items == [
            {"id": "alpha", "width": 64, "height": 32},
            {"id": "beta", "width": 32, "height": 16},
        ]

    def test_upload_then_visible(self, client, tmp_path):
        rng = np.random.default_rng(61)
        path = tmp_path / "up.png"
        save_png(ErpImage(rng.uniform(size=(8, 16, 3)), allow_any_aspect=True), path)
        with open(path, "rb") as f:
            resp = client.post("/api/panoramas", files={"file": ("up.png", f, "image/png")})
        assert resp.status_code == 200
        pid = resp.json()["id"]
        ids = [p["id"] for p in client.get("/api/panoramas").json()]
        assert pid in ids
        # identical upload is idempotent
        with open(path, "rb") as f:
            again = client.post("/api/panoramas", files={"file": ("up.png", f, "image/png")})
        assert again.json()["id"] == pid


class TestWarpEndpoint:
    def test_identity_controls_returns_source(self, client, pano_dir):
        resp = client.get("/api/warp", params={"id": "alpha", "yaw": 0.0,
                                               "pitch": 0.0, "zoom": 1.0})
        assert resp.status_code == 200
        assert resp.headers["content-type"] == "image/png"
        assert "ETag" in resp.headers
        assert "max-age" in resp.headers["cache-control"]
        got = decode_png_bytes(resp.content)
        want = decode_png_bytes((pano_dir / "alpha.png").read_bytes())
        assert np.array_equal(got, want)

    def test_unknown_id_404(self, client):
        assert client.get("/api/warp", params={"id": "nope"}).status_code == 404

    def test_singular_matrix_422(self, client):
        resp = client.get("/api/warp", params={"id": "alpha",
                                               "matrix": "1,0,2,0,2,0,4,0"})
        assert resp.status_code == 422
        assert "error" in resp.json()

    def test_oversize_413(self, client):
        resp = client.get("/api/warp", params={"id": "alpha", "w": 4096, "h": 2049})
        assert resp.status_code == 413

    def test_identical_requests_identical_bodies(self, client):
        params = {"id": "alpha", "yaw": 0.7, "pitch": -0.2, "zoom": 1.5, "w": 32, "h": 16}
        r1 = client.get("/api/warp", params=params)
        r2 = client.get("/api/warp", params=params)
        assert r1.content == r2.content
        assert r1.headers["etag"] == r2.headers["etag"]

    def test_matrix_and_controls_conventions_differ(self, client):
        # a raw rotation matrix samples where controls sample the inverse
        from omnizoom.geometry import SpherePoint, from_rotation
        import math

        m = from_rotation(SpherePoint(0.0, 0.0, 1.0), 2 * math.pi * 8 / 64)
        mat = ",".join(repr(v) for v in m.to_floats())
        r_mat = client.get("/api/warp", params={"id": "alpha", "matrix": mat})
        r_ctl = client.get("/api/warp", params={"id": "alpha",
                                                "yaw": 2 * math.pi * 8 / 64})
        a = decode_png_bytes(r_mat.content)
        b = decode_png_bytes(r_ctl.content)
        assert np.array_equal(np.roll(a, 8, axis=1), np.roll(b, -8, axis=1))

    def test_cli_parity(self, client, pano_dir, tmp_path):
        params = {"id": "alpha", "yaw": 0.3, "pitch": 0.1, "zoom": 1.2,
                  "kernel": "bilinear"}
        resp = client.get("/api/warp", params=params)
        out = tmp_path / "cli.png"
        rc = main(["warp", "--input", str(pano_dir / "alpha.png"),
                   "--output", str(out), "--yaw", "0.3", "--pitch", "0.1",
                   "--zoom", "1.2", "--kernel", "bilinear"])
        assert rc == 0
        assert np.array_equal(decode_png_bytes(resp.content),
                              decode_png_bytes(out.read_bytes()))


class TestMetricsEndpoint:
    def test_identical_is_inf(self, client):
        resp = client.get("/api/metrics", params={"id": "alpha", "ref_id": "alpha",
                                                  "metric": "ws-psnr"})
        assert resp.status_code == 200
        body = resp.json()
        assert body["metric"] == "ws_psnr"
        assert body["value"] == "inf"
        assert body["dims"] == [32, 64, 3]

    def test_ssim(self, client):
        resp = client.get("/api/metrics", params={"id": "alpha", "ref_id": "alpha",
                                                  "metric": "ws-ssim"})
        assert abs(resp.json()["value"] - 1.0) <= 1e-12

    def test_dim_mismatch_422(self, client):
        resp = client.get("/api/metrics", params={"id": "alpha", "ref_id": "beta"})
        assert resp.status_code == 422

    def test_unknown_metric_422(self, client):
        resp = client.get("/api/metrics", params={"id": "alpha", "ref_id": "alpha",
                                                  "metric": "vmaf"})
        assert resp.status_code == 422
