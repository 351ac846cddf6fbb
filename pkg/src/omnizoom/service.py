"""HTTP service: panorama store, warp endpoint and metric reports.

The panorama store is write-once-read-many: startup warm-loads every PNG in
the panorama directory, uploads add new immutable entries keyed by content
hash. Responses depend only on the query parameters and the store, so warp
responses carry a long-lived Cache-Control plus an ETag derived from the
full parameter set.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path

import cv2
import numpy as np
from fastapi import FastAPI, Request, Response, UploadFile
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .errors import DimMismatchError, IoError, NearSingularError, TooSmallError
from .geometry import MobiusMatrix, SphericalCoord, ViewControls, build_index_map
from .image import ErpImage, load_png, quantize
from .metrics import metric_report, ws_psnr, ws_ssim
from .pipeline import WarpRequest
from .resample import ResampleKernel, resample, resolve_threads

MAX_PIXELS = 8_388_608


@dataclass(frozen=True)
class PanoramaHandle:
    """Store entry: decoded image plus provenance; immutable after load."""

    id: str
    dims: tuple[int, int]  # (H, W)
    source: str
    image: ErpImage


def _encode_png(img: ErpImage) -> bytes:
    q = quantize(img, 8)
    data = q[:, :, 0] if q.shape[2] == 1 else cv2.cvtColor(q, cv2.COLOR_RGB2BGR)
    ok, buf = cv2.imencode(".png", data)
    if not ok:
        raise IoError("PNG encoding failed")
    return bytes(buf.tobytes())


def _error(status: int, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": message})


def create_app(panorama_dir: str | None = None, threads: int | None = None) -> FastAPI:
    app = FastAPI(title="omnizoom")
    # the browser viewer may be served from a different origin
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"])
    store: dict[str, PanoramaHandle] = {}
    n_threads = resolve_threads(threads)

    if panorama_dir is not None:
        root = Path(panorama_dir)
        if not root.is_dir():
            raise IoError(f"panorama dir not found: {panorama_dir}")
        for path in sorted(root.glob("*.png")):
            img = load_png(path)
            store[path.stem] = PanoramaHandle(path.stem, (img.height, img.width),
                                              str(path), img)

    @app.get("/api/panoramas")
    def list_panoramas():
        return [{"id": h.id, "width": h.dims[1], "height": h.dims[0]}
                for _, h in sorted(store.items())]

    @app.post("/api/panoramas")
    async def upload_panorama(file: UploadFile):
        raw = await file.read()
        data = cv2.imdecode(np.frombuffer(raw, dtype=np.uint8), cv2.IMREAD_UNCHANGED)
        if data is None:
            return _error(422, "could not decode uploaded image")
        pid = hashlib.sha256(raw).hexdigest()[:12]
        if pid not in store:
            peak = 65535.0 if data.dtype == np.uint16 else 255.0
            if data.ndim == 3:
                if data.shape[2] == 4:
                    data = data[:, :, :3]
                data = cv2.cvtColor(data, cv2.COLOR_BGR2RGB)
            img = ErpImage.from_array(data.astype(np.float64) / peak,
                                      allow_any_aspect=True)
            store[pid] = PanoramaHandle(pid, (img.height, img.width),
                                        f"upload:{file.filename}", img)
        return {"id": pid}

    @app.get("/api/warp")
    def warp_endpoint(request: Request,
                      id: str,
                      yaw: float = 0.0,
                      pitch: float = 0.0,
                      zoom: float = 1.0,
                      zoom_center_theta: float = 0.0,
                      zoom_center_phi: float = 0.0,
                      matrix: str | None = None,
                      w: int | None = None,
                      h: int | None = None,
                      kernel: str = "spherical"):
        handle = store.get(id)
        if handle is None:
            return _error(404, f"unknown panorama {id!r}")
        pano = handle.image
        out_w = pano.width if w is None else w
        out_h = pano.height if h is None else h
        if out_w < 4 or out_h < 2:
            return _error(422, "output dims too small")
        if out_w * out_h > MAX_PIXELS:
            return _error(413, f"requested {out_w * out_h} pixels > {MAX_PIXELS}")
        try:
            kern = ResampleKernel.from_name(kernel)
        except ValueError as exc:
            return _error(422, str(exc))

        try:
            if matrix is not None:
                parts = [float(p) for p in matrix.split(",") if p]
                if len(parts) != 8:
                    return _error(422, "matrix needs 8 comma-separated floats")
                view: MobiusMatrix | ViewControls = MobiusMatrix.from_floats(parts)
            else:
                view = ViewControls(yaw=yaw, pitch=pitch,
                                    zoom_center=SphericalCoord(zoom_center_theta,
                                                               zoom_center_phi),
                                    zoom_factor=zoom)
            sampling = WarpRequest(view=view, kernel=kern).sampling_matrix()
        except NearSingularError as exc:
            return _error(422, f"singular matrix: {exc}")
        except ValueError as exc:
            return _error(422, str(exc))

        out = resample(pano, build_index_map(out_h, out_w, sampling), kern,
                       threads=n_threads)
        etag = hashlib.sha1(str(sorted(request.query_params.items())).encode()).hexdigest()
        return Response(content=_encode_png(out), media_type="image/png",
                        headers={"Cache-Control": "public, max-age=31536000",
                                 "ETag": f'"{etag}"'})

    @app.get("/api/metrics")
    def metrics_endpoint(id: str, ref_id: str, metric: str = "ws-psnr",
                         peak: float = 1.0):
        ha, hb = store.get(id), store.get(ref_id)
        if ha is None or hb is None:
            return _error(404, "unknown panorama id")
        a, b = ha.image, hb.image
        try:
            if metric == "ws-psnr":
                value = ws_psnr(a, b, peak=peak)
            elif metric == "ws-ssim":
                value = ws_ssim(a, b, peak=peak)
            else:
                return _error(422, f"unknown metric {metric!r}")
        except (DimMismatchError, TooSmallError) as exc:
            return _error(422, str(exc))
        name = metric.replace("-", "_")
        return metric_report(name, value, peak, (a.height, a.width, a.channels))

    return app
