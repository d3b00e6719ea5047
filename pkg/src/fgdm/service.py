"""Local HTTP API for interactive tuning: upload images, translate them
with chosen thresholds, inspect radial spectra, review call history.

The service only loads frozen checkpoints; it never trains. Identical
requests (image, parameters, seed) produce identical responses.
"""

from __future__ import annotations

import base64
import threading
import time
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import Response
from pydantic import BaseModel

from . import __version__
from .imagecore import clamp_unit, decode_png_bytes, encode_png_bytes
from .metrics import psnr, ssim
from .model import load_checkpoint
from .spectral import frequency_mse, radial_frequency_mse, radial_psd_profile
from .translate import ABLATIONS, TranslationConfig, translate

MAX_UPLOAD_BYTES = 8 * 1024 * 1024


class TranslateRequest(BaseModel):
    image_id: str
    eta: float = 10.0
    tilde_t: int = 4
    seed: int = 0
    ablation: str = "full"


class _Store:
    """Uploaded/preloaded images and the append-only call history."""

    def __init__(self):
        self._lock = threading.Lock()
        self._images: dict[str, np.ndarray] = {}
        self._counter = 0
        self.history: list[dict] = []

    def add(self, img: np.ndarray) -> str:
        with self._lock:
            self._counter += 1
            image_id = f"img-{self._counter:05d}"
            self._images[image_id] = img
        return image_id

    def get(self, image_id: str) -> np.ndarray:
        img = self._images.get(image_id)
        if img is None:
            raise HTTPException(status_code=404, detail=f"unknown image_id {image_id!r}")
        return img

    def ids(self) -> list[str]:
        return sorted(self._images)

    def record(self, entry: dict) -> None:
        with self._lock:
            self.history.append(entry)


def _b64_png(img: np.ndarray) -> str:
    return base64.b64encode(encode_png_bytes(clamp_unit(img))).decode()


def create_app(checkpoint=None, data_dir=None, ui_dir=None, max_upload_bytes: int = MAX_UPLOAD_BYTES) -> FastAPI:
    app = FastAPI(title="fgdm service", version=__version__)
    app.add_middleware(
        CORSMiddleware,
        allow_origin_regex=r"https?://(localhost|127\.0\.0\.1)(:\d+)?",
        allow_methods=["*"],
        allow_headers=["*"],
    )

    store = _Store()
    generator = None
    sched = None
    if checkpoint is not None:
        generator, _, sched, _ = load_checkpoint(checkpoint)
    if data_dir is not None:
        from .phantoms import load_image_dir

        images, _ = load_image_dir(data_dir)
        for img in images:
            store.add(img)

    app.state.store = store
    app.state.generator = generator
    app.state.schedule = sched

    @app.post("/api/images")
    async def upload_image(request: Request):
        body = await request.body()
        if len(body) > max_upload_bytes:
            raise HTTPException(status_code=413, detail=f"payload exceeds {max_upload_bytes} bytes")
        try:
            img = decode_png_bytes(body)
        except (OSError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=f"malformed image payload: {exc}")
        return {"image_id": store.add(img)}

    @app.get("/api/images")
    def list_images():
        return {"image_ids": store.ids()}

    @app.get("/api/images/{image_id}/raw")
    def download_raw(image_id: str):
        img = store.get(image_id)
        return Response(
            content=img.astype("<f4").tobytes(),
            media_type="application/octet-stream",
            headers={"X-Height": str(img.shape[0]), "X-Width": str(img.shape[1]), "X-Dtype": "f32le"},
        )

    @app.get("/api/config")
    def get_config():
        return {
            "version": __version__,
            "checkpoint_loaded": generator is not None,
            "T": sched.T if sched is not None else None,
            "defaults": {"eta": 10.0, "tilde_t": 4, "seed": 0},
            "eta_range": [1, 25],
            "ablations": list(ABLATIONS),
        }

    @app.post("/api/translate")
    def run_translate(req: TranslateRequest):
        if generator is None:
            raise HTTPException(status_code=409, detail="no checkpoint loaded; start serve with --ckpt")
        source = store.get(req.image_id)
        if req.eta < 0:
            raise HTTPException(status_code=422, detail=f"eta must be >= 0, got {req.eta}")
        if not 1 <= req.tilde_t <= sched.T:
            raise HTTPException(status_code=422, detail=f"tilde_t must be in [1, {sched.T}], got {req.tilde_t}")
        if req.ablation not in ABLATIONS:
            raise HTTPException(status_code=422, detail=f"ablation must be one of {ABLATIONS}, got {req.ablation!r}")

        started = time.perf_counter()
        cfg = TranslationConfig(eta=req.eta, tilde_T=req.tilde_t, seed=req.seed, ablation=req.ablation)
        result = translate(source, cfg, generator, sched)
        elapsed_ms = (time.perf_counter() - started) * 1000.0
        metrics = {
            "psnr_source": psnr(result.output, source),
            "ssim_source": ssim(result.output, source),
            "freq_mse_source": frequency_mse(result.output, source),
        }
        entry = {
            "image_id": req.image_id,
            "config": {"eta": req.eta, "tilde_t": req.tilde_t, "seed": req.seed, "ablation": req.ablation},
            "metrics": metrics,
            "elapsed_ms": elapsed_ms,
            "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S"),
        }
        store.record(entry)
        return {
            "result_image": _b64_png(result.output),
            "h_image": _b64_png(result.edge_cond),
            "l_image": _b64_png(result.start_state),
            "metrics": metrics,
            "elapsed_ms": elapsed_ms,
        }

    @app.get("/api/spectrum")
    def spectrum(image_id: str, compare_id: str | None = None, nbins: int = 64):
        if nbins < 2:
            raise HTTPException(status_code=422, detail=f"nbins must be >= 2, got {nbins}")
        img = store.get(image_id)
        if compare_id is None:
            profile = radial_psd_profile(img, nbins=nbins)
        else:
            other = store.get(compare_id)
            if other.shape != img.shape:
                raise HTTPException(
                    status_code=422,
                    detail=f"shape mismatch: {img.shape} vs {other.shape}",
                )
            profile = radial_frequency_mse(img, other, nbins)
        return {"profile": profile.rows()}

    @app.get("/api/history")
    def history():
        return {"history": store.history}

    if ui_dir is not None and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
