"""HTTP frame server: field metadata plus pose-to-PNG rendering.

Rendering goes through the same code path as the CLI ``render`` verb, so
a POST /frame response is byte-identical to the CLI output for the same
pose, mode and field.
"""

import asyncio
import math
import time
from contextlib import asynccontextmanager
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response
from pydantic import BaseModel, Field, field_validator

from . import field as lightfield
from .geometry import Camera
from .png_io import frame_png_bytes

MIN_SIZE = 16
MAX_SIZE = 2048


class PoseRequest(BaseModel):
    eye: list[float] = Field(min_length=3, max_length=3)
    look_at: list[float] = Field(min_length=3, max_length=3)
    up: list[float] = Field(min_length=3, max_length=3)
    fov_deg: float = Field(gt=0.0, lt=180.0)
    width: int = Field(ge=1)
    height: int = Field(ge=1)
    mode: str = "filtered"

    @field_validator("eye", "look_at", "up")
    @classmethod
    def finite(cls, v):
        if not all(math.isfinite(x) for x in v):
            raise ValueError("coordinates must be finite")
        return v

    @field_validator("mode")
    @classmethod
    def known_mode(cls, v):
        if v not in ("nearest", "filtered"):
            raise ValueError("mode must be 'nearest' or 'filtered'")
        return v

    def camera(self):
        return Camera(eye=np.array(self.eye), look_at=np.array(self.look_at),
                      up=np.array(self.up), fov=math.radians(self.fov_deg),
                      width=self.width, height=self.height)


def create_app(field=None, field_path=None, allow_origin="*", workers=1):
    @asynccontextmanager
    async def lifespan(app):
        if app.state.field is None and app.state.field_path is not None:
            app.state.field = lightfield.load(app.state.field_path)
        yield
        app.state.pool.shutdown(wait=False)

    app = FastAPI(title="fiblight frame server", lifespan=lifespan)
    app.state.field = field
    app.state.field_path = field_path
    app.state.pool = ThreadPoolExecutor(max_workers=max(1, workers))

    if allow_origin:
        from fastapi.middleware.cors import CORSMiddleware
        app.add_middleware(CORSMiddleware, allow_origins=[allow_origin],
                           allow_methods=["*"], allow_headers=["*"])

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        first = exc.errors()[0]
        loc = ".".join(str(p) for p in first.get("loc", ()) if p != "body")
        return JSONResponse(status_code=400,
                            content={"error": f"{loc}: {first.get('msg')}"})

    @app.get("/metadata")
    def metadata():
        lf = app.state.field
        if lf is None:
            return JSONResponse(status_code=503,
                                content={"error": "field is still loading"})
        return {
            "m": lf.m,
            "n": lf.n,
            "radius": lf.radius,
            "center": [float(c) for c in lf.center],
            "hemisphere": lf.hemisphere,
            "texel_format": "rgba8",
            "suggested_orbit_radius": 2.5 * lf.radius,
        }

    def _render(lf, pose):
        start = time.perf_counter()
        result = lightfield.render_frame(lf, pose.camera(), mode=pose.mode)
        micros = int((time.perf_counter() - start) * 1e6)
        covered = float(result.coverage.mean()) * 100.0
        return Response(content=frame_png_bytes(result), media_type="image/png",
                        headers={
                            "X-Render-Micros": str(micros),
                            "X-Coverage-Percent": f"{covered:.2f}",
                        })

    @app.post("/frame")
    async def frame(pose: PoseRequest):
        lf = app.state.field
        if lf is None:
            return JSONResponse(status_code=503,
                                content={"error": "field is still loading"})
        if not (MIN_SIZE <= pose.width <= MAX_SIZE
                and MIN_SIZE <= pose.height <= MAX_SIZE):
            return JSONResponse(
                status_code=413,
                content={"error": f"frame size must be within "
                         f"[{MIN_SIZE}, {MAX_SIZE}] pixels per side"})
        loop = asyncio.get_running_loop()
        return await loop.run_in_executor(app.state.pool, _render, lf, pose)

    return app


def serve(field_path, port=8090, workers=1, allow_origin="*", host="127.0.0.1"):
    import uvicorn
    app = create_app(field_path=field_path, allow_origin=allow_origin,
                     workers=workers)
    uvicorn.run(app, host=host, port=port, log_level="warning")
