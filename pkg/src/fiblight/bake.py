"""Precompute the radiance texture by path tracing one ray bundle per texel.

Texel (i, j) stores the mean of ``spp`` traced samples of the ray from
origin-lattice point i toward direction-lattice point j, with per-sample
origin jitter on a tangent disk. Sample RNG streams are counter-based on
(seed, i, j, sample), so bakes are bit-identical under any parallel
schedule.
"""

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _pure as prep  # deterministic ray/stream prep, backend-independent
from .backend import kernels
from .errors import ContractError
from .field import LightField, stored_rows
from .geometry import Ray
from .scene import Scene, ScenePack, pack_scene

_RAYS_PER_CHUNK = 1 << 19


@dataclass(frozen=True)
class BakeConfig:
    m: int  # origin cardinality
    n: int  # direction cardinality
    radius: float = 1.0
    center: tuple = (0.0, 0.0, 0.0)
    hemisphere: bool = False
    spp: int = 64
    max_depth: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.m < 2 or self.n < 2:
            raise ContractError("lattice cardinalities must be >= 2")
        if self.radius <= 0:
            raise ContractError("sphere radius must be positive")
        if self.spp < 1:
            raise ContractError("spp must be >= 1")
        if self.max_depth < 1:
            raise ContractError("max_depth must be >= 1")

    @property
    def rows(self):
        return stored_rows(self.m, self.hemisphere)

    @property
    def disk_radius(self):
        """Jitter disk radius: area 4*pi*R^2 / M per origin."""
        return 2.0 * self.radius / np.sqrt(self.m)


@dataclass
class BakeDiagnostics:
    texels: int = 0
    degenerate_texels: int = 0
    nonfinite_samples: int = 0
    seconds: float = 0.0


def sample_stream(seed, a=0, b=0, c=0):
    """A single counter-based RNG stream state."""
    return prep.stream_keys(seed, np.array([a], np.uint64),
                            np.array([b], np.uint64),
                            np.array([c], np.uint64))


def ray_for(i, j, cfg, jitter=(0.0, 0.0)):
    """Bake ray for texel (i, j); ``jitter`` is a point in the unit disk.

    Returns None for the degenerate case of coinciding lattice points
    (the texel is skipped and flagged).
    """
    if not 0 <= j < cfg.n:
        raise ContractError(f"direction index {j} out of range")
    if not 0 <= i < cfg.m:
        raise ContractError(f"origin index {i} out of range")
    p_o = prep.sf_points(np.array([i]), cfg.m)[0]
    if cfg.hemisphere and p_o[2] <= 0.0:
        raise ContractError(f"origin {i} is below the baked hemisphere")
    p_d = prep.sf_points(np.array([j]), cfg.n)[0]
    d = p_d - p_o
    nrm = np.linalg.norm(d)
    if nrm < 1e-12:
        return None
    t1, t2 = prep._onb(p_o[None, :])
    center = np.asarray(cfg.center, dtype=np.float64)
    origin = center + cfg.radius * p_o \
        + cfg.disk_radius * (jitter[0] * t1[0] + jitter[1] * t2[0])
    return Ray(origin, d / nrm)


def trace(ray, scene, stream, max_depth=5):
    """One radiance sample along ``ray``; advances the RNG ``stream``."""
    pack = scene if isinstance(scene, ScenePack) else pack_scene(scene)
    rad, _ = kernels.trace_radiance(ray.origin[None, :], ray.direction[None, :],
                                    stream, pack, max_depth)
    return rad[0]


def _quantize(mean_rgb):
    return np.round(np.clip(mean_rgb, 0.0, 1.0) * 255.0).astype(np.uint8)


def _bake_chunk(lo, hi, cfg, pack, flat_texels, diag, progress):
    n = cfg.n
    spp = cfg.spp
    center = np.asarray(cfg.center, dtype=np.float64)
    idx = np.arange(lo, hi)
    i = idx // n
    j = idx % n
    p_o = prep.sf_points(i, cfg.m)
    p_d = prep.sf_points(j, cfg.n)
    dvec = p_d - p_o
    dn = np.linalg.norm(dvec, axis=1)
    degenerate = dn < 1e-12
    dirs = dvec / np.maximum(dn, 1e-12)[:, None]
    t1, t2 = prep._onb(p_o)
    # per-sample streams and tangent-disk jitter
    rep = np.repeat(np.arange(hi - lo), spp)
    s = np.tile(np.arange(spp, dtype=np.uint64), hi - lo)
    states = prep.stream_keys(cfg.seed, i[rep].astype(np.uint64),
                              j[rep].astype(np.uint64), s)
    u1 = prep.draw_uniform(states)
    u2 = prep.draw_uniform(states)
    r = np.sqrt(u1) * cfg.disk_radius
    ang = 2.0 * np.pi * u2
    origins = center + cfg.radius * p_o[rep] \
        + (r * np.cos(ang))[:, None] * t1[rep] \
        + (r * np.sin(ang))[:, None] * t2[rep]
    rad, bad = kernels.trace_radiance(origins, dirs[rep], states, pack,
                                      cfg.max_depth)
    mean = rad.reshape(hi - lo, spp, 3).mean(axis=1)
    out = np.empty((hi - lo, 4), dtype=np.uint8)
    out[:, :3] = _quantize(mean)
    out[:, 3] = 255
    out[degenerate] = 0
    flat_texels[lo:hi] = out
    diag.degenerate_texels += int(degenerate.sum())
    diag.nonfinite_samples += bad
    if progress is not None:
        progress(hi - lo)


def bake(scene, cfg, progress=None, workers=1, check_bounds=True):
    """Bake the full texture; returns a LightField with ``.diagnostics`` set.

    ``check_bounds=False`` skips the scene-containment check for diagnostic
    scenes that deliberately surround the sphere (e.g. a furnace enclosure).
    """
    center = np.asarray(cfg.center, dtype=np.float64)
    if isinstance(scene, Scene):
        if check_bounds and scene.bounding_radius(center) >= cfg.radius:
            raise ContractError(
                "scene geometry extends outside the bounding sphere; "
                "refusing to bake")
        pack = pack_scene(scene)
    else:
        pack = scene
    rows = cfg.rows
    texels = np.zeros((rows, cfg.n, 4), dtype=np.uint8)
    flat = texels.reshape(rows * cfg.n, 4)
    diag = BakeDiagnostics(texels=rows * cfg.n)
    chunk = max(1, _RAYS_PER_CHUNK // cfg.spp)
    spans = [(lo, min(lo + chunk, rows * cfg.n))
             for lo in range(0, rows * cfg.n, chunk)]
    start = time.perf_counter()
    if workers <= 1:
        for lo, hi in spans:
            _bake_chunk(lo, hi, cfg, pack, flat, diag, progress)
    else:
        # chunks write disjoint texel ranges; per-chunk diagnostics need a lock-free
        # merge, so give each chunk its own record
        parts = [BakeDiagnostics() for _ in spans]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_bake_chunk, lo, hi, cfg, pack, flat,
                                   part, progress)
                       for (lo, hi), part in zip(spans, parts)]
            for f in futures:
                f.result()
        for part in parts:
            diag.degenerate_texels += part.degenerate_texels
            diag.nonfinite_samples += part.nonfinite_samples
    diag.seconds = time.perf_counter() - start
    lf = LightField(m=cfg.m, n=cfg.n, radius=cfg.radius, center=center,
                    hemisphere=cfg.hemisphere, texels=texels)
    lf.diagnostics = diag
    return lf
