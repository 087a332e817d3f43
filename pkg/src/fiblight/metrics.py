"""Quality harness: Gaussian-windowed SSIM, ground-truth rendering, reports.

SSIM runs on luma in a display-referred [0, 1] domain; metrics over a
coverage mask first zero the uncovered pixels of both inputs, so masked-out
content can never influence the score.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter

from . import _pure as prep
from .backend import kernels
from .errors import ContractError
from .png_io import linear_to_srgb
from .scene import pack_scene

_TRUTH_TAG = 0x7472


@dataclass(frozen=True)
class SsimParams:
    window: int = 11
    k1: float = 0.01
    k2: float = 0.03
    dynamic_range: float = 1.0
    sigma: float = 1.5

    def __post_init__(self):
        if self.window < 3 or self.window % 2 == 0:
            raise ContractError("SSIM window must be odd and >= 3")


def luma(rgb):
    rgb = np.asarray(rgb, dtype=np.float64)
    if rgb.ndim == 2:
        return rgb
    return rgb @ np.array([0.2126, 0.7152, 0.0722])


def _ssim_map(a, b, params):
    # truncation chosen so the Gaussian support matches the window size
    truncate = (params.window // 2) / params.sigma
    blur = lambda img: gaussian_filter(img, params.sigma, truncate=truncate,
                                       mode="reflect")
    c1 = (params.k1 * params.dynamic_range) ** 2
    c2 = (params.k2 * params.dynamic_range) ** 2
    mu_a = blur(a)
    mu_b = blur(b)
    va = blur(a * a) - mu_a * mu_a
    vb = blur(b * b) - mu_b * mu_b
    cab = blur(a * b) - mu_a * mu_b
    return ((2.0 * mu_a * mu_b + c1) * (2.0 * cab + c2)) \
        / ((mu_a * mu_a + mu_b * mu_b + c1) * (va + vb + c2))


def ssim(a, b, mask=None, params=SsimParams()):
    """Mean of the local SSIM map over ``mask`` (whole image when None)."""
    a = luma(a)
    b = luma(b)
    if a.shape != b.shape:
        raise ContractError(f"image shapes differ: {a.shape} vs {b.shape}")
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != a.shape:
            raise ContractError("mask shape does not match the images")
        if not mask.any():
            raise ContractError("empty mask")
        a = np.where(mask, a, 0.0)
        b = np.where(mask, b, 0.0)
    smap = _ssim_map(a, b, params)
    if mask is None:
        return float(smap.mean())
    return float(smap[mask].mean())


def compare(a, b, mask=None, params=SsimParams()):
    """Metric report between two display-referred images over a mask."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape[:2] != b.shape[:2]:
        raise ContractError(f"image shapes differ: {a.shape} vs {b.shape}")
    if mask is None:
        mask = np.ones(a.shape[:2], dtype=bool)
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise ContractError("no covered pixels to compare")
    la = np.where(mask, luma(a), 0.0)
    lb = np.where(mask, luma(b), 0.0)
    score = float(_ssim_map(la, lb, params)[mask].mean())
    mae = float(np.abs(la[mask] - lb[mask]).mean())
    return {
        "ssim": score,
        "mae": mae,
        "masked_pixels": int(mask.sum()),
        "cwssim": None,  # reserved
    }


def compare_frame(frame, reference_linear, params=SsimParams()):
    """Compare a synthesized FrameResult against a linear-RGB reference."""
    return compare(linear_to_srgb(frame.image),
                   linear_to_srgb(np.clip(reference_linear, 0.0, 1.0)),
                   mask=frame.coverage, params=params)


def render_ground_truth(scene, cam, spp=1024, seed=0, max_depth=5):
    """Reference image: per-pixel mean of ``spp`` jittered primary-ray traces."""
    pack = pack_scene(scene) if not hasattr(scene, "bvh_min") else scene
    w, h = cam.width, cam.height
    right, upv, fwd = cam.basis()
    th = math.tan(cam.fov / 2.0)
    aspect = w / h
    img = np.empty((h * w, 3))
    chunk = max(1, (1 << 19) // spp)
    for lo in range(0, h * w, chunk):
        hi = min(h * w, lo + chunk)
        pix = np.arange(lo, hi)
        rep = np.repeat(pix, spp)
        s = np.tile(np.arange(spp, dtype=np.uint64), hi - lo)
        states = prep.stream_keys(seed, rep.astype(np.uint64), s,
                                  np.full(rep.shape, _TRUTH_TAG, np.uint64))
        jx = prep.draw_uniform(states)
        jy = prep.draw_uniform(states)
        px = ((rep % w) + jx) / w * 2.0 - 1.0
        py = 1.0 - ((rep // w) + jy) / h * 2.0
        d = fwd[None, :] + (py * th)[:, None] * upv[None, :] \
            + (px * th * aspect)[:, None] * right[None, :]
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        origins = np.broadcast_to(cam.eye, d.shape)
        rad, _ = kernels.trace_radiance(origins, d, states, pack, max_depth)
        img[lo:hi] = rad.reshape(hi - lo, spp, 3).mean(axis=1)
    return img.reshape(h, w, 3)
