"""The baked radiance texture: persistence, sampling, frame synthesis.

The texture is indexed (i, j) = (origin lattice index, direction lattice
index) and stored as 8-bit RGBA in linear RGB; alpha is a validity flag.
On disk it lives in the LPLF container (see ``save``/``load``).
"""

import math
import struct
import zlib
from dataclasses import dataclass

import numpy as np

from . import sf
from .backend import kernels
from .errors import ContractError, FormatError

MAGIC = b"LPLF"
VERSION = 1
FLAG_HEMISPHERE = 1
TEXEL_RGBA8 = 0

_HEADER = struct.Struct("<4sIIIId3dI")  # magic, version, flags, M, N, R, O, fmt
HEADER_SIZE = _HEADER.size
_CRC = struct.Struct("<I")


def stored_rows(m, hemisphere):
    """Number of stored origin rows: indices with z_i > 0 when hemisphere-only."""
    return m // 2 if hemisphere else m


def payload_size(m, n, hemisphere):
    """Exact stored payload in bytes for an RGBA8 texture."""
    return stored_rows(m, hemisphere) * n * 4


@dataclass
class LightField:
    m: int
    n: int
    radius: float
    center: np.ndarray
    hemisphere: bool
    texels: np.ndarray  # (rows, n, 4) uint8, immutable

    def __post_init__(self):
        self.center = np.ascontiguousarray(self.center, dtype=np.float64)
        self.texels = np.ascontiguousarray(self.texels, dtype=np.uint8)
        rows = stored_rows(self.m, self.hemisphere)
        if self.texels.shape != (rows, self.n, 4):
            raise ContractError(
                f"texture shape {self.texels.shape} does not match "
                f"(rows={rows}, n={self.n}, 4)")
        self.texels.setflags(write=False)

    @property
    def rows(self):
        return self.texels.shape[0]

    def kernel_radii(self):
        """Tent support radii on the unit sphere for the two point sets."""
        return (sf.kernel_radius(self.m, 1.0), sf.kernel_radius(self.n, 1.0))


@dataclass
class FrameResult:
    image: np.ndarray  # (H, W, 3) linear RGB
    coverage: np.ndarray  # (H, W) bool
    eye_inside: bool = False
    texel_fetches: int = 0


# ---------------------------------------------------------------------------
# persistence (LPLF container, little-endian)
# ---------------------------------------------------------------------------


def save(lf, path):
    """Write the LPLF container; returns the byte count written."""
    flags = FLAG_HEMISPHERE if lf.hemisphere else 0
    header = _HEADER.pack(MAGIC, VERSION, flags, lf.m, lf.n, lf.radius,
                          lf.center[0], lf.center[1], lf.center[2],
                          TEXEL_RGBA8)
    payload = lf.texels.tobytes()
    crc = _CRC.pack(zlib.crc32(payload) & 0xFFFFFFFF)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)
        fh.write(crc)
    return len(header) + len(payload) + len(crc)


def load(path):
    with open(path, "rb") as fh:
        blob = fh.read()
    return loads(blob)


def loads(blob):
    if len(blob) < HEADER_SIZE:
        raise FormatError(f"file truncated: {len(blob)} bytes is smaller than "
                          f"the {HEADER_SIZE}-byte header", offset=len(blob))
    magic, version, flags, m, n, radius, ox, oy, oz, fmt = \
        _HEADER.unpack_from(blob, 0)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {MAGIC!r}", offset=0)
    if version != VERSION:
        raise FormatError(f"unsupported version {version}", offset=4)
    if fmt != TEXEL_RGBA8:
        raise FormatError(f"unsupported texel format {fmt}", offset=52)
    hemisphere = bool(flags & FLAG_HEMISPHERE)
    expect = payload_size(m, n, hemisphere)
    actual = len(blob) - HEADER_SIZE - _CRC.size
    if actual != expect:
        raise FormatError(f"payload length mismatch: expected {expect} bytes, "
                          f"got {actual}", offset=HEADER_SIZE)
    payload = blob[HEADER_SIZE:HEADER_SIZE + expect]
    (crc,) = _CRC.unpack_from(blob, HEADER_SIZE + expect)
    live = zlib.crc32(payload) & 0xFFFFFFFF
    if crc != live:
        raise FormatError(f"payload checksum mismatch: stored {crc:#010x}, "
                          f"computed {live:#010x}", offset=HEADER_SIZE + expect)
    texels = np.frombuffer(payload, dtype=np.uint8).reshape(
        stored_rows(m, hemisphere), n, 4)
    return LightField(m=m, n=n, radius=radius,
                      center=np.array([ox, oy, oz]), hemisphere=hemisphere,
                      texels=texels)


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------


def sample_nearest(lf, h_o, h_d):
    """Texel at the nearest (origin, direction) lattice pair."""
    i = sf.inverse_nearest(h_o, lf.m)
    j = sf.inverse_nearest(h_d, lf.n)
    if i >= lf.rows:
        return np.zeros(3), False
    texel = lf.texels[i, j]
    if texel[3] == 0:
        return np.zeros(3), False
    return texel[:3].astype(np.float64) / 255.0, True


def sample_filtered(lf, h_o, h_d):
    """Distance-weighted blend over 5x5 neighbor texels (tent kernel).

    Falls back to the nearest texel when no neighbor carries weight.
    """
    k = min(5, lf.m, lf.n)
    no = sf.neighbors_k(h_o, lf.m, k)
    nd = sf.neighbors_k(h_d, lf.n, k)
    h_m, h_n = lf.kernel_radii()
    acc = np.zeros(3)
    wsum = 0.0
    for i, d_o in no:
        if i >= lf.rows:
            continue
        wo = sf.kernel_weight(d_o, h_m)
        if wo <= 0.0:
            continue
        for j, d_d in nd:
            texel = lf.texels[i, j]
            if texel[3] == 0:
                continue
            w = wo * sf.kernel_weight(d_d, h_n)
            if w <= 0.0:
                continue
            acc += w * texel[:3] / 255.0
            wsum += w
    if wsum > 0.0:
        return acc / wsum, True
    return sample_nearest(lf, h_o, h_d)


def render_frame(lf, cam, mode="filtered"):
    """Synthesize a frame by per-pixel sphere intersection and texture lookup.

    Work per pixel is a constant number of texel fetches (25 filtered,
    1 nearest) regardless of the lattice sizes.
    """
    if mode not in ("nearest", "filtered"):
        raise ContractError(f"unknown sampling mode {mode!r}")
    right, upv, fwd = cam.basis()
    h_m, h_n = lf.kernel_radii()
    img, cov, fetches, inside = kernels.render_pixels(
        lf.texels, lf.m, lf.n, lf.hemisphere, lf.radius, lf.center,
        cam.eye, right, upv, fwd, math.tan(cam.fov / 2.0),
        cam.width, cam.height, mode == "filtered", h_m, h_n)
    return FrameResult(image=img, coverage=cov, eye_inside=inside,
                       texel_fetches=fetches)
