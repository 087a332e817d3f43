"""Rays, pinhole cameras and the bounding-sphere intersection."""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractError

_TANGENT_EPS = 1e-12


@dataclass(frozen=True)
class Ray:
    origin: np.ndarray
    direction: np.ndarray  # unit length

    def __post_init__(self):
        o = np.ascontiguousarray(self.origin, dtype=np.float64)
        d = np.ascontiguousarray(self.direction, dtype=np.float64)
        if abs(np.linalg.norm(d) - 1.0) > 1e-6:
            raise ContractError("ray direction is not unit length")
        object.__setattr__(self, "origin", o)
        object.__setattr__(self, "direction", d)


@dataclass(frozen=True)
class Camera:
    eye: np.ndarray
    look_at: np.ndarray
    up: np.ndarray
    fov: float  # vertical, radians
    width: int
    height: int

    def __post_init__(self):
        eye = np.ascontiguousarray(self.eye, dtype=np.float64)
        look = np.ascontiguousarray(self.look_at, dtype=np.float64)
        up = np.ascontiguousarray(self.up, dtype=np.float64)
        if np.allclose(eye, look):
            raise ContractError("camera eye coincides with look_at")
        if not 0.0 < self.fov < math.pi:
            raise ContractError(f"vertical fov must be in (0, pi), got {self.fov}")
        if self.width < 1 or self.height < 1:
            raise ContractError("image dimensions must be >= 1")
        fwd = look - eye
        fwd = fwd / np.linalg.norm(fwd)
        if np.linalg.norm(np.cross(fwd, up)) < 1e-9:
            raise ContractError("up vector is parallel to the view direction")
        object.__setattr__(self, "eye", eye)
        object.__setattr__(self, "look_at", look)
        object.__setattr__(self, "up", up)

    def basis(self):
        """(right, up, forward) orthonormal frame."""
        fwd = self.look_at - self.eye
        fwd = fwd / np.linalg.norm(fwd)
        right = np.cross(fwd, self.up)
        right = right / np.linalg.norm(right)
        upv = np.cross(right, fwd)
        return right, upv, fwd

    def pixel_ray(self, ix, iy):
        """Primary ray through the center of pixel (ix, iy)."""
        right, upv, fwd = self.basis()
        th = math.tan(self.fov / 2.0)
        aspect = self.width / self.height
        px = (ix + 0.5) / self.width * 2.0 - 1.0
        py = 1.0 - (iy + 0.5) / self.height * 2.0
        d = fwd + py * th * upv + px * th * aspect * right
        return Ray(self.eye, d / np.linalg.norm(d))


def intersect_sphere(ray, radius, center):
    """Front/back sphere hitpoints as unit directions from the center.

    Tangential rays (discriminant within 1e-12 of zero) are treated as
    misses. For an origin inside the sphere, the front point is taken as
    the direction from the center to the origin.
    """
    o = ray.origin
    d = ray.direction
    oc = o - np.asarray(center, dtype=np.float64)
    b = float(d @ oc)
    c = float(oc @ oc) - radius * radius
    disc = b * b - c
    if disc <= _TANGENT_EPS:
        return None
    s = math.sqrt(disc)
    t1 = -b + s
    if t1 <= _TANGENT_EPS:
        return None
    if c < 0.0:  # origin inside the sphere
        nrm = np.linalg.norm(oc)
        h_o = oc / nrm if nrm > 1e-12 else -d
    else:
        t0 = -b - s
        if t0 <= _TANGENT_EPS:
            return None
        h_o = oc + t0 * d
        h_o = h_o / np.linalg.norm(h_o)
    h_d = oc + t1 * d
    return h_o, h_d / np.linalg.norm(h_d)
