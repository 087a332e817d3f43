"""Procedural scenes used by tests, docs and the demo-scene CLI verb."""

import numpy as np

from .geometry import Camera
from .scene import Material, Scene, empty_scene


def icosphere(radius=1.0, center=(0.0, 0.0, 0.0), subdivisions=1):
    """Subdivided icosahedron projected onto a sphere; (verts, faces)."""
    t = (1.0 + np.sqrt(5.0)) / 2.0
    verts = np.array([
        [-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
        [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
        [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1],
    ], dtype=np.float64)
    verts /= np.linalg.norm(verts, axis=1, keepdims=True)
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    verts = [tuple(v) for v in verts]
    for _ in range(subdivisions):
        cache = {}
        vlist = list(verts)

        def midpoint(a, b):
            key = (min(a, b), max(a, b))
            if key not in cache:
                mid = np.add(vlist[a], vlist[b]) / 2.0
                mid /= np.linalg.norm(mid)
                cache[key] = len(vlist)
                vlist.append(tuple(mid))
            return cache[key]

        new_faces = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        verts, faces = vlist, new_faces
    v = np.array(verts) * radius + np.asarray(center, dtype=np.float64)
    return v, np.array(faces, dtype=np.int64)


def constant_scene(environment=(0.25, 0.5, 0.75)):
    """No geometry: every ray escapes into the constant environment."""
    return empty_scene(environment)


def furnace_scene(albedo=0.5, emission=0.2, radius=0.95, subdivisions=2):
    """Closed uniform enclosure; analytic interior radiance e / (1 - a)."""
    v, f = icosphere(radius=radius, subdivisions=subdivisions)
    mats = [Material(albedo=(albedo,) * 3, emission=(emission,) * 3)]
    return Scene(v, f, np.zeros(len(f), dtype=np.int32), mats,
                 environment=(0.0, 0.0, 0.0))


def desk_scene():
    """The pinned desk-scale quality scene: one diffuse mesh plus an area light.

    Everything fits inside the unit sphere about the origin.
    """
    v, f = icosphere(radius=0.42, center=(0.0, 0.0, -0.05), subdivisions=2)
    fmats = np.zeros(len(f), dtype=np.int32)
    # emissive quad above the object
    q = np.array([
        [-0.25, -0.25, 0.72], [0.25, -0.25, 0.72],
        [0.25, 0.25, 0.72], [-0.25, 0.25, 0.72],
    ])
    base = len(v)
    v = np.vstack([v, q])
    f = np.vstack([f, [[base, base + 1, base + 2], [base, base + 2, base + 3]]])
    fmats = np.concatenate([fmats, [1, 1]]).astype(np.int32)
    mats = [
        Material(albedo=(0.72, 0.34, 0.28)),
        Material(albedo=(0.0, 0.0, 0.0), emission=(6.0, 5.7, 5.2)),
    ]
    return Scene(v, f, fmats, mats, environment=(0.52, 0.56, 0.62))


BUILTIN_SCENES = {
    "constant": constant_scene,
    "furnace": furnace_scene,
    "desk": desk_scene,
}


def orbit_camera(azimuth, elevation, distance, center=(0.0, 0.0, 0.0),
                 fov=np.deg2rad(45.0), width=256, height=256):
    """Camera on a spherical orbit looking at the center, world up +z."""
    center = np.asarray(center, dtype=np.float64)
    eye = center + distance * np.array([
        np.cos(elevation) * np.cos(azimuth),
        np.cos(elevation) * np.sin(azimuth),
        np.sin(elevation),
    ])
    return Camera(eye=eye, look_at=center, up=np.array([0.0, 0.0, 1.0]),
                  fov=fov, width=width, height=height)
