"""Triangle-mesh scenes with diffuse/emissive materials.

Scene input is a wavefront-style mesh (``v``/``f``/``usemtl`` lines; faces
are fan-triangulated, ``usemtl`` selects a material table index) plus a
line-oriented sidecar material table:

    material <idx> albedo r g b emission r g b
    environment r g b

Scenes are flattened into a ``ScenePack`` of numpy arrays (plus a BVH over
the triangles) which is what the tracing kernels consume.
"""

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ContractError, FormatError


@dataclass(frozen=True)
class Material:
    albedo: tuple  # linear RGB in [0, 1]
    emission: tuple = (0.0, 0.0, 0.0)  # linear RGB >= 0

    def __post_init__(self):
        if any(not 0.0 <= a <= 1.0 for a in self.albedo):
            raise ContractError(f"albedo out of [0,1]: {self.albedo}")
        if any(e < 0.0 for e in self.emission):
            raise ContractError(f"negative emission: {self.emission}")


@dataclass
class Scene:
    vertices: np.ndarray  # (V, 3) float64
    faces: np.ndarray  # (T, 3) int vertex indices
    face_materials: np.ndarray  # (T,) int material indices
    materials: list
    environment: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        self.vertices = np.ascontiguousarray(self.vertices, dtype=np.float64)
        self.faces = np.ascontiguousarray(self.faces, dtype=np.int64)
        self.face_materials = np.ascontiguousarray(self.face_materials,
                                                   dtype=np.int32)
        if not np.all(np.isfinite(self.vertices)):
            raise ContractError("non-finite vertex coordinates")
        if self.faces.size and self.faces.max() >= len(self.vertices):
            raise ContractError("face references missing vertex")
        if self.face_materials.size and \
                self.face_materials.max() >= len(self.materials):
            raise ContractError("face references missing material")
        if any(e < 0 for e in self.environment):
            raise ContractError("negative environment radiance")

    @property
    def triangle_count(self):
        return len(self.faces)

    def bounding_radius(self, center):
        if not len(self.vertices):
            return 0.0
        return float(np.max(np.linalg.norm(
            self.vertices - np.asarray(center, dtype=np.float64), axis=1)))


def empty_scene(environment=(0.0, 0.0, 0.0)):
    return Scene(np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int64),
                 np.zeros(0, dtype=np.int32), [], environment)


# ---------------------------------------------------------------------------
# file IO
# ---------------------------------------------------------------------------


def load_mesh(path):
    """Parse vertices, faces and per-face material indices from an OBJ file."""
    verts, faces, fmats = [], [], []
    current = 0
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        if tok[0] == "v":
            if len(tok) < 4:
                raise FormatError(f"{path}:{lineno}: malformed vertex")
            verts.append([float(tok[1]), float(tok[2]), float(tok[3])])
        elif tok[0] == "f":
            idx = [int(t.split("/")[0]) for t in tok[1:]]
            idx = [i - 1 if i > 0 else len(verts) + i for i in idx]
            if len(idx) < 3:
                raise FormatError(f"{path}:{lineno}: face with <3 vertices")
            for a in range(1, len(idx) - 1):
                faces.append([idx[0], idx[a], idx[a + 1]])
                fmats.append(current)
        elif tok[0] == "usemtl":
            try:
                current = int(tok[1])
            except (IndexError, ValueError):
                raise FormatError(f"{path}:{lineno}: usemtl expects an index")
        # vn / vt / o / g / s lines are ignored
    return (np.array(verts, dtype=np.float64).reshape(-1, 3),
            np.array(faces, dtype=np.int64).reshape(-1, 3),
            np.array(fmats, dtype=np.int32))


def load_material_table(path):
    """Parse the sidecar material table; returns (materials, environment)."""
    materials = {}
    environment = (0.0, 0.0, 0.0)
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        if tok[0] == "material":
            if len(tok) != 10 or tok[2] != "albedo" or tok[6] != "emission":
                raise FormatError(f"{path}:{lineno}: expected "
                                  "'material <idx> albedo r g b emission r g b'")
            materials[int(tok[1])] = Material(
                albedo=tuple(float(x) for x in tok[3:6]),
                emission=tuple(float(x) for x in tok[7:10]))
        elif tok[0] == "environment":
            if len(tok) != 4:
                raise FormatError(f"{path}:{lineno}: expected 'environment r g b'")
            environment = tuple(float(x) for x in tok[1:4])
        else:
            raise FormatError(f"{path}:{lineno}: unknown directive {tok[0]!r}")
    if materials:
        table = [materials.get(i, Material((0.5, 0.5, 0.5)))
                 for i in range(max(materials) + 1)]
    else:
        table = []
    return table, environment


def load_scene(mesh_path, materials_path):
    verts, faces, fmats = load_mesh(mesh_path)
    materials, environment = load_material_table(materials_path)
    if len(faces) and not materials:
        materials = [Material((0.5, 0.5, 0.5))]
    return Scene(verts, faces, fmats, materials, environment)


def save_scene(scene, mesh_path, materials_path):
    lines = [f"v {x:.17g} {y:.17g} {z:.17g}" for x, y, z in scene.vertices]
    current = None
    for (a, b, c), m in zip(scene.faces, scene.face_materials):
        if m != current:
            lines.append(f"usemtl {m}")
            current = m
        lines.append(f"f {a + 1} {b + 1} {c + 1}")
    Path(mesh_path).write_text("\n".join(lines) + "\n")
    mlines = []
    for i, mat in enumerate(scene.materials):
        a, e = mat.albedo, mat.emission
        mlines.append(f"material {i} albedo {a[0]:g} {a[1]:g} {a[2]:g} "
                      f"emission {e[0]:g} {e[1]:g} {e[2]:g}")
    ev = scene.environment
    mlines.append(f"environment {ev[0]:g} {ev[1]:g} {ev[2]:g}")
    Path(materials_path).write_text("\n".join(mlines) + "\n")


# ---------------------------------------------------------------------------
# flattening for the kernels
# ---------------------------------------------------------------------------

_LEAF_SIZE = 4


@dataclass
class ScenePack:
    """Flattened scene arrays consumed by the tracing kernels."""

    v0: np.ndarray
    e1: np.ndarray
    e2: np.ndarray
    nrm: np.ndarray
    mat: np.ndarray
    alb: np.ndarray
    emit: np.ndarray
    env: np.ndarray
    lt_ids: np.ndarray
    lt_cdf: np.ndarray
    lt_area: float
    lt_clamp: float  # floor on squared shadow-ray length (mean light area)
    eps: float
    bvh_min: np.ndarray = field(default=None)
    bvh_max: np.ndarray = field(default=None)
    bvh_left: np.ndarray = field(default=None)
    bvh_right: np.ndarray = field(default=None)
    bvh_first: np.ndarray = field(default=None)
    bvh_count: np.ndarray = field(default=None)


def _build_bvh(lo, hi, centroids, order, bounds_min, bounds_max, nodes):
    node = len(nodes)
    nodes.append(None)
    sel = order[lo:hi]
    bmin = bounds_min[sel].min(axis=0)
    bmax = bounds_max[sel].max(axis=0)
    if hi - lo <= _LEAF_SIZE:
        nodes[node] = (bmin, bmax, lo, hi - lo, -1, -1)
        return node
    axis = int(np.argmax(bmax - bmin))
    mid = (lo + hi) // 2
    key = np.argsort(centroids[sel, axis], kind="stable")
    order[lo:hi] = sel[key]
    left = _build_bvh(lo, mid, centroids, order, bounds_min, bounds_max, nodes)
    right = _build_bvh(mid, hi, centroids, order, bounds_min, bounds_max, nodes)
    nodes[node] = (bmin, bmax, 0, 0, left, right)
    return node


def pack_scene(scene):
    """Flatten a Scene into kernel arrays, building the BVH."""
    v = scene.vertices
    f = scene.faces
    t = len(f)
    if t:
        v0 = v[f[:, 0]]
        e1 = v[f[:, 1]] - v0
        e2 = v[f[:, 2]] - v0
        cr = np.cross(e1, e2)
        area2 = np.linalg.norm(cr, axis=1)
        nrm = np.where(area2[:, None] > 0.0,
                       cr / np.maximum(area2, 1e-300)[:, None], 0.0)
        order = np.arange(t)
        tmin = np.minimum(np.minimum(v[f[:, 0]], v[f[:, 1]]), v[f[:, 2]])
        tmax = np.maximum(np.maximum(v[f[:, 0]], v[f[:, 1]]), v[f[:, 2]])
        centroids = (v[f[:, 0]] + v[f[:, 1]] + v[f[:, 2]]) / 3.0
        nodes = []
        _build_bvh(0, t, centroids, order, tmin, tmax, nodes)
        v0, e1, e2, nrm = v0[order], e1[order], e2[order], nrm[order]
        mat = scene.face_materials[order]
        areas = area2[order] / 2.0
        scale = float(np.max(np.abs(v))) or 1.0
        bvh_min = np.array([nd[0] for nd in nodes])
        bvh_max = np.array([nd[1] for nd in nodes])
        bvh_first = np.array([nd[2] for nd in nodes], dtype=np.int32)
        bvh_count = np.array([nd[3] for nd in nodes], dtype=np.int32)
        bvh_left = np.array([nd[4] for nd in nodes], dtype=np.int32)
        bvh_right = np.array([nd[5] for nd in nodes], dtype=np.int32)
    else:
        v0 = e1 = e2 = nrm = np.zeros((0, 3))
        mat = np.zeros(0, dtype=np.int32)
        areas = np.zeros(0)
        scale = 1.0
        bvh_min = bvh_max = np.zeros((0, 3))
        bvh_first = bvh_count = bvh_left = bvh_right = np.zeros(0, np.int32)

    if scene.materials:
        alb = np.array([m.albedo for m in scene.materials], dtype=np.float64)
        emit = np.array([m.emission for m in scene.materials], dtype=np.float64)
    else:
        alb = emit = np.zeros((0, 3))

    if t:
        emissive = np.flatnonzero(np.any(emit[mat] > 0.0, axis=1) & (areas > 0))
    else:
        emissive = np.zeros(0, dtype=np.int64)
    if emissive.size:
        la = areas[emissive]
        lt_area = float(la.sum())
        lt_cdf = np.cumsum(la) / lt_area
        lt_cdf[-1] = 1.0
        # bounding the inverse-square term by the mean light-triangle area
        # kills near-field fireflies with negligible energy loss
        lt_clamp = lt_area / emissive.size
    else:
        lt_area = 0.0
        lt_cdf = np.zeros(0)
        lt_clamp = 0.0

    return ScenePack(
        v0=np.ascontiguousarray(v0), e1=np.ascontiguousarray(e1),
        e2=np.ascontiguousarray(e2), nrm=np.ascontiguousarray(nrm),
        mat=np.ascontiguousarray(mat, dtype=np.int32),
        alb=np.ascontiguousarray(alb), emit=np.ascontiguousarray(emit),
        env=np.ascontiguousarray(scene.environment, dtype=np.float64),
        lt_ids=np.ascontiguousarray(emissive, dtype=np.int32),
        lt_cdf=np.ascontiguousarray(lt_cdf),
        lt_area=lt_area, lt_clamp=lt_clamp, eps=1e-7 * scale,
        bvh_min=np.ascontiguousarray(bvh_min, dtype=np.float64),
        bvh_max=np.ascontiguousarray(bvh_max, dtype=np.float64),
        bvh_left=bvh_left, bvh_right=bvh_right,
        bvh_first=bvh_first, bvh_count=bvh_count)
