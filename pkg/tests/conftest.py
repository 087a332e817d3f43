"""Shared fixtures and brute-force oracles for the test suite."""

import numpy as np
import pytest

from fiblight import BakeConfig, bake
from fiblight.scenes import constant_scene, desk_scene


def random_unit_vectors(count, seed):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=(count, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def brute_nearest(points, n, chunk=128):
    """Linear-scan nearest lattice index; ties broken by smallest index.

    Distances use the same squared-difference formula as the library so
    exact equality (including tie ordering) is well defined.
    """
    from fiblight import _pure

    out = np.empty(len(points), dtype=np.int64)
    idx = np.arange(n, dtype=np.int64)
    lattice = _pure.sf_points(idx, n)
    for lo in range(0, len(points), chunk):
        p = points[lo:lo + chunk]
        d2 = np.sum((lattice[None, :, :] - p[:, None, :]) ** 2, axis=-1)
        out[lo:lo + chunk] = np.argmin(d2, axis=1)
    return out


def brute_neighbors(points, n, k, chunk=128):
    """Linear-scan k nearest lattice points, sorted by (distance, index)."""
    from fiblight import _pure

    idx_out = np.empty((len(points), k), dtype=np.int64)
    d_out = np.empty((len(points), k))
    idx = np.arange(n, dtype=np.int64)
    lattice = _pure.sf_points(idx, n)
    for lo in range(0, len(points), chunk):
        p = points[lo:lo + chunk]
        d2 = np.sum((lattice[None, :, :] - p[:, None, :]) ** 2, axis=-1)
        part = np.argpartition(d2, min(k + 8, n - 1), axis=1)[:, :k + 8]
        pd = np.take_along_axis(d2, part, axis=1)
        for r in range(len(p)):
            order = np.lexsort((part[r], pd[r]))[:k]
            idx_out[lo + r] = part[r][order]
            d_out[lo + r] = np.sqrt(pd[r][order])
    return idx_out, d_out


@pytest.fixture(scope="session")
def constant_field():
    """Small full-sphere bake of the constant environment scene."""
    cfg = BakeConfig(m=64, n=128, radius=1.0, spp=4, seed=3)
    return bake(constant_scene(), cfg), cfg


@pytest.fixture(scope="session")
def desk_field():
    """The pinned desk-scale bake shared by the end-to-end criteria."""
    cfg = BakeConfig(m=1024, n=2048, radius=1.0, spp=64, seed=11)
    return bake(desk_scene(), cfg), cfg


@pytest.fixture(scope="session")
def desk_field_path(desk_field, tmp_path_factory):
    from fiblight import save

    lf, _ = desk_field
    path = tmp_path_factory.mktemp("field") / "desk.lplf"
    save(lf, path)
    return path
