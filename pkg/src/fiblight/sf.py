"""Spherical Fibonacci point sets and constant-time neighbor queries.

A point set is implicit: it is fully described by its cardinality ``n``
and point ``i`` is recomputed on demand. Queries run on a constant-size
candidate set derived from the inverse Fibonacci mapping, so their cost
does not depend on ``n``.
"""

import numpy as np

from .backend import kernels
from .errors import ContractError

GOLDEN_RATIO = (1.0 + np.sqrt(5.0)) / 2.0

_UNIT_TOL = 1e-6


def _check_unit(p):
    p = np.asarray(p, dtype=np.float64)
    if p.shape != (3,):
        raise ContractError(f"expected a 3-vector, got shape {p.shape}")
    if abs(np.linalg.norm(p) - 1.0) > _UNIT_TOL:
        raise ContractError(f"direction is not unit length: |p| = {np.linalg.norm(p)}")
    return p


def _check_n(n):
    if int(n) != n or n < 1:
        raise ContractError(f"cardinality must be a positive integer, got {n}")
    return int(n)


def sf_point(i, n):
    """The i-th point of the n-point spherical Fibonacci set, as a unit vector."""
    n = _check_n(n)
    if int(i) != i or not 0 <= i < n:
        raise ContractError(f"index {i} out of range for n={n}")
    return kernels.sf_points(np.array([i], dtype=np.int64), n)[0]


def sf_points(idx, n):
    """Batch version of :func:`sf_point`."""
    n = _check_n(n)
    idx = np.asarray(idx, dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= n):
        raise ContractError("index out of range")
    return kernels.sf_points(idx, n)


def inverse_nearest(p, n):
    """Index of the lattice point nearest to ``p`` (ties: smallest index)."""
    p = _check_unit(p)
    n = _check_n(n)
    return int(kernels.inverse_nearest_batch(p[None, :], n)[0])


def inverse_nearest_batch(p, n):
    n = _check_n(n)
    p = np.ascontiguousarray(p, dtype=np.float64)
    norms = np.linalg.norm(p, axis=1)
    if np.any(np.abs(norms - 1.0) > _UNIT_TOL):
        raise ContractError("non-unit direction in batch")
    return kernels.inverse_nearest_batch(p, n)


def neighbors_k(p, n, k):
    """The k nearest lattice points, as (index, chordal distance) ascending."""
    p = _check_unit(p)
    n = _check_n(n)
    if not 1 <= k <= 9:
        raise ContractError(f"neighbor count must be in [1, 9], got {k}")
    if k > n:
        raise ContractError(f"cannot return {k} neighbors of an {n}-point set")
    idx, dist = kernels.neighbors_batch(p[None, :], n, k)
    return [(int(i), float(d)) for i, d in zip(idx[0], dist[0])]


def neighbors_batch(p, n, k):
    n = _check_n(n)
    if not 1 <= k <= 9 or k > n:
        raise ContractError(f"neighbor count {k} out of range")
    p = np.ascontiguousarray(p, dtype=np.float64)
    return kernels.neighbors_batch(p, n, k)


def kernel_radius(n, radius):
    """Support radius of the interpolation kernel for an n-point set.

    Scales like the lattice spacing: radius * 5^(1/4) * sqrt(4*pi / (sqrt(5)*n)).
    """
    n = _check_n(n)
    if radius <= 0:
        raise ContractError(f"radius must be positive, got {radius}")
    return radius * 5.0 ** 0.25 * np.sqrt(4.0 * np.pi / (np.sqrt(5.0) * n))


def kernel_weight(d, h):
    """Tent kernel: 1 at d=0, linear falloff, exactly 0 for d >= h."""
    if d < 0:
        raise ContractError(f"distance must be non-negative, got {d}")
    if h <= 0:
        raise ContractError(f"kernel radius must be positive, got {h}")
    return float(max(0.0, 1.0 - d / h))
