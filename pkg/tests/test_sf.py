"""Lattice generation, inverse queries and kernel helpers."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import fiblight.sf as sf
from fiblight import ContractError, inverse_nearest, kernel_radius, \
    kernel_weight, neighbors_k, sf_point
from fiblight.sf import inverse_nearest_batch, neighbors_batch, sf_points

from conftest import brute_nearest, brute_neighbors, random_unit_vectors

# Frozen against a 50-digit evaluation of the generating formulas.
_POINT_ORACLE = {
    (0, 2): (0.86602540378443864676, 0.0, 0.5),
    (1, 2): (-0.63858018037585550316, -0.58499175484030529209, -0.5),
    (3, 10): (0.580413681153211285, -0.75704686693108927177, 0.3),
    (777, 4096): (0.18352975732186560503, 0.76254091742303455379,
                  0.620361328125),
}

_RADIUS_ORACLE = {
    5: 1.5853309190424044053,
    1024: 0.11077836568159475171,
    12288: 0.031978959623327765265,
    23576: 0.023087125863921755216,
}


def test_point_values_match_extended_precision_oracle():
    for (i, n), expect in _POINT_ORACLE.items():
        got = sf_point(i, n)
        # rounding in frac(i * (phi - 1)) grows with the index magnitude
        tol = 1e-13 * (1 + i)
        assert np.allclose(got, expect, atol=tol, rtol=0.0)


def test_points_are_unit_vectors():
    for n in (2, 7, 1000, 12288):
        p = sf_points(np.arange(n), n)
        assert np.allclose(np.linalg.norm(p, axis=1), 1.0, atol=1e-12)


def test_z_coordinate_descends_uniformly():
    n = 512
    z = sf_points(np.arange(n), n)[:, 2]
    assert np.allclose(z, 1.0 - (2.0 * np.arange(n) + 1.0) / n)
    assert np.all(np.diff(z) < 0.0)


def test_point_index_contract():
    with pytest.raises(ContractError):
        sf_point(-1, 10)
    with pytest.raises(ContractError):
        sf_point(10, 10)
    with pytest.raises(ContractError):
        sf_point(0.5, 10)
    with pytest.raises(ContractError):
        sf_point(0, 0)


def test_inverse_requires_unit_vector():
    with pytest.raises(ContractError):
        inverse_nearest((1.0, 1.0, 1.0), 100)
    with pytest.raises(ContractError):
        inverse_nearest((1.0, 0.0), 100)


def test_round_trip_small_sets():
    for n in (2, 3, 5, 10, 100):
        for i in range(n):
            assert inverse_nearest(sf_point(i, n), n) == i


def test_poles_map_into_polar_caps():
    n = 4096
    north = inverse_nearest((0.0, 0.0, 1.0), n)
    south = inverse_nearest((0.0, 0.0, -1.0), n)
    assert north == brute_nearest(np.array([[0.0, 0.0, 1.0]]), n)[0]
    assert south == brute_nearest(np.array([[0.0, 0.0, -1.0]]), n)[0]


def test_inverse_matches_brute_force_sampled():
    for n in (100, 4096):
        p = random_unit_vectors(500, seed=n)
        assert np.array_equal(inverse_nearest_batch(p, n),
                              brute_nearest(p, n))


def test_neighbors_match_brute_force_sampled():
    for n, k in ((100, 5), (4096, 5), (4096, 9), (50, 3)):
        p = random_unit_vectors(200, seed=n + k)
        idx, dist = neighbors_batch(p, n, k)
        bidx, bdist = brute_neighbors(p, n, k)
        assert np.array_equal(idx, bidx)
        assert np.allclose(dist, bdist, atol=1e-12)


def test_neighbors_sorted_and_consistent_with_nearest():
    n = 1024
    p = random_unit_vectors(100, seed=9)
    idx, dist = neighbors_batch(p, n, 5)
    assert np.all(np.diff(dist, axis=1) >= 0.0)
    assert np.array_equal(idx[:, 0], inverse_nearest_batch(p, n))


def test_neighbors_of_lattice_point_starts_with_itself():
    n = 500
    for i in (0, 1, 250, 499):
        got = neighbors_k(sf_point(i, n), n, 5)
        assert got[0][0] == i
        assert got[0][1] < 1e-7


def test_neighbors_k_contract():
    p = (0.0, 0.0, 1.0)
    with pytest.raises(ContractError):
        neighbors_k(p, 100, 0)
    with pytest.raises(ContractError):
        neighbors_k(p, 100, 10)
    with pytest.raises(ContractError):
        neighbors_k(p, 3, 5)


def test_kernel_radius_values_match_extended_precision_oracle():
    for n, expect in _RADIUS_ORACLE.items():
        assert kernel_radius(n, 1.0) == pytest.approx(expect, abs=1e-14)


def test_kernel_radius_scales_linearly_with_sphere_radius():
    assert kernel_radius(1024, 2.5) == pytest.approx(
        2.5 * kernel_radius(1024, 1.0), rel=1e-15)
    with pytest.raises(ContractError):
        kernel_radius(1024, 0.0)


def test_kernel_weight_tent_shape():
    assert kernel_weight(0.0, 0.5) == 1.0
    assert kernel_weight(0.25, 0.5) == pytest.approx(0.5)
    assert kernel_weight(0.5, 0.5) == 0.0
    assert kernel_weight(2.0, 0.5) == 0.0
    with pytest.raises(ContractError):
        kernel_weight(-0.1, 0.5)
    with pytest.raises(ContractError):
        kernel_weight(0.1, 0.0)


def test_lattice_spacing_is_uniform():
    # nearest-neighbor spacing varies by less than 2x across the whole set
    n = 12288
    p = sf_points(np.arange(n), n)
    _, dist = neighbors_batch(p, n, 2)
    nn = dist[:, 1]
    assert nn.max() / nn.min() < 2.0


@given(st.integers(min_value=1, max_value=100000),
       st.integers(min_value=0, max_value=99999))
@settings(max_examples=200, deadline=None)
def test_round_trip_property(n, i):
    if i >= n:
        i = i % n
    assert inverse_nearest(sf_point(i, n), n) == i


@given(st.floats(min_value=0.0, max_value=10.0, allow_nan=False),
       st.floats(min_value=1e-6, max_value=10.0, allow_nan=False))
@settings(max_examples=200, deadline=None)
def test_kernel_weight_bounds_property(d, h):
    w = kernel_weight(d, h)
    assert 0.0 <= w <= 1.0
    if d >= h:
        assert w == 0.0


@given(st.integers(min_value=2, max_value=5000), st.data())
@settings(max_examples=100, deadline=None)
def test_nearest_beats_random_lattice_point_property(n, data):
    i = data.draw(st.integers(min_value=0, max_value=n - 1))
    rng = np.random.default_rng(i + n)
    p = rng.normal(size=3)
    p /= np.linalg.norm(p)
    best = inverse_nearest(p, n)
    d_best = np.linalg.norm(sf_point(best, n) - p)
    d_other = np.linalg.norm(sf_point(i, n) - p)
    assert d_best <= d_other + 1e-12


def test_backends_agree():
    from fiblight.backend import get_backend

    pure = get_backend("pure")
    try:
        compiled = get_backend("compiled")
    except ImportError:
        pytest.skip("compiled backend unavailable")
    n = 4096
    p = random_unit_vectors(300, seed=17)
    # scalar libm and vectorized trig may differ by one ulp
    assert np.allclose(pure.sf_points(np.arange(n), n),
                       compiled.sf_points(np.arange(n), n), atol=5e-16)
    assert np.array_equal(pure.inverse_nearest_batch(p, n),
                          compiled.inverse_nearest_batch(p, n))
    pi, pd = pure.neighbors_batch(p, n, 5)
    ci, cd = compiled.neighbors_batch(p, n, 5)
    assert np.array_equal(pi, ci)
    assert np.allclose(pd, cd, atol=1e-14)
