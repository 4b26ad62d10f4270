import numpy as np
import pytest

from dsii.lib.Errors import GridError
from dsii.lib.bspace.BSpace import BSpaceLayout, beta, exterior_weights, pack, rank_one_tail, unpack
from dsii.lib.grid.ComplexGrid import make_grid
from dsii.lib.grid.DiskSpec import DiskSpec


def test_beta_profile():
    radius = 1.0
    assert beta(0.5, radius) == 0.0
    assert beta(1.5, radius) == 0.0
    assert beta(2.5, radius) == 1.0
    assert beta(4.0j, radius) == 1.0
    middle = beta(np.array([1.8, 2.0, 2.2]), radius)
    assert np.all((middle > 0) & (middle < 1))
    assert np.all(np.diff(middle) > 0)
    assert beta(2.0, radius) == pytest.approx(0.5)


def test_layout_dimension(small_kgrid):
    disk = DiskSpec(1.0, 16)
    layout = BSpaceLayout(small_kgrid, disk)
    assert layout.modes == 7
    assert layout.n_exterior == int(np.sum(np.abs(small_kgrid.nodes) > 1.0))
    assert layout.dimension == 2 * 2 * (layout.n_exterior + 8 + 1)
    full = BSpaceLayout(small_kgrid, disk, full_matrix=True)
    assert full.dimension == 2 * layout.dimension


def test_empty_disk_has_no_interior_modes(small_kgrid):
    layout = BSpaceLayout(small_kgrid, DiskSpec())
    assert layout.n_coeffs == 0
    assert layout.n_exterior == small_kgrid.size
    assert layout.beta_radius == pytest.approx(small_kgrid.extent / 8)


def test_layout_rejects_small_kgrid():
    with pytest.raises(GridError):
        BSpaceLayout(make_grid(3.0, 16), DiskSpec(1.0, 16))


def test_pack_unpack(small_kgrid, rng):
    layout = BSpaceLayout(small_kgrid, DiskSpec(1.0, 16))
    element = layout.random(rng)
    vector = pack(element)
    assert vector.dtype == np.float64 and vector.shape == (layout.dimension,)
    restored = unpack(vector, layout)
    np.testing.assert_array_equal(restored.exterior, element.exterior)
    np.testing.assert_array_equal(restored.interior_coeffs, element.interior_coeffs)
    np.testing.assert_array_equal(restored.tail_coeff, element.tail_coeff)
    with pytest.raises(GridError):
        unpack(vector[:-2], layout)


def test_split_tail_recovers_coefficient(small_kgrid, rng):
    layout = BSpaceLayout(small_kgrid, DiskSpec(1.0, 16))
    coefficient = np.array([0.3 - 0.1j, -2.0j])
    remainder = np.zeros((2, layout.n_exterior), dtype=complex)
    remainder[:, ~layout.annulus] = rng.standard_normal((2, int(np.sum(~layout.annulus))))
    values = remainder + coefficient[:, np.newaxis] * layout.tail_function[np.newaxis, :]
    exterior, tail = layout.split_tail(values)
    np.testing.assert_allclose(tail, coefficient, atol=1e-12)
    np.testing.assert_allclose(exterior, remainder, atol=1e-12)


def test_norm_and_arithmetic(small_kgrid, rng):
    layout = BSpaceLayout(small_kgrid, DiskSpec(1.0, 16))
    element = layout.random(rng)
    assert layout.zero().norm() == 0.0
    assert element.scaled(2.0).norm() == pytest.approx(2.0 * element.norm())
    assert (element - element).norm() == 0.0


def test_interior_values_evaluate_polynomial(small_kgrid):
    layout = BSpaceLayout(small_kgrid, DiskSpec(1.0, 16))
    element = layout.zero()
    coeffs = element.interior_coeffs.copy()
    coeffs[0, 1] = 2.0
    coeffs[1, 0] = 1.0j
    element = type(element)(layout, element.exterior, coeffs, element.tail_coeff)
    k = np.array([0.5, 0.5j])
    np.testing.assert_allclose(element.interior_values(k), [2.0 * k, [1.0j, 1.0j]])


def test_rank_one_tail(small_kgrid):
    layout = BSpaceLayout(small_kgrid, DiskSpec())
    g = np.ones(layout.n_exterior)
    values = np.ones((1, layout.n_exterior))
    np.testing.assert_allclose(rank_one_tail(layout, g, values), [-layout.n_exterior * small_kgrid.cell_area])


@pytest.mark.parametrize("radius", [1.0, 1.3])
def test_exterior_weights_measure_the_complement_of_the_disk(radius):
    kgrid = make_grid(6.0, 32)
    weights = exterior_weights(kgrid, radius)
    outside = np.sum(weights) * kgrid.cell_area
    assert (2 * kgrid.extent) ** 2 - outside == pytest.approx(np.pi * radius ** 2, rel=1e-3)


def test_exterior_weights_integrate_gaussian():
    kgrid = make_grid(6.0, 64)
    radius = 1.0
    k = kgrid.nodes[np.abs(kgrid.nodes) > radius]
    integral = np.sum(exterior_weights(kgrid, radius) * np.exp(-np.abs(k) ** 2)) * kgrid.cell_area
    assert integral == pytest.approx(np.pi * np.exp(-radius ** 2), rel=1e-3)


def test_exterior_weights_of_empty_disk(small_kgrid):
    np.testing.assert_array_equal(exterior_weights(small_kgrid, 0.0), 1.0)
    assert exterior_weights(small_kgrid, 0.0).size == small_kgrid.size
