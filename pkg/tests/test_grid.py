import numpy as np
import pytest

from dsii.lib.Errors import GridError
from dsii.lib.grid.ArcQuadrature import arc_quadrature, ccw_angle
from dsii.lib.grid.Cauchy import cauchy_apply, cell_integral
from dsii.lib.grid.ComplexGrid import ComplexField, gaussian, gaussian_sum, make_grid
from dsii.lib.grid.DiskSpec import DiskSpec
from dsii.lib.grid.Spectral import dbar, del_


@pytest.mark.parametrize("extent,n", [(0.0, 16), (-1.0, 16), (4.0, 12), (4.0, 1)])
def test_make_grid_rejects_bad_parameters(extent, n):
    with pytest.raises(GridError):
        make_grid(extent, n)


def test_nodes_are_symmetric_cell_centers():
    grid = make_grid(4.0, 8)
    assert grid.spacing == pytest.approx(1.0)
    assert grid.axis[0] == pytest.approx(-3.5)
    np.testing.assert_allclose(grid.nodes.sum(), 0.0, atol=1e-12)
    assert not np.any(np.abs(grid.nodes) < grid.spacing / 4)


def test_field_shape_must_match_grid(small_grid):
    with pytest.raises(GridError):
        ComplexField(small_grid, np.zeros((4, 4)))


def test_gaussian_sum_is_linear(small_grid):
    single = gaussian(small_grid, 0.5, 1.0, 0.5j)
    summed = gaussian_sum(small_grid, [(0.25, 1.0, 0.5j), (0.25, 1.0, 0.5j)])
    np.testing.assert_allclose(summed.values, single.values, atol=1e-15)


def test_spectral_dbar_of_gaussian():
    grid = make_grid(6.0, 64)
    z = grid.nodes
    f = ComplexField(grid, np.exp(-np.abs(z) ** 2))
    np.testing.assert_allclose(dbar(f).values, -z * f.values, atol=1e-10)
    np.testing.assert_allclose(del_(f).values, -np.conj(z) * f.values, atol=1e-10)


def test_cauchy_transform_of_gaussian():
    grid = make_grid(6.0, 64)
    z = grid.nodes
    f = ComplexField(grid, np.exp(-np.abs(z) ** 2))
    expected = (1.0 - np.exp(-np.abs(z) ** 2)) / z
    result = cauchy_apply(f).values
    assert np.max(np.abs(result - expected)) <= 1e-2 * np.max(np.abs(expected))


def test_cauchy_inverts_dbar():
    grid = make_grid(6.0, 64)
    z = grid.nodes
    g = ComplexField(grid, z * np.exp(-np.abs(z) ** 2))
    recovered = cauchy_apply(dbar(g)).values
    assert np.max(np.abs(recovered - g.values)) <= 1e-2 * np.max(np.abs(g.values))


def test_far_cell_integral_matches_midpoint():
    h = 0.1
    center = np.array([3.0 + 2.0j])
    np.testing.assert_allclose(cell_integral(center, h), h * h / center, rtol=1e-4)


def test_cell_at_origin_integrates_to_zero():
    assert cell_integral(np.array([0j]), 0.5)[0] == 0


def test_disk_validation():
    with pytest.raises(GridError):
        DiskSpec(-1.0)
    with pytest.raises(GridError):
        DiskSpec(1.0, 0)
    with pytest.raises(GridError):
        DiskSpec(1.0, 8, "nearest")


def test_k0_on_ray_and_fixed():
    disk = DiskSpec(2.0, 16)
    z = 1.0 + 1.0j
    k0 = disk.select_k0(z)
    assert abs(k0) == pytest.approx(2.0)
    assert k0 == pytest.approx(-2j * np.exp(1j * np.pi / 4))
    assert disk.select_k0(0j) == pytest.approx(-2j)
    fixed = disk.with_policy("fixed", 0.0)
    assert fixed.select_k0(z) == pytest.approx(2.0)


def test_ccw_angle():
    assert ccw_angle(1.0, 1j) == pytest.approx(np.pi / 2)
    assert ccw_angle(1j, 1.0) == pytest.approx(3 * np.pi / 2)
    assert ccw_angle(1j, 1j) == 0.0


def test_arc_quadrature_integrates_dconj_exactly():
    disk = DiskSpec(1.5, 32)
    k0, varsigma = disk.select_k0(0.3 + 0.1j), disk.nodes[5]
    nodes, weights = arc_quadrature(disk, k0, varsigma)
    assert np.sum(weights) == pytest.approx(np.conj(varsigma) - np.conj(k0), abs=1e-13)
    # int conj(s)^3 dconj(s) = (conj(s)^4) / 4
    expected = (np.conj(varsigma) ** 4 - np.conj(k0) ** 4) / 4
    assert np.sum(np.conj(nodes) ** 3 * weights) == pytest.approx(expected, abs=1e-12)


def test_empty_arc():
    disk = DiskSpec(1.0, 8, "fixed", 0.0)
    nodes, weights = arc_quadrature(disk, disk.nodes[0], disk.nodes[0])
    assert nodes.size == 0 and weights.size == 0
