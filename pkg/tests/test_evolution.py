import numpy as np
import pytest

from dsii.lib.Errors import OverflowRisk
from dsii.lib.evolution.Evolve import evolution_exponents, evolve_h
from dsii.lib.forward.ScatteringData import empty_data
from dsii.lib.grid.ComplexGrid import make_grid
from dsii.lib.grid.DiskSpec import DiskSpec
from tests.helpers import synthetic_data


@pytest.fixture
def data(small_kgrid):
    data = synthetic_data(small_kgrid, DiskSpec(1.0, 16), off_amplitude=0.1, block_amplitude=0.05)
    data.diag[0, 0] = data.diag[1, 1] = 0.02 * np.exp(-np.abs(small_kgrid.nodes) ** 2)
    return data


def test_zero_increment_is_a_copy(data):
    evolved = evolve_h(data, 0.0)
    np.testing.assert_array_equal(evolved.diag, data.diag)
    assert evolved.diag is not data.diag


def test_diagonal_samples_keep_their_modulus(data):
    evolved = evolve_h(data, 0.8)
    np.testing.assert_allclose(np.abs(evolved.diag), np.abs(data.diag), rtol=1e-12)
    # the diagonal entries of h(k, k) do not move at all
    np.testing.assert_allclose(evolved.diag[0, 0], data.diag[0, 0], rtol=1e-12)
    assert evolved.time == 0.8


def test_off_diagonal_phase(data, small_kgrid):
    t = 0.5
    evolved = evolve_h(data, t)
    k = small_kgrid.nodes
    expected = data.diag[0, 1] * np.exp(-t * (k ** 2 - np.conj(k) ** 2) / 2)
    np.testing.assert_allclose(evolved.diag[0, 1], expected, rtol=1e-12)


def test_composition(data):
    direct = evolve_h(data, 0.7)
    composed = evolve_h(evolve_h(data, 0.3), 0.7)
    np.testing.assert_allclose(composed.diag, direct.diag, rtol=1e-12, atol=1e-15)
    np.testing.assert_allclose(composed.boundary_block, direct.boundary_block, rtol=1e-12, atol=1e-15)


def test_block_factors(data):
    t = 0.4
    evolved = evolve_h(data, t)
    nodes = data.disk.nodes
    off, diag = evolution_exponents(nodes[:, np.newaxis], nodes[np.newaxis, :], t)
    np.testing.assert_allclose(evolved.boundary_block[0, 1], data.boundary_block[0, 1] * np.exp(off), rtol=1e-12)
    np.testing.assert_allclose(evolved.boundary_block[0, 0], data.boundary_block[0, 0] * np.exp(diag), rtol=1e-12)


def test_invalid_samples_are_left_alone(data):
    data.diag_mask[3, 3] = False
    evolved = evolve_h(data, 0.5)
    np.testing.assert_array_equal(evolved.diag[:, :, 3, 3], data.diag[:, :, 3, 3])
    assert not evolved.diag_mask[3, 3]


def test_overflow_risk():
    disk = DiskSpec(30.0, 8)
    data = empty_data(make_grid(100.0, 8), disk)
    with pytest.raises(OverflowRisk):
        evolve_h(data, 2.0)


@pytest.mark.parametrize("t", [-0.1, 1.5])
def test_time_outside_range(data, t):
    with pytest.raises(ValueError):
        evolve_h(data, t, t_max=1.0)
