import numpy as np
import pytest

from dsii.lib.Errors import GridError, Inconclusive
from dsii.lib.evolution.Evolve import evolve_h
from dsii.lib.forward.Scattering import forward_transform
from dsii.lib.forward.ScatteringData import empty_data
from dsii.lib.grid.ComplexGrid import ComplexField, gaussian, make_grid
from dsii.lib.grid.DiskSpec import DiskSpec
from dsii.lib.io.DataFormats import write_data, write_manifest
from dsii.lib.io.FieldFormats import write_field
from dsii.lib.splitstep.SplitStep import phi_from_q, simulate
from dsii.lib.validation.BlowupScan import BlowupMap, ScanBox, blowup_scan
from dsii.lib.validation.Compare import compare_fields
from dsii.lib.validation.DbarResidual import dbar_residual
from dsii.lib.validation.Duality import duality_check
from dsii.lib.validation.Residual import dsii_residual, ist_residual
from dsii.lib.validation.RunValidation import validate_run
from dsii.lib.validation.Symmetry import symmetry_check
from tests.helpers import synthetic_data


def test_residual_of_zero_solution():
    grid = make_grid(4.0, 16)
    zero = [ComplexField(grid)] * 3
    assert dsii_residual(zero, zero, 0.1) == 0.0


def test_residual_needs_three_slices():
    grid = make_grid(4.0, 16)
    with pytest.raises(ValueError):
        dsii_residual([ComplexField(grid)] * 2, [ComplexField(grid)] * 2, 0.1)


def test_linear_residual_of_exact_plane_wave():
    grid = make_grid(6.0, 32)
    period = 2 * grid.extent
    xi1, xi2 = 2 * np.pi / period, 2 * np.pi * 2 / period
    z = grid.nodes
    dt = 1e-4
    slices = [ComplexField(grid, np.exp(1j * (xi1 * z.real + xi2 * z.imag - 2 * xi1 * xi2 * t)))
              for t in (-dt, 0.0, dt)]
    phi = [ComplexField(grid)] * 3
    assert dsii_residual(slices, phi, dt, nonlinear=False) <= 1e-8


def test_split_step_residual_is_second_order():
    q0 = gaussian(make_grid(6.0, 32), 0.5)

    def residual(dt):
        trajectory = simulate(q0, 0.1 + 2 * dt, dt)
        return dsii_residual(trajectory.q[-3:], trajectory.phi[-3:], dt)

    coarse, fine = residual(2e-3), residual(1e-3)
    assert 3.0 <= coarse / fine <= 5.5


def test_linear_residual_ignores_phi():
    q0 = gaussian(make_grid(6.0, 32), 0.5)
    series = [q0, q0, q0]
    phi = [phi_from_q(q0)] * 3
    # a constant series only leaves the evolution term
    assert dsii_residual(series, phi, 0.1) > 0
    assert dsii_residual(series, phi, 0.1, nonlinear=False) == pytest.approx(
        dsii_residual(series, [ComplexField(q0.grid)] * 3, 0.1, nonlinear=False))


def test_symmetry_of_synthetic_data(small_kgrid):
    data = synthetic_data(small_kgrid, DiskSpec(1.0, 8), off_amplitude=0.1, block_amplitude=0.1)
    assert symmetry_check(data) == 0.0
    data.diag[1, 0] = -2 * data.diag[0, 1]
    assert symmetry_check(data) == pytest.approx(np.max(np.abs(data.diag[0, 1][data.diag_mask])))


def test_symmetry_of_matrix_array():
    v = np.zeros((2, 2, 5), dtype=complex)
    v[0, 0] = v[1, 1] = 1.0
    assert symmetry_check(v) == 0.0
    v[1, 1, 2] = 1.5
    assert symmetry_check(v) == pytest.approx(0.5)


def test_duality_of_zero_data(small_grid, small_kgrid):
    assert duality_check(ComplexField(small_grid), empty_data(small_kgrid, DiskSpec())) == 0.0


def test_duality_rejects_nan(small_grid, small_kgrid):
    values = small_grid.zeros()
    values[0, 0] = np.nan
    with pytest.raises(ValueError):
        duality_check(ComplexField(small_grid, values), empty_data(small_kgrid, DiskSpec()))


def test_duality_of_forward_data(weak_gaussian):
    kgrid = make_grid(6.0, 8)
    data = forward_transform(weak_gaussian, kgrid, DiskSpec(), 1e-12, path="iterated")
    assert duality_check(weak_gaussian, data, 1e-12, path="iterated") <= 1e-10


@pytest.mark.slow
def test_duality_of_evolved_data():
    q0 = gaussian(make_grid(8.0, 128), 0.05)
    data = evolve_h(forward_transform(q0, make_grid(2.0, 8), DiskSpec(), 1e-12, path="iterated"), 0.5)

    def deviation(n, dt):
        q_t = simulate(gaussian(make_grid(8.0, n), 0.05), 0.5, dt, save_every=10 ** 6).q[-1]
        return duality_check(q_t, data, 1e-12, path="iterated")

    coarse, fine = deviation(64, 2e-3), deviation(128, 1e-3)
    assert fine <= 1e-2
    assert fine <= coarse


def test_blowup_map_components():
    box = ScanBox(2.0, 8)
    sigma = np.ones((1, 8, 8))
    sigma[0, 2:4, 2:4] = 1e-9
    sigma[0, 5, 5] = 1e-9
    blowup_map = BlowupMap(box, sigma, 1e-6)
    assert blowup_map.components[0].count == 2
    assert not blowup_map.touches_boundary
    assert len(blowup_map.flagged_points()) == 5
    assert blowup_map.max_jump() == pytest.approx(1.0)
    assert blowup_map.serialize()["components"] == [2]


def test_blowup_map_touching_boundary():
    box = ScanBox(2.0, 8, 0.0, 1.0, 2)
    sigma = np.ones((2, 8, 8))
    sigma[1, 0, 3] = 0.0
    blowup_map = BlowupMap(box, sigma, 1e-6)
    assert blowup_map.touches_boundary
    assert blowup_map.flagged_points() == [(complex(box.z_grid.nodes[0, 3]), 1.0)]


def test_blowup_scan_of_zero_data_is_empty(small_kgrid):
    data = empty_data(small_kgrid, DiskSpec())
    blowup_map = blowup_scan(None, ScanBox(1.0, 4, 0.0, 0.5, 2), DiskSpec(), data=data)
    assert blowup_map.is_empty
    np.testing.assert_array_equal(blowup_map.sigma_min, 1.0)


@pytest.mark.slow
def test_blowup_scan_of_small_data_is_empty():
    data = forward_transform(gaussian(make_grid(5.0, 32), 0.02), make_grid(6.0, 16), DiskSpec(), 1e-12,
                             path="iterated")
    blowup_map = blowup_scan(None, ScanBox(2.0, 4, 0.0, 0.5, 2), DiskSpec(), data=data)
    assert blowup_map.is_empty
    assert np.all(blowup_map.sigma_min > 0.5)


def test_blowup_scan_inconclusive_when_boundary_flagged(small_kgrid):
    data = empty_data(small_kgrid, DiskSpec())
    with pytest.raises(Inconclusive) as error:
        blowup_scan(None, ScanBox(1.0, 4), DiskSpec(), tau=10.0, data=data)
    assert error.value.blowup_map is not None
    assert error.value.blowup_map.touches_boundary


def test_compare_fields():
    grid = make_grid(2.0, 8)
    reference = gaussian(grid, 1.0)
    metrics = compare_fields(reference.with_values(1.01 * reference.values), reference)
    assert metrics["rel_l2"] == pytest.approx(0.01)
    assert metrics["nodes"] == grid.size
    partial = reference.values.copy()
    partial[0, 0] = np.nan
    assert compare_fields(reference.with_values(partial), reference)["nodes"] == grid.size - 1
    with pytest.raises(GridError):
        compare_fields(gaussian(make_grid(3.0, 8)), reference)


@pytest.mark.slow
def test_dbar_equation_of_reconstructed_v():
    data = synthetic_data(make_grid(6.0, 32), off_amplitude=0.05)
    assert dbar_residual(data, 0.3 + 0.2j, 0.0, tol=1e-12) <= 5e-2


@pytest.mark.slow
def test_dbar_residual_improves_as_the_stencil_shrinks():
    # stencil spacings 0.2 and 0.1
    coarse = dbar_residual(synthetic_data(make_grid(6.4, 64), off_amplitude=0.05), 0.3 + 0.2j, 0.0, tol=1e-12)
    fine = dbar_residual(synthetic_data(make_grid(6.4, 128), off_amplitude=0.05), 0.3 + 0.2j, 0.0, tol=1e-12)
    assert fine <= 5e-2
    assert fine < coarse


@pytest.mark.parametrize("t", [0.0, 5e-4, 0.2])
def test_ist_residual_of_zero_data(small_kgrid, t):
    assert ist_residual(empty_data(small_kgrid, DiskSpec()), make_grid(2.0, 8), t) == 0.0


def test_validate_records_resolution(tmp_path):
    write_data(tmp_path / "data", synthetic_data(make_grid(6.0, 16), off_amplitude=0.1))
    write_manifest(tmp_path, command="forward", data="data")
    verdict = validate_run(tmp_path)["symmetry"]
    assert verdict["passed"]
    assert verdict["kgrid"] == {"n": 16, "extent": 6.0}
    assert verdict["grid"] is None


def test_validate_ist_residual_of_invert_run(tmp_path, small_kgrid):
    write_data(tmp_path / "data", empty_data(small_kgrid, DiskSpec()))
    write_field(tmp_path / "q.cfld", ComplexField(make_grid(2.0, 8)))
    write_manifest(tmp_path, command="invert", data="data", q="q.cfld", t=0.0)
    verdicts = validate_run(tmp_path, duality=False, ist_residual=True)
    assert set(verdicts) == {"symmetry", "ist_residual"}
    assert verdicts["ist_residual"]["value"] == 0.0
    assert verdicts["ist_residual"]["grid"] == {"n": 8, "extent": 2.0}
    assert verdicts["ist_residual"]["kgrid"] == {"n": small_kgrid.n_per_side, "extent": small_kgrid.extent}
