import numpy as np
import pytest

from dsii.lib.Errors import ConfigError, MissingBoundaryBlock
from dsii.lib.bspace.BSpace import BSpaceLayout
from dsii.lib.forward.Scattering import forward_transform
from dsii.lib.forward.ScatteringData import empty_data
from dsii.lib.grid.ComplexGrid import gaussian, make_grid
from dsii.lib.grid.DiskSpec import DiskSpec
from dsii.lib.inverse.LogForm import graded_panels, log_form_apply, log_form_density
from dsii.lib.inverse.Reconstruct import amplitude_sweep, reconstruct, reconstruct_points, sweep_summary
from dsii.lib.inverse.SolveW import SolveReport, neumann_w, solve_w
from dsii.lib.inverse.TOperator import build_T, expand_channels, interpolate_first_argument
from dsii.lib.inverse.WaveFromV import v_field
from dsii.lib.splitstep.SplitStep import simulate
from dsii.lib.validation.BlowupScan import cell_sigma
from dsii.lib.validation.Compare import compare_fields
from dsii.lib.validation.Symmetry import symmetry_check
from tests.helpers import synthetic_data


def relative(a, b):
    return np.max(np.abs(a - b)) / np.max(np.abs(b))


def test_zero_data_gives_zero_operator(small_kgrid):
    data = empty_data(small_kgrid, DiskSpec())
    operator = build_T(data, 0.5 + 0.5j, 0.0, DiskSpec())
    assert operator.is_zero
    w, report = solve_w(operator)
    assert w.norm() == 0.0
    assert not report.condition_flag
    assert report.sigma_min_estimate == 1.0


def test_zero_data_reconstructs_zero(small_kgrid):
    z_grid = make_grid(2.0, 4)
    q, phi, reports, mask = reconstruct(empty_data(small_kgrid, DiskSpec()), z_grid, 0.0)
    np.testing.assert_array_equal(q.values, 0.0)
    np.testing.assert_array_equal(phi.values, 0.0)
    assert not np.any(mask)
    assert len(reports) == z_grid.size


def test_operator_is_real_linear_not_complex_linear(small_kgrid, rng):
    operator = build_T(synthetic_data(small_kgrid, off_amplitude=0.05), 0.4 - 0.3j, 0.0, DiskSpec())
    element = operator.layout.random(rng)
    image = operator.apply(element)
    doubled = operator.apply(element.scaled(2.0))
    rotated = operator.apply(element.scaled(1j))
    assert (doubled - image.scaled(2.0)).norm() <= 1e-12 * image.norm()
    # conj(phi) makes the exterior part anti-linear
    assert (rotated - image.scaled(-1j)).norm() <= 1e-12 * image.norm()
    assert (rotated - image.scaled(1j)).norm() > 1e-3 * image.norm()


def test_neumann_series_matches_direct_solve(small_kgrid):
    operator = build_T(synthetic_data(small_kgrid, off_amplitude=0.005), 0.2 + 0.1j, 0.0, DiskSpec())
    w, report = solve_w(operator, 1e-12, mode="dense")
    series = neumann_w(operator, terms=12)
    assert (series - w).norm() <= 1e-8 * w.norm()
    assert report.residual <= 1e-10


def test_dense_and_krylov_agree(small_kgrid):
    operator = build_T(synthetic_data(small_kgrid, off_amplitude=0.05), -0.3 + 0.6j, 0.0, DiskSpec())
    dense, dense_report = solve_w(operator, 1e-12, mode="dense")
    krylov, _ = solve_w(operator, 1e-12, mode="krylov")
    assert (dense - krylov).norm() <= 1e-8 * dense.norm()
    assert 0 < dense_report.sigma_min_estimate <= dense_report.norm_estimate


def test_non_empty_disk_needs_boundary_block(small_kgrid):
    data = synthetic_data(small_kgrid)
    with pytest.raises(MissingBoundaryBlock):
        build_T(data, 0j, 0.0, DiskSpec(1.0, 16))


def test_trigonometric_interpolation_is_exact_for_band_limited_samples():
    nb = 16
    theta = 2 * np.pi * np.arange(nb) / nb
    samples = np.exp(2j * theta) + 0.5 * np.exp(-3j * theta)
    block = np.broadcast_to(samples, (2, 2, nb))
    at = np.array([0.1, 1.3, 4.0])
    np.testing.assert_allclose(interpolate_first_argument(block, at)[0, 1],
                               np.exp(2j * at) + 0.5 * np.exp(-3j * at), atol=1e-13)


def test_graded_panels_integrate_log_singularity():
    nodes, weights = graded_panels(0.0, 1.0)
    # int_0^1 log(x) + log(1 - x) dx = -2
    assert np.sum(weights * (np.log(nodes) + np.log(1 - nodes))) == pytest.approx(-2.0, abs=1e-10)


@pytest.mark.parametrize("policy", ["ray", "fixed"])
@pytest.mark.parametrize("sign", [1.0, -1.0])
def test_arc_form_matches_log_form(small_kgrid, rng, policy, sign):
    disk = DiskSpec(1.0, 32, policy, 0.3)
    data = synthetic_data(small_kgrid, disk, off_amplitude=0.01, block_amplitude=0.2)
    operator = build_T(data, 0.7 + 0.4j, 0.0, disk)
    coeffs = expand_channels(operator.layout.random(rng).interior_coeffs, operator.layout)
    arc = operator._boundary_density(coeffs, sign)
    log = log_form_density(operator, coeffs, sign=-sign)
    assert relative(arc, log) <= 1e-6


def test_log_form_apply_matches_apply(small_kgrid, rng):
    disk = DiskSpec(1.0, 32)
    data = synthetic_data(small_kgrid, disk, off_amplitude=0.01, block_amplitude=0.2)
    operator = build_T(data, -0.5 + 0.2j, 0.0, disk)
    element = operator.layout.random(rng)
    difference = log_form_apply(operator, element) - operator.apply(element)
    assert difference.norm() <= 1e-6 * operator.apply(element).norm()


def test_boundary_density_has_small_negative_modes(small_kgrid, rng):
    disk = DiskSpec(1.0, 32)
    data = synthetic_data(small_kgrid, disk, off_amplitude=0.01, block_amplitude=0.2)
    operator = build_T(data, 0.3j, 0.0, disk)
    operator.apply(operator.layout.random(rng))
    assert 0.0 <= operator.negative_mode_energy <= 1.0


@pytest.fixture(scope="module")
def weak_data():
    q = gaussian(make_grid(4.0, 32), 1e-3)
    return q, forward_transform(q, make_grid(6.0, 16), DiskSpec(), 1e-12, amplitude=1e-3, path="iterated")


def test_first_order_reconstruction(weak_data):
    q, data = weak_data
    points = np.array([0.0, 0.5 + 0.3j, -0.6j])
    values, reports = reconstruct_points(data, points, 0.0, tol=1e-12)
    expected = 1e-3 * np.exp(-np.abs(points) ** 2)
    np.testing.assert_allclose(values, expected, rtol=1e-2)
    assert not any(report.condition_flag for report in reports)


def test_v_field_is_symmetric(weak_data):
    _, data = weak_data
    layout = BSpaceLayout(data.kgrid, data.disk)
    v_ext, report = v_field(data, 0.3 + 0.1j, 0.0, layout, 1e-12)
    assert symmetry_check(v_ext) <= 1e-12
    np.testing.assert_allclose(v_ext[0, 0], 1.0, atol=1e-2)


def test_amplitude_sweep_small_amplitude(weak_data):
    q, _ = weak_data
    q0 = q.with_values(q.values / 1e-3)
    reports = amplitude_sweep(q0, [1e-3], 0.2j, 0.0, DiskSpec(), make_grid(6.0, 16), 1e-12, path="iterated")
    assert len(reports) == 1
    assert reports[0].sigma_min_estimate == pytest.approx(1.0, abs=5e-2)
    assert sweep_summary([1e-3], reports) == []


def test_sweep_summary_intervals():
    flagged = SolveReport(1e-9, 0.0, 1, True)
    clean = SolveReport(0.5, 0.0, 1, False)
    intervals = sweep_summary([0.1, 0.2, 0.3, 0.4, 0.5], [clean, flagged, flagged, clean, flagged])
    assert [(interval.start, interval.stop) for interval in intervals] == [(0.2, 0.3), (0.5, 0.5)]


def test_solve_report_serialization():
    report = SolveReport(0.25, 1e-11, 3, False, 2.0, 0.01, 1 + 2j, 0.5)
    restored = SolveReport.deserialize(report.serialize())
    assert restored.z == 1 + 2j and restored.t == 0.5 and restored.iterations == 3


@pytest.mark.slow
def test_round_trip_empty_disk():
    grid = make_grid(6.0, 128)
    q = gaussian(grid, 0.1)
    data = forward_transform(q, make_grid(8.0, 32), DiskSpec(), 1e-10, amplitude=0.1, path="iterated", threads=4)
    q_rec, _, _, mask = reconstruct(data, grid, 0.0, tol=1e-10, threads=4)
    assert not np.any(mask)
    assert compare_fields(q_rec, q)["rel_l2"] <= 5e-3


@pytest.fixture(scope="module")
def weak_disk_runs():
    q = gaussian(make_grid(4.0, 32), 1e-3)
    kgrid = make_grid(6.0, 64)
    disk = DiskSpec(1.0, 16)
    empty = forward_transform(q, kgrid, DiskSpec(), 1e-12, amplitude=1e-3, path="iterated")
    full = forward_transform(q, kgrid, disk, 1e-12, amplitude=1e-3, path="iterated")
    return empty, full


WEAK_POINTS = np.array([0.0, 0.4 + 0.2j, -0.7j, 1.1 - 0.5j])


def test_disk_and_empty_disk_agree(weak_disk_runs):
    empty, full = weak_disk_runs
    without_disk, _ = reconstruct_points(empty, WEAK_POINTS, 0.0, tol=1e-12)
    with_disk, reports = reconstruct_points(full, WEAK_POINTS, 0.0, tol=1e-12)
    assert not any(report.condition_flag for report in reports)
    assert relative(with_disk, without_disk) <= 1e-3


def test_ray_and_fixed_k0_agree(weak_disk_runs):
    _, full = weak_disk_runs
    ray, _ = reconstruct_points(full, WEAK_POINTS, 0.0, full.disk, 1e-12)
    for angle in (0.0, 2.0):
        fixed, _ = reconstruct_points(full, WEAK_POINTS, 0.0, full.disk.with_policy("fixed", angle), 1e-12)
        assert relative(fixed, ray) <= 1e-3


def test_boundary_term_carries_the_disk_mass(weak_disk_runs):
    _, full = weak_disk_runs
    layout = BSpaceLayout(full.kgrid, full.disk)
    operator = build_T(full, 0.4 + 0.2j, 0.0, full.disk, layout)
    exterior, coeffs = layout.identity()
    identity_ext, identity_coeffs = expand_channels(exterior, layout), expand_channels(coeffs, layout)
    bracket = operator.reconstruction_matrix(identity_ext, identity_coeffs)
    expected = 1e-3 * np.exp(-abs(0.4 + 0.2j) ** 2)
    assert -0.5j * bracket[0, 1] == pytest.approx(expected, rel=1e-2)


def test_cutoff_radius_does_not_change_q(weak_disk_runs):
    _, full = weak_disk_runs
    reference, _ = reconstruct_points(full, WEAK_POINTS, 0.0, tol=1e-12)
    wider, _ = reconstruct_points(full, WEAK_POINTS, 0.0, tol=1e-12, beta_radius=1.5)
    assert relative(wider, reference) <= 1e-3


def test_reconstruct_rejects_another_circle(weak_disk_runs):
    empty, full = weak_disk_runs
    with pytest.raises(ConfigError):
        reconstruct_points(full, [0.0], 0.0, DiskSpec(1.5, 16))
    with pytest.raises(ConfigError):
        reconstruct_points(empty, [0.0], 0.0, DiskSpec(1.0, 16))
    with pytest.raises(ConfigError):
        reconstruct_points(full, [0.0], 0.0, DiskSpec(1.0, 32))


@pytest.mark.slow
def test_k0_independence():
    q = gaussian(make_grid(5.0, 64), 0.1)
    disk = DiskSpec(1.0, 32)
    data = forward_transform(q, make_grid(6.0, 64), disk, 1e-12, path="iterated", threads=4)
    points = 0.9 * np.exp(2j * np.pi * np.arange(10) / 10) * np.linspace(0.2, 1.0, 10)
    ray, _ = reconstruct_points(data, points, 0.0, disk, 1e-12)
    fixed, _ = reconstruct_points(data, points, 0.0, disk.with_policy("fixed", 0.0), 1e-12)
    assert relative(fixed, ray) <= 1e-3


@pytest.mark.slow
def test_disk_and_empty_disk_agree_at_moderate_amplitude():
    q = gaussian(make_grid(5.0, 64), 0.1)
    kgrid = make_grid(6.0, 64)
    disk = DiskSpec(1.0, 32)
    points = np.array([0.0, 0.5 + 0.5j, -0.8, 0.3 - 1.2j])
    empty = forward_transform(q, kgrid, DiskSpec(), 1e-12, amplitude=0.1, path="iterated", threads=4)
    full = forward_transform(q, kgrid, disk, 1e-12, amplitude=0.1, path="iterated", threads=4)
    without_disk, _ = reconstruct_points(empty, points, 0.0, tol=1e-12)
    with_disk, _ = reconstruct_points(full, points, 0.0, tol=1e-12)
    assert relative(with_disk, without_disk) <= 1e-3


@pytest.mark.slow
def test_cutoff_radius_does_not_change_q_at_moderate_amplitude():
    q = gaussian(make_grid(5.0, 64), 0.1)
    data = forward_transform(q, make_grid(6.0, 64), DiskSpec(1.0, 32), 1e-12, path="iterated", threads=4)
    points = np.array([0.0, 0.5 + 0.5j, -0.8, 0.3 - 1.2j])
    reference, _ = reconstruct_points(data, points, 0.0, tol=1e-12)
    wider, _ = reconstruct_points(data, points, 0.0, tol=1e-12, beta_radius=1.6)
    assert relative(wider, reference) <= 1e-3


@pytest.mark.slow
def test_reconstruction_follows_split_step_trajectory():
    q0 = gaussian(make_grid(8.0, 128), 0.1)
    final = simulate(q0, 0.5, 1e-3, save_every=500).q[-1]
    nodes = final.grid.nodes[::4, ::4]
    inner = np.abs(nodes) <= 2.0
    points, expected = nodes[inner], final.values[::4, ::4][inner]

    data = forward_transform(gaussian(make_grid(5.0, 64), 0.1), make_grid(6.0, 64), DiskSpec(), 1e-12,
                             path="iterated", threads=4)
    values, reports = reconstruct_points(data, points, 0.5, tol=1e-12)
    assert not any(report.condition_flag for report in reports)
    assert np.linalg.norm(values - expected) <= 1e-2 * np.linalg.norm(expected)


@pytest.mark.slow
def test_far_field_sigma_min_does_not_decrease():
    q = gaussian(make_grid(5.0, 32), 0.5)
    disk = DiskSpec(1.0, 16)
    data = forward_transform(q, make_grid(3.6, 64), disk, 1e-12, path="iterated", threads=4)
    layout = BSpaceLayout(data.kgrid, disk)
    outcomes = [cell_sigma(data, radius * np.exp(0.25j * np.pi), 0.0, layout) for radius in (8.0, 16.0, 32.0)]
    sigmas = np.array([sigma for sigma, _ in outcomes])
    # sigma_min is estimated by inverse iteration, an upper bound
    assert np.all(sigmas[1:] >= 0.9 * sigmas[:-1])
    assert all(sigma > 1e-6 * norm for sigma, norm in outcomes)
