"""
Generalized scattering data

    h0(s, k) = (1/(2 pi)^2) int e^{-i conj(s) z / 2} Q(z) conj(psi)(z, k) dsigma_z,

its boundary-contour form and the a(alpha, k), b(alpha, k) off-diagonal samples.
"""
import logging

import numpy as np

from dsii.lib.Errors import ContourTooSmall, ExceptionalOnBoundary, NoConvergence
from dsii.lib.forward.LippmannSchwinger import WaveFunction, ls_sigma_min, solve_mu
from dsii.lib.forward.ScatteringData import ScatteringData
from dsii.lib.grid.ComplexGrid import ComplexField, ComplexGrid
from dsii.lib.grid.DiskSpec import DiskSpec
from dsii.lib.parallel.ParallelSweep import parallel_map

logger = logging.getLogger(__name__)

FOURIER_NORMALIZATION = 1.0 / (2.0 * np.pi) ** 2


def source_matrix(q: ComplexField, wave: WaveFunction):
    """
    Q conj(mu) as a (2, 2, n, n) array
    """
    m = np.conj(wave.mu)
    qv = q.values
    return np.stack([
        np.stack([qv * m[1, 0], qv * m[1, 1]]),
        np.stack([-qv * m[0, 0], -qv * m[0, 1]]),
    ])


def h_from_wave(q: ComplexField, wave: WaveFunction, varsigma):
    """
    h0(s, k) for the k of the wave function and every s in varsigma
    :param q: Potential
    :param wave: Solution of the Lippmann-Schwinger equation at k
    :param varsigma: complex array of first arguments
    :return: complex array (2, 2, len(varsigma))
    """
    z = q.grid.nodes.ravel()
    varsigma = np.atleast_1d(np.asarray(varsigma, dtype=complex))
    source = source_matrix(q, wave).reshape(2, 2, -1)
    phase = np.exp(-1j * (np.conj(varsigma)[:, np.newaxis] * z[np.newaxis, :]
                          + wave.k * np.conj(z)[np.newaxis, :]) / 2.0)
    return np.einsum("abj,sj->abs", source, phase) * q.grid.cell_area * FOURIER_NORMALIZATION


def scattering_diag_at(q: ComplexField, k_list, tol: float = 1e-10, **kwargs):
    """
    h0(k, k) at a list of spectral parameters

    :param q: Potential
    :param k_list: Spectral parameters
    :param tol: Solver tolerance
    :param kwargs: Passed to :func:`~dsii.lib.forward.LippmannSchwinger.solve_mu`, plus threads and on_progress_update
    :return: Tuple (values (len, 2, 2), valid mask (len,))
    """
    k_list = np.atleast_1d(np.asarray(k_list, dtype=complex))
    solve_options = {key: value for key, value in kwargs.items() if key not in ("threads", "on_progress_update")}

    def sample(k):
        wave = solve_mu(q, k, tol, **solve_options)
        return h_from_wave(q, wave, [k])[:, :, 0]

    outcomes = parallel_map(sample, k_list, threads=kwargs.get("threads", 1),
                            on_progress_update=kwargs.get("on_progress_update", None))

    values = np.zeros((k_list.size, 2, 2), dtype=complex)
    valid = np.zeros(k_list.size, dtype=bool)
    for index, outcome in enumerate(outcomes):
        if outcome.error is None:
            values[index] = outcome.result
            valid[index] = True
        elif isinstance(outcome.error, NoConvergence):
            logger.warning("sample k=%s marked invalid: %s", k_list[index], outcome.error)
        else:
            raise outcome.error
    return values, valid


def scattering_diag(q: ComplexField, kgrid: ComplexGrid, disk: DiskSpec, tol: float = 1e-10, **kwargs):
    """
    Diagonal part of the scattering data on the exterior nodes |k| > A of kgrid

    :param q: Potential
    :type q: ~dsii.lib.grid.ComplexGrid.ComplexField
    :param kgrid: Spectral grid
    :param disk: Disk D (empty disk samples every node)
    :param tol: Solver tolerance
    :param `**kwargs`: See :func:`scattering_diag_at`; amplitude is recorded in the result

    :return: Data without boundary block
    :rtype: ~dsii.lib.forward.ScatteringData.ScatteringData
    """
    n = kgrid.n_per_side
    exterior = np.abs(kgrid.nodes) > disk.radius
    amplitude = kwargs.pop("amplitude", 1.0)
    values, valid = scattering_diag_at(q, kgrid.nodes[exterior], tol, **kwargs)

    diag = np.zeros((2, 2, n, n), dtype=complex)
    mask = np.zeros((n, n), dtype=bool)
    diag[:, :, exterior] = np.moveaxis(values, 0, -1)
    mask[exterior] = valid
    return ScatteringData(kgrid, disk, diag, mask, None, amplitude, 0.0)


def scattering_boundary(q: ComplexField, disk: DiskSpec, tol: float = 1e-10, **kwargs):
    """
    Boundary block h0(s', s_j) for all pairs of boundary nodes, one Lippmann-Schwinger solve per s_j

    :param q: Potential
    :param disk: Non-empty disk
    :param tol: Solver tolerance
    :param `**kwargs`: Passed to solve_mu, plus threads, on_progress_update and tau_exc
        (sigma_min threshold for boundary nodes, default 1e-3)

    :raises: **ExceptionalOnBoundary** -- If a boundary node is near-exceptional

    :return: complex array (2, 2, nb, nb) indexed [.., s' index, s index]
    """
    nodes = disk.nodes
    tau_exc = kwargs.get("tau_exc", 1e-3)
    solve_options = {key: value for key, value in kwargs.items()
                     if key not in ("threads", "on_progress_update", "tau_exc")}
    solve_options["estimate_sigma"] = True

    def column(k):
        wave = solve_mu(q, k, tol, **solve_options)
        sigma = wave.sigma_min
        if np.isfinite(sigma) and sigma < tau_exc:
            raise ExceptionalOnBoundary(k, sigma)
        return h_from_wave(q, wave, nodes)

    outcomes = parallel_map(column, nodes, threads=kwargs.get("threads", 1),
                            on_progress_update=kwargs.get("on_progress_update", None))

    block = np.zeros((2, 2, nodes.size, nodes.size), dtype=complex)
    for j, outcome in enumerate(outcomes):
        if isinstance(outcome.error, NoConvergence):
            raise ExceptionalOnBoundary(nodes[j], 0.0) from outcome.error
        if outcome.error is not None:
            raise outcome.error
        block[:, :, :, j] = outcome.result
    return block


def forward_transform(q: ComplexField, kgrid: ComplexGrid, disk: DiskSpec, tol: float = 1e-10, **kwargs):
    """
    Diagonal samples plus (for a non-empty disk) the boundary block
    """
    data = scattering_diag(q, kgrid, disk, tol, **kwargs)
    if not disk.is_empty:
        boundary_options = {key: value for key, value in kwargs.items() if key != "amplitude"}
        data.boundary_block = scattering_boundary(q, disk, tol, **boundary_options)
    return data


def square_contour(grid: ComplexGrid, half_width: float):
    """
    Counter-clockwise closed square path through grid nodes closest to |x|, |y| = half_width
    :return: Tuple (row indices, column indices) of the path nodes, first node repeated at the end
    """
    axis = grid.axis
    low = int(np.argmin(np.abs(axis + half_width)))
    high = int(np.argmin(np.abs(axis - half_width)))
    span = np.arange(low, high)
    rows = np.concatenate([np.full(span.size, low), span, np.full(span.size, high), span[::-1] + 1, [low]])
    columns = np.concatenate([span, np.full(span.size, high), span[::-1] + 1, np.full(span.size, low), [low]])
    return rows, columns


END_CORRECTION = np.array([17.0, 59.0, 43.0, 49.0]) / 48.0


def polyline_weights(contour_z):
    """
    Quadrature weights for int f dz over a closed polyline of equispaced straight sides.
    Sides with at least 8 steps get the fourth-order end-corrected rule, shorter ones the trapezoid rule
    :param contour_z: Closed path points (first point repeated at the end)
    :return: complex array, one weight per path point (dz included)
    """
    dz = np.diff(contour_z)
    turns = np.flatnonzero(np.abs(dz[1:] - dz[:-1]) > 1e-9 * np.abs(dz[1:]))
    bounds = np.concatenate([[0], turns + 1, [dz.size]])
    weights = np.zeros(contour_z.size, dtype=complex)
    for start, stop in zip(bounds[:-1], bounds[1:]):
        steps = stop - start
        side = np.ones(steps + 1)
        if steps >= 8:
            side[:4] = END_CORRECTION
            side[-4:] = END_CORRECTION[::-1]
        else:
            side[0] = side[-1] = 0.5
        weights[start:stop + 1] += side * dz[start]
    return weights


def scattering_from_boundary_data(contour_z, psi_on_contour, varsigma_list, q: ComplexField | None = None,
                                  support_tolerance: float = 1e-10):
    """
    h0(s, k) from Dirichlet data on a closed contour, (-i / 8 pi^2) oint e^{-i conj(s) z / 2} psi(z, k) dz.
    The Green identity integrates d-bar of e^{-i conj(s) z/2} psi, so psi itself (not its conjugate) enters.

    :param contour_z: Closed counter-clockwise contour points (first point repeated at the end)
    :param psi_on_contour: complex array (2, 2, len(contour_z)) of psi values on the contour
    :param varsigma_list: First arguments s
    :param q: Potential, used for the support check when given
    :param support_tolerance: Allowed |q| on/outside the contour relative to max|q|
    :raises: **ContourTooSmall** -- If q is not negligible on or outside the contour
    :return: complex array (2, 2, len(varsigma_list))
    """
    contour_z = np.asarray(contour_z, dtype=complex)
    if q is not None:
        _check_support(q, contour_z, support_tolerance)

    varsigma = np.atleast_1d(np.asarray(varsigma_list, dtype=complex))
    psi = np.asarray(psi_on_contour)

    phase = np.exp(-1j * np.conj(varsigma)[:, np.newaxis] * contour_z[np.newaxis, :] / 2.0)
    integrand = psi[..., np.newaxis, :] * phase[np.newaxis, np.newaxis]
    return -1j / (8.0 * np.pi ** 2) * (integrand * polyline_weights(contour_z)).sum(axis=-1)


def _check_support(q: ComplexField, contour_z, tolerance: float):
    nodes = q.grid.nodes
    half_width = float(np.max(np.maximum(np.abs(contour_z.real), np.abs(contour_z.imag))))
    outside = np.maximum(np.abs(nodes.real), np.abs(nodes.imag)) >= half_width - q.grid.spacing / 2
    peak = np.max(np.abs(q.values))
    if peak > 0 and np.max(np.abs(q.values[outside]), initial=0.0) > tolerance * peak:
        raise ContourTooSmall(f"Potential is not negligible on the contour of half width {half_width:.4g}")


def contour_scattering(q: ComplexField, k: complex, half_width: float, varsigma_list=None, tol: float = 1e-10,
                       **kwargs):
    """
    Solves for psi(., k) and evaluates the contour form of h0 on a square contour through grid nodes
    :return: complex array (2, 2, len(varsigma_list)) (varsigma_list defaults to [k])
    """
    wave = solve_mu(q, k, tol, **kwargs)
    rows, columns = square_contour(q.grid, half_width)
    psi = wave.psi()[:, :, rows, columns]
    contour_z = q.grid.nodes[rows, columns]
    return scattering_from_boundary_data(contour_z, psi, [k] if varsigma_list is None else varsigma_list, q)


def ab_coefficients(q: ComplexField, k: complex, alpha_list, tol: float = 1e-10, **kwargs):
    """
    Entries a(alpha, k), b(alpha, k) of h0(k + alpha, k) = [[a, b], [-b, a]]
    :return: Tuple (a, b) of complex arrays of len(alpha_list)
    """
    wave = solve_mu(q, k, tol, **kwargs)
    h = h_from_wave(q, wave, k + np.atleast_1d(np.asarray(alpha_list, dtype=complex)))
    return h[0, 0], h[0, 1]
