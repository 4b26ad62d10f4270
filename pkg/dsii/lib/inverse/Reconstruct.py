"""
Pointwise reconstruction

    q(z, t)   = (-i/2) [R]_12,
    phi(z, t) = (-i/2) d-bar [R]_11,
    R = (1/pi) int_{C minus D} e^{i Re(conj(s) z)} conj(v) Pi_o h dsigma + (1/2 pi i) int_{dD} J(s) ds,

with v = w + I and w the solution of (I + T_{z,t}) w = -T_{z,t} I.
"""
import logging
from types import SimpleNamespace

import numpy as np

from dsii.lib.Errors import ConfigError, NearSingular
from dsii.lib.bspace.BSpace import BSpaceLayout
from dsii.lib.evolution.Evolve import evolve_h
from dsii.lib.forward.Scattering import forward_transform
from dsii.lib.forward.ScatteringData import ScatteringData
from dsii.lib.grid.ComplexGrid import ComplexField, ComplexGrid
from dsii.lib.grid.DiskSpec import DiskSpec
from dsii.lib.grid.Spectral import dbar
from dsii.lib.inverse.SolveW import SolveReport, solve_w, v_matrix
from dsii.lib.inverse.TOperator import TOperator
from dsii.lib.parallel.ParallelSweep import parallel_map

logger = logging.getLogger(__name__)

_OPERATOR_KEYS = ("data_scale", "boundary_sign", "workers")
_SOLVE_KEYS = ("mode", "dense_limit", "restart", "max_iter", "near_singular")


def _pick(kwargs, keys):
    return {key: kwargs[key] for key in keys if key in kwargs}


def resolve_disk(data: ScatteringData, disk: DiskSpec | None):
    """
    The disk to invert with: the disk of the data, or a disk on the same circle with its own k0 policy
    :raises: **ConfigError** -- If disk lies on another circle than the disk the data was computed for
    """
    if disk is None:
        return data.disk
    if not disk.same_circle(data.disk):
        raise ConfigError(f"Disk {disk!r} does not match the disk of the scattering data {data.disk!r}")
    return disk


def reconstruct_at(data: ScatteringData, z: complex, t: float, layout: BSpaceLayout, tol: float = 1e-10, **kwargs):
    """
    Reconstruction at a single point (data must already be evolved to t)
    :return: Tuple (q value, diagonal scalar (-i/2) R_11, SolveReport)
    """
    operator = TOperator(data, z, t, layout, **_pick(kwargs, _OPERATOR_KEYS))
    w, report = solve_w(operator, tol, **_pick(kwargs, _SOLVE_KEYS))
    v_ext, v_coeffs = v_matrix(w)
    bracket = operator.reconstruction_matrix(v_ext, v_coeffs)
    return -0.5j * bracket[0, 1], -0.5j * bracket[0, 0], report


def reconstruct(data: ScatteringData, z_grid: ComplexGrid, t: float, disk: DiskSpec | None = None,
                tol: float = 1e-10, **kwargs):
    """
    Reconstructs (q, phi) on a grid at time t

    :param data: Scattering data (any time, evolved to t here)
    :param z_grid: Grid of evaluation points
    :param t: Time
    :param disk: Disk D, defaults to the disk of the data
    :param tol: Solver tolerance
    :param kwargs: Keyword Args, see below

    :return: Tuple (q, phi, reports, mask) with mask True at near-singular nodes (q and phi are NaN there)
    :raises: **ConfigError** -- If disk lies on another circle than data.disk

    kwargs:
        t_max: Largest admissible time (passed to evolve_h)
        modes, beta_radius, full_matrix: B^2 layout options
        data_scale, boundary_sign: Operator options
        mode, dense_limit, restart, max_iter, near_singular: Solver options
        threads: Number of worker threads over the z nodes
        on_progress_update: Function that should be called on progress update (called like: func(current, total))
    """
    disk = resolve_disk(data, disk)
    if data.time != t:
        data = evolve_h(data, t, kwargs.get("t_max"))
    layout = BSpaceLayout(data.kgrid, disk, kwargs.get("modes"), kwargs.get("beta_radius"),
                          kwargs.get("full_matrix", False))
    nodes = z_grid.nodes.ravel()
    options = {key: value for key, value in kwargs.items() if key in _OPERATOR_KEYS + _SOLVE_KEYS}

    outcomes = parallel_map(lambda z: reconstruct_at(data, z, t, layout, tol, **options), nodes,
                            threads=kwargs.get("threads", 1),
                            on_progress_update=kwargs.get("on_progress_update", None))

    q_values = np.zeros(nodes.size, dtype=complex)
    diagonal = np.zeros(nodes.size, dtype=complex)
    mask = np.zeros(nodes.size, dtype=bool)
    reports = []
    for index, outcome in enumerate(outcomes):
        if outcome.error is not None:
            if not isinstance(outcome.error, NearSingular):
                raise outcome.error
            mask[index] = True
            reports.append(SolveReport(outcome.error.sigma_min, float("nan"), 0, True, z=nodes[index], t=t))
            continue
        q_values[index], diagonal[index], report = outcome.result
        reports.append(report)
        mask[index] = report.condition_flag

    mask = mask.reshape(z_grid.shape)
    q_values = q_values.reshape(z_grid.shape)
    diagonal = np.where(mask, 0.0, diagonal.reshape(z_grid.shape))
    phi_values = dbar(ComplexField(z_grid, diagonal), kwargs.get("workers", 1)).values
    q_values[mask] = np.nan
    phi_values[mask] = np.nan

    if np.any(mask):
        logger.warning("%d of %d nodes near-singular at t=%s", int(mask.sum()), mask.size, t)
    return ComplexField(z_grid, q_values), ComplexField(z_grid, phi_values), reports, mask


def reconstruct_points(data: ScatteringData, points, t: float, disk: DiskSpec | None = None, tol: float = 1e-10,
                       **kwargs):
    """
    q at scattered points (no phi, which needs a whole grid)
    :return: Tuple (q values, reports)
    """
    disk = resolve_disk(data, disk)
    if data.time != t:
        data = evolve_h(data, t, kwargs.get("t_max"))
    layout = BSpaceLayout(data.kgrid, disk, kwargs.get("modes"), kwargs.get("beta_radius"),
                          kwargs.get("full_matrix", False))
    options = {key: value for key, value in kwargs.items() if key in _OPERATOR_KEYS + _SOLVE_KEYS}
    results = [reconstruct_at(data, z, t, layout, tol, **options) for z in np.atleast_1d(points)]
    return np.array([result[0] for result in results]), [result[2] for result in results]


def amplitude_sweep(q0: ComplexField, a_list, z: complex, t: float, disk: DiskSpec, kgrid: ComplexGrid,
                    tol: float = 1e-10, **kwargs):
    """
    Near-singularity profile of I + T_{z,t} for the potentials a q0

    :param q0: Base potential
    :param a_list: Amplitudes in (0, 1]
    :param z: Evaluation point
    :param t: Time
    :param disk: Disk D
    :param kgrid: Spectral grid of the data
    :param tol: Solver tolerance
    :param kwargs: Forward options (path, phase, threads) and the options of :func:`reconstruct`
    :return: List of SolveReport, one per amplitude
    """
    forward_options = _pick(kwargs, ("path", "phase", "threads", "mode", "dense_limit", "restart", "max_iter"))
    reports = []
    for index, a in enumerate(a_list):
        data = forward_transform(q0.with_values(a * q0.values), kgrid, disk, tol, amplitude=a, **forward_options)
        if t != 0:
            data = evolve_h(data, t, kwargs.get("t_max"))
        layout = BSpaceLayout(kgrid, disk, kwargs.get("modes"), kwargs.get("beta_radius"),
                              kwargs.get("full_matrix", False))
        operator = TOperator(data, z, t, layout, **_pick(kwargs, _OPERATOR_KEYS))
        _, report = solve_w(operator, tol, **_pick(kwargs, _SOLVE_KEYS))
        reports.append(report)
        logger.info("a=%.4g sigma_min=%.3e flag=%s", a, report.sigma_min_estimate, report.condition_flag)
        if kwargs.get("on_progress_update") is not None:
            kwargs["on_progress_update"](index + 1, len(a_list))
    return reports


def sweep_summary(a_list, reports):
    """
    Maximal runs of consecutive flagged amplitudes
    :return: List of SimpleNamespace(start, stop) intervals of a
    """
    intervals = []
    current = None
    for a, report in zip(a_list, reports):
        if report.condition_flag:
            current = SimpleNamespace(start=a, stop=a) if current is None else SimpleNamespace(start=current.start,
                                                                                                stop=a)
        elif current is not None:
            intervals.append(current)
            current = None
    if current is not None:
        intervals.append(current)
    return intervals
