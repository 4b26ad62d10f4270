import logging

import numpy as np

from dsii.lib.grid.ComplexGrid import ComplexField
from dsii.lib.grid.Spectral import dbar, del_, mixed_xy
from dsii.lib.inverse.Reconstruct import reconstruct

logger = logging.getLogger(__name__)

EDGE_WIDTH = 2


def dsii_residual(q_series, phi_series, dt: float, **kwargs):
    """
    Residual of q_t = 2i q_xy - 4 q (conj(phi) - phi), d phi = d-bar |q|^2 on equally spaced time slices

    :param q_series: Sequence of at least three ComplexField slices of q
    :param phi_series: Matching slices of phi
    :param dt: Time spacing of the slices
    :param kwargs: nonlinear (default True; False checks the linear equation q_t = 2i q_xy only),
                   edge_width (nodes excluded next to the box boundary, default 2), workers
    :raises: **ValueError** -- With fewer than three slices
    :return: float, maximum of both residuals over the interior nodes and the inner time slices
    """
    if len(q_series) < 3 or len(q_series) != len(phi_series):
        raise ValueError("dsii_residual needs at least three matching time slices")
    nonlinear = kwargs.get("nonlinear", True)
    workers = kwargs.get("workers", 1)
    grid = q_series[0].grid
    interior = ~grid.boundary_mask(kwargs.get("edge_width", EDGE_WIDTH))

    worst = 0.0
    for index in range(1, len(q_series) - 1):
        q, phi = q_series[index], phi_series[index]
        q_t = (q_series[index + 1].values - q_series[index - 1].values) / (2.0 * dt)
        evolution = q_t - 2j * mixed_xy(q, workers).values
        if nonlinear:
            evolution = evolution + 4.0 * q.values * (np.conj(phi.values) - phi.values)
        worst = max(worst, float(np.max(np.abs(evolution[interior]))))
        if nonlinear:
            constraint = del_(phi, workers).values - dbar(ComplexField(grid, np.abs(q.values) ** 2), workers).values
            worst = max(worst, float(np.max(np.abs(constraint[interior]))))
    logger.debug("dsii residual %.3e over %d slices", worst, len(q_series) - 2)
    return worst


def ist_residual(data, z_grid, t: float, delta: float = 1e-3, **kwargs):
    """
    dsii_residual of the reconstructed solution on the stencil t - delta, t, t + delta.
    For t < delta the stencil moves forward to t, t + delta, t + 2 delta (data cannot be evolved to negative times)
    and the residual belongs to t + delta.

    :param data: Scattering data
    :param z_grid: Grid of the reconstruction
    :param t: Time
    :param delta: Stencil spacing
    :param kwargs: Passed to :func:`~dsii.lib.inverse.Reconstruct.reconstruct`
    :return: float, NaN when a stencil slice has near-singular nodes
    """
    start = t - delta if t >= delta else t
    q_series, phi_series = [], []
    for time in start + delta * np.arange(3):
        q, phi, _, mask = reconstruct(data, z_grid, float(time), **kwargs)
        if np.any(mask):
            logger.warning("ist residual undefined: near-singular nodes at t=%s", time)
            return float("nan")
        q_series.append(q)
        phi_series.append(phi)
    return dsii_residual(q_series, phi_series, delta, workers=kwargs.get("workers", 1))
