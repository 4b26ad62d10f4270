import logging

import numpy as np

from dsii.lib.forward.Scattering import forward_transform
from dsii.lib.forward.ScatteringData import ScatteringData
from dsii.lib.grid.ComplexGrid import ComplexField

logger = logging.getLogger(__name__)


def _deviation(reference, candidate):
    peak = float(np.max(np.abs(reference))) if reference.size else 0.0
    difference = float(np.max(np.abs(candidate - reference))) if reference.size else 0.0
    return difference / peak if peak > 0 else difference


def duality_check(q_t: ComplexField, data_t: ScatteringData, tol: float = 1e-10, **kwargs):
    """
    Forward-transforms a reconstructed potential and compares the result with the evolved data

    :param q_t: Reconstructed potential at time t (must be finite)
    :param data_t: Evolved scattering data at the same time
    :param tol: Forward solver tolerance
    :param kwargs: Passed to :func:`~dsii.lib.forward.Scattering.forward_transform`
    :raises: **ValueError** -- If q_t contains near-singular (NaN) nodes
    :return: Maximum relative deviation over the valid diagonal samples and the boundary block
    """
    if not q_t.is_finite():
        raise ValueError("duality_check needs a finite potential")
    if not np.any(q_t.values) and data_t.max_abs() == 0:
        return 0.0

    data_hat = forward_transform(q_t, data_t.kgrid, data_t.disk, tol, **kwargs)
    valid = data_t.diag_mask & data_hat.diag_mask
    deviation = _deviation(data_t.diag[:, :, valid], data_hat.diag[:, :, valid])
    if data_t.boundary_block is not None and data_hat.boundary_block is not None:
        deviation = max(deviation, _deviation(data_t.boundary_block, data_hat.boundary_block))
    logger.info("duality deviation %.3e at t=%s", deviation, data_t.time)
    return deviation
