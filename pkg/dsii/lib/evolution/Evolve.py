"""
Explicit time extension of scattering data,

    h(s, k, t) = e^{-t (k^2 - conj(s)^2) / 2} Pi_o h0(s, k) + e^{-t (conj(k)^2 - conj(s)^2) / 2} Pi_d h0(s, k).
"""
import numpy as np

from dsii.lib.Errors import OverflowRisk
from dsii.lib.forward.ScatteringData import ScatteringData

EXPONENT_LIMIT = 700.0


def evolution_exponents(varsigma, k, dt: float):
    """
    Exponents of the off-diagonal and diagonal factors for an increment dt
    :return: Tuple (off-diagonal exponent, diagonal exponent), complex arrays
    """
    varsigma = np.asarray(varsigma, dtype=complex)
    k = np.asarray(k, dtype=complex)
    conj_s2 = np.conj(varsigma) ** 2
    return -dt * (k ** 2 - conj_s2) / 2.0, -dt * (np.conj(k) ** 2 - conj_s2) / 2.0


def _factor_matrix(off_exponent, diag_exponent):
    limit = max(float(np.max(np.abs(off_exponent.real), initial=0.0)),
                float(np.max(np.abs(diag_exponent.real), initial=0.0)))
    if limit > EXPONENT_LIMIT:
        raise OverflowRisk(limit)
    off, diag = np.exp(off_exponent), np.exp(diag_exponent)
    return np.stack([np.stack([diag, off]), np.stack([off, diag])])


def evolve_h(h0: ScatteringData, t: float, t_max: float | None = None):
    """
    Evolves both stored blocks from h0.time to the absolute time t (the increment t - h0.time is applied)

    :param h0: Data at time h0.time
    :param t: Target time
    :param t_max: Optional upper bound on t
    :raises: **OverflowRisk** -- If an exponent real part exceeds 700
    :raises: **ValueError** -- If t is negative or above t_max
    :return: ScatteringData at time t
    """
    if t < 0 or (t_max is not None and t > t_max):
        raise ValueError(f"Time {t} outside [0, {t_max}]")

    dt = t - h0.time
    if dt == 0:
        return h0.copy()

    k = h0.kgrid.nodes
    diag_factor = _factor_matrix(*evolution_exponents(k, k, dt))
    diag = np.where(h0.diag_mask[np.newaxis, np.newaxis], h0.diag * diag_factor, h0.diag)

    block = None
    if h0.boundary_block is not None:
        nodes = h0.disk.nodes
        # block index [s' (first argument), s (second argument k)]
        block_factor = _factor_matrix(*evolution_exponents(nodes[:, np.newaxis], nodes[np.newaxis, :], dt))
        block = h0.boundary_block * block_factor

    return ScatteringData(h0.kgrid, h0.disk, diag, h0.diag_mask.copy(), block, h0.amplitude, t)
