"""
Logarithmic-kernel form of the boundary term of T, used to cross-check the arc form.

    J(s) = (1/2 pi i) int_{dD} [e1 conj(phi^-) Pi_o + e2 phi^- Pi_d C][Ln((conj(s') - conj(s)) / (conj(s') - conj(k0))) h dconj(s')]

with the principal branch |arg| < pi. The integrand has logarithmic singularities at s' = s and s' = k0, so the
circle is split there and each piece is integrated on Gauss-Legendre panels graded toward both ends.
"""
import math

import numpy as np

from dsii.lib.bspace.BSpace import BElement
from dsii.lib.grid.ArcQuadrature import ccw_angle
from dsii.lib.inverse.TOperator import (TOperator, diagonal, expand_channels, interpolate_first_argument, matmul,
                                        off_diagonal, reduce_channels)

PANEL_ORDER = 16
GRADING_LEVELS = 14
GRADING_RATIO = 0.15


def graded_panels(start: float, stop: float, levels: int = GRADING_LEVELS, ratio: float = GRADING_RATIO,
                  order: int = PANEL_ORDER, max_length: float | None = None):
    """
    Gauss-Legendre nodes and weights on [start, stop], geometrically refined toward both endpoints.
    Panels longer than max_length are split evenly.
    """
    half = (stop - start) / 2.0
    offsets = half * ratio ** np.arange(levels + 1)
    breaks = np.unique(np.concatenate([[start], start + offsets, stop - offsets, [stop]]))
    if max_length is not None:
        pieces = [np.linspace(left, right, max(1, math.ceil((right - left) / max_length)) + 1)[:-1]
                  for left, right in zip(breaks[:-1], breaks[1:])]
        breaks = np.concatenate(pieces + [[stop]])
    reference, reference_weights = np.polynomial.legendre.leggauss(order)
    left, right = breaks[:-1, np.newaxis], breaks[1:, np.newaxis]
    nodes = (left + right) / 2.0 + (right - left) / 2.0 * reference[np.newaxis, :]
    weights = (right - left) / 2.0 * reference_weights[np.newaxis, :]
    return nodes.ravel(), weights.ravel()


def log_form_density(operator: TOperator, coeffs, sign: float = 1.0):
    """
    J(s_j) for every boundary node through the logarithmic kernel
    :param operator: TOperator providing z, k0, the disk and the kernel data
    :param coeffs: complex array (2, 2, N + 1) of interior Taylor coefficients
    :param sign: Sign of the Pi_d C sub-term inside the bracket, opposite to the arc form it reproduces
    :return: complex array (2, 2, nb)
    """
    disk = operator.disk
    radius = disk.radius
    k0 = operator.k0
    z = operator.z
    block = operator.data.boundary_block * operator.scale
    result = np.zeros((2, 2, disk.n_boundary), dtype=complex)
    powers = np.arange(coeffs.shape[-1])
    # PANEL_ORDER nodes per panel resolve the Taylor modes up to n_boundary/2
    max_length = 8.0 * np.pi / disk.n_boundary

    for j, varsigma in enumerate(disk.nodes):
        sweep = ccw_angle(k0, varsigma)
        if sweep < 1e-14:
            continue
        start = np.angle(k0)
        first_nodes, first_weights = graded_panels(start, start + sweep, max_length=max_length)
        second_nodes, second_weights = graded_panels(start + sweep, start + 2.0 * np.pi, max_length=max_length)
        theta = np.concatenate([first_nodes, second_nodes])
        theta_weights = np.concatenate([first_weights, second_weights])

        points = radius * np.exp(1j * theta)
        d_conj = -1j * np.conj(points) * theta_weights
        d_plain = 1j * points * theta_weights
        logarithm = np.log((np.conj(points) - np.conj(varsigma)) / (np.conj(points) - np.conj(k0)))

        kappa = interpolate_first_argument(block[:, :, :, j], theta)
        interior = np.einsum("ijn,nm->ijm", coeffs, points[np.newaxis, :] ** powers[:, np.newaxis])
        e1 = np.exp(1j * (varsigma * np.conj(z) + np.conj(points) * z) / 2.0)
        e2 = np.exp(1j * (varsigma - points) * np.conj(z) / 2.0)

        first = e1 * logarithm * matmul(np.conj(interior), off_diagonal(kappa)) * d_conj
        second = e2 * np.conj(logarithm) * matmul(interior, diagonal(np.conj(kappa))) * d_plain
        result[:, :, j] = (first + sign * second).sum(axis=-1) / (2j * np.pi)
    return result


def log_form_apply(operator: TOperator, element: BElement):
    """
    T applied to an element with the boundary term taken from the logarithmic form
    :param operator: TOperator (non-empty disk)
    :param element: BElement in the operator's layout
    :return: BElement
    """
    layout = operator.layout
    phi_ext = expand_channels(element.exterior_values(), layout)
    coeffs = expand_channels(element.interior_coeffs, layout)
    boundary = None if operator.arcs is None else log_form_density(operator, coeffs, -operator.boundary_sign)
    out_ext, out_coeffs = operator.apply_matrix(phi_ext, coeffs, boundary)
    exterior, tail = layout.split_tail(reduce_channels(out_ext, layout))
    return BElement(layout, exterior, reduce_channels(out_coeffs, layout), tail)
