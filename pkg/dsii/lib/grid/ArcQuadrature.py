import math

import numpy as np

from dsii.lib.grid.DiskSpec import DiskSpec

MIN_ARC_NODES = 16


def ccw_angle(start: complex, end: complex):
    """
    Counter-clockwise angle from start to end in [0, 2pi)
    """
    sweep = float(np.mod(np.angle(end) - np.angle(start), 2.0 * np.pi))
    if sweep > 2.0 * np.pi - 1e-13:
        return 0.0
    return sweep


def arc_node_count(disk: DiskSpec, sweep: float):
    # resolves Taylor modes up to n_boundary/2 on the arc
    return max(MIN_ARC_NODES, math.ceil(disk.n_boundary * sweep / np.pi))


def arc_quadrature(disk: DiskSpec, k0: complex, varsigma: complex):
    """
    Quadrature for int f(s') dconj(s') over the counter-clockwise arc of the disk boundary from k0 to varsigma.
    With s' = A e^{i theta}, dconj(s') = -i A e^{-i theta} dtheta; the theta integral uses Gauss-Legendre nodes,
    their number proportional to the arc length (the arc endpoints are not periodic, so the trapezoid rule
    would only be second order).

    :param disk: Disk whose boundary carries the arc
    :param k0: Start point on the boundary
    :param varsigma: End point on the boundary
    :return: Tuple (nodes, weights) of complex arrays, empty for a zero-length arc
    """
    sweep = ccw_angle(k0, varsigma)
    if sweep < 1e-14:
        return np.zeros(0, dtype=complex), np.zeros(0, dtype=complex)

    n_nodes = arc_node_count(disk, sweep)
    reference, reference_weights = np.polynomial.legendre.leggauss(n_nodes)
    theta = np.angle(k0) + (reference + 1.0) * sweep / 2.0
    theta_weights = reference_weights * sweep / 2.0

    nodes = disk.radius * np.exp(1j * theta)
    weights = -1j * disk.radius * np.exp(-1j * theta) * theta_weights
    return nodes, weights
