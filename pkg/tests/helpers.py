import numpy as np

from dsii.lib.forward.ScatteringData import ScatteringData
from dsii.lib.grid.DiskSpec import DiskSpec


def synthetic_data(kgrid, disk=None, off_amplitude=0.005, block_amplitude=0.0, w=0.3 - 0.2j):
    """
    Symmetric data with h12 = -h21 = off_amplitude * exp(-|k|^2 / 4) and, for a non-empty disk, a boundary block
    entire in the conjugate of its first argument
    """
    disk = DiskSpec() if disk is None else disk
    n = kgrid.n_per_side
    k = kgrid.nodes
    diag = np.zeros((2, 2, n, n), dtype=complex)
    diag[0, 1] = off_amplitude * np.exp(-np.abs(k) ** 2 / 4.0)
    diag[1, 0] = -diag[0, 1]
    mask = np.abs(k) > disk.radius

    block = None
    if not disk.is_empty:
        nodes = disk.nodes
        first = np.exp(-np.conj(nodes)[:, np.newaxis] * w)
        second = np.exp(1j * np.angle(nodes))[np.newaxis, :]
        block = np.zeros((2, 2, nodes.size, nodes.size), dtype=complex)
        block[0, 1] = block_amplitude * first * second
        block[1, 0] = -block[0, 1]
        block[0, 0] = block[1, 1] = 0.5 * block_amplitude * np.exp(-np.conj(nodes)[:, np.newaxis] * 2 * w) * second
    return ScatteringData(kgrid, disk, diag, mask, block)
