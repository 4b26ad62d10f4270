import numpy as np
import scipy.fft as sfft

from dsii.lib.grid.ComplexGrid import ComplexField, ComplexGrid


def _symbols(grid: ComplexGrid):
    xi1, xi2 = grid.frequencies
    # odd derivatives drop the Nyquist mode so that real input keeps conjugation symmetry
    keep = np.ones(grid.shape)
    keep[:, grid.n_per_side // 2] = 0.0
    keep[grid.n_per_side // 2, :] = 0.0
    return xi1, xi2, keep


def dbar_symbol(grid: ComplexGrid):
    xi1, xi2, keep = _symbols(grid)
    return keep * (1j * xi1 - xi2) / 2.0


def del_symbol(grid: ComplexGrid):
    xi1, xi2, keep = _symbols(grid)
    return keep * (1j * xi1 + xi2) / 2.0


def apply_multiplier(values, multiplier, workers: int = 1):
    return sfft.ifft2(multiplier * sfft.fft2(values, workers=workers), workers=workers)


def dbar(f: ComplexField, workers: int = 1):
    """
    Spectral d-bar derivative (d/dx + i d/dy) / 2
    :param f: Field that decays inside the box
    :param workers: FFT worker threads
    :return: ComplexField
    """
    return f.with_values(apply_multiplier(f.values, dbar_symbol(f.grid), workers))


def del_(f: ComplexField, workers: int = 1):
    """
    Spectral derivative (d/dx - i d/dy) / 2, the formal conjugate of d-bar
    :param f: Field that decays inside the box
    :param workers: FFT worker threads
    :return: ComplexField
    """
    return f.with_values(apply_multiplier(f.values, del_symbol(f.grid), workers))


def mixed_xy(f: ComplexField, workers: int = 1):
    """
    Spectral d^2/dxdy
    """
    xi1, xi2, keep = _symbols(f.grid)
    return f.with_values(apply_multiplier(f.values, -keep * xi1 * xi2, workers))
