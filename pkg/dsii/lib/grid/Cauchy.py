"""
Convolution with the kernel 1/(pi z) by FFT on a zero-padded grid.

The kernel is integrated exactly over every cell in a near-field window around the
singularity; farther cells use the midpoint value.
"""
import functools

import numpy as np
import scipy.fft as sfft

from dsii.lib.grid.ComplexGrid import ComplexField, ComplexGrid

NEAR_FIELD_CELLS = 8


def _antiderivative(z):
    # F with d2F/dxdy = 1/z, principal log
    return -1j * (z * np.log(z) - z)


def cell_integral(center, h: float):
    """
    Exact integral of 1/z over square cells of side h
    :param center: Complex array of cell centers
    :param h: Cell side length
    :return: complex array, same shape as center
    """
    center = np.asarray(center, dtype=complex)
    # reflect left half-plane cells so the principal branch cut never crosses a cell
    sign = np.where(center.real < 0, -1.0, 1.0)
    c = center * sign
    x1, x2 = c.real - h / 2, c.real + h / 2
    y1, y2 = c.imag - h / 2, c.imag + h / 2
    with np.errstate(invalid="ignore", divide="ignore"):
        value = (_antiderivative(x2 + 1j * y2) - _antiderivative(x1 + 1j * y2)
                 - _antiderivative(x2 + 1j * y1) + _antiderivative(x1 + 1j * y1))
    value = sign * value
    # a cell centered at the origin integrates to zero by symmetry
    return np.where(np.abs(center) < h / 4, 0.0, value)


@functools.lru_cache(maxsize=16)
def _kernel_spectrum(n: int, h: float, workers: int):
    index = np.arange(2 * n)
    offset = np.where(index < n, index, index - 2 * n) * h
    w = offset[np.newaxis, :] + 1j * offset[:, np.newaxis]

    with np.errstate(divide="ignore", invalid="ignore"):
        kernel = h * h / (np.pi * w)

    near = (np.abs(w.real) <= NEAR_FIELD_CELLS * h) & (np.abs(w.imag) <= NEAR_FIELD_CELLS * h)
    kernel[near] = cell_integral(w[near], h) / np.pi

    return sfft.fft2(kernel, workers=workers)


def kernel_spectrum(grid: ComplexGrid, workers: int = 1):
    """
    FFT of the extended (2n x 2n) cell-integrated kernel 1/(pi z)
    :param grid: Grid the kernel is built for
    :param workers: FFT worker threads
    :return: complex array of shape (2n, 2n)
    """
    return _kernel_spectrum(grid.n_per_side, grid.spacing, workers)


def cauchy_values(values, grid: ComplexGrid, workers: int = 1):
    """
    Array form of :func:`cauchy_apply`
    """
    n = grid.n_per_side
    spectrum = kernel_spectrum(grid, workers)
    extended = sfft.ifft2(spectrum * sfft.fft2(values, s=spectrum.shape, workers=workers), workers=workers)
    return extended[:n, :n]


def cauchy_apply(f: ComplexField, workers: int = 1):
    """
    Computes g(z) = (1/pi) int f(z') / (z - z') dsigma_z' over the grid.
    f must decay inside the box; values outside the box are taken as zero.

    :param f: Density
    :type f: ~dsii.lib.grid.ComplexGrid.ComplexField
    :param workers: FFT worker threads
    :type workers: int

    :return: The Cauchy transform sampled on the same grid
    :rtype: ~dsii.lib.grid.ComplexGrid.ComplexField
    """
    return f.with_values(cauchy_values(f.values, f.grid, workers))


def cauchy_conj_values(values, grid: ComplexGrid, workers: int = 1):
    """
    (1/pi) int f(z') / (conj(z) - conj(z')) dsigma_z'
    """
    return np.conj(cauchy_values(np.conj(values), grid, workers))
