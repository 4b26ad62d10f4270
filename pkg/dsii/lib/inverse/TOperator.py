"""
Real-linear operator T_{z,t} of the inverse transform on B^2,

    T phi(k) = (1/pi) int_{C minus D} e^{i Re(conj(s) z)} conj(phi)(s) Pi_o h(s, s, t) dsigma_s / (s - k)
             + (1/2 pi i) int_{dD} ds / (s - k) J(s),

    J(s) = int_{arc k0 -> s} e^{i(s conj(z) + conj(s') z)/2} conj(phi^-(s')) Pi_o h(s', s, t) dconj(s')
           + int_{arc k0 -> s} e^{i(s - s') conj(z)/2} phi^-(s') Pi_d conj(h(s', s, t)) ds',

the arc form of the logarithmic kernel Ln((conj(s') - conj(s)) / (conj(s') - conj(k0))) with the
conjugation acting on the whole bracket [Ln h dconj(s')].
"""
import logging
from types import SimpleNamespace

import numpy as np

from dsii.lib.Errors import MissingBoundaryBlock
from dsii.lib.bspace.BSpace import BElement, BSpaceLayout
from dsii.lib.evolution.Evolve import evolve_h
from dsii.lib.forward.ScatteringData import ScatteringData
from dsii.lib.grid.ArcQuadrature import arc_quadrature
from dsii.lib.grid.Cauchy import cauchy_values
from dsii.lib.grid.DiskSpec import DiskSpec

logger = logging.getLogger(__name__)

SCALE_CONSISTENT = "consistent"
SCALE_PRINTED = "printed"


def data_scale(name: str):
    """
    Factor between forward data and the kernel data used by the inverse transform
    """
    return 2j * np.pi if name == SCALE_CONSISTENT else 1.0


def off_diagonal(matrix):
    result = np.zeros_like(matrix)
    result[0, 1], result[1, 0] = matrix[0, 1], matrix[1, 0]
    return result


def diagonal(matrix):
    result = np.zeros_like(matrix)
    result[0, 0], result[1, 1] = matrix[0, 0], matrix[1, 1]
    return result


def matmul(a, b):
    """
    Pointwise 2x2 matrix product of arrays shaped (2, 2, ...)
    """
    return np.einsum("ij...,jk...->ik...", a, b)


def expand_channels(values, layout: BSpaceLayout):
    """
    Channel array (channels, ...) to full matrix array (2, 2, ...)
    """
    if layout.full_matrix:
        return values.reshape((2, 2) + values.shape[1:])
    p, r = values[0], values[1]
    return np.stack([np.stack([p, r]), np.stack([-r, p])])


def reduce_channels(matrix, layout: BSpaceLayout):
    return np.stack([matrix[row, column] for row, column in layout.channels])


def interpolate_first_argument(block, theta):
    """
    Trigonometric interpolation of block[..., i', j] in the angle of its first argument
    :param block: complex array (2, 2, nb) of samples at the boundary angles
    :param theta: Angles to evaluate at
    :return: complex array (2, 2, len(theta))
    """
    nb = block.shape[-1]
    coefficients = np.fft.fft(block, axis=-1) / nb
    modes = np.fft.fftfreq(nb, d=1.0 / nb)
    if nb % 2 == 0:
        # split the Nyquist mode symmetrically so real samples interpolate to real values
        coefficients = np.concatenate([coefficients, coefficients[..., nb // 2:nb // 2 + 1] / 2], axis=-1)
        coefficients[..., nb // 2] /= 2
        modes = np.concatenate([modes, [nb // 2]])
    return coefficients @ np.exp(1j * np.outer(modes, theta))


class BoundaryArcs:
    """
    Flattened arc quadrature from k0 to every boundary node, with the kernel data interpolated at the arc nodes
    """

    def __init__(self, disk: DiskSpec, k0: complex, kernel_block):
        nodes = disk.nodes
        arc_nodes, arc_weights, owners, kappa = [], [], [], []
        for j, varsigma in enumerate(nodes):
            points, weights = arc_quadrature(disk, k0, varsigma)
            if points.size == 0:
                continue
            arc_nodes.append(points)
            arc_weights.append(weights)
            owners.append(np.full(points.size, j))
            kappa.append(interpolate_first_argument(kernel_block[:, :, :, j], np.angle(points)))

        if arc_nodes:
            self.nodes = np.concatenate(arc_nodes)
            self.weights = np.concatenate(arc_weights)
            self.owners = np.concatenate(owners)
            self.kappa = np.concatenate(kappa, axis=-1)
        else:
            self.nodes = np.zeros(0, dtype=complex)
            self.weights = np.zeros(0, dtype=complex)
            self.owners = np.zeros(0, dtype=int)
            self.kappa = np.zeros((2, 2, 0), dtype=complex)
        self.k0 = k0
        self.n_boundary = nodes.size
        self.varsigma = nodes[self.owners]

    def integrate(self, z: complex, interior, sign: float):
        """
        J(s_j) for every boundary node
        :param z: Evaluation point of the operator
        :param interior: complex array (2, 2, M) of phi^- at the arc nodes
        :param sign: Sign of the Pi_d C sub-term (+1 unless boundary_sign selects "minus")
        :return: complex array (2, 2, nb)
        """
        e1 = np.exp(1j * (self.varsigma * np.conj(z) + np.conj(self.nodes) * z) / 2.0)
        e2 = np.exp(1j * (self.varsigma - self.nodes) * np.conj(z) / 2.0)
        first = e1 * matmul(np.conj(interior), off_diagonal(self.kappa)) * self.weights
        second = e2 * matmul(interior, diagonal(np.conj(self.kappa))) * np.conj(self.weights)
        density = first + sign * second

        result = np.zeros((2, 2, self.n_boundary), dtype=complex)
        for row in range(2):
            for column in range(2):
                result[row, column] = np.bincount(self.owners, weights=density[row, column].real,
                                                  minlength=self.n_boundary) \
                    + 1j * np.bincount(self.owners, weights=density[row, column].imag, minlength=self.n_boundary)
        return result


class TOperator:
    """
    T_{z,t} bound to scattering data, an evaluation point and a B^2 layout
    """

    def __init__(self, data: ScatteringData, z: complex, t: float, layout: BSpaceLayout, **kwargs):
        """
        :param data: Scattering data (evolved to t here when data.time differs)
        :param z: Evaluation point
        :param t: Time
        :param layout: B^2 layout (carries the disk and the k-grid)
        :param kwargs: data_scale ("consistent" or "printed"), boundary_sign ("plus" or "minus"), workers
        """
        self.z = complex(z)
        self.t = float(t)
        self.layout = layout
        self.disk = layout.disk
        self.options = SimpleNamespace(
            data_scale=kwargs.get("data_scale", SCALE_CONSISTENT),
            boundary_sign=kwargs.get("boundary_sign", "plus"),
            workers=kwargs.get("workers", 1),
        )

        if data.time != t:
            data = evolve_h(data, t)
        self.data = data

        scale = data_scale(self.options.data_scale)
        self.scale = scale
        kgrid = layout.kgrid
        mask = layout.exterior_mask
        self._k_ext = layout.k_exterior
        self._valid = data.diag_mask[mask]
        self._kappa_ext = off_diagonal(data.diag[:, :, mask]) * scale * self._valid * layout.exterior_weights
        self._phase_ext = np.exp(1j * (np.conj(self._k_ext) * self.z).real)
        self._area = kgrid.cell_area

        self.k0 = None
        self.arcs = None
        if not self.disk.is_empty:
            if data.boundary_block is None:
                raise MissingBoundaryBlock("A non-empty disk needs the boundary block of the scattering data")
            self.k0 = self.disk.select_k0(self.z)
            self.arcs = BoundaryArcs(self.disk, self.k0, data.boundary_block * scale)

        self._sign = -1.0 if self.options.boundary_sign == "minus" else 1.0
        self.negative_mode_energy = 0.0

    @property
    def dimension(self):
        return self.layout.dimension

    @property
    def boundary_sign(self):
        """
        Sign of the Pi_d C sub-term of the arc form
        """
        return self._sign

    @property
    def is_zero(self):
        """
        Whether the kernel data vanishes (then T = 0)
        """
        return not np.any(self._kappa_ext) and (self.arcs is None or not np.any(self.arcs.kappa))

    def _exterior_density(self, phi_ext):
        return self._phase_ext * matmul(np.conj(phi_ext), self._kappa_ext)

    def _boundary_density(self, coeffs, sign: float):
        interior = np.einsum("ijn,nm->ijm", coeffs, self.arcs.nodes[np.newaxis, :] ** np.arange(coeffs.shape[-1])[:, np.newaxis]) \
            if coeffs.shape[-1] else np.zeros((2, 2, self.arcs.nodes.size), dtype=complex)
        return self.arcs.integrate(self.z, interior, sign)

    def apply_matrix(self, phi_ext, coeffs, boundary=None):
        """
        T on full matrix functions
        :param phi_ext: complex array (2, 2, N_ext) of values at the exterior nodes
        :param coeffs: complex array (2, 2, N + 1) of interior Taylor coefficients
        :param boundary: Precomputed inner integrals J at the boundary nodes (2, 2, nb), arc form when omitted
        :return: Tuple (exterior values (2, 2, N_ext), interior coefficients (2, 2, N + 1))
        """
        layout = self.layout
        kgrid = layout.kgrid
        mask = layout.exterior_mask
        density = self._exterior_density(phi_ext)

        out_ext = np.zeros_like(density)
        grid_density = np.zeros(kgrid.shape, dtype=complex)
        for row in range(2):
            for column in range(2):
                if not np.any(density[row, column]):
                    continue
                grid_density[mask] = density[row, column]
                # (1/pi) int f / (s - k) = -cauchy(f)(k)
                out_ext[row, column] = -cauchy_values(grid_density, kgrid, self.options.workers)[mask]

        n_coeffs = layout.n_coeffs
        out_coeffs = np.zeros((2, 2, n_coeffs), dtype=complex)
        if n_coeffs:
            inverse_powers = self._k_ext[np.newaxis, :] ** (-np.arange(1, n_coeffs + 1)[:, np.newaxis])
            out_coeffs += np.einsum("ijm,nm->ijn", density, inverse_powers) * self._area / np.pi

        if self.arcs is not None:
            if boundary is None:
                boundary = self._boundary_density(coeffs, self._sign)
            nb = self.arcs.n_boundary
            spectrum = np.fft.fft(boundary, axis=-1) / nb
            modes = np.fft.fftfreq(nb, d=1.0 / nb).astype(int)
            radius = self.disk.radius

            nonnegative = modes >= 0
            negative = ~nonnegative
            total = np.sum(np.abs(spectrum) ** 2)
            self.negative_mode_energy = float(np.sum(np.abs(spectrum[..., negative]) ** 2) / total) if total else 0.0

            # (1/2 pi i) int_{dD} F ds / (s - k) = sum_{m>=0} F_m (k/A)^m inside, -sum_{m<0} F_m (k/A)^m outside
            for n in range(min(n_coeffs, int(np.max(modes)) + 1)):
                out_coeffs[:, :, n] += spectrum[:, :, n] / radius ** n
            negative_modes = modes[negative]
            powers = (self._k_ext[np.newaxis, :] / radius) ** negative_modes[:, np.newaxis]
            out_ext -= np.einsum("ijm,mk->ijk", spectrum[..., negative], powers)

        return out_ext, out_coeffs

    def apply(self, element: BElement):
        """
        T applied to an element of B^2
        :param element: BElement in this operator's layout
        :return: BElement
        """
        layout = self.layout
        phi_ext = expand_channels(element.exterior_values(), layout)
        coeffs = expand_channels(element.interior_coeffs, layout)
        out_ext, out_coeffs = self.apply_matrix(phi_ext, coeffs)
        exterior, tail = layout.split_tail(reduce_channels(out_ext, layout))
        return BElement(layout, exterior, reduce_channels(out_coeffs, layout), tail)

    def apply_identity(self):
        """
        T applied to the constant identity matrix
        :return: BElement
        """
        layout = self.layout
        exterior, coeffs = layout.identity()
        out_ext, out_coeffs = self.apply_matrix(expand_channels(exterior, layout), expand_channels(coeffs, layout))
        ext_part, tail = layout.split_tail(reduce_channels(out_ext, layout))
        return BElement(layout, ext_part, reduce_channels(out_coeffs, layout), tail)

    def reconstruction_matrix(self, v_ext, v_coeffs):
        """
        Bracket of the reconstruction formula for v = w + I:
        (1/pi) int_{C minus D} e^{i Re(conj(s) z)} conj(v) Pi_o h dsigma + (1/2 pi i) int_{dD} J(s) ds
        :param v_ext: complex array (2, 2, N_ext)
        :param v_coeffs: complex array (2, 2, N + 1)
        :return: complex 2x2 matrix
        """
        density = self._exterior_density(v_ext)
        result = density.sum(axis=-1) * self._area / np.pi
        if self.arcs is not None:
            boundary = self._boundary_density(v_coeffs, self._sign)
            nb = self.arcs.n_boundary
            ds = 1j * self.disk.nodes * (2.0 * np.pi / nb)
            result = result + (boundary * ds).sum(axis=-1) / (2j * np.pi)
        return result

    def __repr__(self):
        return f"<TOperator z={self.z} t={self.t} k0={self.k0} dimension={self.dimension}>"


def build_T(data: ScatteringData, z: complex, t: float, disk: DiskSpec, layout: BSpaceLayout | None = None, **kwargs):
    """
    Builds T_{z,t}

    :param data: Scattering data with diagonal samples (and the boundary block for a non-empty disk)
    :param z: Evaluation point
    :param t: Time
    :param disk: Disk D (may be empty)
    :param layout: B^2 layout, built from data.kgrid and disk when omitted
    :param kwargs: modes, beta_radius, full_matrix (layout), data_scale, boundary_sign, workers

    :raises: **MissingBoundaryBlock** -- If the disk is non-empty and the data has no boundary block

    :return: TOperator
    """
    if layout is None:
        layout = BSpaceLayout(data.kgrid, disk, kwargs.get("modes"), kwargs.get("beta_radius"),
                              kwargs.get("full_matrix", False))
    return TOperator(data, z, t, layout, **kwargs)
