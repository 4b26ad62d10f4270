"""
Discrete representation of the Hilbert space B^2: exterior grid values, analytic interior Taylor
coefficients and a far-field tail coefficient for c * beta(k) / k, per matrix channel.
"""
import numpy as np

from dsii.lib.Errors import GridError
from dsii.lib.grid.ComplexGrid import ComplexGrid
from dsii.lib.grid.DiskSpec import DiskSpec

# matrix entries carried by each channel
REDUCED_CHANNELS = ((0, 0), (0, 1))
FULL_CHANNELS = ((0, 0), (0, 1), (1, 0), (1, 1))

TAIL_ANNULUS = 0.75
CELL_SUBSAMPLES = 64
CUT_CELL_DEGREE = 3


def _monomials(points, degree: int):
    """
    Rows x^i y^j, i + j <= degree, ordered by total degree
    """
    return np.vstack([points.real ** (total - j) * points.imag ** j
                      for total in range(degree + 1) for j in range(total + 1)])


def exterior_weights(kgrid: ComplexGrid, radius: float, subsamples: int = CELL_SUBSAMPLES):
    """
    Quadrature weights of C minus D at the exterior nodes, in units of the cell area.
    Cells cut by the circle hand the mass of their outside part to nearby exterior nodes so that polynomials up to
    degree CUT_CELL_DEGREE are integrated exactly over that part (lower degrees, then the nearest node, when too
    few neighbours are exterior).
    :param kgrid: Spectral grid
    :param radius: Disk radius (0 for the empty disk)
    :param subsamples: Sub-cell samples per side used for the moments of the outside part
    :return: float array over the nodes |k| > radius in row-major order
    """
    k = kgrid.nodes
    exterior = np.abs(k) > radius
    weights = exterior.astype(float)
    if radius <= 0:
        return weights[exterior]

    h = kgrid.spacing
    offsets = ((np.arange(subsamples) + 0.5) / subsamples - 0.5) * h
    sub = (offsets[np.newaxis, :] + 1j * offsets[:, np.newaxis]).ravel()

    cut = []
    for row, column in zip(*np.nonzero(np.abs(np.abs(k) - radius) < h)):
        samples = k[row, column] + sub
        outside = np.abs(samples) > radius
        if 0 < np.count_nonzero(outside) < outside.size:
            cut.append((row, column, outside.mean(), samples[outside]))
            weights[row, column] = 0.0

    n = kgrid.n_per_side
    reach = CUT_CELL_DEGREE
    for row, column, mass, samples in cut:
        centroid = samples.mean()
        target = mass * _monomials((samples - centroid) / h, CUT_CELL_DEGREE).mean(axis=-1)

        rows = slice(max(row - reach, 0), min(row + reach + 1, n))
        columns = slice(max(column - reach, 0), min(column + reach + 1, n))
        near = exterior[rows, columns]
        moments = _monomials((k[rows, columns][near] - centroid) / h, CUT_CELL_DEGREE)

        for degree in range(CUT_CELL_DEGREE, 0, -1):
            order = (degree + 1) * (degree + 2) // 2
            if np.linalg.matrix_rank(moments[:order]) == order:
                share = np.linalg.lstsq(moments[:order], target[:order], rcond=None)[0]
                break
        else:
            share = np.zeros(moments.shape[-1])
            share[np.argmin(np.abs(k[rows, columns][near] - centroid))] = mass
        weights[rows, columns][near] += share
    return weights[exterior]


def beta(k, radius: float):
    """
    Smooth radial cutoff: 0 for |k| <= 1.5 radius, 1 for |k| >= 2.5 radius, C-infinity blend in between
    :param k: Complex scalar or array
    :param radius: Reference radius (the disk radius)
    :return: float or float array
    """
    s = (np.abs(k) - 1.5 * radius) / radius
    s = np.clip(s, 0.0, 1.0)

    def bump(x):
        with np.errstate(divide="ignore", over="ignore"):
            return np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)

    rising, falling = bump(s), bump(1.0 - s)
    result = rising / (rising + falling)
    return float(result) if np.ndim(result) == 0 else result


class BSpaceLayout:
    """
    Index layout of B^2 elements on a truncated k-grid
    """

    def __init__(self, kgrid: ComplexGrid, disk: DiskSpec, modes: int | None = None,
                 beta_radius: float | None = None, full_matrix: bool = False):
        """
        :param kgrid: Spectral grid
        :param disk: Disk D (empty disk allowed)
        :param modes: Highest interior Taylor index N (default n_boundary/2 - 1, no modes for the empty disk)
        :param beta_radius: Reference radius of beta (default: disk radius, or kgrid.extent/8 for the empty disk)
        :param full_matrix: Carry all four matrix entries instead of the two symmetry-reduced channels
        """
        self._kgrid = kgrid
        self._disk = disk

        if disk.is_empty:
            modes = -1
        elif modes is None or modes < 0:
            modes = disk.n_boundary // 2 - 1
        self._modes = int(modes)

        if beta_radius is None or beta_radius <= 0:
            beta_radius = disk.radius if not disk.is_empty else kgrid.extent / 8.0
        self._beta_radius = float(beta_radius)
        if 2.5 * self._beta_radius >= TAIL_ANNULUS * kgrid.extent:
            raise GridError("k-grid too small: beta must reach one inside the tail annulus")

        self._channels = FULL_CHANNELS if full_matrix else REDUCED_CHANNELS

        k = kgrid.nodes
        self._exterior_mask = np.abs(k) > disk.radius
        self._k_ext = k[self._exterior_mask]
        self._weights = exterior_weights(kgrid, disk.radius)
        self._tail = beta(self._k_ext, self._beta_radius) / self._k_ext
        self._annulus = np.abs(self._k_ext) >= TAIL_ANNULUS * kgrid.extent
        self._tail_norm2 = float(np.sum(np.abs(self._tail) ** 2) * kgrid.cell_area)

    @property
    def kgrid(self):
        return self._kgrid

    @property
    def disk(self):
        return self._disk

    @property
    def modes(self):
        return self._modes

    @property
    def n_coeffs(self):
        return self._modes + 1

    @property
    def channels(self):
        return self._channels

    @property
    def full_matrix(self):
        return len(self._channels) == 4

    @property
    def beta_radius(self):
        return self._beta_radius

    @property
    def exterior_mask(self):
        return self._exterior_mask

    @property
    def k_exterior(self):
        return self._k_ext

    @property
    def exterior_weights(self):
        """
        Quadrature weights of C minus D at the exterior nodes relative to the cell area
        """
        return self._weights

    @property
    def n_exterior(self):
        return self._k_ext.size

    @property
    def tail_function(self):
        """
        beta(k)/k at the exterior nodes
        """
        return self._tail

    @property
    def tail_norm2(self):
        return self._tail_norm2

    @property
    def annulus(self):
        return self._annulus

    @property
    def dimension(self):
        """
        Real dimension 2 * channels * (N_ext + (N + 1) + 1)
        """
        return 2 * len(self._channels) * (self.n_exterior + self.n_coeffs + 1)

    def zero(self):
        return BElement(self, np.zeros((len(self._channels), self.n_exterior), dtype=complex),
                        np.zeros((len(self._channels), self.n_coeffs), dtype=complex),
                        np.zeros(len(self._channels), dtype=complex))

    def identity(self):
        """
        Exterior values and coefficients of the constant identity matrix (not an element of B^2,
        used as the right-hand side source)
        """
        exterior = np.zeros((len(self._channels), self.n_exterior), dtype=complex)
        coeffs = np.zeros((len(self._channels), self.n_coeffs), dtype=complex)
        for index, (row, column) in enumerate(self._channels):
            if row == column:
                exterior[index] = 1.0
                if self.n_coeffs:
                    coeffs[index, 0] = 1.0
        return exterior, coeffs

    def split_tail(self, values):
        """
        Extracts the tail coefficient by least squares against beta(k)/k on the outermost annulus
        :param values: complex array (channels, N_ext) of full exterior values
        :return: Tuple (exterior remainder, tail coefficients)
        """
        basis = self._tail[self._annulus]
        tail = values[:, self._annulus] @ np.conj(basis) / np.vdot(basis, basis).real
        return values - tail[:, np.newaxis] * self._tail[np.newaxis, :], tail

    def random(self, rng: np.random.Generator):
        element = self.zero()
        shape_ext, shape_coef = element.exterior.shape, element.interior_coeffs.shape
        n = len(self._channels)
        return BElement(
            self,
            rng.standard_normal(shape_ext) + 1j * rng.standard_normal(shape_ext),
            (rng.standard_normal(shape_coef) + 1j * rng.standard_normal(shape_coef))
            / np.maximum(self._disk.radius, 1.0) ** np.arange(self.n_coeffs),
            rng.standard_normal(n) + 1j * rng.standard_normal(n),
        )

    def __repr__(self):
        return (f"<BSpaceLayout n_exterior={self.n_exterior} modes={self._modes} "
                f"channels={len(self._channels)} dimension={self.dimension}>")


class BElement:
    """
    Element of B^2 (immutable by convention)
    """

    def __init__(self, layout: BSpaceLayout, exterior, interior_coeffs, tail_coeff):
        self._layout = layout
        self._exterior = np.asarray(exterior, dtype=complex)
        self._interior_coeffs = np.asarray(interior_coeffs, dtype=complex)
        self._tail_coeff = np.asarray(tail_coeff, dtype=complex)

        n = len(layout.channels)
        if self._exterior.shape != (n, layout.n_exterior) \
                or self._interior_coeffs.shape != (n, layout.n_coeffs) \
                or self._tail_coeff.shape != (n,):
            raise GridError("BElement parts do not match the layout")

    @property
    def layout(self):
        return self._layout

    @property
    def exterior(self):
        return self._exterior

    @property
    def interior_coeffs(self):
        return self._interior_coeffs

    @property
    def tail_coeff(self):
        return self._tail_coeff

    def exterior_values(self):
        """
        Full function values at exterior nodes (grid part plus tail)
        """
        return self._exterior + self._tail_coeff[:, np.newaxis] * self._layout.tail_function[np.newaxis, :]

    def interior_values(self, k):
        """
        Evaluates the analytic interior part sum c_n k^n
        :param k: complex array of points in the closed disk
        :return: complex array (channels, len(k))
        """
        k = np.asarray(k, dtype=complex).ravel()
        if self._layout.n_coeffs == 0:
            return np.zeros((len(self._layout.channels), k.size), dtype=complex)
        powers = k[np.newaxis, :] ** np.arange(self._layout.n_coeffs)[:, np.newaxis]
        return self._interior_coeffs @ powers

    def norm(self):
        """
        B^2 norm: exterior L^2 with cell area, A^{2n} weighted coefficients and the tail norm
        """
        layout = self._layout
        weights = layout.disk.radius ** (2 * np.arange(layout.n_coeffs))
        total = np.sum(np.abs(self._exterior) ** 2) * layout.kgrid.cell_area \
            + np.sum(weights[np.newaxis, :] * np.abs(self._interior_coeffs) ** 2) \
            + np.sum(np.abs(self._tail_coeff) ** 2) * layout.tail_norm2
        return float(np.sqrt(total))

    def scaled(self, factor):
        return BElement(self._layout, factor * self._exterior, factor * self._interior_coeffs,
                        factor * self._tail_coeff)

    def __add__(self, other):
        return BElement(self._layout, self._exterior + other.exterior,
                        self._interior_coeffs + other.interior_coeffs, self._tail_coeff + other.tail_coeff)

    def __sub__(self, other):
        return self + other.scaled(-1.0)

    def __repr__(self):
        return f"<BElement channels={len(self._layout.channels)} norm={self.norm():.6e}>"


def pack(element: BElement):
    """
    Interleaves (Re, Im) over exterior values, interior coefficients and tail coefficient, channel by channel
    :param element: BElement
    :return: float array of length layout.dimension
    """
    parts = np.concatenate([element.exterior, element.interior_coeffs, element.tail_coeff[:, np.newaxis]], axis=1)
    return parts.ravel().view(np.float64).copy()


def unpack(vector, layout: BSpaceLayout):
    """
    Inverse of :func:`pack`
    :param vector: float array of length layout.dimension
    :param layout: Target layout
    :raises: **GridError** -- On dimension mismatch
    :return: BElement
    """
    vector = np.ascontiguousarray(vector, dtype=np.float64)
    if vector.shape != (layout.dimension,):
        raise GridError(f"Vector of length {vector.size} does not match dimension {layout.dimension}")
    parts = vector.view(np.complex128).reshape(len(layout.channels), layout.n_exterior + layout.n_coeffs + 1)
    n_ext = layout.n_exterior
    return BElement(layout, parts[:, :n_ext].copy(), parts[:, n_ext:n_ext + layout.n_coeffs].copy(),
                    parts[:, -1].copy())


def rank_one_tail(layout: BSpaceLayout, g, values):
    """
    Rank-one far-field operator P f = -(beta(k)/k) int g f dsigma, with the integral taken over the exterior nodes
    :param layout: Layout providing the grid and beta
    :param g: Complex weight at the exterior nodes
    :param values: Complex function values at the exterior nodes (per channel)
    :return: Tail coefficients (one per channel) of P f
    """
    return -np.atleast_2d(values) @ np.asarray(g) * layout.kgrid.cell_area
