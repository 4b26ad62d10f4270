import numpy as np

from dsii.lib.Errors import GridError


class ComplexGrid:
    """
    Uniform square grid over [-L, L)^2 with nodes z = x + iy at cell centers.
    Values on the grid are stored as arrays of shape (n, n) indexed [row (y), column (x)]
    """

    def __init__(self, n_per_side: int, extent: float):
        """
        Initializes a grid, use :func:`make_grid` for validated construction
        :param n_per_side: Number of nodes per side (even power of two)
        :param extent: Half width L of the covered square
        """
        self._n = int(n_per_side)
        self._extent = float(extent)
        self._spacing = 2.0 * self._extent / self._n

    @property
    def n_per_side(self):
        return self._n

    @property
    def extent(self):
        return self._extent

    @property
    def spacing(self):
        return self._spacing

    @property
    def cell_area(self):
        return self._spacing ** 2

    @property
    def shape(self):
        return self._n, self._n

    @property
    def size(self):
        return self._n * self._n

    @property
    def axis(self):
        """
        Cell-center coordinates along one axis
        :return: array of length n
        """
        return -self._extent + (np.arange(self._n) + 0.5) * self._spacing

    @property
    def nodes(self):
        """
        Complex node coordinates in row-major order
        :return: complex array of shape (n, n)
        """
        x = self.axis
        return x[np.newaxis, :] + 1j * x[:, np.newaxis]

    @property
    def frequencies(self):
        """
        Angular Fourier frequencies (xi1 along columns, xi2 along rows)
        :return: Tuple of arrays of shape (n, n)
        """
        xi = 2.0 * np.pi * np.fft.fftfreq(self._n, d=self._spacing)
        return xi[np.newaxis, :] * np.ones((self._n, 1)), xi[:, np.newaxis] * np.ones((1, self._n))

    def zeros(self):
        return np.zeros(self.shape, dtype=complex)

    def boundary_mask(self, width: int = 1):
        """
        Mask of the outermost cell rings
        :param width: Number of rings
        :return: boolean array of shape (n, n)
        """
        mask = np.zeros(self.shape, dtype=bool)
        mask[:width, :] = True
        mask[-width:, :] = True
        mask[:, :width] = True
        mask[:, -width:] = True
        return mask

    def same_as(self, other):
        return self._n == other.n_per_side and np.isclose(self._extent, other.extent, rtol=1e-12, atol=1e-12)

    def serialize(self):
        return {"n_per_side": self._n, "extent": self._extent}

    @staticmethod
    def deserialize(serialized_obj: dict):
        return make_grid(serialized_obj["extent"], serialized_obj["n_per_side"])

    def __repr__(self):
        return f"<ComplexGrid n_per_side={self._n} extent={self._extent} spacing={self._spacing}>"


def make_grid(extent: float, n: int):
    """
    Creates a ComplexGrid after checking its parameters
    :param extent: Half width L > 0
    :param n: Nodes per side, an even power of two
    :raises: **GridError** -- If n is not a power of two or extent is not positive
    :return: ComplexGrid
    """
    if not float(extent) > 0:
        raise GridError(f"Grid extent must be positive, got {extent}")
    if int(n) != n or n < 2 or (int(n) & (int(n) - 1)) != 0:
        raise GridError(f"Grid size must be an even power of two, got {n}")
    return ComplexGrid(int(n), float(extent))


class ComplexField:
    """
    Complex scalar field on a ComplexGrid (houses q, phi and the entries of matrix fields)
    """

    def __init__(self, grid: ComplexGrid, values=None):
        self._grid = grid
        if values is None:
            values = grid.zeros()
        values = np.asarray(values, dtype=complex)
        if values.shape != grid.shape:
            raise GridError(f"Field shape {values.shape} does not match grid shape {grid.shape}")
        self._values = values

    @property
    def grid(self):
        return self._grid

    @property
    def values(self):
        return self._values

    def is_finite(self):
        return bool(np.all(np.isfinite(self._values)))

    def boundary_ratio(self, width: int = 1):
        """
        Ratio of the largest boundary magnitude to the largest magnitude overall
        :param width: Number of boundary rings inspected
        :return: float (0 for the zero field)
        """
        peak = np.max(np.abs(self._values))
        if peak == 0:
            return 0.0
        return float(np.max(np.abs(self._values[self._grid.boundary_mask(width)])) / peak)

    def l2_norm(self):
        return float(np.sqrt(np.sum(np.abs(self._values) ** 2) * self._grid.cell_area))

    def copy(self):
        return ComplexField(self._grid, self._values.copy())

    def with_values(self, values):
        return ComplexField(self._grid, values)

    def __repr__(self):
        return f"<ComplexField n={self._grid.n_per_side} extent={self._grid.extent} max={np.max(np.abs(self._values)):.3e}>"


PotentialField = ComplexField


def gaussian(grid: ComplexGrid, amplitude: float = 1.0, width: float = 1.0, center: complex = 0j):
    """
    Gaussian-class potential a * exp(-|z - center|^2 / width^2)
    :param grid: Grid to sample on
    :param amplitude: Complex amplitude a
    :param width: Width of the Gaussian
    :param center: Center of the Gaussian
    :return: PotentialField
    """
    z = grid.nodes - center
    return ComplexField(grid, amplitude * np.exp(-np.abs(z) ** 2 / width ** 2))


def gaussian_sum(grid: ComplexGrid, components):
    """
    Linear combination of Gaussians
    :param grid: Grid to sample on
    :param components: Iterable of (amplitude, width, center) tuples
    :return: PotentialField
    """
    values = grid.zeros()
    for amplitude, width, center in components:
        values += gaussian(grid, amplitude, width, center).values
    return ComplexField(grid, values)
