import numpy as np

from dsii.lib.grid.ComplexGrid import ComplexGrid
from dsii.lib.grid.DiskSpec import DiskSpec


class ScatteringData:
    """
    Matrix scattering data h(s, k, t): diagonal samples h(k, k, t) on the exterior nodes of a k-grid
    and the boundary block h(s', s, t) for all ordered pairs of boundary nodes
    """

    def __init__(self, kgrid: ComplexGrid, disk: DiskSpec, diag, diag_mask, boundary_block=None,
                 amplitude: float = 1.0, time: float = 0.0):
        """
        :param kgrid: Spectral grid of the diagonal samples
        :param disk: Disk D the data was computed for
        :param diag: complex array (2, 2, n, n) of h(k, k, t) (zero where not sampled)
        :param diag_mask: boolean array (n, n), True where a valid sample exists
        :param boundary_block: complex array (2, 2, nb, nb) indexed [.., s' index, s index] or None
        :param amplitude: Amplitude a the potential was scaled with
        :param time: Time t of the data
        """
        self.kgrid = kgrid
        self.disk = disk
        self.diag = np.asarray(diag, dtype=complex)
        self.diag_mask = np.asarray(diag_mask, dtype=bool)
        self.boundary_block = None if boundary_block is None else np.asarray(boundary_block, dtype=complex)
        self.amplitude = float(amplitude)
        self.time = float(time)

    @property
    def has_boundary_block(self):
        return self.boundary_block is not None

    def copy(self, **changes):
        data = ScatteringData(
            self.kgrid, self.disk, self.diag.copy(), self.diag_mask.copy(),
            None if self.boundary_block is None else self.boundary_block.copy(),
            self.amplitude, self.time,
        )
        for key, value in changes.items():
            setattr(data, key, value)
        return data

    def max_abs(self):
        peak = float(np.max(np.abs(self.diag))) if self.diag.size else 0.0
        if self.boundary_block is not None and self.boundary_block.size:
            peak = max(peak, float(np.max(np.abs(self.boundary_block))))
        return peak

    def scaled(self, factor: complex):
        return self.copy(diag=self.diag * factor,
                         boundary_block=None if self.boundary_block is None else self.boundary_block * factor)

    def serialize(self):
        return {
            "kgrid": self.kgrid.serialize(),
            "disk": self.disk.serialize(),
            "amplitude": self.amplitude,
            "time": self.time,
            "has_boundary_block": self.has_boundary_block,
            "invalid_samples": int(np.sum(~self.diag_mask & (np.abs(self.kgrid.nodes) > self.disk.radius))),
        }

    def __repr__(self):
        return (f"<ScatteringData n={self.kgrid.n_per_side} radius={self.disk.radius} t={self.time} "
                f"boundary={self.has_boundary_block}>")


def empty_data(kgrid: ComplexGrid, disk: DiskSpec, amplitude: float = 1.0):
    """
    Zero data (the data of the zero potential)
    """
    n = kgrid.n_per_side
    block = None if disk.is_empty else np.zeros((2, 2, disk.n_boundary, disk.n_boundary), dtype=complex)
    return ScatteringData(kgrid, disk, np.zeros((2, 2, n, n), dtype=complex),
                          np.abs(kgrid.nodes) > disk.radius, block, amplitude, 0.0)
