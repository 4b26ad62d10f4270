"""
Scan of the smallest singular value of I + T_{z,t} over a space-time box; the near-singular cells are the
numerical shadow of the blow-up set.
"""
import logging
from types import SimpleNamespace

import numpy as np
import scipy.ndimage as ndimage

from dsii.lib.Errors import Inconclusive
from dsii.lib.bspace.BSpace import BSpaceLayout
from dsii.lib.evolution.Evolve import evolve_h
from dsii.lib.forward.Scattering import forward_transform
from dsii.lib.grid.ComplexGrid import ComplexField, ComplexGrid
from dsii.lib.grid.DiskSpec import DiskSpec
from dsii.lib.inverse.Reconstruct import resolve_disk
from dsii.lib.inverse.SolveW import NEAR_SINGULAR, packed_operator
from dsii.lib.inverse.TOperator import TOperator
from dsii.lib.parallel.ParallelSweep import parallel_map
from dsii.lib.solvers import RealLinearSolver

logger = logging.getLogger(__name__)


class ScanBox:
    """
    Space-time box [-extent, extent]^2 x [t_min, t_max] sampled on n_z x n_z cell centers and n_t times
    """

    def __init__(self, z_extent: float, n_z: int, t_min: float = 0.0, t_max: float = 0.0, n_t: int = 1):
        self.z_grid = ComplexGrid(n_z, z_extent)
        self.times = np.linspace(t_min, t_max, n_t) if n_t > 1 else np.array([t_min])

    @property
    def z_extent(self):
        return self.z_grid.extent

    @property
    def n_z(self):
        return self.z_grid.n_per_side

    def serialize(self):
        return {"z_extent": self.z_extent, "n_z": self.n_z, "t_min": float(self.times[0]),
                "t_max": float(self.times[-1]), "n_t": int(self.times.size)}

    def __repr__(self):
        return f"<ScanBox z_extent={self.z_extent} n_z={self.n_z} times={self.times.size}>"


class BlowupMap:
    """
    sigma_min(I + T_{z,t}) per cell, the flagged cells and their connected components per time slice
    """

    def __init__(self, box: ScanBox, sigma_min, tau: float, thresholds=None):
        """
        :param box: Scanned box
        :param sigma_min: float array (n_t, n_z, n_z)
        :param tau: Absolute threshold (nan when per-cell relative thresholds are used)
        :param thresholds: Optional per-cell thresholds replacing tau
        """
        self.box = box
        self.sigma_min = np.asarray(sigma_min, dtype=float)
        self.tau = float(tau)
        self.thresholds = np.full(self.sigma_min.shape, self.tau) if thresholds is None else np.asarray(thresholds)
        self.flagged = self.sigma_min <= self.thresholds
        self.components = []
        for flags in self.flagged:
            # default structuring element: 4-neighbourhood
            labels, count = ndimage.label(flags)
            self.components.append(SimpleNamespace(labels=labels, count=int(count)))

    @property
    def touches_boundary(self):
        edge = self.box.z_grid.boundary_mask(1)
        return bool(np.any(self.flagged[:, edge]))

    @property
    def is_empty(self):
        return not bool(np.any(self.flagged))

    def flagged_points(self):
        """
        :return: List of (z, t) of the flagged cells
        """
        nodes = self.box.z_grid.nodes
        slices, rows, columns = np.nonzero(self.flagged)
        return [(complex(nodes[r, c]), float(self.box.times[s])) for s, r, c in zip(slices, rows, columns)]

    def max_jump(self):
        """
        Largest difference of sigma_min between 4-neighbouring cells
        """
        jumps = [np.max(np.abs(np.diff(self.sigma_min, axis=axis))) for axis in (1, 2)
                 if self.sigma_min.shape[axis] > 1]
        return float(max(jumps)) if jumps else 0.0

    def serialize(self):
        return {
            "box": self.box.serialize(),
            "tau": self.tau,
            "flagged_cells": int(np.sum(self.flagged)),
            "components": [component.count for component in self.components],
            "touches_boundary": self.touches_boundary,
            "sigma_min_range": [float(np.min(self.sigma_min)), float(np.max(self.sigma_min))],
        }

    def __repr__(self):
        return f"<BlowupMap flagged={int(np.sum(self.flagged))} touches_boundary={self.touches_boundary}>"


def cell_sigma(data, z: complex, t: float, layout: BSpaceLayout, **kwargs):
    """
    sigma_min and the norm estimate of I + T_{z,t}
    """
    operator = TOperator(data, z, t, layout, **{key: kwargs[key] for key in ("data_scale", "boundary_sign")
                                                if key in kwargs})
    if operator.is_zero:
        return 1.0, 1.0
    apply = packed_operator(operator)
    dimension = operator.dimension
    sigma = RealLinearSolver.sigma_min(apply, dimension, mode=kwargs.get("mode", RealLinearSolver.AUTO),
                                       dense_limit=kwargs.get("dense_limit", 4096))
    norm = RealLinearSolver.norm_estimate(lambda vector: vector + apply(vector), dimension)
    return sigma, norm


def blowup_scan(q0: ComplexField | None, box: ScanBox, disk: DiskSpec, tau: float | None = None, **kwargs):
    """
    Maps the near-singular cells of I + T_{z,t} over a box

    :param q0: Initial potential (amplitude one); ignored when data is given
    :param box: Space-time box
    :param disk: Disk D of the full-disk pipeline
    :param tau: Absolute sigma_min threshold; default near_singular (1e-6) times the norm estimate per cell
    :param kwargs: Keyword Args, see below

    :raises: **Inconclusive** -- If flagged cells touch the spatial boundary of the box (the map is attached)
    :raises: **ConfigError** -- If disk lies on another circle than the disk of the given data

    :return: BlowupMap

    kwargs:
        data: Precomputed scattering data at t = 0
        kgrid: Spectral grid for the forward transform (required without data)
        tol: Forward solver tolerance (default 1e-10)
        t_max: Largest admissible time
        modes, beta_radius: B^2 layout options
        data_scale, boundary_sign, mode, dense_limit, near_singular: Operator and solver options
        threads: Number of worker threads over the z nodes
        on_progress_update: Function that should be called on progress update (called like: func(current, total))
    """
    data = kwargs.get("data")
    if data is None:
        data = forward_transform(q0, kwargs["kgrid"], disk, kwargs.get("tol", 1e-10),
                                 threads=kwargs.get("threads", 1))
    layout = BSpaceLayout(data.kgrid, resolve_disk(data, disk), kwargs.get("modes"), kwargs.get("beta_radius"))
    near_singular = kwargs.get("near_singular", NEAR_SINGULAR)
    on_progress_update = kwargs.get("on_progress_update", None)
    nodes = box.z_grid.nodes.ravel()
    cell_kwargs = {key: value for key, value in kwargs.items() if key != "data"}

    sigma = np.zeros((box.times.size,) + box.z_grid.shape)
    thresholds = np.zeros_like(sigma)
    for index, t in enumerate(box.times):
        data_t = evolve_h(data, float(t), kwargs.get("t_max"))
        outcomes = parallel_map(lambda z: cell_sigma(data_t, z, float(t), layout, **cell_kwargs), nodes,
                                threads=kwargs.get("threads", 1))
        for cell, outcome in enumerate(outcomes):
            if outcome.error is not None:
                raise outcome.error
            row, column = divmod(cell, box.n_z)
            sigma[index, row, column], norm = outcome.result
            thresholds[index, row, column] = near_singular * norm
        if on_progress_update is not None:
            on_progress_update(index + 1, box.times.size)

    blowup_map = BlowupMap(box, sigma, float("nan"), thresholds) if tau is None else BlowupMap(box, sigma, tau)

    logger.info("blow-up scan: %r", blowup_map)
    if blowup_map.touches_boundary:
        raise Inconclusive("Flagged cells touch the boundary of the scan box", blowup_map)
    return blowup_map
