"""
Re-checks the outputs of a run directory described by its manifest.json
"""
import logging
from pathlib import Path

import numpy as np

from dsii.lib.evolution.Evolve import evolve_h
from dsii.lib.io.DataFormats import read_data, read_manifest
from dsii.lib.io.FieldFormats import read_field
from dsii.lib.validation.Duality import duality_check
from dsii.lib.validation.Residual import dsii_residual, ist_residual
from dsii.lib.validation.Symmetry import symmetry_check

logger = logging.getLogger(__name__)

SYMMETRY_TOLERANCE = 1e-8
DUALITY_TOLERANCE = 1e-2
RESIDUAL_TOLERANCE = 1e-2


def _resolution(grid):
    return None if grid is None else {"n": grid.n_per_side, "extent": grid.extent}


def make_verdict(value: float, tolerance: float, grid=None, kgrid=None):
    """
    :param grid: Physical grid the value was computed on (None if not involved)
    :param kgrid: Spectral grid the value was computed on (None if not involved)
    """
    return {"value": value, "tolerance": tolerance, "passed": bool(np.isfinite(value) and value <= tolerance),
            "grid": _resolution(grid), "kgrid": _resolution(kgrid)}


def validate_run(directory, **kwargs):
    """
    Runs every check the manifest of a run directory allows

    :param directory: Run directory with manifest.json
    :param kwargs: Keyword Args, see below
    :return: dict of verdicts (each with value, tolerance, passed and the grid / k-grid resolution it was taken at)

    kwargs:
        symmetry_tolerance, duality_tolerance, residual_tolerance: Verdict tolerances
        duality: Run the duality check (default True)
        ist_residual: Reconstruct around the run time and check the PDE residual (default False)
        path, phase, threads, mode: Forward options for the duality check
        reconstruct_options: Options of :func:`~dsii.lib.inverse.Reconstruct.reconstruct` for ist_residual
    """
    directory = Path(directory)
    manifest = read_manifest(directory)
    verdicts = {}

    data = None
    if manifest.get("data"):
        data = read_data(directory / manifest["data"])
        peak = data.max_abs()
        deviation = symmetry_check(data)
        verdicts["symmetry"] = make_verdict(deviation / peak if peak > 0 else deviation,
                                        kwargs.get("symmetry_tolerance", SYMMETRY_TOLERANCE), kgrid=data.kgrid)

    q = read_field(directory / manifest["q"]) if manifest.get("q") else None
    t = float(manifest.get("t", 0.0))
    if data is not None and q is not None and kwargs.get("duality", True):
        if q.is_finite():
            data_t = evolve_h(data, t)
            options = {key: value for key, value in kwargs.items() if key in ("path", "phase", "threads", "mode")}
            verdicts["duality"] = make_verdict(duality_check(q, data_t, **options),
                                           kwargs.get("duality_tolerance", DUALITY_TOLERANCE), q.grid, data.kgrid)
        else:
            logger.warning("skipping duality: reconstructed field has near-singular nodes")

    if data is not None and q is not None and kwargs.get("ist_residual", False):
        value = ist_residual(data, q.grid, t, **kwargs.get("reconstruct_options", {}))
        verdicts["ist_residual"] = make_verdict(value, kwargs.get("residual_tolerance", RESIDUAL_TOLERANCE),
                                            q.grid, data.kgrid)

    slices = manifest.get("slices", [])
    if len(slices) >= 3:
        q_series = [read_field(directory / name) for name in slices]
        phi_series = [read_field(directory / name) for name in manifest.get("phi_slices", [])]
        times = np.asarray(manifest["times"], dtype=float)
        dt = float(times[1] - times[0])
        if len(phi_series) == len(q_series) and np.allclose(np.diff(times), dt):
            verdicts["residual"] = make_verdict(dsii_residual(q_series, phi_series, dt),
                                            kwargs.get("residual_tolerance", RESIDUAL_TOLERANCE), q_series[0].grid)

    for name, verdict in verdicts.items():
        logger.info("%s: %.3e (tolerance %.1e, grid %s, kgrid %s) %s", name, verdict["value"], verdict["tolerance"],
                    verdict["grid"], verdict["kgrid"], "passed" if verdict["passed"] else "FAILED")
    return verdicts
