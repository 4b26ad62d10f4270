import logging

import numpy as np

from dsii.lib.forward.LippmannSchwinger import ls_sigma_min
from dsii.lib.grid.ComplexGrid import ComplexField
from dsii.lib.parallel.ParallelSweep import parallel_map

logger = logging.getLogger(__name__)

TAU_FRACTION = 1e-3


class ExceptionalScan:
    """
    Smallest singular values of the discrete Lippmann-Schwinger operator over a set of spectral parameters
    """

    def __init__(self, k_samples, sigma_min, tau_exc: float):
        self.k_samples = np.asarray(k_samples, dtype=complex)
        self.sigma_min = np.asarray(sigma_min, dtype=float)
        self.tau_exc = float(tau_exc)

    @property
    def flagged(self):
        return self.k_samples[self.sigma_min < self.tau_exc]

    @property
    def covering_radius(self):
        """
        Smallest disk radius containing every flagged sample (0 when nothing is flagged)
        """
        flagged = self.flagged
        return float(np.max(np.abs(flagged))) if flagged.size else 0.0

    def serialize(self):
        return {
            "tau_exc": self.tau_exc,
            "samples": len(self.k_samples),
            "flagged": [[float(k.real), float(k.imag)] for k in self.flagged],
            "covering_radius": self.covering_radius,
            "sigma_min_range": [float(np.min(self.sigma_min)), float(np.max(self.sigma_min))]
            if self.sigma_min.size else [],
        }

    def __repr__(self):
        return f"<ExceptionalScan samples={len(self.k_samples)} flagged={len(self.flagged)} tau={self.tau_exc:.3e}>"


def k_region_samples(extent: float, resolution: int):
    """
    Square sample set [-extent, extent]^2 with resolution points per side
    """
    axis = np.linspace(-extent, extent, resolution)
    return (axis[np.newaxis, :] + 1j * axis[:, np.newaxis]).ravel()


def exceptional_scan(q: ComplexField, k_region, resolution: int | None = None, tau_exc: float | None = None,
                     **kwargs):
    """
    Scans for exceptional points: sigma_min of the real-linear Lippmann-Schwinger operator per sample

    :param q: Potential
    :param k_region: Either an explicit array of samples or a half width (scanned as a square)
    :param resolution: Points per side when k_region is a half width
    :param tau_exc: Flag threshold (default 1e-3 * median sigma_min)
    :param kwargs: threads, on_progress_update, plus sigma_min options (phase, mode, dense_limit, workers)
    :return: ExceptionalScan
    """
    if np.ndim(k_region) == 0:
        samples = k_region_samples(float(k_region), resolution or 9)
    else:
        samples = np.asarray(k_region, dtype=complex).ravel()

    options = {key: value for key, value in kwargs.items() if key not in ("threads", "on_progress_update")}
    outcomes = parallel_map(lambda k: ls_sigma_min(q, k, **options), samples,
                            threads=kwargs.get("threads", 1), on_progress_update=kwargs.get("on_progress_update"))

    sigma = np.array([outcome.result if outcome.error is None else 0.0 for outcome in outcomes])
    if tau_exc is None or tau_exc <= 0:
        tau_exc = TAU_FRACTION * float(np.median(sigma))

    scan = ExceptionalScan(samples, sigma, tau_exc)
    logger.info("exceptional scan: %d samples, %d flagged, covering radius %.3g",
                samples.size, len(scan.flagged), scan.covering_radius)
    return scan
