import logging
from os import PathLike
from pathlib import Path
from types import SimpleNamespace

from dsii.lib.config.RunConfig import RunConfig
from dsii.lib.evolution.Evolve import evolve_h
from dsii.lib.forward.ExceptionalScan import exceptional_scan
from dsii.lib.forward.Scattering import forward_transform
from dsii.lib.forward.ScatteringData import ScatteringData
from dsii.lib.grid.ComplexGrid import ComplexField, ComplexGrid
from dsii.lib.inverse.Reconstruct import amplitude_sweep, reconstruct
from dsii.lib.io.DataFormats import read_data
from dsii.lib.io.FieldFormats import read_field
from dsii.lib.splitstep.SplitStep import simulate
from dsii.lib.validation.BlowupScan import ScanBox, blowup_scan
from dsii.lib.validation.Compare import compare_fields

logger = logging.getLogger(__name__)


class Dsii:
    """
    Inverse scattering pipeline for the focusing Davey-Stewartson II system: forward transform, explicit time
    evolution of the scattering data and pointwise reconstruction, driven by one RunConfig
    """

    def __init__(self, config: RunConfig | None = None):
        """
        :param config: Run configuration (defaults when omitted)
        :type config: ~dsii.lib.config.RunConfig.RunConfig
        """
        self._config = RunConfig() if config is None else config
        self._data: ScatteringData | None = None

    @property
    def config(self):
        return self._config

    def load_potential(self, path: str | PathLike):
        """
        Reads a potential and checks it against the configured grid

        :raises: **ValueError** -- If the file grid differs from grid.n / grid.extent
        :return: ComplexField
        """
        q = read_field(Path(path))
        if not q.grid.same_as(self._config.grid()):
            raise ValueError(f"Potential grid {q.grid!r} does not match the configured grid {self._config.grid()!r}")
        return q

    def load_data(self, directory: str | PathLike):
        self._data = read_data(directory)
        return self._data

    def _require_data(self):
        if self._data is None:
            raise ValueError("No scattering data: run forward() or load_data() first")
        return self._data

    def _inverse_disk(self, data: ScatteringData):
        """
        The circle of the data with the configured k0 policy
        """
        configured = self._config.disk()
        if not configured.same_circle(data.disk):
            logger.warning("configured disk %r differs from the disk of the data %r, inverting with the latter",
                           configured, data.disk)
        return data.disk.with_policy(configured.k0_policy, self._config["disk.k0_angle"])

    def forward(self, q: ComplexField, amplitude: float = 1.0, **kwargs):
        """
        Scattering data of amplitude * q at t = 0

        :param q: Potential
        :param amplitude: Amplitude a
        :param `**kwargs`: on_progress_update and overrides of the forward options
        :return: ScatteringData
        """
        options = {**self._config.forward_options(), **kwargs}
        scaled = q if amplitude == 1.0 else q.with_values(amplitude * q.values)
        self._data = forward_transform(scaled, self._config.kgrid(), self._config.disk(), self._config["solver.tol"],
                                       amplitude=amplitude, **options)
        return self._data

    def evolve(self, t: float):
        return evolve_h(self._require_data(), t, self._config["evolve.T_max"])

    def invert(self, t: float, z_grid: ComplexGrid | None = None, **kwargs):
        """
        Reconstructs q and phi at time t

        :param `**kwargs`: on_progress_update and overrides of the inverse options
        :return: Tuple (q, phi, reports, mask), see :func:`~dsii.lib.inverse.Reconstruct.reconstruct`
        """
        options = {**self._config.inverse_options(), **kwargs}
        data = self._require_data()
        return reconstruct(data, z_grid or self._config.grid(), t, self._inverse_disk(data),
                           self._config["solver.tol"], **options)

    def roundtrip(self, q: ComplexField, amplitude: float = 1.0, **kwargs):
        """
        forward followed by invert at t = 0

        :param `**kwargs`: on_forward_progress_update, on_invert_progress_update
        :return: SimpleNamespace(metrics, data, q, phi, reports, mask)
        """
        reference = q if amplitude == 1.0 else q.with_values(amplitude * q.values)
        data = self.forward(q, amplitude, on_progress_update=kwargs.get("on_forward_progress_update"))
        q_rec, phi, reports, mask = self.invert(0.0, q.grid, on_progress_update=kwargs.get("on_invert_progress_update"))
        metrics = compare_fields(q_rec, reference)
        logger.info("round trip: rel_l2=%.3e over %d nodes", metrics["rel_l2"], metrics["nodes"])
        return SimpleNamespace(metrics=metrics, data=data, q=q_rec, phi=phi, reports=reports, mask=mask)

    def scan_exceptional(self, q: ComplexField, amplitude: float = 1.0, **kwargs):
        """
        Exceptional-point scan over the configured k-grid extent

        :param `**kwargs`: resolution (points per side, default kgrid.n), on_progress_update
        :return: ExceptionalScan
        """
        scaled = q if amplitude == 1.0 else q.with_values(amplitude * q.values)
        options = {"phase": self._config["forward.phase"], "threads": self._config["threads"],
                   "mode": self._config["solver.mode"], "dense_limit": self._config["solver.dense_limit"]}
        tau = self._config["scan.tau"]
        return exceptional_scan(scaled, self._config["kgrid.extent"], kwargs.get("resolution", self._config["kgrid.n"]),
                                tau if tau > 0 else None, on_progress_update=kwargs.get("on_progress_update"),
                                **options)

    def scan_blowup(self, q: ComplexField, t_max: float, n_z: int = 16, n_t: int = 5, z_extent: float | None = None,
                    **kwargs):
        """
        Blow-up scan of the data of q over [-z_extent, z_extent]^2 x [0, t_max]

        :return: BlowupMap
        """
        data = self._data if self._data is not None else self.forward(q)
        box = ScanBox(z_extent or self._config["grid.extent"], n_z, 0.0, t_max, n_t)
        tau = self._config["scan.tau"]
        options = {**self._config.inverse_options(), **kwargs}
        return blowup_scan(q, box, self._inverse_disk(data), tau if tau > 0 else None, data=data, **options)

    def amplitude_sweep(self, q: ComplexField, z: complex, t: float, **kwargs):
        """
        SolveReport per amplitude of sweep.a_list
        """
        options = {**self._config.forward_options(), **self._config.inverse_options(), **kwargs}
        return amplitude_sweep(q, self._config["sweep.a_list"], z, t, self._config.disk(), self._config.kgrid(),
                               self._config["solver.tol"], **options)

    def simulate(self, q: ComplexField, t_end: float, dt: float, **kwargs):
        """
        Split-step oracle trajectory

        :param `**kwargs`: save_every, nonlinear, on_progress_update
        :return: Trajectory
        """
        return simulate(q, t_end, dt, cap=self._config["splitstep.cap"], **kwargs)

    @staticmethod
    def compare(candidate: ComplexField, reference: ComplexField):
        return compare_fields(candidate, reference)

    def __repr__(self):
        return f"<Dsii config={self._config!r} data={self._data!r}>"
