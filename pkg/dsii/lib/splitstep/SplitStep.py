"""
Strang split-step Fourier integrator for the focusing Davey-Stewartson II system

    q_t = 2i q_xy - 4 q (conj(phi) - phi),    d phi = d-bar |q|^2.

Every sub-step has a unit-modulus multiplier, so the L^2 norm of q is conserved up to round-off.
Stable for any dt, accurate while dt * max|xi1 xi2| stays small.
"""
import logging
import math
from types import SimpleNamespace

import numpy as np
import scipy.fft as sfft

from dsii.lib.Errors import BlowupDetected
from dsii.lib.grid.ComplexGrid import ComplexField

logger = logging.getLogger(__name__)

DEFAULT_CAP = 10.0


def phi_from_q(q: ComplexField, workers: int = 1):
    """
    Solves d phi = d-bar |q|^2 with the Fourier multiplier (i xi1 - xi2) / (i xi1 + xi2), zero mode set to 0
    :param q: Potential
    :param workers: FFT worker threads
    :return: ComplexField phi
    """
    xi1, xi2 = q.grid.frequencies
    numerator = 1j * xi1 - xi2
    denominator = 1j * xi1 + xi2
    ratio = np.divide(numerator, denominator, out=np.zeros_like(numerator), where=denominator != 0)
    density = np.abs(q.values) ** 2
    return q.with_values(sfft.ifft2(ratio * sfft.fft2(density, workers=workers), workers=workers))


def _nonlinear(values, q: ComplexField, dt: float, workers: int):
    phi = phi_from_q(q.with_values(values), workers).values
    return values * np.exp(-4.0 * (np.conj(phi) - phi) * dt)


def step(q: ComplexField, dt: float, **kwargs):
    """
    One Strang step: half nonlinear, full linear, half nonlinear

    :param q: Potential at the current time
    :param dt: Time step
    :param kwargs: nonlinear (bool, default True), workers (int, default 1)
    :return: ComplexField at the next time
    """
    nonlinear = kwargs.get("nonlinear", True)
    workers = kwargs.get("workers", 1)
    xi1, xi2 = q.grid.frequencies
    linear = np.exp(-2j * xi1 * xi2 * dt)

    values = q.values
    if nonlinear:
        values = _nonlinear(values, q, dt / 2.0, workers)
    values = sfft.ifft2(linear * sfft.fft2(values, workers=workers), workers=workers)
    if nonlinear:
        values = _nonlinear(values, q, dt / 2.0, workers)
    return q.with_values(values)


class Trajectory:
    """
    Stored time slices of a split-step run
    """

    def __init__(self, times, q_slices, phi_slices):
        self.times = list(times)
        self.q = list(q_slices)
        self.phi = list(phi_slices)

    def at(self, t: float):
        """
        Slice nearest to time t
        :return: Tuple (q, phi)
        """
        index = int(np.argmin(np.abs(np.asarray(self.times) - t)))
        return self.q[index], self.phi[index]

    def __len__(self):
        return len(self.times)

    def __repr__(self):
        return f"<Trajectory slices={len(self.times)} t_end={self.times[-1] if self.times else None}>"


def simulate(q0: ComplexField, t_end: float, dt: float, **kwargs):
    """
    Integrates from t = 0 to t_end

    :param q0: Initial potential
    :param t_end: Final time
    :param dt: Nominal time step (shortened so that the steps end exactly at t_end)
    :param kwargs: Keyword Args, see below

    :raises: **BlowupDetected** -- When max|q| exceeds the cap

    :return: Trajectory

    kwargs:
        cap: Amplitude cap (default 10.0)
        save_every: Store every n-th step, the first and the last slice are always stored (default 1)
        nonlinear: Whether the nonlinear term is included (default True)
        workers: FFT worker threads
        on_progress_update: Function that should be called on progress update (called like: func(current, total))
    """
    options = SimpleNamespace(
        cap=kwargs.get("cap", DEFAULT_CAP),
        save_every=max(1, int(kwargs.get("save_every", 1))),
        nonlinear=kwargs.get("nonlinear", True),
        workers=kwargs.get("workers", 1),
        on_progress_update=kwargs.get("on_progress_update", None),
    )
    n_steps = max(1, math.ceil(t_end / dt - 1e-12)) if t_end > 0 else 0
    dt = t_end / n_steps if n_steps else dt

    q = q0
    times, q_slices, phi_slices = [0.0], [q0], [phi_from_q(q0, options.workers)]
    for index in range(1, n_steps + 1):
        q = step(q, dt, nonlinear=options.nonlinear, workers=options.workers)
        t = index * dt
        amplitude = float(np.max(np.abs(q.values)))
        if not np.isfinite(amplitude) or amplitude > options.cap:
            raise BlowupDetected(t, amplitude)
        if index % options.save_every == 0 or index == n_steps:
            times.append(t)
            q_slices.append(q)
            phi_slices.append(phi_from_q(q, options.workers))
        if options.on_progress_update is not None:
            options.on_progress_update(index, n_steps)

    logger.debug("split-step: %d steps of %.3e, %d slices stored", n_steps, dt, len(times))
    return Trajectory(times, q_slices, phi_slices)
