import logging

import numpy as np

from dsii.lib.Errors import NearSingular
from dsii.lib.bspace.BSpace import BElement, pack, unpack
from dsii.lib.inverse.TOperator import TOperator, expand_channels
from dsii.lib.solvers import RealLinearSolver

logger = logging.getLogger(__name__)

NEAR_SINGULAR = 1e-6


class SolveReport:
    """
    Outcome of one solve of (I + T) w = -T I
    """

    def __init__(self, sigma_min_estimate: float, residual: float, iterations: int, condition_flag: bool,
                 norm_estimate: float = float("nan"), negative_mode_energy: float = 0.0, z: complex = 0j,
                 t: float = 0.0):
        self.sigma_min_estimate = float(sigma_min_estimate)
        self.residual = float(residual)
        self.iterations = int(iterations)
        self.condition_flag = bool(condition_flag)
        self.norm_estimate = float(norm_estimate)
        self.negative_mode_energy = float(negative_mode_energy)
        self.z = complex(z)
        self.t = float(t)

    def serialize(self):
        return {
            "z": [self.z.real, self.z.imag],
            "t": self.t,
            "sigma_min_estimate": self.sigma_min_estimate,
            "residual": self.residual,
            "iterations": self.iterations,
            "condition_flag": self.condition_flag,
            "norm_estimate": self.norm_estimate,
            "negative_mode_energy": self.negative_mode_energy,
        }

    @staticmethod
    def deserialize(serialized_obj: dict):
        z = serialized_obj.get("z", [0.0, 0.0])
        return SolveReport(serialized_obj["sigma_min_estimate"], serialized_obj["residual"],
                           serialized_obj["iterations"], serialized_obj["condition_flag"],
                           serialized_obj.get("norm_estimate", float("nan")),
                           serialized_obj.get("negative_mode_energy", 0.0), complex(z[0], z[1]),
                           serialized_obj.get("t", 0.0))

    def __repr__(self):
        return (f"<SolveReport z={self.z} t={self.t} sigma_min={self.sigma_min_estimate:.3e} "
                f"residual={self.residual:.2e} flag={self.condition_flag}>")


def packed_operator(operator: TOperator):
    layout = operator.layout
    return lambda vector: pack(operator.apply(unpack(vector, layout)))


def solve_w(operator: TOperator, tol: float = 1e-10, **kwargs):
    """
    Solves (I + T) w = -T I in the real-packed representation

    :param operator: TOperator
    :param tol: Relative residual tolerance
    :param kwargs: mode, dense_limit, restart, max_iter (see RealLinearSolver.solve), near_singular
                   (relative sigma_min threshold, default 1e-6) and raise_near_singular (default False)

    :raises: **NearSingular** -- If raise_near_singular is set and sigma_min <= near_singular * ||I + T||

    :return: Tuple (w, SolveReport)
    """
    near_singular = kwargs.get("near_singular", NEAR_SINGULAR)
    layout = operator.layout
    if operator.is_zero:
        return layout.zero(), SolveReport(1.0, 0.0, 0, False, 1.0, 0.0, operator.z, operator.t)
    rhs = -pack(operator.apply_identity())

    x, info = RealLinearSolver.solve(
        packed_operator(operator), rhs, tol=tol,
        mode=kwargs.get("mode", RealLinearSolver.AUTO),
        dense_limit=kwargs.get("dense_limit", 4096),
        restart=kwargs.get("restart", 50),
        max_iter=kwargs.get("max_iter", 400),
        raise_on_failure=False,
    )
    sigma = info.sigma_min
    matrix_norm = info.norm if np.isfinite(info.norm) and info.norm > 0 else 1.0
    flag = (not info.converged) or sigma <= near_singular * matrix_norm

    report = SolveReport(sigma, info.residual, info.iterations, flag, matrix_norm,
                         operator.negative_mode_energy, operator.z, operator.t)
    logger.debug("solve_w %r", report)
    if flag:
        logger.warning("I+T near-singular at z=%s t=%s (sigma_min=%.3e)", operator.z, operator.t, sigma)
        if kwargs.get("raise_near_singular", False):
            raise NearSingular(operator.z, operator.t, sigma)
    return unpack(x, layout), report


def neumann_w(operator: TOperator, terms: int = 8):
    """
    Partial Neumann series w = sum_{m=0}^{terms} (-T)^m (-T I), valid when ||T|| < 1
    """
    term = operator.apply_identity().scaled(-1.0)
    total = term
    for _ in range(terms):
        term = operator.apply(term).scaled(-1.0)
        total = total + term
    return total


def v_matrix(w: BElement):
    """
    v = w + I as full matrix exterior values and interior coefficients
    :return: Tuple (exterior (2, 2, N_ext), coefficients (2, 2, N + 1))
    """
    layout = w.layout
    identity_ext, identity_coeffs = layout.identity()
    return (expand_channels(w.exterior_values() + identity_ext, layout),
            expand_channels(w.interior_coeffs + identity_coeffs, layout))
