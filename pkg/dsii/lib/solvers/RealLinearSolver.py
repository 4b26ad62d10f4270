"""
Solves x + L(x) = b for a real-linear L given as a function on packed real vectors, by dense
assembly and LU factorization for small systems or by restarted GMRES on a LinearOperator.
"""
import logging
from types import SimpleNamespace

import numpy as np
import scipy.linalg as sla
import scipy.sparse.linalg as spla

from dsii.lib.Errors import NoConvergence

logger = logging.getLogger(__name__)

DENSE = "dense"
KRYLOV = "krylov"
AUTO = "auto"


def choose_mode(dimension: int, mode: str = AUTO, dense_limit: int = 4096):
    if mode == AUTO:
        return DENSE if dimension <= dense_limit else KRYLOV
    return mode


def assemble(operator, dimension: int):
    """
    Dense matrix of I + L from its action on unit vectors
    """
    matrix = np.empty((dimension, dimension))
    unit = np.zeros(dimension)
    for column in range(dimension):
        unit[column] = 1.0
        matrix[:, column] = unit + operator(unit)
        unit[column] = 0.0
    return matrix


def sigma_min_dense(lu_piv, matrix, iterations: int = 3, seed: int = 0):
    """
    Smallest singular value by inverse iteration on (M^T M)^{-1} using a LU factorization
    """
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(matrix.shape[0])
    x /= np.linalg.norm(x)
    for _ in range(iterations):
        y = sla.lu_solve(lu_piv, x, trans=1)
        x = sla.lu_solve(lu_piv, y)
        norm = np.linalg.norm(x)
        if not np.isfinite(norm) or norm == 0:
            return 0.0
        x /= norm
    return float(np.linalg.norm(matrix @ x))


def norm_estimate(apply, dimension: int, iterations: int = 6, seed: int = 1, apply_transpose=None):
    """
    Power-iteration estimate of the operator 2-norm (a lower bound, from ||M x|| / ||x||)
    """
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(dimension)
    x /= np.linalg.norm(x)
    estimate = 0.0
    for _ in range(iterations):
        y = apply(x)
        estimate = max(estimate, float(np.linalg.norm(y)))
        if apply_transpose is None or estimate == 0:
            break
        x = apply_transpose(y)
        norm = np.linalg.norm(x)
        if norm == 0:
            break
        x /= norm
    return estimate


def solve(operator, rhs, **kwargs):
    """
    Solves (I + L) x = rhs
    :param operator: Function x -> L(x) on real vectors
    :param rhs: Real right-hand side
    :param kwargs: Options, see below
    :raises: **NoConvergence** -- If the Krylov path stops above tolerance
    :return: Tuple (x, report namespace)

    kwargs:
        tol: Relative residual tolerance (default 1e-10)
        mode: "auto", "dense" or "krylov" (default "auto")
        dense_limit: Largest dimension assembled densely in auto mode (default 4096)
        restart: GMRES restart length (default 50)
        max_iter: Maximum number of GMRES restarts (default 400)
        estimate_sigma: Whether sigma_min and the norm of I + L should be estimated (default True)
        raise_on_failure: Raise NoConvergence instead of returning an unconverged solution (default True)
    """
    options = SimpleNamespace(
        tol=kwargs.get("tol", 1e-10),
        mode=kwargs.get("mode", AUTO),
        dense_limit=kwargs.get("dense_limit", 4096),
        restart=kwargs.get("restart", 50),
        max_iter=kwargs.get("max_iter", 400),
        estimate_sigma=kwargs.get("estimate_sigma", True),
        raise_on_failure=kwargs.get("raise_on_failure", True),
    )
    rhs = np.asarray(rhs, dtype=np.float64)
    dimension = rhs.size
    mode = choose_mode(dimension, options.mode, options.dense_limit)
    rhs_norm = np.linalg.norm(rhs)

    if mode == DENSE:
        matrix = assemble(operator, dimension)
        lu_piv = sla.lu_factor(matrix, check_finite=False)
        x = sla.lu_solve(lu_piv, rhs)
        residual = np.linalg.norm(matrix @ x - rhs) / rhs_norm if rhs_norm > 0 else 0.0
        sigma = sigma_min_dense(lu_piv, matrix) if options.estimate_sigma else float("nan")
        matrix_norm = norm_estimate(lambda v: matrix @ v, dimension, apply_transpose=lambda v: matrix.T @ v) \
            if options.estimate_sigma else float("nan")
        logger.debug("dense solve: dimension=%d residual=%.2e sigma_min=%.3e", dimension, residual, sigma)
        return x, SimpleNamespace(mode=mode, residual=float(residual), iterations=1, sigma_min=sigma,
                                  norm=matrix_norm, converged=True, matrix=matrix, lu=lu_piv)

    counter = {"iterations": 0}

    def matvec(v):
        counter["iterations"] += 1
        return v + operator(v)

    linear_operator = spla.LinearOperator((dimension, dimension), matvec=matvec, dtype=np.float64)
    if rhs_norm == 0:
        x, info = np.zeros(dimension), 0
    else:
        x, info = spla.gmres(linear_operator, rhs, rtol=options.tol, atol=0.0,
                             restart=options.restart, maxiter=options.max_iter)
    residual = np.linalg.norm(matvec(x) - rhs) / rhs_norm if rhs_norm > 0 else 0.0
    converged = info == 0 and residual <= 10 * options.tol

    sigma, matrix_norm = float("nan"), float("nan")
    if options.estimate_sigma:
        sigma = sigma_min_krylov(operator, dimension, tol=max(options.tol, 1e-8), restart=options.restart,
                                 max_iter=options.max_iter)
        matrix_norm = norm_estimate(matvec, dimension)

    logger.debug("krylov solve: dimension=%d iterations=%d residual=%.2e", dimension, counter["iterations"], residual)
    if not converged:
        logger.warning("GMRES stopped at residual %.2e after %d iterations", residual, counter["iterations"])
        if options.raise_on_failure:
            raise NoConvergence("GMRES did not converge", residual, counter["iterations"])

    return x, SimpleNamespace(mode=mode, residual=float(residual), iterations=counter["iterations"],
                              sigma_min=sigma, norm=matrix_norm, converged=converged, matrix=None, lu=None)


def sigma_min_krylov(operator, dimension: int, iterations: int = 3, seed: int = 0, **kwargs):
    """
    Inverse iteration for sigma_min(I + L) with GMRES solves of M only (no transpose is available matrix-free);
    returns the smallest ||x|| / ||M^{-1} x|| seen, an upper bound of sigma_min
    """
    matvec = lambda v: v + operator(v)
    linear_operator = spla.LinearOperator((dimension, dimension), matvec=matvec, dtype=np.float64)
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(dimension)
    x /= np.linalg.norm(x)
    estimate = float("inf")
    for _ in range(iterations):
        y, info = spla.gmres(linear_operator, x, rtol=kwargs.get("tol", 1e-8), atol=0.0,
                             restart=kwargs.get("restart", 50), maxiter=kwargs.get("max_iter", 400))
        norm = np.linalg.norm(y)
        if not np.isfinite(norm) or norm == 0:
            return 0.0
        estimate = min(estimate, 1.0 / norm)
        x = y / norm
    return float(min(estimate, np.linalg.norm(matvec(x))))


def sigma_min(operator, dimension: int, **kwargs):
    """
    Smallest singular value of I + L, dense inverse iteration when small, GMRES-based otherwise
    """
    mode = choose_mode(dimension, kwargs.get("mode", AUTO), kwargs.get("dense_limit", 4096))
    if mode == DENSE:
        matrix = assemble(operator, dimension)
        try:
            lu_piv = sla.lu_factor(matrix, check_finite=False)
        except (sla.LinAlgError, ValueError):
            return 0.0
        return sigma_min_dense(lu_piv, matrix)
    return sigma_min_krylov(operator, dimension, **kwargs)
