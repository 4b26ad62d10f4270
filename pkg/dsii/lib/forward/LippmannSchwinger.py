"""
Lippmann-Schwinger equation of the Dirac system in mu-form,

    mu(z,k) = I + (1/pi) int e^{s i Re(conj(k) z')} Q(z') conj(mu)(z',k) / (z - z') dsigma_z',

solved for nu = mu - I. The embedding Q = [[0, q], [-q, 0]] makes mu = [[m, b], [-b, m]], so only two
complex scalar channels are unknown.
"""
import logging
from types import SimpleNamespace

import numpy as np
import scipy.sparse.linalg as spla

from dsii.lib.Errors import GridTooSmall, NoConvergence
from dsii.lib.grid.Cauchy import cauchy_conj_values, cauchy_values
from dsii.lib.grid.ComplexGrid import ComplexField
from dsii.lib.solvers import RealLinearSolver

logger = logging.getLogger(__name__)

DOUBLED = "doubled"
ITERATED = "iterated"

PHASE_DERIVED = "derived"
PHASE_PRINTED = "printed"

DECAY_TOLERANCE = 1e-6


def phase_sign(phase: str):
    return -1.0 if phase == PHASE_DERIVED else 1.0


class WaveFunction:
    """
    Solution mu(., k) of the Lippmann-Schwinger equation on a grid
    """

    def __init__(self, k: complex, grid, mu, residual: float = 0.0, sigma_min: float = float("nan"),
                 iterations: int = 0):
        """
        :param k: Spectral parameter
        :param grid: ComplexGrid of the potential
        :param mu: complex array of shape (2, 2, n, n)
        :param residual: Relative residual of the discrete equation
        :param sigma_min: Smallest singular value estimate of the discrete operator (nan if not estimated)
        :param iterations: Solver iterations
        """
        self.k = complex(k)
        self.grid = grid
        self.mu = mu
        self.residual = residual
        self.sigma_min = sigma_min
        self.iterations = iterations

    def entry(self, row: int, column: int):
        return ComplexField(self.grid, self.mu[row, column])

    def psi(self):
        """
        psi = mu e^{i conj(k) z / 2}
        """
        return self.mu * np.exp(1j * np.conj(self.k) * self.grid.nodes / 2)[np.newaxis, np.newaxis]

    def symmetry_deviation(self):
        return float(max(np.max(np.abs(self.mu[0, 0] - self.mu[1, 1])),
                         np.max(np.abs(self.mu[0, 1] + self.mu[1, 0]))))

    def __repr__(self):
        return f"<WaveFunction k={self.k} residual={self.residual:.2e}>"


class _Kernel:
    """
    K[f] = (1/pi) int e^{s i Re(conj(k) z')} f(z') / (z - z') dsigma for fixed k and potential
    """

    def __init__(self, q: ComplexField, k: complex, phase: str, workers: int):
        self.grid = q.grid
        self.q = q.values
        self.workers = workers
        z = self.grid.nodes
        self.phase = np.exp(phase_sign(phase) * 1j * (np.conj(k) * z).real)

    def __call__(self, f):
        return cauchy_values(self.phase * f, self.grid, self.workers)

    def conjugated(self, g):
        # conj(K[conj(g)])
        return cauchy_conj_values(np.conj(self.phase) * g, self.grid, self.workers)


def _pair_operator(kernel: _Kernel, n: int):
    """
    L(x, y) = (-K[q conj(y)], K[q conj(x)]) on packed real vectors
    """
    q = kernel.q

    def operator(vector):
        xy = vector.view(np.complex128).reshape(2, n, n)
        x, y = xy[0], xy[1]
        out = np.stack([-kernel(q * np.conj(y)), kernel(q * np.conj(x))])
        return out.ravel().view(np.float64)

    return operator


def _solve_pair(kernel: _Kernel, fx, fy, options):
    n = kernel.grid.n_per_side
    rhs = np.stack([fx, fy]).astype(complex).ravel().view(np.float64)
    vector, report = RealLinearSolver.solve(
        _pair_operator(kernel, n), rhs,
        tol=options.tol, mode=options.mode, dense_limit=options.dense_limit,
        restart=options.restart, max_iter=options.max_iter, estimate_sigma=options.estimate_sigma,
    )
    xy = vector.view(np.complex128).reshape(2, n, n)
    return xy[0].copy(), xy[1].copy(), report


def _solve_iterated(kernel: _Kernel, options):
    """
    Complex-linear once-iterated equation nu11 + K[q Kc[conj(q) nu11]] = -K[q conj(K[q])]
    """
    grid, q = kernel.grid, kernel.q
    n = grid.n_per_side
    kq = kernel(q)
    rhs = (-kernel(q * np.conj(kq))).ravel()

    counter = {"iterations": 0}

    def matvec(v):
        counter["iterations"] += 1
        field = v.reshape(n, n)
        return (field + kernel(q * kernel.conjugated(np.conj(q) * field))).ravel()

    operator = spla.LinearOperator((n * n, n * n), matvec=matvec, dtype=complex)
    rhs_norm = np.linalg.norm(rhs)
    if rhs_norm == 0:
        nu11 = np.zeros((n, n), dtype=complex)
        residual = 0.0
    else:
        solution, info = spla.gmres(operator, rhs, rtol=options.tol, atol=0.0, restart=options.restart,
                                    maxiter=options.max_iter)
        residual = float(np.linalg.norm(matvec(solution) - rhs) / rhs_norm)
        if info != 0 and residual > 10 * options.tol:
            raise NoConvergence("Iterated Lippmann-Schwinger solve did not converge", residual, counter["iterations"])
        nu11 = solution.reshape(n, n)

    nu12 = kq + kernel(q * np.conj(nu11))
    return nu11, nu12, SimpleNamespace(residual=residual, iterations=counter["iterations"], sigma_min=float("nan"))


def solve_mu(q: ComplexField, k: complex, tol: float = 1e-10, **kwargs):
    """
    Solves the Lippmann-Schwinger equation for mu(., k)

    :param q: Potential on its grid
    :type q: ~dsii.lib.grid.ComplexGrid.ComplexField
    :param k: Spectral parameter
    :type k: complex
    :param tol: Relative residual tolerance
    :type tol: float
    :param `**kwargs`: Options, see below

    :raises: **NoConvergence** -- If the solve stalls (typically close to an exceptional point)
    :raises: **GridTooSmall** -- If the source density q conj(mu) does not decay toward the grid boundary

    :return: The wave function
    :rtype: ~dsii.lib.forward.LippmannSchwinger.WaveFunction

    kwargs:
        path: "doubled" (real-linear doubled system) or "iterated" (complex-linear K+K-) (default "doubled")
        phase: "derived" or "printed" phase convention of the kernel (default "derived")
        full_matrix: Solve all four entries without the symmetry reduction (default False)
        mode, dense_limit, restart, max_iter: Passed to the real-linear solver
        estimate_sigma: Estimate sigma_min of the discrete operator (default False)
        decay_tolerance: Allowed boundary/max ratio of the source density (default 1e-6)
        workers: FFT worker threads (default 1)
    """
    options = SimpleNamespace(
        tol=tol,
        path=kwargs.get("path", DOUBLED),
        phase=kwargs.get("phase", PHASE_DERIVED),
        full_matrix=kwargs.get("full_matrix", False),
        mode=kwargs.get("mode", RealLinearSolver.AUTO),
        dense_limit=kwargs.get("dense_limit", 4096),
        restart=kwargs.get("restart", 50),
        max_iter=kwargs.get("max_iter", 400),
        estimate_sigma=kwargs.get("estimate_sigma", False),
        decay_tolerance=kwargs.get("decay_tolerance", DECAY_TOLERANCE),
        workers=kwargs.get("workers", 1),
    )
    grid = q.grid
    n = grid.n_per_side
    mu = np.zeros((2, 2, n, n), dtype=complex)
    mu[0, 0] = mu[1, 1] = 1.0

    if not np.any(q.values):
        return WaveFunction(k, grid, mu, 0.0, 1.0)

    kernel = _Kernel(q, k, options.phase, options.workers)
    kq = kernel(q.values)

    if options.path == ITERATED:
        nu11, nu12, report = _solve_iterated(kernel, options)
        mu[0, 0] += nu11
        mu[1, 1] += nu11
        mu[0, 1] = nu12
        mu[1, 0] = -nu12
    else:
        # unknown pair (nu12, nu22) with nu22 = nu11 under the symmetry
        nu12, nu22, report = _solve_pair(kernel, kq, np.zeros_like(kq), options)
        mu[0, 1] = nu12
        mu[1, 1] += nu22
        if options.full_matrix:
            nu11, nu21, report_a = _solve_pair(kernel, np.zeros_like(kq), -kq, options)
            mu[0, 0] += nu11
            mu[1, 0] = nu21
            report.residual = max(report.residual, report_a.residual)
        else:
            mu[0, 0] += nu22
            mu[1, 0] = -nu12

    density = ComplexField(grid, q.values * np.conj(mu[0, 0]))
    ratio = density.boundary_ratio()
    if ratio > options.decay_tolerance:
        raise GridTooSmall(f"Source density does not decay on the grid at k={k}", ratio)

    logger.debug("solve_mu k=%s path=%s residual=%.2e", k, options.path, report.residual)
    return WaveFunction(k, grid, mu, report.residual, report.sigma_min, report.iterations)


def ls_sigma_min(q: ComplexField, k: complex, **kwargs):
    """
    Smallest singular value of the discretized real-linear Lippmann-Schwinger operator at k
    :param q: Potential
    :param k: Spectral parameter
    :param kwargs: phase, mode, dense_limit, restart, max_iter, workers
    :return: float
    """
    if not np.any(q.values):
        return 1.0
    kernel = _Kernel(q, k, kwargs.get("phase", PHASE_DERIVED), kwargs.get("workers", 1))
    n = q.grid.n_per_side
    return RealLinearSolver.sigma_min(
        _pair_operator(kernel, n), 4 * n * n,
        mode=kwargs.get("mode", RealLinearSolver.AUTO), dense_limit=kwargs.get("dense_limit", 4096),
        restart=kwargs.get("restart", 50), max_iter=kwargs.get("max_iter", 400),
    )
