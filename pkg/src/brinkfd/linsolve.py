"""
Direct solution of the bordered saddle-point systems.
"""
import logging
import time
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
MAX_REFINEMENT = 3
ESTIMATE_SEED = 20240611


@contextmanager
def _seeded_global_rng(seed):
    """Fix numpy's legacy global RNG, which ``onenormest`` draws from."""
    state = np.random.get_state()
    np.random.seed(seed)
    try:
        yield
    finally:
        np.random.set_state(state)


@dataclass
class SaddleSolveReport:
    residual: float
    refinements: int = 0
    fill: int = 0
    n: int = 0
    condition: float = None
    seconds: float = 0.0
    stats: dict = field(default_factory=dict)
    factor: object = field(default=None, repr=False)


class SolverFailure(RuntimeError):
    """Raised when a factorization breaks down or misses the tolerance."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


def relative_residual(K, x, b):
    nb = np.linalg.norm(b)
    r = np.linalg.norm(b - K @ x)
    return r / nb if nb > 0 else r


def solve_sparse(K, b, tol=DEFAULT_TOL, keep_factor=False):
    """Solve ``K x = b`` by sparse LU with iterative refinement.

    Returns ``(x, report)``; raises :class:`SolverFailure` when the relative
    residual stays above ``tol``.
    """
    if not 0 < tol <= 1e-6:
        raise ValueError("tol must lie in (0, 1e-6]")
    K = sp.csc_matrix(K)
    b = np.asarray(b, dtype=float)
    start = time.perf_counter()
    try:
        lu = spla.splu(K, permc_spec="COLAMD")
    except RuntimeError as exc:
        report = SaddleSolveReport(np.inf, n=K.shape[0], seconds=time.perf_counter() - start)
        raise SolverFailure(f"factorization failed: {exc}", report) from exc
    x = lu.solve(b) if np.any(b) else np.zeros_like(b)
    res = relative_residual(K, x, b)
    steps = 0
    while not res <= tol and steps < MAX_REFINEMENT and np.all(np.isfinite(x)):
        x = x + lu.solve(b - K @ x)
        res = relative_residual(K, x, b)
        steps += 1
    report = SaddleSolveReport(
        float(res),
        refinements=steps,
        fill=int(lu.L.nnz + lu.U.nnz),
        n=K.shape[0],
        seconds=time.perf_counter() - start,
        factor=lu if keep_factor else None,
    )
    if not res <= tol:
        raise SolverFailure(f"relative residual {res:.3e} above tolerance {tol:.1e}", report)
    return x, report


def solve(system, tol=DEFAULT_TOL):
    """Solve a :class:`~brinkfd.assembly.SparseSystem`.

    Returns
    -------
    u, p : ndarray
        Velocity and (mean-zero) pressure coefficients.
    report : SaddleSolveReport
    """
    x, report = solve_sparse(system.matrix(), system.rhs(), tol)
    u, p, _ = system.split(x)
    return u, p, report


def condition_estimate(K, lu=None):
    """1-norm condition number estimate ``|K|_1 |K^-1|_1``.

    Uses Hager/Higham block estimation on the inverse through one LU
    factorization. The estimator's random start vectors come from a fixed
    seed, so repeated calls agree exactly. Returns ``inf`` when the
    factorization breaks down.
    """
    if hasattr(K, "matrix") and callable(K.matrix):
        K = K.matrix()
    K = sp.csc_matrix(K)
    try:
        if lu is None:
            lu = spla.splu(K, permc_spec="COLAMD")
        n = K.shape[0]
        inv = spla.LinearOperator(
            (n, n), matvec=lu.solve, rmatvec=lambda y: lu.solve(y, trans="T"), dtype=float
        )
        with _seeded_global_rng(ESTIMATE_SEED):
            est = spla.onenormest(K) * spla.onenormest(inv)
    except (RuntimeError, ValueError, ZeroDivisionError) as exc:
        log.debug("condition estimate failed: %s", exc)
        return np.inf
    return float(est) if np.isfinite(est) else np.inf
