"""Sparse storage and SPD solves.

CSR matrices are plain :class:`scipy.sparse.csr_matrix` objects; the
solver is Jacobi-preconditioned conjugate gradients.
"""

import logging

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

DEFAULT_TOL = 1e-10
# multiple of eps * || |A| |x| || / ||b|| accepted as the attainable residual
FLOOR_FACTOR = 64.0

logger = logging.getLogger(__name__)


class SolveError(RuntimeError):
    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


def csr_from_triplets(n, triplets, m=None):
    """Square (or n x m) CSR matrix from (row, col, value) triplets.

    Duplicates are summed; column indices come out sorted.
    """
    trip = list(triplets)
    if len(trip) == 0:
        return coo_to_csr(n, [], [], [], m)
    arr = np.asarray(trip, dtype=float)
    return coo_to_csr(n, arr[:, 0].astype(np.int64), arr[:, 1].astype(np.int64), arr[:, 2], m)


def coo_to_csr(n, rows, cols, values, m=None):
    """Array form of :func:`csr_from_triplets`."""
    m = n if m is None else m
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    if rows.size and (rows.min() < 0 or rows.max() >= n or cols.min() < 0 or cols.max() >= m):
        raise IndexError(f"triplet index out of range for a {n}x{m} matrix")
    A = sp.coo_matrix((np.asarray(values, dtype=float), (rows, cols)), shape=(n, m)).tocsr()
    A.sum_duplicates()
    A.sort_indices()
    return A


def relative_residual(A, x, b):
    nb = np.linalg.norm(b)
    r = np.linalg.norm(A @ x - b)
    return r / nb if nb > 0 else r


def rounding_floor(A, x, b):
    """Relative residual that rounding alone produces when forming A @ x.

    Residuals below ``FLOOR_FACTOR`` times this value cannot be told
    apart from zero in double precision.
    """
    nb = np.linalg.norm(b)
    scale = np.linalg.norm(abs(A) @ np.abs(x))
    return FLOOR_FACTOR * np.finfo(float).eps * scale / (nb if nb > 0 else 1.0)


def spd_solve(A, b, tol=DEFAULT_TOL, max_iter=None, x0=None):
    """Solve ``A x = b`` for SPD ``A`` by Jacobi-preconditioned CG.

    The solve succeeds when the relative residual reaches ``tol``, or,
    for badly scaled systems where that is out of reach in double
    precision, when it reaches the rounding floor of ``A @ x`` (see
    :func:`rounding_floor`).

    Raises
    ------
    SolveError
        On a zero or non-finite diagonal entry, or when the relative
        residual has not reached ``tol`` after ``max_iter`` iterations.
    """
    A = sp.csr_matrix(A)
    b = np.asarray(b, dtype=float)
    n = A.shape[0]
    if n == 0:
        return np.zeros(0)
    if not np.any(b) and x0 is None:
        return np.zeros(n)
    d = A.diagonal()
    if not np.all(np.isfinite(d)) or np.any(d <= 0):
        bad = int(np.flatnonzero(~(np.isfinite(d) & (d > 0)))[0])
        raise SolveError(f"invalid diagonal entry A[{bad},{bad}] = {d[bad]}")
    max_iter = 10 * n if max_iter is None else max_iter
    M = spla.LinearOperator((n, n), matvec=lambda r: r / d, dtype=float)
    x, info = spla.cg(A, b, x0=x0, rtol=tol, atol=0.0, maxiter=max_iter, M=M)
    res = relative_residual(A, x, b)
    if info != 0 or not res <= tol * 1.0001:
        # CG tracks the recursive residual; one restart from the current
        # iterate usually closes a small gap to the true residual
        x, info = spla.cg(A, b, x0=x, rtol=tol, atol=0.0, maxiter=max_iter, M=M)
        res = relative_residual(A, x, b)
        if res <= tol * 1.0001:
            return x
        floor = rounding_floor(A, x, b)
        if res <= floor:
            logger.debug("CG stopped at the rounding floor: residual %.3e, tol %.1e", res, tol)
            return x
        raise SolveError(
            f"CG did not converge: relative residual {res:.3e} > {tol:.1e} "
            f"(rounding floor {floor:.1e}) after {max_iter} iterations",
            residual=res,
            iterations=max_iter,
        )
    return x
