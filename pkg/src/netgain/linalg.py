"""Dense kernels for small real matrices.

Everything here works on plain ``numpy`` float arrays. The routines are
written out (elimination, Cholesky pivots, cyclic Jacobi) rather than
delegated to LAPACK so that the diagonal-stability code can be checked
against an independent path.
"""

from typing import NamedTuple

import numpy as np

from .config import resolve
from .errors import (
    DimensionError,
    InvalidValueError,
    NoSolutionError,
    SingularMatrixError,
)

__all__ = [
    "SymEigRange",
    "as_matrix",
    "determinant",
    "is_positive_definite",
    "jacobi_eigenvalues",
    "perron_radius",
    "solve_discrete_lyapunov",
    "solve_linear",
    "spectral_norm",
    "sym_eig_range",
]


class SymEigRange(NamedTuple):
    lambda_min: float
    lambda_max: float


def as_matrix(A, name="matrix", square=False):
    """Return ``A`` as a finite 2-d float array, validating its shape."""
    M = np.array(A, dtype=float)
    if M.ndim == 0:
        M = M.reshape(1, 1)
    if M.ndim != 2:
        raise DimensionError(f"{name} must be 2-dimensional, got ndim={M.ndim}")
    if np.isnan(M).any() or not np.isfinite(M).all():
        raise InvalidValueError(f"{name} has non-finite entries")
    if square and M.shape[0] != M.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {M.shape}")
    return M


def _check_symmetric(S, tol, name="matrix"):
    scale = np.max(np.abs(S)) if S.size else 0.0
    defect = np.max(np.abs(S - S.T)) if S.size else 0.0
    if defect > tol.symmetry * scale:
        raise InvalidValueError(
            f"{name} is not symmetric (defect {defect:.3g} vs scale {scale:.3g})"
        )


def _eliminate(M, B, tol):
    """Partial-pivot Gaussian elimination of ``M X = B`` in place.

    Returns ``(U, B, swaps)`` with ``U`` upper triangular; raises
    ``SingularMatrixError`` on a pivot below ``tol.singular_pivot * max|M|``.
    """
    n = M.shape[0]
    scale = np.max(np.abs(M)) if M.size else 0.0
    threshold = tol.singular_pivot * scale
    swaps = 0
    for k in range(n):
        p = k + int(np.argmax(np.abs(M[k:, k])))
        if abs(M[p, k]) <= threshold or M[p, k] == 0.0:
            raise SingularMatrixError(f"pivot {k} is numerically zero")
        if p != k:
            M[[k, p]] = M[[p, k]]
            B[[k, p]] = B[[p, k]]
            swaps += 1
        factors = M[k + 1:, k] / M[k, k]
        M[k + 1:, k:] -= np.outer(factors, M[k, k:])
        B[k + 1:] -= np.outer(factors, B[k]) if B.ndim == 2 else factors * B[k]
    return M, B, swaps


def solve_linear(M, b, tol=None):
    """Solve ``M x = b`` by Gaussian elimination with partial pivoting.

    ``b`` may be a vector or a matrix of right-hand sides.
    """
    tol = resolve(tol)
    M = as_matrix(M, "M", square=True)
    b = np.array(b, dtype=float)
    if b.shape[0] != M.shape[0]:
        raise DimensionError(f"right-hand side has {b.shape[0]} rows, expected {M.shape[0]}")
    if not np.isfinite(b).all():
        raise InvalidValueError("right-hand side has non-finite entries")
    U, c, _ = _eliminate(M.copy(), b.copy(), tol)
    n = U.shape[0]
    x = np.zeros_like(c)
    for k in range(n - 1, -1, -1):
        x[k] = (c[k] - U[k, k + 1:] @ x[k + 1:]) / U[k, k]
    return x


def determinant(A):
    """Determinant via pivoted elimination; exactly 0.0 for singular input."""
    A = as_matrix(A, "A", square=True)
    n = A.shape[0]
    if n == 0:
        return 1.0
    U = A.copy()
    sign = 1.0
    for k in range(n):
        p = k + int(np.argmax(np.abs(U[k:, k])))
        if U[p, k] == 0.0:
            return 0.0
        if p != k:
            U[[k, p]] = U[[p, k]]
            sign = -sign
        U[k + 1:, k:] -= np.outer(U[k + 1:, k] / U[k, k], U[k, k:])
    return float(sign * np.prod(np.diag(U)))


def is_positive_definite(S, tol=1e-12):
    """True iff the symmetric matrix ``S`` has Cholesky pivots all above ``tol``.

    The symmetrized matrix ``(S + S^T)/2`` is factored, so round-off
    asymmetry up to the accepted defect does not matter.
    """
    S = as_matrix(S, "S", square=True)
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    _check_symmetric(S, resolve(None), "S")
    L = 0.5 * (S + S.T)
    n = L.shape[0]
    for k in range(n):
        pivot = L[k, k] - L[k, :k] @ L[k, :k]
        if not pivot > tol:
            return False
        L[k, k] = np.sqrt(pivot)
        if k + 1 < n:
            L[k + 1:, k] = (L[k + 1:, k] - L[k + 1:, :k] @ L[k, :k]) / L[k, k]
    return True


def solve_discrete_lyapunov(A, Q, tol=None):
    """Solve ``A^T P A - P = -Q`` through the Kronecker-vectorized system.

    Raises
    ------
    NoSolutionError
        If the ``n^2 x n^2`` system is singular, which happens exactly when
        two eigenvalues of ``A`` multiply to 1.
    """
    tol = resolve(tol)
    A = as_matrix(A, "A", square=True)
    Q = as_matrix(Q, "Q", square=True)
    n = A.shape[0]
    if Q.shape != A.shape:
        raise DimensionError(f"Q has shape {Q.shape}, expected {A.shape}")
    K = np.kron(A.T, A.T) - np.eye(n * n)
    try:
        p = solve_linear(K, -Q.reshape(-1), tol)
    except SingularMatrixError as exc:
        raise NoSolutionError("discrete Lyapunov equation has no unique solution") from exc
    P = p.reshape(n, n)
    P = 0.5 * (P + P.T)
    residual = np.max(np.abs(A.T @ P @ A - P + Q)) if n else 0.0
    qscale = np.max(np.abs(Q)) if n else 0.0
    if residual > tol.lyapunov_residual * (1.0 + qscale) * max(1.0, np.max(np.abs(P))):
        raise NoSolutionError(f"Lyapunov residual {residual:.3g} too large")
    return P


def jacobi_eigenvalues(S, tol=None):
    """All eigenvalues of a symmetric matrix by cyclic Jacobi rotations."""
    tol = resolve(tol)
    S = as_matrix(S, "S", square=True)
    _check_symmetric(S, tol, "S")
    M = 0.5 * (S + S.T)
    n = M.shape[0]
    norm = np.linalg.norm(M)
    if n <= 1 or norm == 0.0:
        return np.sort(np.diag(M).copy())
    target = tol.jacobi * norm
    for _ in range(tol.jacobi_max_sweeps):
        off = np.sqrt(max(np.sum(M * M) - np.sum(np.diag(M) ** 2), 0.0))
        if off <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = M[p, q]
                if abs(apq) < 1e-300:
                    continue
                theta = (M[q, q] - M[p, p]) / (2.0 * apq)
                t = np.copysign(1.0, theta) / (abs(theta) + np.hypot(theta, 1.0))
                c = 1.0 / np.hypot(t, 1.0)
                s = t * c
                rp, rq = M[p].copy(), M[q].copy()
                M[p], M[q] = c * rp - s * rq, s * rp + c * rq
                cp, cq = M[:, p].copy(), M[:, q].copy()
                M[:, p], M[:, q] = c * cp - s * cq, s * cp + c * cq
                M[p, q] = M[q, p] = 0.0
    return np.sort(np.diag(M).copy())


def sym_eig_range(S, tol=None):
    """Extremal eigenvalues ``(lambda_min, lambda_max)`` of a symmetric matrix."""
    w = jacobi_eigenvalues(S, tol)
    if w.size == 0:
        raise DimensionError("empty matrix has no eigenvalues")
    return SymEigRange(float(w[0]), float(w[-1]))


def spectral_norm(A, tol=None):
    """``||A|| = sqrt(lambda_max(A^T A))``."""
    A = as_matrix(A, "A")
    if A.size == 0:
        return 0.0
    G = A.T @ A
    return float(np.sqrt(max(sym_eig_range(0.5 * (G + G.T), tol).lambda_max, 0.0)))


def perron_radius(M, tol=None):
    """Spectral radius of an entrywise nonnegative square matrix.

    Power iteration on ``I + M`` (primitive whenever ``M`` is irreducible)
    with Collatz-Wielandt bounds. If the bounds do not close within
    ``tol.power_max_iter`` steps, the radius is bracketed by bisection on
    the Schur test of ``M / r``.
    """
    tol = resolve(tol)
    M = as_matrix(M, "M", square=True)
    if (M < 0).any():
        raise InvalidValueError("perron_radius needs an entrywise nonnegative matrix")
    n = M.shape[0]
    scale = np.max(M) if M.size else 0.0
    if scale == 0.0:
        return 0.0
    B = np.eye(n) + M / scale
    x = np.ones(n)
    lo, hi = 0.0, float(np.max(np.sum(M, axis=1))) / scale
    for _ in range(tol.power_max_iter):
        y = B @ x
        ratios = y / x
        # Collatz-Wielandt: min/max ratio bracket the Perron root of B
        lo = max(lo, ratios.min() - 1.0)
        hi = min(hi, ratios.max() - 1.0)
        if hi - lo <= tol.power_tol * max(hi, 1e-300):
            return float(scale * 0.5 * (lo + hi))
        x = y / np.max(y)
        # reducible matrices can drive components to zero; keep them alive
        x = np.maximum(x, 1e-300)
    return scale * _radius_by_bisection(M / scale, max(lo, 0.0), hi, tol)


def _radius_by_bisection(M, lo, hi, tol):
    """Bisection on the Schur test of ``M / r`` inside a known bracket."""
    for _ in range(200):
        if hi - lo <= tol.power_tol * max(hi, 1.0):
            break
        mid = 0.5 * (lo + hi)
        if mid <= 0.0:
            break
        if _lyapunov_schur(M / mid, tol):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _lyapunov_schur(A, tol):
    try:
        P = solve_discrete_lyapunov(A, np.eye(A.shape[0]), tol)
    except NoSolutionError:
        return False
    return is_positive_definite(P, 0.0)
