"""Diagonal stability: Schur tests, closed-form DTDS criteria, searches, oracles.

A square matrix ``A`` is discrete-time diagonally stable (DTDS) when some
positive diagonal ``D`` gives ``A^T D A - D < 0``; equivalently the scaled
norm ``||D^{1/2} A D^{-1/2}||`` is below one. ``B`` is continuous-time
diagonally stable (CTDS) when ``D B + B^T D < 0`` for some positive diagonal
``D``.

Closed-form tests (2x2, nonnegative, rank one) give exact answers. The
general searches only ever report "certified" or "no certificate found".
"""

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lapack
from scipy.optimize import linprog

from .config import resolve
from .errors import (
    DegenerateInputError,
    DimensionError,
    InvalidValueError,
    NoSolutionError,
    UnitEigenvalueError,
    UnsupportedSizeError,
)
from .linalg import (
    as_matrix,
    determinant,
    is_positive_definite,
    solve_discrete_lyapunov,
    solve_linear,
    sym_eig_range,
)

__all__ = [
    "CtdsCertificate",
    "DtdsCertificate",
    "RankOnePerturbation",
    "RankOneVerdict",
    "ScalingResult",
    "bilinear_transform",
    "ctds_margin",
    "ctds_search",
    "dtds_2x2",
    "dtds_margin",
    "dtds_nonnegative_route",
    "dtds_oracle",
    "dtds_search",
    "is_schur",
    "minimize_ctds_value",
    "minimize_scaled_norm",
    "rank_one_dtds",
    "rank_one_perturbation_dtds",
    "scaling_margin",
    "symmetrizer",
]

_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def _lam_max(S):
    # direct LAPACK call: the search evaluates this millions of times
    w, _, info = lapack.dsyevd(S, compute_v=0)
    if info != 0:
        return float(np.linalg.eigvalsh(S)[-1])
    return w[-1]


def dtds_margin(A, d):
    """``lambda_max(A^T D A - D)`` computed with the Jacobi kernel."""
    A = np.asarray(A, dtype=float)
    d = np.asarray(d, dtype=float)
    G = A.T @ (d[:, None] * A) - np.diag(d)
    return sym_eig_range(0.5 * (G + G.T)).lambda_max


def ctds_margin(B, d):
    """``lambda_max(D B + B^T D)`` computed with the Jacobi kernel."""
    B = np.asarray(B, dtype=float)
    DB = np.asarray(d, dtype=float)[:, None] * B
    return sym_eig_range(DB + DB.T).lambda_max


@dataclass(frozen=True)
class DtdsCertificate:
    """Positive diagonal ``d`` (max entry 1) with ``margin = lambda_max(A^T D A - D)``."""

    d: np.ndarray
    margin: float

    def __post_init__(self):
        d = np.asarray(self.d, dtype=float)
        if d.ndim != 1 or not (d > 0).all():
            raise InvalidValueError("certificate entries must be positive")
        object.__setattr__(self, "d", d / d.max())

    @property
    def valid(self):
        return self.margin < 0

    def check(self, A):
        """Re-verify the certificate against ``A`` from ``d`` alone."""
        return dtds_margin(A, self.d) < 0


@dataclass(frozen=True)
class CtdsCertificate:
    """Positive diagonal ``d`` (max entry 1) with ``margin = lambda_max(D B + B^T D)``."""

    d: np.ndarray
    margin: float

    def __post_init__(self):
        d = np.asarray(self.d, dtype=float)
        if d.ndim != 1 or not (d > 0).all():
            raise InvalidValueError("certificate entries must be positive")
        object.__setattr__(self, "d", d / d.max())

    @property
    def valid(self):
        return self.margin < 0

    def check(self, B):
        return ctds_margin(B, self.d) < 0


# ---------------------------------------------------------------------------
# Schur-type tests and closed forms


def is_schur(A, tol=None):
    """Schur stability through the discrete Lyapunov equation with ``Q = I``.

    For Schur ``A`` the solution satisfies ``P >= I``, so pivots are tested
    against 1/2. Matrices within about 1e-9 of the unit circle may go either
    way.
    """
    tol = resolve(tol)
    A = as_matrix(A, "A", square=True)
    try:
        P = solve_discrete_lyapunov(A, np.eye(A.shape[0]), tol)
    except NoSolutionError:
        return False
    return is_positive_definite(P, 0.5)


def scaling_margin(A, P):
    """Largest ``alpha`` such that ``(cA)^T P (cA) - P < 0`` for all ``|c| < alpha``.

    ``alpha = sqrt(lambda_min(P) / lambda_max(A^T P A))``.
    """
    A = as_matrix(A, "A", square=True)
    P = as_matrix(P, "P", square=True)
    if A.shape != P.shape:
        raise DimensionError("A and P must have the same shape")
    if not np.any(A):
        raise DegenerateInputError("scaling margin is infinite for A = 0")
    if not is_positive_definite(P, 0.0):
        raise InvalidValueError("P must be positive definite")
    APA = A.T @ P @ A
    top = sym_eig_range(0.5 * (APA + APA.T)).lambda_max
    return float(np.sqrt(sym_eig_range(P).lambda_min / top))


def dtds_2x2(A, tol=None):
    """Exact DTDS test for 2x2 matrices.

    True iff ``|det A| < 1``, ``|a11 + a22| < 1 + det A`` and
    ``|a11 - a22| < 1 - det A``.
    """
    tol = resolve(tol)
    A = as_matrix(A, "A")
    if A.shape != (2, 2):
        raise DimensionError(f"dtds_2x2 needs a 2x2 matrix, got {A.shape}")
    return min(_slacks_2x2(A)) > tol.strict


def _slacks_2x2(A):
    det = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
    return (
        1.0 - abs(det),
        1.0 + det - abs(A[0, 0] + A[1, 1]),
        1.0 - det - abs(A[0, 0] - A[1, 1]),
    )


def dtds_nonnegative_route(A, tol=None):
    """Sufficient DTDS test: ``|A|`` Schur.

    For entrywise nonnegative ``A`` the test is exact; otherwise ``False``
    only means this route gave no answer.
    """
    A = as_matrix(A, "A", square=True)
    return is_schur(np.abs(A), tol)


def symmetrizer(A, tol=None):
    """Diagonal ``omega`` with ``diag(omega) A diag(omega)^-1`` symmetric, or None.

    Works on the graph of nonzero off-diagonal pairs. Along a spanning
    forest, ``t_j - t_i = log(a_ij / a_ji)`` fixes ``t = log omega^2``; the
    remaining edges must agree to within ``tol.symmetrizer``. The first
    vertex of every component gets ``omega = 1``.
    """
    tol = resolve(tol)
    A = as_matrix(A, "A", square=True)
    n = A.shape[0]
    nz = A != 0.0
    np.fill_diagonal(nz, False)
    if (nz != nz.T).any():
        return None
    iu, ju = np.nonzero(np.triu(nz))
    if (A[iu, ju] * A[ju, iu] <= 0).any():
        return None
    t = np.full(n, np.nan)
    for root in range(n):
        if not np.isnan(t[root]):
            continue
        t[root] = 0.0
        stack = [root]
        while stack:
            i = stack.pop()
            for j in np.nonzero(nz[i])[0]:
                if np.isnan(t[j]):
                    t[j] = t[i] + np.log(A[i, j] / A[j, i])
                    stack.append(j)
    for i, j in zip(iu, ju):
        if abs(t[j] - t[i] - np.log(A[i, j] / A[j, i])) > tol.symmetrizer:
            return None
    return np.exp(t / 2.0)


# ---------------------------------------------------------------------------
# numerical searches


def _groups(n, block_sizes):
    if block_sizes is None:
        return np.arange(n)
    sizes = [int(b) for b in block_sizes]
    if any(b <= 0 for b in sizes) or sum(sizes) != n:
        raise DimensionError(f"block sizes {sizes} do not partition {n}")
    return np.repeat(np.arange(len(sizes)), sizes)


def _golden_min(fun, lo, hi, xtol):
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = fun(c), fun(d)
    while b - a > xtol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = fun(d)
    return (c, fc) if fc <= fd else (d, fd)


def _coordinate_descent(objective, theta, tol, stop_below=None):
    """Cyclic golden-section descent; returns ``(theta, value)``."""
    best = objective(theta)
    bound = tol.search_log_bound
    for _ in range(tol.search_max_sweeps):
        if stop_below is not None and best <= stop_below:
            break
        start = best
        for k in range(theta.size):
            trial = theta.copy()

            def along(x):
                trial[k] = x
                return objective(trial)

            x, value = _golden_min(along, -bound, bound, tol.golden_xtol)
            if value < best:
                theta[k] = x
                best = value
        if start - best < tol.search_sweep_improvement:
            break
    return theta, best


def _kelley(mats, accept, max_iter=400, gap=1e-11):
    """Kelley cutting planes for ``min lambda_max(sum_k w_k M_k)`` over the simplex.

    Returns ``(w, value, lower_bound)`` where ``value`` is the best objective
    seen and ``lower_bound`` the final LP bound. Stops early when
    ``accept(w, value)`` returns True or the lower bound is positive.
    """
    K = len(mats)
    scale = max(np.max(np.abs(M)) for M in mats) or 1.0
    stack = np.stack(mats) / scale
    cuts = []

    def add_cuts(G):
        vals, vecs = np.linalg.eigh(G)
        for idx in (-1, -2):
            if -idx <= vals.size:
                x = vecs[:, idx]
                cuts.append(np.einsum("i,kij,j->k", x, stack, x))
        return vals[-1]

    for i in range(stack.shape[1]):
        cuts.append(stack[:, i, i].copy())
    w = np.full(K, 1.0 / K)
    best_w, best_val = w, add_cuts(np.tensordot(w, stack, 1))
    lower = -np.inf
    c = np.zeros(K + 1)
    c[-1] = 1.0
    A_eq = np.ones((1, K + 1))
    A_eq[0, -1] = 0.0
    bounds = [(0.0, 1.0)] * K + [(None, None)]
    for _ in range(max_iter):
        if accept(best_w, best_val * scale) or lower > 0:
            break
        A_ub = np.hstack([np.array(cuts), -np.ones((len(cuts), 1))])
        res = linprog(c, A_ub=A_ub, b_ub=np.zeros(len(cuts)), A_eq=A_eq, b_eq=[1.0],
                      bounds=bounds, method="highs")
        if res.status != 0:
            break
        w = np.clip(res.x[:K], 0.0, None)
        w /= w.sum()
        lower = max(lower, res.x[-1])
        val = add_cuts(np.tensordot(w, stack, 1))
        if val < best_val:
            best_w, best_val = w, val
        if best_val - lower < gap:
            break
    return best_w, best_val * scale, lower * scale


@dataclass(frozen=True)
class ScalingResult:
    """Outcome of a diagonal-scaling minimization.

    ``value`` is the objective at ``d``; ``d`` is normalized to max 1.
    """

    value: float
    d: np.ndarray


def _scaled_norm_objective(A, owner):
    def f(theta):
        t = theta[owner]
        M = A * np.exp(0.5 * (t[:, None] - t[None, :]))
        return np.sqrt(max(_lam_max(M.T @ M), 0.0))
    return f


def _dtds_basis(A, owner):
    k = owner.max() + 1
    mats = [np.zeros_like(A, dtype=float) for _ in range(k)]
    for i, g in enumerate(owner):
        mats[g] += np.outer(A[i], A[i])
        mats[g][i, i] -= 1.0
    return mats


def minimize_scaled_norm(A, block_sizes=None, tol=None, early_exit=None):
    """Minimize ``||D^{1/2} A D^{-1/2}||`` over positive (block) diagonal ``D``.

    Cyclic golden-section search on ``log d``, each coordinate confined to
    ``[-10, 10]``. When the descent stalls with the norm still at or above
    one, a cutting-plane pass on the linear-in-``d`` inequality
    ``A^T D A - D < 0`` looks for a scaling the descent missed; a success
    there restarts the descent from the point it found.

    ``early_exit`` stops the refinement once the norm is below
    ``1 - early_exit``.
    """
    tol = resolve(tol)
    A = as_matrix(A, "A", square=True)
    owner = _groups(A.shape[0], block_sizes)
    f = _scaled_norm_objective(A, owner)
    target = 1.0 - tol.accept
    stop = None if early_exit is None else 1.0 - early_exit
    theta, value = _coordinate_descent(f, np.zeros(owner.max() + 1), tol, stop)
    if value >= target:
        def accept(w, lam):
            return lam < 0 and (w > 0).all() and f(np.log(w)) < target

        w, lam, _ = _kelley(_dtds_basis(A, owner), accept)
        if lam < 0 and (w > 0).all():
            start = np.clip(np.log(w / w.max()), -tol.search_log_bound, tol.search_log_bound)
            theta2, value2 = _coordinate_descent(f, start, tol, stop)
            if value2 < value:
                theta, value = theta2, value2
    d = np.exp(theta[owner] - theta.max())
    return ScalingResult(float(value), d)


def dtds_search(A, block_sizes=None, tol=None):
    """Look for a DTDS certificate of ``A``.

    Returns a :class:`DtdsCertificate` when the minimized scaled norm ends
    below ``1 - tol.accept`` and the recomputed margin is negative, otherwise
    None. ``None`` means no certificate was found, which is a proof of
    non-DTDS only when ``A`` is not Schur.

    With ``block_sizes`` the diagonal is constrained to
    ``diag(d_1 I_{m_1}, ..., d_k I_{m_k})``.
    """
    tol = resolve(tol)
    A = as_matrix(A, "A", square=True)
    _groups(A.shape[0], block_sizes)
    if not is_schur(A, tol):
        return None
    res = minimize_scaled_norm(A, block_sizes, tol, tol.early_exit)
    if not res.value < 1.0 - tol.accept:
        return None
    margin = dtds_margin(A, res.d)
    if not margin < 0:
        return None
    return DtdsCertificate(res.d, margin)


def dtds_oracle(A, block_sizes=None, points=201, log_bound=10.0, refine=2,
                zoom_points=21, keep=3, chunk=50_000):
    """Brute-force DTDS check on a logarithmic grid.

    The first free diagonal entry is pinned to 1 and every other one runs
    over ``exp(linspace(-log_bound, log_bound, points))``; at most four free
    parameters are allowed. The first grid point (lexicographic order) with
    ``lambda_max(A^T D A - D) < 0`` is returned as a certificate.

    If the coarse grid has no hit, the ``keep`` best grid points are each
    re-scanned on a ``zoom_points``-per-axis grid spanning one coarse step
    on either side, ``refine`` times. Feasible sets much thinner than the
    coarse spacing are then still found.
    """
    A = as_matrix(A, "A", square=True)
    n = A.shape[0]
    owner = _groups(n, block_sizes)
    free = int(owner.max())
    if free > 4:
        raise UnsupportedSizeError(f"oracle supports at most 4 free parameters, got {free}")
    outer = np.einsum("ki,kj->kij", A, A)
    diag = np.arange(n)

    def product_chunks(axis_values, centre):
        m = axis_values.size
        total = m ** free
        for start in range(0, total, chunk):
            idx = np.arange(start, min(start + chunk, total))
            digits = np.array(np.unravel_index(idx, (m,) * free)).T
            yield centre + axis_values[digits]

    def scan(chunks):
        """Return (certificate or None, best values, best rows)."""
        best_vals = np.empty(0)
        best_rows = np.empty((0, free))
        for part in chunks:
            blocks = np.ones((part.shape[0], free + 1))
            blocks[:, 1:] = np.exp(part)
            d = blocks[:, owner]
            G = np.einsum("bk,kij->bij", d, outer)
            G[:, diag, diag] -= d
            top = np.linalg.eigvalsh(G)[:, -1] / d.max(axis=1)
            hits = np.nonzero(top < 0)[0]
            if hits.size:
                dk = d[hits[0]]
                margin = dtds_margin(A, dk / dk.max())
                if margin < 0:
                    return DtdsCertificate(dk, margin), None, None
            vals = np.concatenate([best_vals, top])
            rows = np.concatenate([best_rows, part])
            order = np.argsort(vals, kind="stable")[:keep]
            best_vals, best_rows = vals[order], rows[order]
        return None, best_vals, best_rows

    if free == 0:
        return scan([np.zeros((1, 0))])[0]
    axis = np.linspace(-log_bound, log_bound, points)
    cert, _, best = scan(product_chunks(axis, np.zeros(free)))
    step = axis[1] - axis[0] if points > 1 else 2.0 * log_bound
    for _ in range(refine):
        if cert is not None:
            return cert
        offsets = np.linspace(-step, step, zoom_points)
        vals_next, rows_next = [], []
        for centre in best:
            cert, v, b = scan(product_chunks(offsets, centre))
            if cert is not None:
                return cert
            vals_next.append(v)
            rows_next.append(b)
        order = np.argsort(np.concatenate(vals_next), kind="stable")[:keep]
        best = np.concatenate(rows_next)[order]
        step = 2.0 * step / (zoom_points - 1)
    return cert


def bilinear_transform(A, tol=None):
    """``(A + I)(A - I)^{-1}``; raises ``UnitEigenvalueError`` if 1 is an eigenvalue."""
    tol = resolve(tol)
    A = as_matrix(A, "A", square=True)
    n = A.shape[0]
    Am = A - np.eye(n)
    # Hadamard bound on |det(A - I)|
    scale = float(np.prod(np.maximum(np.linalg.norm(Am, axis=1), 1e-300)))
    if abs(determinant(Am)) <= tol.unit_eigenvalue * max(scale, 1.0):
        raise UnitEigenvalueError("1 is an eigenvalue of A; A is not Schur and thus not DTDS")
    # X (A - I) = A + I  <=>  (A - I)^T X^T = (A + I)^T
    return solve_linear(Am.T, (A + np.eye(n)).T, tol).T


def _ctds_objective(B):
    n = B.shape[0]

    def h(theta):
        e = np.exp(theta - theta.max())
        d = n * e / e.sum()
        DB = d[:, None] * B
        return _lam_max(DB + DB.T)
    return h


def minimize_ctds_value(B, tol=None, early_exit=None):
    """Minimize ``lambda_max(D B + B^T D)`` over positive ``D`` with trace ``n``.

    Same scheme as :func:`minimize_scaled_norm`: coordinate golden-section in
    ``log d`` with a cutting-plane pass when the descent stalls.
    ``early_exit`` is relative to ``||B||``.
    """
    tol = resolve(tol)
    B = as_matrix(B, "B", square=True)
    n = B.shape[0]
    bnorm = float(np.linalg.norm(B, 2)) or 1.0
    h = _ctds_objective(B)
    target = -tol.accept * bnorm
    stop = None if early_exit is None else -early_exit * bnorm
    theta, value = _coordinate_descent(h, np.zeros(n), tol, stop)
    if value >= target and (np.diag(B) < 0).all():
        mats = []
        for i in range(n):
            M = np.zeros((n, n))
            M[i] += B[i]
            mats.append(M + M.T)

        def accept(w, lam):
            return n * lam < target

        w, lam, _ = _kelley(mats, accept)
        if n * lam < target and (w > 0).all():
            start = np.clip(np.log(w / w.max()), -tol.search_log_bound, tol.search_log_bound)
            theta2, value2 = _coordinate_descent(h, start, tol, stop)
            if value2 < value:
                theta, value = theta2, value2
    d = np.exp(theta - theta.max())
    return ScalingResult(float(value), d)


def ctds_search(B, tol=None):
    """Look for a CTDS certificate of ``B``; None when none was found."""
    tol = resolve(tol)
    B = as_matrix(B, "B", square=True)
    # D B + B^T D has diagonal 2 d_i b_ii, so b_ii < 0 is necessary
    if not (np.diag(B) < 0).all():
        return None
    bnorm = float(np.linalg.norm(B, 2))
    res = minimize_ctds_value(B, tol, tol.early_exit)
    if not res.value < -tol.accept * bnorm:
        return None
    margin = ctds_margin(B, res.d)
    if not margin < 0:
        return None
    return CtdsCertificate(res.d, margin)


# ---------------------------------------------------------------------------
# rank-one structure


@dataclass(frozen=True)
class RankOnePerturbation:
    """``A = diag(delta) + u v^T`` with ``|delta_i| < 1`` and ``v >= 0``."""

    delta: np.ndarray
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        arrays = []
        for name in ("delta", "u", "v"):
            x = np.asarray(getattr(self, name), dtype=float)
            if x.ndim != 1:
                raise DimensionError(f"{name} must be a vector")
            if not np.isfinite(x).all():
                raise InvalidValueError(f"{name} has non-finite entries")
            object.__setattr__(self, name, x)
            arrays.append(x)
        if len({x.size for x in arrays}) != 1:
            raise DimensionError("delta, u and v must have equal lengths")
        if not (np.abs(self.delta) < 1).all():
            raise InvalidValueError("all |delta_i| must be < 1")
        if (self.v < 0).any():
            raise InvalidValueError("v must be entrywise nonnegative")

    @property
    def matrix(self):
        return np.diag(self.delta) + np.outer(self.u, self.v)


@dataclass(frozen=True)
class RankOneVerdict:
    """Result of :func:`rank_one_perturbation_dtds`; truthy iff DTDS."""

    holds: bool
    A: np.ndarray
    c: float
    total: float
    schur: bool

    def __bool__(self):
        return bool(self.holds)


def rank_one_perturbation_dtds(p, tol=None):
    """Exact DTDS test for ``diag(delta) + u v^T`` (``|delta_i| < 1``, ``v >= 0``).

    With ``c = -2 / (1 + v^T (Delta - I)^{-1} u)`` the matrix is DTDS iff it
    is Schur and ``sum_i [c u_i v_i]_+ / (1 - delta_i^2) < 1``.
    """
    tol = resolve(tol)
    if not isinstance(p, RankOnePerturbation):
        p = RankOnePerturbation(*p)
    A = p.matrix
    # Delta - I is diagonal: invert entrywise
    w = float(np.sum(p.v * p.u / (p.delta - 1.0)))
    if abs(1.0 + w) <= tol.rank_one_unit:
        return RankOneVerdict(False, A, float("nan"), float("nan"), False)
    schur = is_schur(A, tol)
    c = -2.0 / (1.0 + w)
    total = float(np.sum(np.maximum(c * p.u * p.v, 0.0) / (1.0 - p.delta ** 2)))
    if not schur:
        return RankOneVerdict(False, A, c, total, False)
    return RankOneVerdict(total < 1.0 - tol.strict, A, c, total, True)


def rank_one_dtds(u, v, tol=None):
    """``u v^T`` is DTDS iff ``|v|^T |u| < 1``."""
    tol = resolve(tol)
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.ndim != 1 or u.shape != v.shape:
        raise DimensionError("u and v must be vectors of equal length")
    return float(np.abs(v) @ np.abs(u)) < 1.0 - tol.strict
