"""Discrete-time simulation of networks of LTI sub-systems.

Each sub-system is a state-space model ``x+ = F x + G u``, ``y = H x + J u``
whose L2 gain can be computed, so the finite-gain premise of a network
certificate can be checked rather than assumed. Signal norms are truncated
l2 norms: ``||y||_T = sqrt(sum_{k<T} |y(k)|^2)``.
"""

import csv
import io
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize_scalar

from .config import resolve
from .diagstab import is_schur
from .errors import (
    ConfigurationError,
    ConvergenceError,
    DimensionError,
    NotWellPosedError,
    SingularMatrixError,
    UnstableSubsystemError,
)
from .linalg import as_matrix, solve_discrete_lyapunov, solve_linear, sym_eig_range

__all__ = [
    "BoundCheckReport",
    "LtiSystem",
    "SignalLog",
    "empirical_bound_check",
    "free_response_bias",
    "l2_gain",
    "simulate",
]


def _mat(x, shape, name):
    M = np.array(x, dtype=float).reshape(shape) if np.size(x) == 0 else as_matrix(x, name)
    if M.shape != shape:
        raise DimensionError(f"{name} has shape {M.shape}, expected {shape}")
    return M


@dataclass(frozen=True)
class LtiSystem:
    """``x(k+1) = F x(k) + G u(k)``, ``y(k) = H x(k) + J u(k)``."""

    F: np.ndarray
    G: np.ndarray
    H: np.ndarray
    J: np.ndarray

    def __post_init__(self):
        J = as_matrix(self.J, "J", square=True)
        m = J.shape[0]
        nx = np.size(self.F) and as_matrix(self.F, "F", square=True).shape[0]
        object.__setattr__(self, "F", _mat(self.F, (nx, nx), "F"))
        object.__setattr__(self, "G", _mat(self.G, (nx, m), "G"))
        object.__setattr__(self, "H", _mat(self.H, (m, nx), "H"))
        object.__setattr__(self, "J", J)

    @classmethod
    def static(cls, J):
        J = np.atleast_2d(np.asarray(J, dtype=float))
        m = J.shape[0]
        return cls(np.zeros((0, 0)), np.zeros((0, m)), np.zeros((m, 0)), J)

    @classmethod
    def one_pole(cls, a, b):
        """SISO ``y(k) = x(k)``, ``x(k+1) = a x(k) + b u(k)``; gain ``|b| / (1 - |a|)``."""
        return cls([[a]], [[b]], [[1.0]], [[0.0]])

    @property
    def n_states(self):
        return self.F.shape[0]

    @property
    def m(self):
        return self.J.shape[0]


def l2_gain(sys, grid_points=1024, rtol=1e-4, max_doublings=8):
    """Peak of the largest singular value of ``H (e^{iw} I - F)^{-1} G + J`` on ``[0, pi]``.

    The complex solve is done in real arithmetic on the ``2 n_x`` augmented
    system. The grid is doubled until the peak changes by less than
    ``rtol`` (relative), then the peak is polished by a bounded scalar
    search between its grid neighbours.

    Returns ``(gamma, 0.0)``: the zero-state bias is zero.
    """
    if grid_points < 512:
        raise ValueError("grid_points must be at least 512")
    if sys.n_states and not is_schur(sys.F):
        raise UnstableSubsystemError("F is not Schur; the L2 gain is infinite")
    if sys.n_states == 0:
        return float(np.linalg.svd(sys.J, compute_uv=False)[0]), 0.0

    def sigma(w):
        return _sigma_max(sys, np.atleast_1d(w))

    pts = grid_points
    w = np.linspace(0.0, np.pi, pts)
    vals = sigma(w)
    peak = vals.max()
    for _ in range(max_doublings):
        pts = 2 * pts - 1
        w = np.linspace(0.0, np.pi, pts)
        vals = sigma(w)
        new = vals.max()
        change = abs(new - peak) / max(new, 1e-300)
        peak = new
        if change < rtol:
            break
    else:
        raise ConvergenceError("frequency grid did not converge")
    i = int(np.argmax(vals))
    lo, hi = w[max(i - 1, 0)], w[min(i + 1, pts - 1)]
    if hi > lo:
        res = minimize_scalar(lambda x: -sigma(x)[0], bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-12})
        peak = max(peak, -res.fun)
    return float(peak), 0.0


def _sigma_max(sys, w):
    nx, m = sys.n_states, sys.m
    F, G, H, J = sys.F, sys.G, sys.H, sys.J
    c, s = np.cos(w)[:, None, None], np.sin(w)[:, None, None]
    eye = np.eye(nx)
    # (e^{iw} I - F)(Xr + i Xi) = G in real form
    top = np.concatenate([c * eye - F, -s * eye], axis=2)
    bottom = np.concatenate([s * eye, c * eye - F], axis=2)
    M = np.concatenate([top, bottom], axis=1)
    rhs = np.concatenate([np.broadcast_to(G, (w.size, nx, m)), np.zeros((w.size, nx, m))], axis=1)
    X = np.linalg.solve(M, rhs)
    Tr = H @ X[:, :nx] + J
    Ti = H @ X[:, nx:]
    # singular values of Tr + i Ti equal those of [[Tr, -Ti], [Ti, Tr]] (each doubled)
    big = np.concatenate([np.concatenate([Tr, -Ti], 2), np.concatenate([Ti, Tr], 2)], 1)
    return np.linalg.svd(big, compute_uv=False)[:, 0]


def free_response_bias(sys, x0):
    """Bound ``c0 |x0|`` on the l2 norm of the zero-input response from ``x0``.

    ``c0 = sqrt(lambda_max(W))`` with ``W`` the observability Gramian,
    ``F^T W F - W = -H^T H``. Linearity then gives
    ``||y||_T <= gamma ||u||_T + c0 |x0|``.
    """
    x0 = np.asarray(x0, dtype=float)
    if sys.n_states == 0:
        return 0.0
    W = solve_discrete_lyapunov(sys.F, sys.H.T @ sys.H)
    c0 = np.sqrt(max(sym_eig_range(W).lambda_max, 0.0))
    return float(c0 * np.linalg.norm(x0))


@dataclass(frozen=True)
class SignalLog:
    """Recorded trajectories; row ``k`` of ``v``/``y`` is time step ``k``."""

    v: np.ndarray
    y: np.ndarray
    norm_v: np.ndarray = field(init=False)
    norm_y: np.ndarray = field(init=False)

    def __post_init__(self):
        v = np.array(self.v, dtype=float)
        y = np.array(self.y, dtype=float)
        v.flags.writeable = y.flags.writeable = False
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "y", y)
        nv = np.sqrt(np.cumsum(np.sum(v * v, axis=1)))
        ny = np.sqrt(np.cumsum(np.sum(y * y, axis=1)))
        nv.flags.writeable = ny.flags.writeable = False
        object.__setattr__(self, "norm_v", nv)
        object.__setattr__(self, "norm_y", ny)

    @property
    def T(self):
        return self.v.shape[0]

    def to_csv(self):
        m = self.v.shape[1]
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["k"] + [f"v_{i + 1}" for i in range(m)]
                        + [f"y_{i + 1}" for i in range(m)] + ["norm_v", "norm_y"])
        for k in range(self.T):
            writer.writerow([k] + [repr(float(x)) for x in self.v[k]]
                            + [repr(float(x)) for x in self.y[k]]
                            + [repr(float(self.norm_v[k])), repr(float(self.norm_y[k]))])
        return buf.getvalue()


def _block_diag(mats, shapes):
    rows = sum(s[0] for s in shapes)
    cols = sum(s[1] for s in shapes)
    out = np.zeros((rows, cols))
    r = c = 0
    for M, (p, q) in zip(mats, shapes):
        out[r:r + p, c:c + q] = M
        r += p
        c += q
    return out


def _stack(realizations):
    F = _block_diag([s.F for s in realizations], [s.F.shape for s in realizations])
    G = _block_diag([s.G for s in realizations], [s.G.shape for s in realizations])
    H = _block_diag([s.H for s in realizations], [s.H.shape for s in realizations])
    J = _block_diag([s.J for s in realizations], [s.J.shape for s in realizations])
    return F, G, H, J


def _check_realizations(net, realizations):
    if len(realizations) != len(net.subsystems):
        raise DimensionError("one realization per sub-system required")
    for i, (s, g) in enumerate(zip(realizations, net.subsystems)):
        if s.m != g.m:
            raise DimensionError(f"realization {i} has I/O dimension {s.m}, expected {g.m}")


def simulate(net, realizations, v, T=None, x0=None, tol=None):
    """Simulate the interconnection ``u = v + A y`` from (by default) zero state.

    Each step solves the algebraic loop ``(I - J A) y = H x + J v`` exactly,
    then applies ``u = v + A y`` and ``x+ = F x + G u``.

    Raises
    ------
    NotWellPosedError
        If the loop matrix ``I - J A`` is numerically singular.
    """
    tol = resolve(tol)
    _check_realizations(net, realizations)
    m = net.A.shape[0]
    v = np.asarray(v, dtype=float)
    if v.ndim == 1 and m == 1:
        v = v[:, None]
    if T is None:
        T = v.shape[0]
    if v.shape != (T, m):
        raise DimensionError(f"input has shape {v.shape}, expected ({T}, {m})")
    F, G, H, J = _stack(realizations)
    A = net.A
    loop = np.eye(m) - J @ A
    tol_loop = replace(tol, singular_pivot=tol.loop_pivot)
    try:
        # columns of the inverse loop matrix, reused every step
        L = solve_linear(loop, np.eye(m), tol_loop)
    except SingularMatrixError:
        raise NotWellPosedError("loop matrix I - J A is singular") from None
    x = np.zeros(F.shape[0]) if x0 is None else np.asarray(x0, dtype=float).copy()
    if x.shape != (F.shape[0],):
        raise DimensionError(f"initial state must have length {F.shape[0]}")
    y = np.empty((T, m))
    for k in range(T):
        yk = L @ (H @ x + J @ v[k])
        u = v[k] + A @ yk
        x = F @ x + G @ u
        y[k] = yk
    return SignalLog(v[:T].copy(), y)


@dataclass(frozen=True)
class BoundCheckReport:
    trials: int
    horizon: int
    violations: int
    max_ratio: float
    max_excess: float
    realized_gains: tuple

    @property
    def passed(self):
        return self.violations == 0


def _dc_gain(net, realizations):
    """Closed-loop map from v to y at z = 1 (constant inputs)."""
    F, G, H, J = _stack(realizations)
    m = net.A.shape[0]
    nx = F.shape[0]
    P = J.copy()
    if nx:
        P = P + H @ np.linalg.solve(np.eye(nx) - F, G)
    return np.linalg.solve(np.eye(m) - P @ net.A, P)


def empirical_bound_check(net, realizations, bound, trials=50, T=2000, seed=0,
                          grid_points=1024, slack=1e-9):
    """Simulate seeded trials and count violations of ``rho ||v||_T + beta``.

    Trials are one unit impulse, one constant input along the dominant
    right singular vector of the closed-loop DC map, and ``trials``
    entrywise-uniform ``[-1, 1]`` inputs. The inequality is checked at every
    horizon ``T`` with an additive slack of ``slack * ||v||_T``.

    Raises
    ------
    ConfigurationError
        If a realization's L2 gain exceeds its declared ``gamma`` by more
        than 1e-6; the certificate premise would then be false.
    """
    _check_realizations(net, realizations)
    realized = tuple(l2_gain(s, grid_points)[0] for s in realizations)
    for i, (g, sub) in enumerate(zip(realized, net.subsystems)):
        if g > sub.gamma + 1e-6:
            raise ConfigurationError(
                f"sub-system {i} has realized gain {g:.12g} above declared {sub.gamma:.12g}"
            )
    m = net.A.shape[0]
    rng = np.random.default_rng(seed)
    inputs = []
    impulse = np.zeros((T, m))
    impulse[0, 0] = 1.0
    inputs.append(impulse)
    _, _, vt = np.linalg.svd(_dc_gain(net, realizations))
    inputs.append(np.tile(vt[0], (T, 1)))
    inputs.extend(rng.uniform(-1.0, 1.0, size=(T, m)) for _ in range(trials))
    violations = 0
    max_ratio = 0.0
    max_excess = -np.inf
    for v in inputs:
        log = simulate(net, realizations, v, T)
        excess = log.norm_y - (bound.rho * log.norm_v + bound.beta + slack * log.norm_v)
        violations += int(np.count_nonzero(excess > 0))
        max_excess = max(max_excess, float(excess.max()))
        pos = log.norm_v > 0
        if pos.any():
            max_ratio = max(max_ratio, float(np.max(log.norm_y[pos] / log.norm_v[pos])))
    return BoundCheckReport(len(inputs), T, violations, max_ratio, max_excess, realized)
