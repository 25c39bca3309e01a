"""Finite-gain L2 stability of linearly interconnected sub-systems.

Sub-system ``i`` satisfies ``||y_i||_T <= gamma_i ||u_i||_T + beta_i`` and
the inputs are ``u = v + A y``. If ``Gamma A`` is (block) DTDS, with
``Gamma = diag(gamma_i I_{m_i})``, the network satisfies
``||y||_T <= rho ||v||_T + beta``. This module checks that condition,
assembles explicit ``(rho, beta)`` and evaluates the structured sufficient
conditions that follow from known DTDS results.
"""

import csv
import io
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .config import resolve
from .diagstab import (
    DtdsCertificate,
    RankOnePerturbation,
    dtds_search,
    is_schur,
    rank_one_perturbation_dtds,
)
from .errors import DimensionError, InvalidValueError, PreconditionError, UnsupportedSizeError
from .linalg import as_matrix, spectral_norm

__all__ = [
    "ChecklistReport",
    "GainBound",
    "NetworkSpec",
    "RankOneInterconnection",
    "RegionPoint",
    "SubsystemGain",
    "analyze_rank_one",
    "checklist",
    "gain_bound_terms",
    "region_csv",
    "region_sweep",
    "two_gain_feedback",
    "verify_network",
]


@dataclass(frozen=True)
class SubsystemGain:
    gamma: float
    beta: float = 0.0
    m: int = 1

    def __post_init__(self):
        if not np.isfinite(self.gamma) or not self.gamma > 0:
            raise InvalidValueError(f"gamma must be positive, got {self.gamma}")
        if not np.isfinite(self.beta) or self.beta < 0:
            raise InvalidValueError(f"beta must be nonnegative, got {self.beta}")
        if int(self.m) != self.m or self.m < 1:
            raise InvalidValueError(f"m must be a positive integer, got {self.m}")


@dataclass(frozen=True)
class RankOneInterconnection:
    """``u_i = v_i + s_i y_i + k_i g^T y``, i.e. ``A = diag(s) + k g^T``."""

    s: np.ndarray
    k: np.ndarray
    g: np.ndarray

    def __post_init__(self):
        for name in ("s", "k", "g"):
            x = np.asarray(getattr(self, name), dtype=float)
            if x.ndim != 1 or not np.isfinite(x).all():
                raise InvalidValueError(f"{name} must be a finite vector")
            object.__setattr__(self, name, x)
        if not self.s.size == self.k.size == self.g.size:
            raise DimensionError("s, k and g must have equal lengths")

    @property
    def matrix(self):
        return np.diag(self.s) + np.outer(self.k, self.g)


@dataclass(frozen=True)
class NetworkSpec:
    """Sub-system gains plus the ``m x m`` interconnection matrix.

    Block ``A_ij`` is ``m_i x m_j``. An optional rank-one description must
    reproduce ``A``.
    """

    subsystems: tuple
    A: np.ndarray
    rank_one: RankOneInterconnection | None = None

    def __post_init__(self):
        subs = tuple(
            g if isinstance(g, SubsystemGain) else SubsystemGain(*np.atleast_1d(g))
            for g in self.subsystems
        )
        if not subs:
            raise InvalidValueError("network needs at least one sub-system")
        object.__setattr__(self, "subsystems", subs)
        A = as_matrix(self.A, "A")
        m = sum(g.m for g in subs)
        if A.shape != (m, m):
            raise DimensionError(f"A has shape {A.shape}, block sizes need ({m}, {m})")
        object.__setattr__(self, "A", A)
        if self.rank_one is not None:
            if self.rank_one.s.size != len(subs) or any(g.m != 1 for g in subs):
                raise DimensionError("rank-one interconnection needs one SISO entry per sub-system")
            mismatch = np.max(np.abs(self.rank_one.matrix - A))
            if mismatch > 1e-12 * (1.0 + np.max(np.abs(A))):
                raise InvalidValueError("rank_one description does not reproduce A")

    @property
    def block_sizes(self):
        return tuple(g.m for g in self.subsystems)

    @property
    def gammas(self):
        return np.array([g.gamma for g in self.subsystems])

    @property
    def betas(self):
        return np.array([g.beta for g in self.subsystems])

    @property
    def gamma_diagonal(self):
        """Diagonal of ``Gamma`` expanded to length ``m``."""
        return np.repeat(self.gammas, self.block_sizes)

    @property
    def gamma_a(self):
        return self.gamma_diagonal[:, None] * self.A

    @property
    def is_siso(self):
        return all(g.m == 1 for g in self.subsystems)


@dataclass(frozen=True)
class GainBound:
    """Certified ``||y||_T <= rho ||v||_T + beta`` with the constants behind it."""

    rho: float
    beta: float
    epsilon: float
    s: float
    r: float
    d_min: float
    d_max: float
    certificate: DtdsCertificate

    def bound(self, v_norm):
        return self.rho * v_norm + self.beta


def _block_weights(net, certificate):
    starts = np.cumsum((0,) + net.block_sizes[:-1])
    return certificate.d[starts]


def gain_bound_terms(net, certificate, epsilon):
    """Evaluate ``s, r, rho, beta`` for a given certificate and ``epsilon``.

    Returns a dict; ``s <= 0`` means ``epsilon`` is too large for this
    certificate and ``rho``/``beta`` are then infinite.
    """
    d = certificate.d
    w = _block_weights(net, certificate)
    root = np.sqrt(d)
    scaled = root[:, None] * net.gamma_a / root[None, :]
    g_tilde = net.gammas * np.sqrt(1.0 + epsilon)
    s = 1.0 - np.sqrt(1.0 + epsilon) * spectral_norm(scaled)
    q2 = ((1.0 + epsilon) * net.betas ** 2 + epsilon ** 2) / epsilon
    r = float(np.sqrt(np.sum(w * q2)))
    d_min, d_max = float(d.min()), float(d.max())
    if s <= 0:
        rho = beta = np.inf
    else:
        rho = float(g_tilde.max() * np.sqrt(d_max / d_min) / s)
        beta = float(r / (s * np.sqrt(d_min)))
    return {"s": float(s), "r": r, "rho": rho, "beta": beta, "d_min": d_min, "d_max": d_max}


def verify_network(net, tol=None, v_scale=1.0, log_eps_range=(-12.0, 2.0)):
    """Certify finite-gain L2 stability of ``net`` and build ``(rho, beta)``.

    Returns None when no block-DTDS certificate for ``Gamma A`` is found
    (the condition is only sufficient, so None is not a proof of
    instability). ``epsilon`` is chosen by golden-section search over
    ``log10(epsilon)`` to minimize ``rho * v_scale + beta``, the bound at
    ``||v||_T = v_scale``; with all ``beta_i = 0`` this drives ``epsilon``
    to the lower end of ``log_eps_range``.
    """
    tol = resolve(tol)
    cert = dtds_search(net.gamma_a, net.block_sizes, tol)
    if cert is None:
        return None
    d = cert.d
    root = np.sqrt(d)
    f = spectral_norm(root[:, None] * net.gamma_a / root[None, :])
    lo, hi = log_eps_range
    if f > 0:
        # s > 0 needs sqrt(1 + eps) * f < 1
        hi = min(hi, np.log10(1.0 / f ** 2 - 1.0) - 1e-9)
    if hi <= lo:
        return None

    def cost(x):
        t = gain_bound_terms(net, cert, 10.0 ** x)
        return t["rho"] * v_scale + t["beta"]

    golden = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c, e = b - golden * (b - a), a + golden * (b - a)
    fc, fe = cost(c), cost(e)
    while b - a > 1e-6:
        if fc <= fe:
            b, e, fe = e, c, fc
            c = b - golden * (b - a)
            fc = cost(c)
        else:
            a, c, fc = c, e, fe
            e = a + golden * (b - a)
            fe = cost(e)
    candidates = [(fc, c), (fe, e), (cost(lo), lo)]
    _, x = min(candidates)
    eps = float(10.0 ** x)
    t = gain_bound_terms(net, cert, eps)
    return GainBound(t["rho"], t["beta"], eps, t["s"], t["r"], t["d_min"], t["d_max"], cert)


@dataclass(frozen=True)
class ChecklistReport:
    """The five structured sufficient conditions for SISO networks."""

    gains_at_most_one_and_dtds: bool
    nonnegative_and_schur: bool
    identical_symmetric_and_schur: bool
    triangular_and_schur: bool
    rank_one: bool
    rank_one_evaluated: bool = False

    @property
    def items(self):
        return (
            self.gains_at_most_one_and_dtds,
            self.nonnegative_and_schur,
            self.identical_symmetric_and_schur,
            self.triangular_and_schur,
            self.rank_one,
        )

    @property
    def any(self):
        return any(self.items)


def checklist(net, tol=None):
    """Evaluate the five structured conditions, each sufficient for stability."""
    tol = resolve(tol)
    if not net.is_siso:
        raise UnsupportedSizeError("checklist needs SISO sub-systems (all m_i = 1)")
    A, gammas = net.A, net.gammas
    GA = net.gamma_a
    schur = is_schur(GA, tol)
    scale = max(np.max(np.abs(A)), 1.0)
    item1 = bool((gammas <= 1.0).all()) and dtds_search(A, tol=tol) is not None
    item2 = bool((A >= 0).all()) and schur
    identical = np.ptp(gammas) <= tol.strict * gammas.max()
    symmetric = np.max(np.abs(A - A.T)) <= tol.symmetry * scale
    item3 = bool(identical and symmetric and schur)
    upper = np.max(np.abs(np.tril(A, -1)), initial=0.0) <= tol.triangular * scale
    lower = np.max(np.abs(np.triu(A, 1)), initial=0.0) <= tol.triangular * scale
    item4 = bool((upper or lower) and schur)
    item5 = False
    if net.rank_one is not None:
        try:
            item5 = bool(analyze_rank_one(net.subsystems, net.rank_one, tol))
        except (PreconditionError, InvalidValueError):
            item5 = False
    return ChecklistReport(item1, item2, item3, item4, item5, net.rank_one is not None)


def two_gain_feedback(a, gamma1, gamma2, tol=None):
    """Exact DTDS test of ``diag(gamma1, gamma2) A`` for a 2x2 interconnection.

    The three conditions are ``g1 g2 |det A| < 1``,
    ``|g1 a11 + g2 a22| < 1 + g1 g2 det A`` and
    ``|g1 a11 - g2 a22| < 1 - g1 g2 det A``.
    """
    tol = resolve(tol)
    a = as_matrix(a, "A")
    if a.shape != (2, 2):
        raise DimensionError(f"two_gain_feedback needs a 2x2 matrix, got {a.shape}")
    g12 = gamma1 * gamma2
    det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    return bool(
        g12 * abs(det) < 1.0 - tol.strict
        and abs(gamma1 * a[0, 0] + gamma2 * a[1, 1]) < 1.0 + g12 * det - tol.strict
        and abs(gamma1 * a[0, 0] - gamma2 * a[1, 1]) < 1.0 - g12 * det - tol.strict
    )


class RegionPoint(NamedTuple):
    gamma1: float
    gamma2: float
    standard: bool
    dtds: bool


def region_sweep(a, grid_step, upper=1.2, tol=None):
    """Compare ``gamma1 + gamma2 < 1`` with the DTDS condition on a grid.

    Grid points are ``k * grid_step`` for ``k >= 1`` up to ``upper`` in each
    coordinate; rows are sorted by ``gamma1`` then ``gamma2``.
    """
    if not 0 < grid_step <= 0.5:
        raise InvalidValueError("grid_step must lie in (0, 0.5]")
    a = as_matrix(a, "A")
    if a.shape != (2, 2):
        raise DimensionError("region sweep needs a 2x2 interconnection")
    count = int(np.floor(upper / grid_step + 1e-9))
    values = [round(k * grid_step, 12) for k in range(1, count + 1)]
    return [
        RegionPoint(g1, g2, g1 + g2 < 1.0, two_gain_feedback(a, g1, g2, tol))
        for g1 in values
        for g2 in values
    ]


def region_csv(rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["gamma1", "gamma2", "standard", "dtds"])
    for p in rows:
        writer.writerow([repr(p.gamma1), repr(p.gamma2), int(p.standard), int(p.dtds)])
    return buf.getvalue()


def analyze_rank_one(gains, conn, tol=None):
    """DTDS of ``Gamma A`` for ``A = diag(s) + k g^T`` via the rank-one criterion.

    Uses ``delta_i = gamma_i s_i``, ``u = Gamma k`` and ``v = g``. A true
    verdict certifies finite-gain L2 stability of the network.
    """
    gammas = np.array([g.gamma if isinstance(g, SubsystemGain) else float(g) for g in gains])
    if any(isinstance(g, SubsystemGain) and g.m != 1 for g in gains):
        raise UnsupportedSizeError("rank-one analysis needs SISO sub-systems")
    if gammas.size != conn.s.size:
        raise DimensionError("one gain per sub-system required")
    delta = gammas * conn.s
    if not (np.abs(delta) < 1).all():
        raise PreconditionError("rank-one analysis needs |gamma_i s_i| < 1 for all i")
    if (conn.g < 0).any():
        raise InvalidValueError("averaging weights g must be nonnegative")
    return rank_one_perturbation_dtds(RankOnePerturbation(delta, gammas * conn.k, conn.g), tol)
