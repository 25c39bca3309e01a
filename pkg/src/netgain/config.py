"""Central tolerance record.

Every comparison against 0 or 1 in the package goes through one of these
fields. ``NETGAIN_TOL`` in the environment overrides ``strict``.
"""

import os
from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    # slack for strict inequalities (x < y is tested as x < y - strict)
    strict: float = 1e-12
    # relative symmetry defect accepted for "symmetric" inputs
    symmetry: float = 1e-10
    # pivot threshold (relative to max |M|) for elimination
    singular_pivot: float = 1e-12
    # Jacobi stops when off-diagonal Frobenius mass <= jacobi * ||S||_F
    jacobi: float = 1e-12
    jacobi_max_sweeps: int = 100
    # relative residual bound for Lyapunov solves
    lyapunov_residual: float = 1e-8
    # power iteration on nonnegative matrices
    power_tol: float = 1e-12
    power_max_iter: int = 500
    # a scaled norm must end below 1 - search_accept to count as a certificate
    search_accept: float = 1e-9
    search_max_sweeps: int = 50
    search_sweep_improvement: float = 1e-10
    search_log_bound: float = 10.0
    golden_xtol: float = 1e-7
    # stop refining once the scaled norm is this far below 1 (None: never)
    search_early_exit: float | None = 1e-3
    # bilinear transform: |det(A - I)| must exceed this times scale
    unit_eigenvalue: float = 1e-10
    # v^T (I - Delta)^{-1} u == 1 detection
    rank_one_unit: float = 1e-10
    # symmetrizer edge consistency
    symmetrizer: float = 1e-9
    # triangularity test in the checklist
    triangular: float = 1e-12
    # netsim loop-matrix pivot threshold
    loop_pivot: float = 1e-10

    @property
    def accept(self):
        """Search acceptance slack: never looser than ``strict``."""
        return max(self.search_accept, self.strict)

    @property
    def early_exit(self):
        if self.search_early_exit is None:
            return None
        return max(self.search_early_exit, self.accept)

    def with_strict(self, value):
        if not value > 0:
            raise ValueError("tolerance must be positive")
        return replace(self, strict=float(value))


def default_tolerances():
    """Return the default record, honouring ``NETGAIN_TOL`` if set."""
    tol = Tolerances()
    env = os.environ.get("NETGAIN_TOL")
    if env:
        tol = tol.with_strict(float(env))
    return tol


def resolve(tol):
    return default_tolerances() if tol is None else tol
