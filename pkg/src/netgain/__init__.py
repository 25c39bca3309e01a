"""Diagonal stability certificates and small-gain analysis of networked systems."""

from .config import Tolerances, default_tolerances
from .diagstab import (
    CtdsCertificate,
    DtdsCertificate,
    RankOnePerturbation,
    bilinear_transform,
    ctds_search,
    dtds_2x2,
    dtds_nonnegative_route,
    dtds_oracle,
    dtds_search,
    is_schur,
    rank_one_dtds,
    rank_one_perturbation_dtds,
    scaling_margin,
    symmetrizer,
)
from .linalg import (
    determinant,
    is_positive_definite,
    solve_discrete_lyapunov,
    solve_linear,
    spectral_norm,
    sym_eig_range,
)
from .netsim import LtiSystem, SignalLog, empirical_bound_check, l2_gain, simulate
from .smallgain import (
    GainBound,
    NetworkSpec,
    RankOneInterconnection,
    SubsystemGain,
    analyze_rank_one,
    checklist,
    region_sweep,
    two_gain_feedback,
    verify_network,
)

__version__ = "0.1.0"
