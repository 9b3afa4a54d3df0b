"""Maximal correlations of local measurements on bipartite quantum states."""

from .bounds import (
    cross_norm_bound,
    orthogonal_bound,
    separability_witnesses,
    theorem_bound,
    two_qubit_max,
    werner_exact,
)
from .estimators import CoincidenceMaximizer, SpinCorrelationMaximizer
from .measurement import (
    MaximalPOM,
    coincidence,
    joint_distribution,
    mirror_pom,
    naimark_extend,
    new_pom,
    spin_pom,
    trine_pom,
)
from .optimizer import certify, optimize_coincidence
from .scan import ScanConfig, run_scan, summarize
from .state import DensityOperator, isotropic, new_density, random_density, werner
from .validation import DEFAULT_TOL, Tolerances, ValidationError

__version__ = "0.1.0"

__all__ = [
    "CoincidenceMaximizer",
    "DEFAULT_TOL",
    "DensityOperator",
    "MaximalPOM",
    "ScanConfig",
    "SpinCorrelationMaximizer",
    "Tolerances",
    "ValidationError",
    "certify",
    "coincidence",
    "cross_norm_bound",
    "isotropic",
    "joint_distribution",
    "mirror_pom",
    "naimark_extend",
    "new_density",
    "new_pom",
    "optimize_coincidence",
    "orthogonal_bound",
    "random_density",
    "run_scan",
    "separability_witnesses",
    "spin_pom",
    "summarize",
    "theorem_bound",
    "trine_pom",
    "two_qubit_max",
    "werner",
    "werner_exact",
]
