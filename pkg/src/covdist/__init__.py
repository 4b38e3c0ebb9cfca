"""Distances between covariance matrices and power spectral measures.

The package computes the trace-minimization distance between covariance
matrices (optionally restricted to the Toeplitz cone), the L1 distance
between spectral measures with its optimal perturbation decomposition,
and structured covariance approximants: nearest Toeplitz, nearest
moving-average of a given order (with a PSD Gram certificate), and the
divergence-minimizing Toeplitz matrix.
"""

from ._validation import DomainError, as_symmetric, check_psd
from .approx import (
    ApproxResult,
    GramCertificate,
    nearest_ma_delta,
    nearest_toeplitz_delta,
    nearest_toeplitz_ls,
    sequence_is_ma,
    trig_polynomial_min,
    vn_nearest_toeplitz,
)
from .estimators import (
    EmpiricalWindowCovariance,
    StructuredCovariance,
    sliding_windows,
)
from .linalg import (
    EigDecomposition,
    log_frechet_adjoint,
    matrix_log,
    min_eig,
    psd_project,
    sym_eig,
    toeplitz_from_sequence,
    toeplitz_project,
)
from .metrics import DeltaReport, delta, pairwise_delta, vn_divergence
from .solver import (
    CONVERGED,
    FULL,
    MAX_ITERS,
    TOEPLITZ,
    NearestStructuredProblem,
    SolveReport,
    SolverOptions,
    Structure,
    TraceMinProblem,
    banded_toeplitz,
    solve_nearest_structured,
    solve_trace_min,
)
from .spectral import (
    ConvergencePoint,
    CovarianceSequence,
    MaModel,
    SpectralMeasure,
    TimeSeries,
    convergence_experiment,
    cov_sequence,
    grid_angles,
    l1_distance,
    ma_autocovariance,
    ma_spectrum,
    normalized_ratios,
    optimal_perturbations,
    sample_covariance,
    simulate_ma,
)

__version__ = "0.1.0"

__all__ = [
    "ApproxResult",
    "CONVERGED",
    "ConvergencePoint",
    "CovarianceSequence",
    "DeltaReport",
    "DomainError",
    "EigDecomposition",
    "EmpiricalWindowCovariance",
    "FULL",
    "GramCertificate",
    "MAX_ITERS",
    "MaModel",
    "NearestStructuredProblem",
    "SolveReport",
    "SolverOptions",
    "SpectralMeasure",
    "Structure",
    "StructuredCovariance",
    "TOEPLITZ",
    "TimeSeries",
    "TraceMinProblem",
    "as_symmetric",
    "banded_toeplitz",
    "check_psd",
    "convergence_experiment",
    "cov_sequence",
    "delta",
    "grid_angles",
    "l1_distance",
    "log_frechet_adjoint",
    "ma_autocovariance",
    "ma_spectrum",
    "matrix_log",
    "min_eig",
    "nearest_ma_delta",
    "nearest_toeplitz_delta",
    "nearest_toeplitz_ls",
    "normalized_ratios",
    "optimal_perturbations",
    "pairwise_delta",
    "psd_project",
    "sample_covariance",
    "sequence_is_ma",
    "simulate_ma",
    "sliding_windows",
    "solve_nearest_structured",
    "solve_trace_min",
    "sym_eig",
    "toeplitz_from_sequence",
    "toeplitz_project",
    "trig_polynomial_min",
    "vn_divergence",
    "vn_nearest_toeplitz",
]
