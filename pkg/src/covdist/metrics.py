"""Distances between covariance matrices.

The trace-minimization distance: twice the minimal normalized trace of a
matrix dominating both arguments in the PSD order, minus the normalized
traces of the arguments.  Equals the minimal combined perturbation
variance reconciling the two covariances.  All traces are normalized by
the dimension so the value is scale-consistent (the unstructured variant
then coincides with the normalized nuclear norm of the difference).

Also the von Neumann (Kullback-Leibler) matrix divergence
trace(A (log A - log B)).
"""

from dataclasses import dataclass

import numpy as np

from ._validation import DomainError, as_symmetric, check_psd, check_same_shape
from .linalg import PD_EIG_TOL, matrix_log, toeplitz_project
from .solver import (
    FULL,
    SolverOptions,
    SolveReport,
    Structure,
    TraceMinProblem,
    solve_trace_min,
)

#: Relative slack for the PSD precondition; tiny negative eigenvalues from
#: file round-tripping are clipped.
PSD_INPUT_TOL = 1e-8

#: Relative deviation from the declared structure accepted on inputs.
STRUCTURE_INPUT_TOL = 1e-8


@dataclass(eq=False)
class DeltaReport:
    """Distance value with the optimizer and extracted perturbations.

    ``M_star = A + Q_A = B + Q_B`` exactly by construction, and
    ``delta = (trace(Q_A) + trace(Q_B)) / n``.
    """

    tau: float
    delta: float
    M_star: np.ndarray
    Q_A: np.ndarray
    Q_B: np.ndarray
    solver: SolveReport

    @property
    def converged(self):
        return self.solver.converged


def _check_structure_membership(a, structure, name):
    if structure.is_full:
        return
    ref = toeplitz_project(a)
    if structure.kind == "banded_toeplitz":
        q = structure.order
        n = a.shape[0]
        mask = np.abs(np.subtract.outer(np.arange(n), np.arange(n))) > q
        ref = ref.copy()
        ref[mask] = 0.0
    gap = np.linalg.norm(a - ref)
    if gap > STRUCTURE_INPUT_TOL * (1.0 + np.linalg.norm(a)):
        raise ValueError(
            f"{name} must carry the declared {structure.kind} structure "
            f"(deviation {gap:.3e})"
        )


def delta(a, b, structure=FULL, opts=None):
    """Trace-minimization distance between two PSD matrices.

    Parameters
    ----------
    a, b : ndarray
        Symmetric PSD matrices of equal size.  Eigenvalues down to
        ``-1e-8`` relative are treated as rounding and clipped.
    structure : Structure
        Structure imposed on the dominating matrix.  With
        ``TOEPLITZ`` both inputs must themselves be Toeplitz.
    opts : SolverOptions, optional

    Returns
    -------
    DeltaReport
        Distance, optimizer and perturbations.  A non-converged solve is
        reported through ``report.solver.status``, not raised.
    """
    a = as_symmetric(a, "first matrix")
    b = as_symmetric(b, "second matrix")
    check_same_shape(a, b)
    a = check_psd(a, "first matrix", tol=PSD_INPUT_TOL)
    b = check_psd(b, "second matrix", tol=PSD_INPUT_TOL)
    if not isinstance(structure, Structure):
        raise TypeError("structure must be a Structure tag")
    _check_structure_membership(a, structure, "first matrix")
    _check_structure_membership(b, structure, "second matrix")

    n = a.shape[0]
    report = solve_trace_min(TraceMinProblem(a, b, structure), opts)
    m_star = report.M_star
    tau = report.objective
    value = 2.0 * tau - (np.trace(a) + np.trace(b)) / n
    return DeltaReport(
        tau=float(tau),
        delta=float(value),
        M_star=m_star,
        Q_A=m_star - a,
        Q_B=m_star - b,
        solver=report,
    )


def pairwise_delta(matrices, structure=FULL, opts=None):
    """Symmetric matrix of pairwise distances, usable as a precomputed
    metric by clustering or embedding estimators."""
    mats = [as_symmetric(m) for m in matrices]
    k = len(mats)
    out = np.zeros((k, k))
    for i in range(k):
        for j in range(i + 1, k):
            out[i, j] = out[j, i] = delta(mats[i], mats[j], structure, opts).delta
    return out


def vn_divergence(a, b):
    """Von Neumann divergence trace(A (log A - log B)).

    `a` may be singular: zero eigenvalues contribute nothing to the
    entropy term (0 log 0 = 0, with eigenvalues thresholded at 1e-12
    relative).  `b` must be positive definite.

    Returns
    -------
    float
    """
    a = as_symmetric(a, "first matrix")
    b = as_symmetric(b, "second matrix")
    check_same_shape(a, b)
    a = check_psd(a, "first matrix", tol=PSD_INPUT_TOL)

    w = np.linalg.eigvalsh(a)
    scale = max(float(w[-1]), 1e-300)
    w_pos = w[w > PD_EIG_TOL * scale]
    entropy = float(np.sum(w_pos * np.log(w_pos)))
    log_b = matrix_log(b)  # raises DomainError unless b is PD
    return entropy - float(np.sum(a * log_b))


__all__ = [
    "DeltaReport",
    "DomainError",
    "PSD_INPUT_TOL",
    "SolverOptions",
    "delta",
    "pairwise_delta",
    "vn_divergence",
]
