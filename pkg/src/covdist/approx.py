"""Structured approximation of sample covariances.

Nearest Toeplitz and nearest moving-average covariances in the
trace-minimization distance, the least-squares Toeplitz comparison
(which can lose positive definiteness), the divergence-minimizing
Toeplitz approximant, and the moving-average feasibility test with its
PSD Gram certificate.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._validation import as_symmetric, check_psd
from .linalg import (
    log_frechet_adjoint,
    matrix_log,
    min_eig,
    toeplitz_from_sequence,
    toeplitz_project,
)
from .metrics import PSD_INPUT_TOL
from .solver import (
    FULL,
    TOEPLITZ,
    CONVERGED,
    NearestStructuredProblem,
    SolverOptions,
    banded_toeplitz,
    gram_diagonal_sums,
    psd_project,
    solve_nearest_structured,
)

#: Grid resolution for trigonometric-polynomial nonnegativity checks.
POLY_GRID_SIZE = 4096

#: Relative slack on the grid minimum below which a polynomial is declared
#: to take negative values.
POLY_NEG_TOL = 1e-9


@dataclass(eq=False)
class GramCertificate:
    """PSD matrix whose diagonal sums reproduce a finite covariance
    sequence, certifying that the sequence belongs to a moving-average
    process of order q (side of the matrix minus one)."""

    q_matrix: np.ndarray

    @property
    def order(self):
        return self.q_matrix.shape[0] - 1

    def sequence(self):
        return gram_diagonal_sums(self.q_matrix)

    def min_eig(self):
        return min_eig(self.q_matrix)


@dataclass(eq=False)
class ApproxResult:
    """Structured approximant with its distance and solver diagnostics."""

    R: np.ndarray
    distance: float
    certificate: Optional[GramCertificate] = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def converged(self):
        return self.diagnostics.get("status", CONVERGED) == CONVERGED


def _delta_approx(a, r_structure, ma_gram, match_trace, m_toeplitz, opts):
    a = as_symmetric(a)
    a = check_psd(a, tol=PSD_INPUT_TOL)
    problem = NearestStructuredProblem(
        target=a,
        r_structure=r_structure,
        ma_gram=ma_gram,
        match_trace=match_trace,
        m_structure=TOEPLITZ if m_toeplitz else FULL,
    )
    report = solve_nearest_structured(problem, opts)
    certificate = GramCertificate(report.gram) if report.gram is not None else None
    return ApproxResult(
        R=report.R_star,
        distance=report.objective,
        certificate=certificate,
        diagnostics={
            "status": report.status,
            "iterations": report.iterations,
            "primal_residual": report.primal_residual,
            "dual_residual": report.dual_residual,
        },
    )


def nearest_toeplitz_delta(a, match_trace=False, opts=None, toeplitz_m=False):
    """Toeplitz PSD matrix minimizing the trace-minimization distance to `a`.

    Parameters
    ----------
    a : ndarray
        Symmetric PSD matrix.
    match_trace : bool
        Impose trace(R) = trace(a) as an extra linear constraint.
    opts : SolverOptions, optional
    toeplitz_m : bool
        Constrain the inner dominating matrix to be Toeplitz as well
        (the Toeplitz-restricted variant of the distance).
    """
    return _delta_approx(a, TOEPLITZ, False, match_trace, toeplitz_m, opts)


def nearest_ma_delta(a, q, match_trace=False, opts=None, toeplitz_m=False):
    """Closest covariance of a moving-average process of order `q`.

    The approximant is banded Toeplitz with bandwidth `q` and carries a
    PSD Gram certificate of moving-average feasibility.
    """
    return _delta_approx(
        a, banded_toeplitz(q), True, match_trace, toeplitz_m, opts
    )


def nearest_toeplitz_ls(a):
    """Least-squares (Frobenius) nearest symmetric Toeplitz matrix.

    Unlike the distance-based approximants this is plain diagonal
    averaging and may fail to be positive semidefinite; the smallest
    eigenvalue is reported in the diagnostics.
    """
    a = as_symmetric(a)
    r = toeplitz_project(a)
    return ApproxResult(
        R=r,
        distance=float(np.linalg.norm(a - r)),
        diagnostics={"status": CONVERGED, "min_eig": min_eig(r)},
    )


# ---------------------------------------------------------------------------
# divergence-minimizing Toeplitz approximant


@dataclass(frozen=True)
class VnOptions:
    grad_tol_factor: float = 1e-8
    max_iter: int = 20_000
    armijo: float = 1e-4
    min_step: float = 1e-18


def _trace_zero_toeplitz_projection(g):
    n = g.shape[0]
    p = toeplitz_project(g)
    return p - (np.trace(p) / n) * np.eye(n)


def vn_nearest_toeplitz(a, opts=None):
    """Toeplitz positive definite matrix minimizing the von Neumann
    divergence from `a` under a matched-trace constraint.

    Projected gradient descent on the Toeplitz coefficients: the gradient
    of the divergence is projected onto the trace-zero Toeplitz subspace
    and the step is halved (Armijo) until the iterate is positive definite
    and decreases the objective.  The divergence is convex on the positive
    definite cone, so a vanishing projected gradient certifies optimality.
    """
    opts = opts or VnOptions()
    a = as_symmetric(a)
    a = check_psd(a, tol=PSD_INPUT_TOL)
    n = a.shape[0]
    trace_a = float(np.trace(a))
    if trace_a <= 0.0:
        raise ValueError("matrix must have positive trace")

    # entropy term with the 0 log 0 convention for singular inputs
    w = np.linalg.eigvalsh(a)
    w_pos = w[w > 1e-12 * max(float(w[-1]), 1e-300)]
    entropy = float(np.sum(w_pos * np.log(w_pos)))

    def objective(r_mat):
        return entropy - float(np.sum(a * matrix_log(r_mat)))

    # start from the least-squares projection, pushed inside the PD cone
    # by an identity shift and rescaled so the trace constraint is exact
    r_mat = toeplitz_project(a)
    floor = 1e-6 * trace_a
    lam = min_eig(r_mat)
    if lam < floor:
        shift = floor - lam
        r_mat = (r_mat + shift * np.eye(n)) * (trace_a / (trace_a + n * shift))

    grad_tol = opts.grad_tol_factor * (1.0 + n)
    value = objective(r_mat)
    history = [value]
    step = 1.0
    status = "MAX_ITERS"
    grad_norm = float("inf")
    it = 0
    for it in range(1, opts.max_iter + 1):
        grad = -log_frechet_adjoint(r_mat, a)
        pgrad = _trace_zero_toeplitz_projection(grad)
        grad_norm = float(np.linalg.norm(pgrad))
        if grad_norm <= grad_tol:
            status = CONVERGED
            break

        accepted = False
        while step >= opts.min_step:
            trial = r_mat - step * pgrad
            if min_eig(trial) > 0.0:
                trial_value = objective(trial)
                if trial_value <= value - opts.armijo * step * grad_norm**2:
                    r_mat, value = trial, trial_value
                    accepted = True
                    break
            step *= 0.5
        if not accepted:
            status = "LINE_SEARCH_FAILED"
            break
        history.append(value)
        step *= 2.0

    return ApproxResult(
        R=r_mat,
        distance=value,
        diagnostics={
            "status": status,
            "iterations": it,
            "grad_norm": grad_norm,
            "min_eig": min_eig(r_mat),
            "objective_history": history,
        },
    )


# ---------------------------------------------------------------------------
# moving-average feasibility


def trig_polynomial_min(r, grid_size=POLY_GRID_SIZE):
    """Grid minimum of r_0 + 2 sum_k r_k cos(k theta)."""
    r = np.asarray(r, dtype=float)
    theta = -np.pi + 2.0 * np.pi * (np.arange(grid_size) + 0.5) / grid_size
    vals = np.full(grid_size, r[0])
    for k in range(1, r.size):
        vals += 2.0 * r[k] * np.cos(k * theta)
    return float(vals.min())


def _gram_affine_project(q_mat, r):
    """Projection onto {Q symmetric : diagonal sums of Q equal r}."""
    m = r.size
    out = q_mat.copy()
    for k in range(m):
        basis_sq = m if k == 0 else (m - k) / 2.0
        gap = (r[k] - np.trace(out, k)) / basis_sq
        if k == 0:
            out[np.diag_indices(m)] += gap
        else:
            idx = np.arange(m - k)
            out[idx, idx + k] += 0.5 * gap
            out[idx + k, idx] += 0.5 * gap
    return out


def _gram_feasibility(r, tol=1e-11, max_iter=100_000):
    """Douglas-Rachford split between the PSD cone and the diagonal-sum
    affine set.  Returns (gap, certificate matrix with exact sums)."""
    m = r.size
    scale = max(1.0, float(np.abs(r).max()))
    x = _gram_affine_project(np.zeros((m, m)), r)
    u = np.zeros((m, m))
    gap = float("inf")
    for _ in range(max_iter):
        z = psd_project(x + u)
        x = _gram_affine_project(z - u, r)
        u += x - z
        gap = float(np.linalg.norm(x - z))
        if gap <= tol * scale:
            break
    return gap, _gram_affine_project(z, r), tol * scale


def sequence_is_ma(r, q, grid_size=POLY_GRID_SIZE):
    """Decide whether a covariance sequence belongs to a moving-average
    process of order `q`, and certify feasibility with a PSD Gram matrix.

    Feasibility is equivalent to nonnegativity of the trigonometric
    polynomial r_0 + 2 sum_{k<=q} r_k cos(k theta), checked on a dense
    grid; when feasible, the certificate is recovered by a convex
    feasibility split between the PSD cone and the diagonal-sum
    constraints.

    Parameters
    ----------
    r : array-like or CovarianceSequence
        Sequence of length at least q + 1.  Entries beyond lag q must be
        zero (exact membership is only defined for banded sequences).
    q : int
        Moving-average order, q >= 0.

    Returns
    -------
    (bool, GramCertificate or None)
    """
    r = np.asarray(getattr(r, "r", r), dtype=float)
    if q < 0:
        raise ValueError("order must be >= 0")
    if r.size < q + 1:
        raise ValueError(f"sequence of length {r.size} is shorter than q+1 = {q + 1}")
    scale = max(1.0, float(np.abs(r).max()))
    if r.size > q + 1 and float(np.abs(r[q + 1 :]).max()) > 1e-9 * scale:
        raise ValueError(f"entries beyond lag {q} must be zero")

    head = r[: q + 1]
    feasible = trig_polynomial_min(head, grid_size) >= -POLY_NEG_TOL * max(
        head[0], 1e-300
    )
    if not feasible:
        return False, None
    gap, q_mat, gap_tol = _gram_feasibility(head)
    if gap > gap_tol:
        # polynomial nonnegative on the grid but the certificate split did
        # not close; report infeasible rather than hand out a bad witness
        return False, None
    return True, GramCertificate(q_mat)
