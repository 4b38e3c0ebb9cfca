"""Deterministic ADMM solver for the trace-minimization problem family.

Two fixed problem templates over the PSD cone are exposed rather than a
general modeling language:

* :class:`TraceMinProblem` -- minimize the normalized trace of a matrix M
  dominating two given symmetric matrices in the PSD order, with M free,
  Toeplitz, or banded Toeplitz.
* :class:`NearestStructuredProblem` -- jointly minimize the induced
  distance between a target matrix and a structured PSD matrix R
  (Toeplitz or banded Toeplitz, optionally certified by a PSD Gram
  coupling), over the pair (M, R).

Both are solved by consensus ADMM: the global variable is the coefficient
vector of all structured blocks, one splitting variable per PSD constraint,
eigenvalue clipping as the cone projection, and scaled dual updates.  The
x-update is a structured least-squares solve whose normal matrix is
factorized once.  Runs are single-threaded and bit-deterministic for
identical inputs and options.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._validation import as_symmetric, check_same_shape
from .linalg import psd_project, toeplitz_from_sequence

# residual balancing constants: rho doubles/halves when the primal/dual
# residual ratio exceeds RESIDUAL_GAP, within the safety bounds below
RESIDUAL_GAP = 10.0
RHO_FACTOR = 2.0
RHO_MIN = 1e-8
RHO_MAX = 1e8

CONVERGED = "CONVERGED"
MAX_ITERS = "MAX_ITERS"


# ---------------------------------------------------------------------------
# structure tags


@dataclass(frozen=True)
class Structure:
    """Structural constraint on a symmetric matrix variable.

    ``kind`` is one of ``"full"``, ``"toeplitz"`` or ``"banded_toeplitz"``;
    the latter carries the bandwidth ``order`` (number of nonzero
    off-diagonal offsets).
    """

    kind: str
    order: Optional[int] = None

    def __post_init__(self):
        if self.kind not in ("full", "toeplitz", "banded_toeplitz"):
            raise ValueError(f"unknown structure kind {self.kind!r}")
        if self.kind == "banded_toeplitz":
            if self.order is None or self.order < 0:
                raise ValueError("banded Toeplitz structure needs order >= 0")
        elif self.order is not None:
            raise ValueError(f"{self.kind} structure takes no order")

    def validate_dim(self, n):
        if self.kind == "banded_toeplitz" and self.order >= n:
            raise ValueError(
                f"banded Toeplitz order {self.order} must be < dimension {n}"
            )

    @property
    def is_full(self):
        return self.kind == "full"


FULL = Structure("full")
TOEPLITZ = Structure("toeplitz")


def banded_toeplitz(order):
    """Banded Toeplitz structure with nonzero offsets 0..order."""
    return Structure("banded_toeplitz", order)


# ---------------------------------------------------------------------------
# problems, options, reports


@dataclass(frozen=True)
class SolverOptions:
    """Tolerance is relative: iteration stops when both ADMM residual norms
    fall below ``tol * (1 + input scale)``.  ``over_relax`` is the standard
    ADMM relaxation coefficient; values around 1.7 avoid the limit cycles
    plain splitting can fall into on degenerate instances."""

    tol: float = 1e-9
    max_iter: int = 100_000
    rho: float = 1.0
    over_relax: float = 1.7
    balance_iters: int = 100

    def __post_init__(self):
        if not 1.0 <= self.over_relax < 2.0:
            raise ValueError("over_relax must lie in [1, 2)")


@dataclass(frozen=True, eq=False)
class TraceMinProblem:
    """Minimize (1/n) trace(M) subject to M >= A and M >= B (PSD order),
    with M constrained to `m_structure`."""

    a: np.ndarray
    b: np.ndarray
    m_structure: Structure = FULL

    def __post_init__(self):
        a = as_symmetric(self.a, "first shift")
        b = as_symmetric(self.b, "second shift")
        check_same_shape(a, b, "first shift", "second shift")
        self.m_structure.validate_dim(a.shape[0])
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def n(self):
        return self.a.shape[0]


@dataclass(frozen=True, eq=False)
class NearestStructuredProblem:
    """Find the structured PSD matrix R closest to `target` in the
    trace-minimization distance.

    The objective 2 (1/n) trace(M) - (1/n) trace(target) - (1/n) trace(R)
    is minimized jointly over (M, R) subject to M >= target, M >= R and
    R PSD, with R confined to `r_structure`.  With ``ma_gram`` the entries
    of R are tied to the diagonal sums of a PSD Gram matrix of side
    ``r_structure.order + 1``, which restricts R to covariances of
    moving-average processes of that order (and makes the explicit R >= 0
    block redundant).  ``match_trace`` adds trace(R) = trace(target).
    """

    target: np.ndarray
    r_structure: Structure = TOEPLITZ
    ma_gram: bool = False
    match_trace: bool = False
    m_structure: Structure = FULL

    def __post_init__(self):
        t = as_symmetric(self.target, "target")
        n = t.shape[0]
        if self.r_structure.is_full:
            raise ValueError("R must carry Toeplitz or banded Toeplitz structure")
        self.r_structure.validate_dim(n)
        self.m_structure.validate_dim(n)
        if self.ma_gram and self.r_structure.kind != "banded_toeplitz":
            raise ValueError("the Gram coupling requires a banded Toeplitz R")
        object.__setattr__(self, "target", t)

    @property
    def n(self):
        return self.target.shape[0]


@dataclass(eq=False)
class SolveReport:
    """Solver output.  ``objective`` is the contractual value; optimizers
    are exposed best-effort since minimizers need not be unique."""

    status: str
    objective: float
    M_star: np.ndarray
    R_star: Optional[np.ndarray] = None
    gram: Optional[np.ndarray] = None
    iterations: int = 0
    primal_residual: float = float("nan")
    dual_residual: float = float("nan")

    @property
    def converged(self):
        return self.status == CONVERGED


# ---------------------------------------------------------------------------
# symmetric vectorization and structure algebra

_SQRT2 = np.sqrt(2.0)
_triu_cache = {}


def _triu(n):
    if n not in _triu_cache:
        _triu_cache[n] = np.triu_indices(n, 1)
    return _triu_cache[n]


def _svec(a):
    """Isometric half-vectorization: diagonal entries, then upper triangle
    scaled by sqrt(2), so that the Euclidean and Frobenius norms agree."""
    n = a.shape[0]
    return np.concatenate([np.diag(a), _SQRT2 * a[_triu(n)]])


def _smat(vec, n):
    iu = _triu(n)
    out = np.zeros((n, n))
    out[np.diag_indices(n)] = vec[:n]
    out[iu] = vec[n:] / _SQRT2
    out += np.triu(out, 1).T
    return out


def _struct_dim(structure, n):
    if structure.kind == "toeplitz":
        return n
    if structure.kind == "banded_toeplitz":
        return structure.order + 1
    return n * (n + 1) // 2


def _toeplitz_basis(n, d):
    """svec images of the Toeplitz basis matrices Toep(e_k), k < d."""
    cols = []
    for k in range(d):
        e = np.zeros(n)
        e[k] = 1.0
        cols.append(_svec(toeplitz_from_sequence(e, n)))
    return np.column_stack(cols)


def _banded_project_coefs(a, q):
    """First-row coefficients of the Frobenius projection onto banded
    Toeplitz matrices of bandwidth q."""
    n = a.shape[0]
    out = np.empty(q + 1)
    out[0] = np.trace(a) / n
    for k in range(1, q + 1):
        out[k] = 0.5 * (np.diag(a, k).mean() + np.diag(a, -k).mean())
    return out


def _structural_projection(structure, n):
    """Orthogonal projector onto the structure subspace, as a matrix map."""
    if structure.is_full:
        return lambda a: a
    q = n - 1 if structure.kind == "toeplitz" else structure.order

    def proj(a):
        return toeplitz_from_sequence(_banded_project_coefs(a, q), n)

    return proj


def _gram_coupling(n, q):
    """svec-space map from a Gram matrix Q of side q+1 to the banded
    Toeplitz matrix Toep(diagonal sums of Q) of side n."""
    m = q + 1
    dq = m * (m + 1) // 2
    cols = np.empty((n * (n + 1) // 2, dq))
    for j in range(dq):
        e = np.zeros(dq)
        e[j] = 1.0
        qmat = _smat(e, m)
        sums = np.array([np.trace(qmat, k) for k in range(m)])
        cols[:, j] = _svec(toeplitz_from_sequence(sums, n))
    return cols


def gram_diagonal_sums(q_mat):
    """Sequence r_k = sum of the k-th superdiagonal of a Gram matrix."""
    m = q_mat.shape[0]
    return np.array([np.trace(q_mat, k) for k in range(m)])


# ---------------------------------------------------------------------------
# ADMM cores


def _lift_to_feasible(m, shifts):
    """Shift M along the identity until it dominates every shift.

    The returned iterate is exactly feasible (up to eigensolver rounding),
    so the reported trace is a true upper bound on the optimum; in
    particular the induced distance value can never come out negative.
    """
    lift = 0.0
    for a in shifts:
        w = np.linalg.eigvalsh(m - a)
        lift = max(lift, -float(w[0]))
    if lift > 0.0:
        m = m + lift * np.eye(m.shape[0])
    return m


def _balance_rho(rho, r_norm, s_norm, us):
    if r_norm > RESIDUAL_GAP * s_norm and rho * RHO_FACTOR <= RHO_MAX:
        return rho * RHO_FACTOR, [u / RHO_FACTOR for u in us]
    if s_norm > RESIDUAL_GAP * r_norm and rho / RHO_FACTOR >= RHO_MIN:
        return rho / RHO_FACTOR, [u * RHO_FACTOR for u in us]
    return rho, us


def solve_trace_min(problem, opts=None):
    """Solve a :class:`TraceMinProblem`.

    Returns a :class:`SolveReport` whose ``objective`` is
    tau = (1/n) trace(M*).  M* lies in the declared structure exactly
    (projection-enforced each iteration); the PSD domination constraints
    hold up to the solver tolerance.
    """
    opts = opts or SolverOptions()
    n = problem.n
    shifts = [problem.a, problem.b]
    proj = _structural_projection(problem.m_structure, n)
    scale = 1.0 + max(np.linalg.norm(s) for s in shifts)

    rho = opts.rho
    eye_term = np.eye(n) / n
    zs = [np.zeros((n, n)) for _ in shifts]
    us = [np.zeros((n, n)) for _ in shifts]
    k = len(shifts)

    alpha = opts.over_relax
    m = proj(sum(shifts) / k)
    r_norm = s_norm = float("inf")
    it = 0
    for it in range(1, opts.max_iter + 1):
        target = sum(a + z - u for a, z, u in zip(shifts, zs, us)) / k
        m = proj(target - eye_term / (k * rho))

        r2 = 0.0
        s2 = 0.0
        dz_sum = np.zeros((n, n))
        for i, a in enumerate(shifts):
            g = m - a
            g_rel = alpha * g + (1.0 - alpha) * zs[i]
            z_new = psd_project(g_rel + us[i])
            dz_sum += z_new - zs[i]
            us[i] += g_rel - z_new
            zs[i] = z_new
            resid = g - z_new
            r2 += float(np.sum(resid * resid))
        s2 = float(np.sum(proj(dz_sum) ** 2))
        r_norm = np.sqrt(r2)
        s_norm = rho * np.sqrt(s2)
        if max(r_norm, s_norm) <= opts.tol * scale:
            break
        # rho only adapts during warmup; late adjustments can stall the
        # iteration in a limit cycle on degenerate instances
        if it <= opts.balance_iters:
            rho, us = _balance_rho(rho, r_norm, s_norm, us)

    status = CONVERGED if max(r_norm, s_norm) <= opts.tol * scale else MAX_ITERS
    m = _lift_to_feasible(m, shifts)
    return SolveReport(
        status=status,
        objective=float(np.trace(m)) / n,
        M_star=m,
        iterations=it,
        primal_residual=r_norm,
        dual_residual=s_norm,
    )


class _NearestCore:
    """Precomputed maps and factorization for the joint (M, R) solve.

    The M block is eliminated from the x-update in closed form (its
    stationarity condition is linear and the R structure is contained in
    the M structure), leaving a small positive definite system in the R
    coefficients that is factorized once.
    """

    def __init__(self, problem):
        n = problem.n
        self.n = n
        self.problem = problem
        self.proj_m = _structural_projection(problem.m_structure, n)
        self.gram = problem.ma_gram
        q = problem.r_structure.order if problem.r_structure.kind == "banded_toeplitz" else None

        if self.gram:
            self.q = q
            self.L = _gram_coupling(n, q)
            self.d = self.L.shape[1]
            # objective coefficient of the R trace through the coupling:
            # trace(R) = n * trace(Q)
            self.a_y = -_svec(np.eye(q + 1))
            self.g_eq = _svec(np.eye(q + 1)) * n
            kmat = 0.5 * (self.L.T @ self.L) + np.eye(self.d)
        else:
            self.d = _struct_dim(problem.r_structure, n)
            self.L = _toeplitz_basis(n, self.d)
            a_y = np.zeros(self.d)
            a_y[0] = -1.0  # -(1/n) trace(R) = -r_0
            self.a_y = a_y
            g_eq = np.zeros(self.d)
            g_eq[0] = n
            self.g_eq = g_eq
            kmat = 1.5 * (self.L.T @ self.L)

        self.a_m = _svec(np.eye(n)) * (2.0 / n)
        self.chol = np.linalg.cholesky(kmat)
        if problem.match_trace:
            kg = self._solve_k(self.g_eq)
            self.kkt_g = kg
            self.kkt_gg = float(self.g_eq @ kg)
            self.h_eq = float(np.trace(problem.target))

    def _solve_k(self, rhs):
        y = np.linalg.solve(self.chol, rhs)
        return np.linalg.solve(self.chol.T, y)

    def solve_y(self, rhs):
        y = self._solve_k(rhs)
        if self.problem.match_trace:
            mu = (float(self.g_eq @ y) - self.h_eq) / self.kkt_gg
            y = y - mu * self.kkt_g
        return y

    def r_matrix(self, y):
        if self.gram:
            q_mat = _smat(y, self.q + 1)
            return toeplitz_from_sequence(gram_diagonal_sums(q_mat), self.n), q_mat
        return toeplitz_from_sequence(y, self.n), None


def solve_nearest_structured(problem, opts=None):
    """Solve a :class:`NearestStructuredProblem`.

    Returns a :class:`SolveReport` with ``objective`` equal to the
    minimized distance, the dominating matrix ``M_star``, the structured
    approximant ``R_star`` and, under the Gram coupling, the certifying
    PSD matrix ``gram``.
    """
    opts = opts or SolverOptions()
    core = _NearestCore(problem)
    n = problem.n
    t_vec = _svec(problem.target)
    scale = 1.0 + np.linalg.norm(problem.target)
    rho = opts.rho

    nq = core.d if core.gram else None
    z1 = np.zeros_like(t_vec)
    z2 = np.zeros_like(t_vec)
    z3 = np.zeros(nq) if core.gram else np.zeros_like(t_vec)
    u1 = np.zeros_like(z1)
    u2 = np.zeros_like(z2)
    u3 = np.zeros_like(z3)

    alpha = opts.over_relax
    y = np.zeros(core.d)
    m_vec = t_vec.copy()
    r_norm = s_norm = float("inf")
    it = 0
    for it in range(1, opts.max_iter + 1):
        v1 = z1 - u1
        v2 = z2 - u2
        v3 = z3 - u3

        c_m = t_vec + v1 + v2 - core.a_m / rho
        pc_m = _svec(core.proj_m(_smat(c_m, n)))
        rhs = 0.5 * core.L.T @ (t_vec + v1 - v2)
        if core.gram:
            rhs += v3
        else:
            rhs += core.L.T @ v3
        rhs -= (core.a_y + 0.5 * core.L.T @ core.a_m) / rho
        y = core.solve_y(rhs)
        ly = core.L @ y
        m_vec = 0.5 * (ly + pc_m)

        g1 = m_vec - t_vec
        g2 = m_vec - ly
        g3 = y if core.gram else ly

        g1_rel = alpha * g1 + (1.0 - alpha) * z1
        g2_rel = alpha * g2 + (1.0 - alpha) * z2
        g3_rel = alpha * g3 + (1.0 - alpha) * z3

        z1_new = _svec(psd_project(_smat(g1_rel + u1, n)))
        z2_new = _svec(psd_project(_smat(g2_rel + u2, n)))
        if core.gram:
            z3_new = _svec(psd_project(_smat(g3_rel + u3, core.q + 1)))
        else:
            z3_new = _svec(psd_project(_smat(g3_rel + u3, n)))

        dz1 = z1_new - z1
        dz2 = z2_new - z2
        dz3 = z3_new - z3

        u1 += g1_rel - z1_new
        u2 += g2_rel - z2_new
        u3 += g3_rel - z3_new
        z1, z2, z3 = z1_new, z2_new, z3_new

        res1 = g1 - z1
        res2 = g2 - z2
        res3 = g3 - z3
        r_norm = np.sqrt(
            float(res1 @ res1) + float(res2 @ res2) + float(res3 @ res3)
        )
        s_m = _svec(core.proj_m(_smat(dz1 + dz2, n)))
        s_y = -core.L.T @ dz2 + (dz3 if core.gram else core.L.T @ dz3)
        s_norm = rho * np.sqrt(float(s_m @ s_m) + float(s_y @ s_y))
        if max(r_norm, s_norm) <= opts.tol * scale:
            break
        if it <= opts.balance_iters:
            rho, (u1, u2, u3) = _balance_rho(rho, r_norm, s_norm, [u1, u2, u3])

    status = CONVERGED if max(r_norm, s_norm) <= opts.tol * scale else MAX_ITERS
    r_star, q_mat = core.r_matrix(y)
    m_star = _lift_to_feasible(_smat(m_vec, n), [problem.target, r_star])
    objective = (
        2.0 * np.trace(m_star) - np.trace(problem.target) - np.trace(r_star)
    ) / n
    return SolveReport(
        status=status,
        objective=float(objective),
        M_star=m_star,
        R_star=r_star,
        gram=q_mat,
        iterations=it,
        primal_residual=r_norm,
        dual_residual=s_norm,
    )
