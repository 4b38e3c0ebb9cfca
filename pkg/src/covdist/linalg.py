"""Dense symmetric-matrix kernel.

Eigendecomposition, cone and subspace projections, the matrix logarithm,
and the adjoint of its directional derivative.  Everything operates on
plain ndarrays; symmetry of inputs is the caller's responsibility (use
:func:`covdist.as_symmetric` on untrusted data).
"""

from typing import NamedTuple

import numpy as np

from ._validation import DomainError, check_square

#: Relative eigenvalue threshold below which a matrix is not accepted as
#: positive definite by matrix_log / log_frechet_adjoint.
PD_EIG_TOL = 1e-12

#: Relative eigenvalue gap below which the log divided difference switches
#: to its 1/lambda limit (removable singularity).
_DIVDIFF_TOL = 1e-12


class EigDecomposition(NamedTuple):
    """Eigenvalues in ascending order and the orthonormal eigenvector frame."""

    values: np.ndarray
    vectors: np.ndarray


def sym_eig(a):
    """Eigendecomposition of a symmetric matrix.

    Parameters
    ----------
    a : ndarray
        Symmetric matrix with finite entries.

    Returns
    -------
    EigDecomposition
        ``values`` ascending, ``vectors`` orthonormal columns, with
        ``vectors @ diag(values) @ vectors.T`` reconstructing `a`.
    """
    a = check_square(a)
    w, v = np.linalg.eigh(a)
    return EigDecomposition(w, v)


def min_eig(a):
    """Smallest eigenvalue of a symmetric matrix."""
    return float(np.linalg.eigvalsh(a)[0])


def psd_project(a):
    """Frobenius-nearest positive semidefinite matrix.

    Clips negative eigenvalues to zero in the eigenbasis of `a`.
    Idempotent and nonexpansive.
    """
    w, v = np.linalg.eigh(a)
    if w[0] >= 0.0:
        return a
    out = (v * np.maximum(w, 0.0)) @ v.T
    return 0.5 * (out + out.T)


def toeplitz_project(a):
    """Frobenius-nearest symmetric Toeplitz matrix (diagonal averaging).

    Each diagonal (and its mirror) is replaced by its arithmetic mean.
    Linear, idempotent and trace-preserving.
    """
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    return toeplitz_from_sequence(diagonal_means(a), n)


def diagonal_means(a):
    """Mean of each diagonal pair of a symmetric matrix, offsets 0..n-1."""
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    out = np.empty(n)
    out[0] = np.trace(a) / n
    for k in range(1, n):
        out[k] = 0.5 * (np.diag(a, k).mean() + np.diag(a, -k).mean())
    return out


def toeplitz_from_sequence(r, n=None):
    """Symmetric Toeplitz matrix with first row ``r`` (zero-padded to n)."""
    r = np.asarray(r, dtype=float)
    if n is None:
        n = r.size
    row = np.zeros(n)
    row[: min(n, r.size)] = r[:n]
    idx = np.abs(np.subtract.outer(np.arange(n), np.arange(n)))
    return row[idx]


def _pd_eig(a, name):
    w, v = np.linalg.eigh(a)
    scale = max(float(np.abs(w).max()), 1e-300)
    if w[0] <= PD_EIG_TOL * scale:
        raise DomainError(
            f"{name} must be positive definite; min eigenvalue {w[0]:.3e} "
            f"fails the threshold {PD_EIG_TOL:.0e} * {scale:.3e}"
        )
    return w, v


def matrix_log(a):
    """Logarithm of a symmetric positive definite matrix."""
    w, v = _pd_eig(a, "matrix_log input")
    out = (v * np.log(w)) @ v.T
    return 0.5 * (out + out.T)


def _log_divided_differences(w):
    """Table of (log wi - log wj)/(wi - wj) with the 1/w limit on near-ties."""
    logw = np.log(w)
    diff = np.subtract.outer(w, w)
    close = np.abs(diff) < _DIVDIFF_TOL * np.maximum.outer(w, w)
    # avoid 0/0 before patching the removable entries
    safe = np.where(close, 1.0, diff)
    phi = np.subtract.outer(logw, logw) / safe
    mean = 0.5 * (np.add.outer(w, w))
    return np.where(close, 1.0 / mean, phi)


def log_frechet_adjoint(a, w_mat):
    """Gradient of ``R -> trace(W log R)`` at ``a``.

    In the eigenbasis of `a` the derivative acts by Hadamard multiplication
    with the log divided-difference table, so the adjoint applied to `w_mat`
    is ``V (Phi o (V' W V)) V'``.  Symmetric and linear in `w_mat`.

    Parameters
    ----------
    a : ndarray
        Symmetric positive definite evaluation point.
    w_mat : ndarray
        Symmetric weight matrix.

    Returns
    -------
    ndarray
        Symmetric gradient matrix.
    """
    w, v = _pd_eig(a, "log_frechet_adjoint input")
    phi = _log_divided_differences(w)
    g = v.T @ w_mat @ v
    out = v @ (g * phi) @ v.T
    return 0.5 * (out + out.T)
