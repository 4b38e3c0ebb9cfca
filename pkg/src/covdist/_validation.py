"""Input validation helpers shared across the package."""

import warnings

import numpy as np

#: Relative asymmetry above which as_symmetric() warns before symmetrizing.
ASYMMETRY_WARN_TOL = 1e-8


class DomainError(ValueError):
    """Input is outside the mathematical domain of an operation."""


def check_square(a, name="matrix"):
    """Coerce to a float ndarray and verify it is square 2-D with finite entries."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square 2-D, got shape {a.shape}")
    if a.shape[0] < 1:
        raise ValueError(f"{name} must have dimension >= 1")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def as_symmetric(a, name="matrix", warn_tol=ASYMMETRY_WARN_TOL):
    """Return the symmetric part (A + A')/2 of a square matrix.

    File inputs carry rounding, so asymmetry below `warn_tol` (relative to
    the Frobenius norm) is silently repaired; larger asymmetry triggers a
    warning but is still symmetrized.
    """
    a = check_square(a, name)
    sym = 0.5 * (a + a.T)
    scale = max(1.0, np.linalg.norm(sym))
    gap = np.linalg.norm(a - a.T)
    if gap > warn_tol * scale:
        warnings.warn(
            f"{name} deviates from symmetry by {gap:.3e} (relative "
            f"{gap / scale:.3e}); using its symmetric part",
            stacklevel=2,
        )
    return sym


def check_psd(a, name="matrix", tol=1e-8):
    """Validate that a symmetric matrix is PSD up to a relative slack.

    Eigenvalues above `-tol * ||A||_2` are treated as rounding and clipped
    to zero; anything below raises DomainError.  Returns the clipped matrix.
    """
    w, v = np.linalg.eigh(a)
    scale = max(np.abs(w[0]), np.abs(w[-1]), 1e-300)
    if w[0] < -tol * scale:
        raise DomainError(
            f"{name} is not positive semidefinite: min eigenvalue "
            f"{w[0]:.3e} < -{tol:.1e} * {scale:.3e}"
        )
    if w[0] >= 0.0:
        return a
    clipped = (v * np.maximum(w, 0.0)) @ v.T
    return 0.5 * (clipped + clipped.T)


def check_same_shape(a, b, name_a="first matrix", name_b="second matrix"):
    if a.shape != b.shape:
        raise ValueError(
            f"{name_a} and {name_b} must have equal shapes, "
            f"got {a.shape} and {b.shape}"
        )
