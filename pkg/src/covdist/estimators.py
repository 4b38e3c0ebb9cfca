"""Scikit-learn compatible covariance estimators.

Wraps the structured approximation routines in the familiar
``fit``/``get_params`` estimator contract so they compose with pipelines,
grid search and anything else expecting the scikit-learn API.  Samples
are rows: fitting on an (n_windows, dim) array of sliding windows of a
zero-mean series reproduces the window-averaged sample covariance.
"""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .approx import (
    nearest_ma_delta,
    nearest_toeplitz_delta,
    nearest_toeplitz_ls,
    vn_nearest_toeplitz,
)
from .solver import SolverOptions


def sliding_windows(series, dim):
    """(T - dim + 1, dim) window matrix of a 1-D series, ready for fit()."""
    series = np.asarray(series, dtype=float)
    if series.ndim != 1:
        raise ValueError("series must be 1-D")
    if series.size < dim:
        raise ValueError(f"series of length {series.size} is shorter than dim = {dim}")
    return np.lib.stride_tricks.sliding_window_view(series, dim).copy()


class EmpiricalWindowCovariance(BaseEstimator):
    """Window-averaged covariance of a zero-mean stationary series.

    fit(X) with X of shape (n_windows, dim) sets ``covariance_`` to the
    mean outer product of the rows (no centering: the process is modeled
    as zero-mean).  PSD by construction, generally not Toeplitz.
    """

    def fit(self, X, y=None):
        X = check_array(X, ensure_min_samples=1)
        self.n_features_in_ = X.shape[1]
        cov = X.T @ X / X.shape[0]
        self.covariance_ = 0.5 * (cov + cov.T)
        return self


class StructuredCovariance(BaseEstimator):
    """Structured covariance approximation of windowed data.

    Computes the window-averaged sample covariance and replaces it by the
    nearest covariance with the requested structure.

    Parameters
    ----------
    structure : {"toeplitz", "ma", "ls", "vn"}
        ``toeplitz``: nearest Toeplitz PSD matrix in the
        trace-minimization distance; ``ma``: nearest moving-average
        covariance of order `order` (with a PSD Gram certificate);
        ``ls``: least-squares Toeplitz projection (may be indefinite);
        ``vn``: divergence-minimizing Toeplitz matrix with matched trace.
    order : int, optional
        Moving-average order, required for ``structure="ma"``.
    match_trace : bool
        Match trace(approximant) to trace(sample covariance); implicit
        for ``structure="vn"``.
    tol, max_iter : solver controls for the distance-based structures.

    Attributes
    ----------
    sample_covariance_ : ndarray
        Unstructured window-averaged covariance.
    covariance_ : ndarray
        The structured approximant.
    distance_ : float
        Distance between the two (metric depends on `structure`).
    certificate_ : ndarray or None
        Gram certificate for ``structure="ma"``.
    """

    _STRUCTURES = ("toeplitz", "ma", "ls", "vn")

    def __init__(self, structure="toeplitz", order=None, match_trace=False,
                 tol=1e-9, max_iter=100_000):
        self.structure = structure
        self.order = order
        self.match_trace = match_trace
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, X, y=None):
        if self.structure not in self._STRUCTURES:
            raise ValueError(
                f"structure must be one of {self._STRUCTURES}, got {self.structure!r}"
            )
        X = check_array(X, ensure_min_samples=1)
        self.n_features_in_ = X.shape[1]
        cov = X.T @ X / X.shape[0]
        self.sample_covariance_ = 0.5 * (cov + cov.T)

        opts = SolverOptions(tol=self.tol, max_iter=self.max_iter)
        if self.structure == "toeplitz":
            result = nearest_toeplitz_delta(
                self.sample_covariance_, match_trace=self.match_trace, opts=opts
            )
        elif self.structure == "ma":
            if self.order is None:
                raise ValueError('structure="ma" requires an order')
            result = nearest_ma_delta(
                self.sample_covariance_, self.order,
                match_trace=self.match_trace, opts=opts,
            )
        elif self.structure == "ls":
            result = nearest_toeplitz_ls(self.sample_covariance_)
        else:
            result = vn_nearest_toeplitz(self.sample_covariance_)

        self.covariance_ = result.R
        self.distance_ = result.distance
        self.certificate_ = (
            result.certificate.q_matrix if result.certificate is not None else None
        )
        self.diagnostics_ = result.diagnostics
        return self

    def error_norm(self, comp_cov):
        """Frobenius distance between the fitted approximant and a
        reference covariance."""
        check_is_fitted(self, "covariance_")
        return float(np.linalg.norm(self.covariance_ - np.asarray(comp_cov)))
