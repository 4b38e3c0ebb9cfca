import numpy as np
import pytest

from covdist import toeplitz_from_sequence


def toepm(row):
    return toeplitz_from_sequence(np.asarray(row, dtype=float))


def random_psd(rng, n, scale=1.0):
    a = rng.normal(size=(n, n))
    return scale * (a @ a.T) / n


def random_toeplitz_psd(rng, n):
    """Toeplitz PSD matrix from a random moving-average spectrum plus a
    white-noise floor (keeps it comfortably inside the cone)."""
    b = rng.normal(size=n)
    r = np.array([b[: n - k] @ b[k:] for k in range(n)])
    r[0] += 0.5
    return toeplitz_from_sequence(r)


def nuclear_delta(a, b):
    """Independent closed form for the unstructured distance: the minimal
    dominating trace is trace(B) + trace of the positive part of A - B,
    so the distance is the normalized sum of absolute eigenvalues of the
    difference."""
    n = a.shape[0]
    return float(np.abs(np.linalg.eigvalsh(a - b)).sum()) / n


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


# the printed 5x5 sample covariance used across the approximation tests
R5HAT = np.array([
    [4.0362, 2.9053, 1.8043, 0.4042, 0.1718],
    [2.9053, 4.0547, 2.9268, 1.7945, 0.3800],
    [1.8043, 2.9268, 4.0792, 2.9143, 1.7733],
    [0.4042, 1.7945, 2.9143, 4.0819, 2.9421],
    [0.1718, 0.3800, 1.7733, 2.9421, 4.0237],
])

# its published Toeplitz and order-2 moving-average approximants
R5_TOEPLITZ_ROW = np.array([4.0677, 2.9237, 1.7912, 0.3979, 0.1822])
R5_MA2_ROW = np.array([3.9945, 2.1588, 0.5693, 0.0, 0.0])

# the 3x3 estimated covariance and its published approximants
R3HAT = np.array([[1.1, 0.9, 1.05], [0.9, 0.8, 0.9], [1.05, 0.9, 1.1]]) / 3.0
R3_DELTA = np.array([[1.1, 0.9, 1.05], [0.9, 1.1, 0.9], [1.05, 0.9, 1.1]]) / 3.0
R3_VN = np.array([[1.0, 0.942, 0.957], [0.942, 1.0, 0.942], [0.957, 0.942, 1.0]]) / 3.0
