"""Spectral measures on [-pi, pi] and their statistics.

A measure is an even nonnegative density sampled on a uniform midpoint
grid plus a finite list of atoms (spectral lines).  The module provides
the L1 distance and the optimal perturbation decomposition, the Fourier
map to autocorrelation sequences, moving-average models with seeded
simulation, sample covariances of time series, and the harness relating
the Toeplitz-constrained matrix distance to the spectral L1 distance as
the dimension grows.

Measure normalization: a density f contributes (1/2pi) * integral(f) to
the total mass, an atom contributes its mass directly, so that the lag-k
autocorrelation is (1/2pi) * integral(f cos k theta) + sum(mass cos k t).
"""

import warnings
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from ._rng import normals
from ._validation import DomainError
from .linalg import toeplitz_from_sequence
from .metrics import delta
from .solver import TOEPLITZ, SolverOptions

DEFAULT_GRID_SIZE = 4096

#: Atoms closer than this in angle are treated as co-located.
ATOM_MATCH_TOL = 1e-9

_EVENNESS_WARN_TOL = 1e-8


def grid_angles(grid_size):
    """Midpoint grid theta_j = -pi + 2 pi (j + 1/2) / m."""
    return -np.pi + 2.0 * np.pi * (np.arange(grid_size) + 0.5) / grid_size


def _wrap_angle(theta):
    theta = float(theta)
    if -np.pi <= theta < np.pi:
        return theta  # avoid modulo rounding on in-range angles
    return float((theta + np.pi) % (2.0 * np.pi) - np.pi)


def _canonical_atoms(atoms):
    """Wrap, merge co-located atoms, and symmetrize masses across +/- pairs."""
    merged = []
    for theta, mass in atoms:
        theta = _wrap_angle(theta)
        for i, (t0, m0) in enumerate(merged):
            if abs(theta - t0) <= ATOM_MATCH_TOL:
                merged[i] = (t0, m0 + mass)
                break
        else:
            merged.append((theta, mass))

    # measure symmetrization: mu -> (mu + mu o neg)/2, which creates the
    # mirror of any unpaired line at half its mass (total mass preserved)
    def mass_at(theta):
        return next(
            (m0 for t0, m0 in merged if abs(t0 - theta) <= ATOM_MATCH_TOL), 0.0
        )

    locations = []
    for theta, _ in merged:
        for cand in (theta, _wrap_angle(-theta)):
            if not any(abs(cand - t0) <= ATOM_MATCH_TOL for t0 in locations):
                locations.append(cand)

    sym = []
    changed = 0.0
    for theta in sorted(locations):
        half = 0.5 * (mass_at(theta) + mass_at(_wrap_angle(-theta)))
        if abs(_wrap_angle(-theta) - theta) <= ATOM_MATCH_TOL:
            half = mass_at(theta)  # self-mirrored line (theta = 0 or -pi)
        changed = max(changed, abs(half - mass_at(theta)))
        if half != 0.0:
            sym.append((theta, half))
    if changed > _EVENNESS_WARN_TOL:
        warnings.warn(
            f"atom masses symmetrized across +/- pairs (max change {changed:.3e})",
            stacklevel=3,
        )
    return sym


def _clip_nonnegative(values, what):
    values = np.asarray(values, dtype=float)
    if values.size and values.min() < 0.0:
        scale = max(float(np.abs(values).max()), 1e-300)
        if values.min() < -1e-12 * scale:
            raise ValueError(f"{what} must be nonnegative")
        values = np.maximum(values, 0.0)
    return values


@dataclass(eq=False)
class SpectralMeasure:
    """Even nonnegative spectral measure: gridded density plus atoms."""

    values: np.ndarray
    atoms: List[Tuple[float, float]] = field(default_factory=list)

    def __post_init__(self):
        values = _clip_nonnegative(self.values, "density values")
        m = values.size
        if m < 2 or (m & (m - 1)) != 0:
            raise ValueError(f"grid size must be a power of two, got {m}")
        even = 0.5 * (values + values[::-1])
        gap = float(np.abs(values - values[::-1]).max())
        if gap > _EVENNESS_WARN_TOL * max(1.0, float(values.max(initial=0.0))):
            warnings.warn(
                f"density symmetrized to an even function (max change {gap / 2:.3e})",
                stacklevel=2,
            )
        masses = _clip_nonnegative([m_ for _, m_ in self.atoms], "atom masses")
        atoms = _canonical_atoms(
            [(t, m_) for (t, _), m_ in zip(self.atoms, masses)]
        )
        self.values = even
        self.atoms = atoms

    # -- constructors -----------------------------------------------------

    @classmethod
    def constant(cls, level, grid_size=DEFAULT_GRID_SIZE):
        return cls(np.full(grid_size, float(level)))

    @classmethod
    def from_cosine_polynomial(cls, coeffs, grid_size=DEFAULT_GRID_SIZE):
        """Density r_0 + 2 sum_k r_k cos(k theta) from its coefficients."""
        theta = grid_angles(grid_size)
        coeffs = np.asarray(coeffs, dtype=float)
        vals = np.full(grid_size, coeffs[0])
        for k in range(1, coeffs.size):
            vals += 2.0 * coeffs[k] * np.cos(k * theta)
        return cls(vals)

    @classmethod
    def dirac(cls, theta, mass, grid_size=DEFAULT_GRID_SIZE):
        return cls(np.zeros(grid_size), [(theta, mass)])

    # -- accessors ---------------------------------------------------------

    @property
    def grid_size(self):
        return self.values.size

    def density_mass(self):
        """(1/2pi) integral of the density (midpoint rule)."""
        return float(self.values.mean())

    def atom_mass(self):
        return float(sum(m for _, m in self.atoms))

    def total_mass(self):
        return self.density_mass() + self.atom_mass()

    def atom_dict(self):
        return dict(self.atoms)

    # -- JSON schema (shared with the CLI) ----------------------------------

    def to_dict(self):
        return {
            "grid_size": int(self.grid_size),
            "values": [float(v) for v in self.values],
            "atoms": [{"theta": float(t), "mass": float(m)} for t, m in self.atoms],
        }

    @classmethod
    def from_dict(cls, payload):
        try:
            values = np.asarray(payload["values"], dtype=float)
            atoms = [
                (float(a["theta"]), float(a["mass"]))
                for a in payload.get("atoms", [])
            ]
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed spectral measure document: {exc}") from exc
        if "grid_size" in payload and int(payload["grid_size"]) != values.size:
            raise ValueError("grid_size field disagrees with number of values")
        return cls(values, atoms)


@dataclass(eq=False)
class CovarianceSequence:
    """Autocorrelation samples r_0 .. r_{n-1} of a stationary process."""

    r: np.ndarray

    def __post_init__(self):
        self.r = np.asarray(self.r, dtype=float)
        if self.r.ndim != 1 or self.r.size < 1:
            raise ValueError("sequence must be a nonempty 1-D array")

    @property
    def n(self):
        return self.r.size

    def toeplitz(self, n=None):
        return toeplitz_from_sequence(self.r, n or self.n)

    def is_valid_covariance(self, tol=1e-8):
        w = np.linalg.eigvalsh(self.toeplitz())
        return bool(w[0] >= -tol * max(1.0, float(np.abs(w).max())))


@dataclass(eq=False)
class MaModel:
    """Moving-average filter b_0 .. b_q driven by unit-variance white noise."""

    b: np.ndarray

    def __post_init__(self):
        self.b = np.asarray(self.b, dtype=float)
        if self.b.ndim != 1 or self.b.size < 1:
            raise ValueError("filter must have at least one coefficient")

    @property
    def order(self):
        return self.b.size - 1


@dataclass(eq=False)
class TimeSeries:
    """Realization together with the seed that produced it."""

    samples: np.ndarray
    seed: Optional[int] = None

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        if self.samples.ndim != 1 or self.samples.size < 1:
            raise ValueError("series must be a nonempty 1-D array")

    @property
    def length(self):
        return self.samples.size


# ---------------------------------------------------------------------------
# measure arithmetic


def _check_compatible(f, g):
    if f.grid_size != g.grid_size:
        raise ValueError(
            f"grid sizes differ: {f.grid_size} vs {g.grid_size}"
        )


def _matched_atom_masses(f, g):
    """Masses of both measures at the union of atom locations."""
    locs = []
    for t in list(f.atom_dict()) + list(g.atom_dict()):
        if not any(abs(t - t0) <= ATOM_MATCH_TOL for t0 in locs):
            locs.append(t)
    locs.sort()

    def mass_at(measure, t):
        return next(
            (m for t0, m in measure.atoms if abs(t0 - t) <= ATOM_MATCH_TOL), 0.0
        )

    return [(t, mass_at(f, t), mass_at(g, t)) for t in locs]


def optimal_perturbations(f, g):
    """Minimal-energy perturbations reconciling two spectral measures.

    Returns ``(psi, psi_hat, envelope)`` with ``psi = max(g - f, 0)``,
    ``psi_hat = max(f - g, 0)`` pointwise over densities and atom masses,
    and the envelope ``max(f, g)``.  The supports of the two perturbations
    are disjoint and ``f + psi = g + psi_hat = envelope``.
    """
    _check_compatible(f, g)
    psi_vals = np.maximum(g.values - f.values, 0.0)
    psi_hat_vals = np.maximum(f.values - g.values, 0.0)
    env_vals = np.maximum(f.values, g.values)
    matched = _matched_atom_masses(f, g)
    psi_atoms = [(t, mg - mf) for t, mf, mg in matched if mg > mf]
    psi_hat_atoms = [(t, mf - mg) for t, mf, mg in matched if mf > mg]
    env_atoms = [(t, max(mf, mg)) for t, mf, mg in matched]
    return (
        SpectralMeasure(psi_vals, psi_atoms),
        SpectralMeasure(psi_hat_vals, psi_hat_atoms),
        SpectralMeasure(env_vals, env_atoms),
    )


def l1_distance(f, g):
    """L1 distance between two spectral measures.

    Quadrature of |f - g| over the density grid (normalized by 2 pi) plus
    the total variation between the singular parts; equals the combined
    mass of the optimal perturbations.
    """
    _check_compatible(f, g)
    dens = float(np.abs(f.values - g.values).mean())
    atoms = float(sum(abs(mf - mg) for _, mf, mg in _matched_atom_masses(f, g)))
    return dens + atoms


def normalized_ratios(f, g):
    """Perturbation-to-envelope ratios, each in [0, 1].

    ``ratio_total`` divides the combined perturbation mass by the envelope
    mass (atoms included in both).  ``ratio_pointwise`` averages the
    density ratio (psi + psi_hat)/envelope over the grid, taking 0 where
    the envelope vanishes; atoms carry no angular measure and do not
    enter the pointwise average.
    """
    psi, psi_hat, env = optimal_perturbations(f, g)
    env_total = env.total_mass()
    if env_total <= 0.0:
        raise DomainError("both measures are identically zero")
    ratio_total = (psi.total_mass() + psi_hat.total_mass()) / env_total
    num = psi.values + psi_hat.values
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(env.values > 0.0, num / env.values, 0.0)
    return float(ratio_total), float(ratio.mean())


# ---------------------------------------------------------------------------
# Fourier / covariance maps


def cov_sequence(f, n):
    """First `n` autocorrelation samples of a spectral measure.

    r_k = (1/2pi) integral f(theta) cos(k theta) + sum(mass cos(k t));
    evenness makes the sine components vanish.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    theta = grid_angles(f.grid_size)
    ks = np.arange(n)
    r = np.cos(np.outer(ks, theta)) @ f.values / f.grid_size
    for t, m in f.atoms:
        r += m * np.cos(ks * t)
    return CovarianceSequence(r)


def ma_autocovariance(model, n):
    """Autocorrelation sequence of a moving-average model: r_k equals the
    lag-k autocorrelation of the filter taps, zero beyond the order."""
    if n < 1:
        raise ValueError("need n >= 1")
    b = model.b
    r = np.zeros(n)
    for k in range(min(n, b.size)):
        r[k] = float(b[: b.size - k] @ b[k:])
    return CovarianceSequence(r)


def ma_spectrum(model, grid_size=DEFAULT_GRID_SIZE):
    """Power spectral density |b(e^{i theta})|^2 of a moving-average model."""
    r = ma_autocovariance(model, model.order + 1).r
    return SpectralMeasure.from_cosine_polynomial(r, grid_size)


def simulate_ma(model, length, seed=0):
    """Seeded realization y_k = sum_j b_j w_{k-j} with standard normal w.

    Identical seeds produce identical series on any platform (the
    generator is pinned in :mod:`covdist._rng`).
    """
    if length < 1:
        raise ValueError("need length >= 1")
    q = model.order
    w = normals(seed, length + q)
    samples = np.convolve(w, model.b, mode="valid")
    return TimeSeries(samples, seed=seed)


def sample_covariance(series, n):
    """Sample covariance of `n`-long sliding windows of a realization.

    Averages the outer products of all T - n + 1 windows.  PSD by
    construction, generally not Toeplitz for finite records.
    """
    y = series.samples if isinstance(series, TimeSeries) else np.asarray(series, float)
    if n < 1:
        raise ValueError("need n >= 1")
    if y.size < n:
        raise ValueError(f"series of length {y.size} is shorter than n = {n}")
    windows = np.lib.stride_tricks.sliding_window_view(y, n)
    cov = windows.T @ windows / windows.shape[0]
    return 0.5 * (cov + cov.T)


# ---------------------------------------------------------------------------
# convergence harness


@dataclass(eq=False)
class ConvergencePoint:
    n: int
    delta_t: float
    l1: float
    status: str


def convergence_experiment(f, g, n_list, opts=None):
    """Toeplitz-constrained matrix distance versus the spectral L1 limit.

    For each dimension in ascending `n_list`, builds the Toeplitz
    covariance pair of the two measures and computes the
    Toeplitz-constrained distance.  The distance column is nondecreasing
    in n and bounded above by the L1 distance (the optimal spectral
    perturbations restrict to feasible matrix perturbations at every n).
    """
    n_list = list(n_list)
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ValueError("n_list must be strictly ascending")
    limit = l1_distance(f, g)
    rows = []
    for n in n_list:
        a = cov_sequence(f, n).toeplitz()
        b = cov_sequence(g, n).toeplitz()
        report = delta(a, b, TOEPLITZ, opts)
        rows.append(
            ConvergencePoint(
                n=n,
                delta_t=report.delta,
                l1=limit,
                status=report.solver.status,
            )
        )
    return rows
