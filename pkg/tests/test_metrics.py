import numpy as np
import pytest
from numpy.testing import assert_allclose

from covdist import (
    FULL,
    MAX_ITERS,
    TOEPLITZ,
    DomainError,
    SolverOptions,
    delta,
    min_eig,
    pairwise_delta,
    vn_divergence,
)
from conftest import (
    R3HAT,
    R3_DELTA,
    nuclear_delta,
    random_psd,
    random_toeplitz_psd,
    toepm,
)


class TestDeltaExamples:
    def test_toeplitz_restricted_pair(self):
        report = delta(np.ones((3, 3)), toepm([1.0, 0.5, 0.5]), TOEPLITZ)
        assert report.delta == pytest.approx(2.0 / 3.0, abs=1e-7)
        assert report.tau == pytest.approx(4.0 / 3.0, abs=1e-7)

    def test_zero_self_distance(self, rng):
        m = random_psd(rng, 4)
        report = delta(m, m)
        assert report.delta >= -1e-9  # feasible-point objective, never negative
        assert report.delta <= 1e-8 * (1.0 + np.linalg.norm(m))

    def test_diagonal_closed_form(self):
        report = delta(np.diag([1.0, 3.0]), np.diag([2.0, 1.0]))
        assert report.delta == pytest.approx(1.5, abs=1e-7)

    def test_nested_pair(self):
        # R3_DELTA dominates R3HAT, so the distance is the trace gap
        assert min_eig(R3_DELTA - R3HAT) >= -1e-12
        report = delta(R3HAT, R3_DELTA)
        assert report.delta == pytest.approx(1.0 / 30.0, abs=1e-7)


class TestDeltaReportInvariants:
    def test_perturbation_identities(self, rng):
        a, b = random_psd(rng, 5), random_psd(rng, 5)
        report = delta(a, b)
        scale_m = np.abs(report.M_star).max()
        assert np.abs(a + report.Q_A - report.M_star).max() <= 1e-12 * scale_m
        assert np.abs(b + report.Q_B - report.M_star).max() <= 1e-12 * scale_m
        scale = 1.0 + max(np.linalg.norm(a, 2), np.linalg.norm(b, 2))
        assert min_eig(report.Q_A) >= -1e-7 * scale
        assert min_eig(report.Q_B) >= -1e-7 * scale
        combined = (np.trace(report.Q_A) + np.trace(report.Q_B)) / 5.0
        assert report.delta == pytest.approx(combined, abs=1e-9)

    def test_max_iters_propagates_as_status(self, rng):
        a, b = random_psd(rng, 3), random_psd(rng, 3)
        report = delta(a, b, opts=SolverOptions(max_iter=2))
        assert report.solver.status == MAX_ITERS
        assert not report.converged


class TestDeltaValidation:
    def test_non_psd_rejected(self):
        with pytest.raises(DomainError):
            delta(np.diag([1.0, -0.5]), np.eye(2))

    def test_tiny_negative_clipped(self, rng):
        a = random_psd(rng, 3)
        w, v = np.linalg.eigh(a)
        w[0] = -1e-10 * w[-1]  # just inside the accepted rounding band
        a_neg = (v * w) @ v.T
        report = delta(a_neg, (v * np.maximum(w, 0.0)) @ v.T)
        assert report.delta <= 1e-6

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            delta(np.eye(2), np.eye(3))

    def test_toeplitz_structure_required_on_inputs(self, rng):
        a = random_psd(rng, 4)  # generically not Toeplitz
        with pytest.raises(ValueError):
            delta(a, np.eye(4), TOEPLITZ)


class TestDeltaAgainstClosedForm:
    def test_random_pairs(self, rng):
        for _ in range(12):
            n = int(rng.integers(2, 7))
            a, b = random_psd(rng, n), random_psd(rng, n)
            report = delta(a, b)
            assert report.delta == pytest.approx(nuclear_delta(a, b), abs=1e-7)

    def test_commuting_pair(self, rng):
        # shared eigenframe: distance is the mean absolute eigenvalue gap
        # with eigenvalues matched through the common frame
        q, _ = np.linalg.qr(rng.normal(size=(5, 5)))
        lam = rng.uniform(0.1, 3.0, size=5)
        mu = rng.uniform(0.1, 3.0, size=5)
        a = (q * lam) @ q.T
        b = (q * mu) @ q.T
        report = delta(a, b)
        assert report.delta == pytest.approx(np.abs(lam - mu).mean(), abs=1e-6)

    def test_nested_random(self, rng):
        b = random_psd(rng, 4)
        a = b + random_psd(rng, 4)  # a dominates b
        report = delta(a, b)
        assert report.delta == pytest.approx((np.trace(a) - np.trace(b)) / 4.0, abs=1e-7)


class TestMetricAxioms:
    @pytest.mark.parametrize("structure", [FULL, TOEPLITZ], ids=["full", "toeplitz"])
    def test_axioms_on_random_triples(self, structure):
        rng = np.random.default_rng(7031)
        for trial in range(30):
            n = int(rng.integers(2, 7))
            if structure is TOEPLITZ:
                a, b, c = (random_toeplitz_psd(rng, n) for _ in range(3))
            else:
                a, b, c = (random_psd(rng, n) for _ in range(3))
            d_ab = delta(a, b, structure).delta
            d_ba = delta(b, a, structure).delta
            d_bc = delta(b, c, structure).delta
            d_ac = delta(a, c, structure).delta
            assert abs(d_ab - d_ba) <= 1e-7
            assert delta(a, a, structure).delta <= 1e-7
            assert d_ac <= d_ab + d_bc + 1e-6

    def test_positive_homogeneity(self, rng):
        a, b = random_psd(rng, 4), random_psd(rng, 4)
        base = delta(a, b).delta
        for c in (0.5, 2.0, 10.0):
            scaled = delta(c * a, c * b).delta
            assert scaled == pytest.approx(c * base, rel=1e-7, abs=1e-9)

    def test_translation_invariance(self, rng):
        a, b = random_psd(rng, 4), random_psd(rng, 4)
        s = rng.normal(size=(4, 4))
        s = s + s.T
        # shift enough to keep both arguments PSD
        s += (1.0 + max(0.0, -min(min_eig(a + s), min_eig(b + s)))) * np.eye(4)
        base = delta(a, b).delta
        assert delta(a + s, b + s).delta == pytest.approx(base, abs=1e-7)

    def test_translation_invariance_toeplitz(self, rng):
        a, b = random_toeplitz_psd(rng, 4), random_toeplitz_psd(rng, 4)
        s = random_toeplitz_psd(rng, 4)
        base = delta(a, b, TOEPLITZ).delta
        assert delta(a + s, b + s, TOEPLITZ).delta == pytest.approx(base, abs=1e-7)


class TestPairwise:
    def test_matrix_properties(self, rng):
        mats = [random_psd(rng, 3) for _ in range(3)]
        d = pairwise_delta(mats)
        assert_allclose(d, d.T)
        assert_allclose(np.diag(d), 0.0, atol=1e-9)
        assert d[0, 1] == pytest.approx(nuclear_delta(mats[0], mats[1]), abs=1e-7)


class TestVnDivergence:
    def test_zero_on_equal(self, rng):
        a = random_psd(rng, 3) + 0.1 * np.eye(3)
        assert vn_divergence(a, a) == pytest.approx(0.0, abs=1e-12)

    def test_scalar_case(self):
        assert vn_divergence(np.array([[2.0]]), np.array([[1.0]])) == pytest.approx(
            2.0 * np.log(2.0)
        )

    def test_diagonal_case(self):
        val = vn_divergence(np.diag([1.0, 2.0]), np.diag([2.0, 1.0]))
        assert val == pytest.approx(np.log(2.0), abs=1e-12)

    def test_nonnegative_when_traces_match(self, rng):
        for _ in range(10):
            n = int(rng.integers(2, 6))
            a = random_psd(rng, n) + 0.05 * np.eye(n)
            b = random_psd(rng, n) + 0.05 * np.eye(n)
            b *= np.trace(a) / np.trace(b)
            assert vn_divergence(a, b) >= -1e-9

    def test_singular_first_argument(self):
        a = np.diag([2.0, 0.0])
        b = np.diag([1.0, 1.0])
        # 0 log 0 contributes nothing
        assert vn_divergence(a, b) == pytest.approx(2.0 * np.log(2.0), abs=1e-12)

    def test_rejects_singular_second_argument(self):
        with pytest.raises(DomainError):
            vn_divergence(np.eye(2), np.diag([1.0, 0.0]))
