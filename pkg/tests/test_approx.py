import numpy as np
import pytest
from numpy.testing import assert_allclose

from covdist import (
    FULL,
    delta,
    log_frechet_adjoint,
    min_eig,
    nearest_ma_delta,
    nearest_toeplitz_delta,
    nearest_toeplitz_ls,
    sequence_is_ma,
    toeplitz_project,
    trig_polynomial_min,
    vn_divergence,
    vn_nearest_toeplitz,
)
from conftest import (
    R3HAT,
    R3_DELTA,
    R5HAT,
    R5_TOEPLITZ_ROW,
    random_psd,
    random_toeplitz_psd,
    toepm,
)

# optimum of the Toeplitz approximation of R5HAT, frozen from two
# independent interior-point solves (agreeing to 4e-9)
R5_TOEPLITZ_OPT = 0.0288161
# optimum of the order-2 moving-average approximation of R5HAT
R5_MA2_OPT = 0.5017182
R5_MA2_OPT_ROW = np.array([4.118395, 2.767805, 1.349725])

# minimizer of the divergence criterion for R3HAT, frozen from a direct
# simplex search over the two free Toeplitz coefficients
R3_VN_OPT = np.array([0.314558649, 0.319418330])
R3_VN_OPT_VALUE = 0.021510680177


class TestNearestToeplitzDelta:
    def test_three_by_three_estimate(self):
        res = nearest_toeplitz_delta(R3HAT)
        assert res.converged
        # the hand-readable approximant is optimal: distance exactly 1/30
        assert res.distance <= 1.0 / 30.0 + 1e-6
        assert res.distance == pytest.approx(1.0 / 30.0, abs=1e-6)
        assert_allclose(res.R, R3_DELTA, atol=1e-3)

    def test_five_by_five_sample(self):
        res = nearest_toeplitz_delta(R5HAT)
        assert res.converged
        assert res.distance == pytest.approx(R5_TOEPLITZ_OPT, abs=5e-6)
        assert np.abs(res.R[0] - R5_TOEPLITZ_ROW).max() <= 5e-3

    def test_toeplitz_input_is_fixed_point(self, rng):
        t = random_toeplitz_psd(rng, 4)
        res = nearest_toeplitz_delta(t)
        assert res.distance <= 1e-7
        assert_allclose(res.R, t, atol=1e-6)

    def test_match_trace(self):
        res = nearest_toeplitz_delta(R5HAT, match_trace=True)
        assert np.trace(res.R) == pytest.approx(np.trace(R5HAT), abs=1e-9)
        assert res.distance >= R5_TOEPLITZ_OPT - 1e-7  # extra constraint

    def test_distance_recomputable(self, rng):
        a = random_psd(rng, 4)
        res = nearest_toeplitz_delta(a)
        assert delta(a, res.R, FULL).delta == pytest.approx(res.distance, abs=1e-6)

    def test_result_in_cone(self, rng):
        a = random_psd(rng, 5)
        res = nearest_toeplitz_delta(a)
        assert np.ptp(np.diag(res.R)) == 0.0
        assert min_eig(res.R) >= -1e-7


class TestNearestMaDelta:
    def test_five_by_five_sample(self):
        res = nearest_ma_delta(R5HAT, 2)
        assert res.converged
        assert res.distance == pytest.approx(R5_MA2_OPT, abs=5e-6)
        assert_allclose(res.R[0, :3], R5_MA2_OPT_ROW, atol=1e-3)
        assert res.R[0, 3] == 0.0 and res.R[0, 4] == 0.0

    def test_certificate_validity(self):
        res = nearest_ma_delta(R5HAT, 2)
        cert = res.certificate
        assert cert is not None
        assert cert.min_eig() >= -1e-8 * np.trace(cert.q_matrix)
        assert_allclose(cert.sequence(), res.R[0, :3], atol=1e-7)

    def test_true_ma2_is_fixed_point(self):
        t = toepm([3.0, 2.0, 1.0, 0.0, 0.0])  # spectrum (1 + 2 cos)^2 >= 0
        res = nearest_ma_delta(t, 2)
        assert res.distance <= 1e-7
        assert_allclose(res.R, t, atol=1e-5)

    def test_order_zero_white(self):
        res = nearest_ma_delta(np.eye(4), 0)
        assert res.distance <= 1e-7
        assert_allclose(res.R, np.eye(4), atol=1e-6)

    def test_dominates_toeplitz_distance(self, rng):
        # the moving-average cone is a subset of the Toeplitz PSD cone
        d_ma = nearest_ma_delta(R5HAT, 2).distance
        d_toep = nearest_toeplitz_delta(R5HAT).distance
        assert d_ma >= d_toep - 1e-7
        for _ in range(3):
            a = random_psd(rng, 4)
            assert (
                nearest_ma_delta(a, 1).distance
                >= nearest_toeplitz_delta(a).distance - 1e-7
            )

    def test_order_validation(self):
        with pytest.raises(ValueError):
            nearest_ma_delta(np.eye(3), 3)
        with pytest.raises(ValueError):
            nearest_ma_delta(np.eye(3), -1)


class TestNearestToeplitzLs:
    def test_three_by_three_estimate(self):
        res = nearest_toeplitz_ls(R3HAT)
        assert_allclose(res.R, toepm([1.0, 0.9, 1.05]) / 3.0, atol=1e-12)
        # indefinite by a hair: eigenvalue (a - c) along (1, 0, -1)
        assert res.diagnostics["min_eig"] == pytest.approx(-0.05 / 3.0, abs=1e-9)

    def test_fixed_point_and_distance(self, rng):
        t = random_toeplitz_psd(rng, 4)
        res = nearest_toeplitz_ls(t)
        assert_allclose(res.R, t, atol=1e-13)
        assert res.distance == pytest.approx(0.0, abs=1e-12)

    def test_2x2_averaging(self):
        res = nearest_toeplitz_ls(np.diag([1.0, 2.0]))
        assert_allclose(res.R, np.array([[1.5, 0.0], [0.0, 1.5]]))


class TestVnNearestToeplitz:
    def test_three_by_three_estimate(self):
        res = vn_nearest_toeplitz(R3HAT)
        assert res.converged
        assert res.R[0, 0] == pytest.approx(np.trace(R3HAT) / 3.0, abs=1e-12)
        assert_allclose([res.R[0, 1], res.R[0, 2]], R3_VN_OPT, atol=1e-6)
        assert res.distance == pytest.approx(R3_VN_OPT_VALUE, abs=1e-9)
        assert np.trace(res.R) == pytest.approx(np.trace(R3HAT), abs=1e-12)
        assert min_eig(res.R) > 0.0

    def test_toeplitz_pd_input_is_minimum(self, rng):
        t = random_toeplitz_psd(rng, 4) + 0.1 * np.eye(4)
        res = vn_nearest_toeplitz(t)
        assert res.distance <= 1e-10
        assert_allclose(res.R, t, atol=1e-5)

    def test_diag_example_white_is_optimal(self):
        # for a 2x2 diagonal input the objective depends on r1 only through
        # r1^2, so the white matrix at the matched trace is the minimizer
        a = np.diag([1.0, 3.0])
        res = vn_nearest_toeplitz(a)
        assert res.R[0, 0] == pytest.approx(2.0)
        assert res.distance <= vn_divergence(a, 2.0 * np.eye(2)) + 1e-12
        assert abs(res.R[0, 1]) <= 1e-8

    def test_monotone_decrease(self):
        hist = vn_nearest_toeplitz(R3HAT).diagnostics["objective_history"]
        assert all(b <= a + 1e-15 for a, b in zip(hist, hist[1:]))

    def test_gradient_matches_finite_differences(self):
        # away from the optimum, where the directional derivative is not tiny
        r = toepm([1.0 / 3.0, 0.25, 0.2])
        grad = -log_frechet_adjoint(r, R3HAT)
        h = 1e-6
        direction = toepm([0.0, 1.0, -0.5])
        fd = (
            vn_divergence(R3HAT, r + h * direction)
            - vn_divergence(R3HAT, r - h * direction)
        ) / (2.0 * h)
        assert fd == pytest.approx(float(np.sum(grad * direction)), rel=1e-5)

    def test_divergence_value_consistent(self):
        res = vn_nearest_toeplitz(R3HAT)
        assert res.distance == pytest.approx(vn_divergence(R3HAT, res.R), abs=1e-12)

    def test_rejects_zero_trace(self):
        with pytest.raises(ValueError):
            vn_nearest_toeplitz(np.zeros((3, 3)))


class TestSequenceIsMa:
    def test_true_ma2(self):
        feasible, cert = sequence_is_ma([3.0, 2.0, 1.0], 2)
        assert feasible
        # the certificate is unique here: the all-ones rank-one matrix
        assert_allclose(cert.q_matrix, np.ones((3, 3)), atol=1e-4)
        assert cert.min_eig() >= -1e-8 * np.trace(cert.q_matrix)
        assert_allclose(cert.sequence(), [3.0, 2.0, 1.0], atol=1e-7)

    def test_published_toeplitz_row_is_not_ma4(self):
        feasible, cert = sequence_is_ma(R5_TOEPLITZ_ROW, 4)
        assert not feasible
        assert cert is None
        assert trig_polynomial_min(R5_TOEPLITZ_ROW) < 0.0

    @pytest.mark.parametrize("q", [0, 1, 2])
    def test_white_noise(self, q):
        feasible, cert = sequence_is_ma([1.0] + [0.0] * q, q)
        assert feasible
        assert_allclose(cert.q_matrix, np.eye(q + 1) / (q + 1), atol=1e-6)

    def test_padded_zeros_accepted(self):
        feasible, cert = sequence_is_ma([3.0, 2.0, 1.0, 0.0, 0.0], 2)
        assert feasible
        assert cert.order == 2

    def test_nonzero_tail_rejected(self):
        with pytest.raises(ValueError):
            sequence_is_ma([3.0, 2.0, 1.0, 0.5], 2)

    def test_too_short_rejected(self):
        with pytest.raises(ValueError):
            sequence_is_ma([1.0, 0.5], 2)

    def test_boundary_feasible_cases(self):
        # spectrum touching zero: (1 + cos)^2-style sequences stay feasible
        feasible, cert = sequence_is_ma([2.0, 1.0], 1)
        assert feasible
        assert_allclose(cert.sequence(), [2.0, 1.0], atol=1e-7)

    def test_infeasible_large_lag_one(self):
        # 1 + 1.2 cos(theta) dips to -0.2 at pi
        feasible, cert = sequence_is_ma([1.0, 0.6], 1)
        assert not feasible
        assert cert is None

    def test_agrees_with_grid_on_randoms(self, rng):
        for _ in range(15):
            q = int(rng.integers(1, 4))
            r = rng.normal(size=q + 1)
            r[0] = abs(r[0]) + 0.1
            feasible, cert = sequence_is_ma(r, q)
            grid_ok = trig_polynomial_min(r) >= -1e-9 * r[0]
            assert feasible == grid_ok
            if feasible:
                assert_allclose(cert.sequence(), r, atol=1e-7)
                assert cert.min_eig() >= -1e-8 * abs(np.trace(cert.q_matrix))


@pytest.fixture
def rng():
    return np.random.default_rng(5150)
