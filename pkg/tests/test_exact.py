import math

import numpy as np
import pytest
from scipy.stats import norm

from begrates.errors import CapExceededError, ValidationError
from begrates.exact import (
    build_joint_law,
    hs_check,
    kolmogorov_distance,
    load_law,
    moment,
    moment_set,
    pair_covariance,
    save_law,
    step_cdf_pair,
    tv_distance,
)
from begrates.model import BETA_C, ModelParams, critical_K
from oracles import brute_joint_law, brute_moment, brute_pair_covariance, grid_scan_kolmogorov

POINT_A = ModelParams(1.0, 0.6)

# the six-point parameter set used throughout the exhaustive cross-checks
TEST_PARAMS = [
    ModelParams(1.0, 0.6),
    ModelParams(1.0, critical_K(1.0)),
    ModelParams(BETA_C, critical_K(BETA_C)),
    ModelParams(0.5, 0.3),
    ModelParams(1.0, 1.5),
    ModelParams(2.0, 1.2),
]


class TestBuildJointLaw:
    def test_n1_closed_form(self):
        # three configurations: weight 1 for s=0 and e^{-beta(1-K)} for s=+-1
        beta, K = 1.0, 0.6
        law = build_joint_law(ModelParams(beta, K), 1)
        e = math.exp(-beta * (1.0 - K))
        assert abs(law.prob(0, 0) - 1.0 / (1.0 + 2.0 * e)) < 1e-15
        assert abs(law.prob(1, 1) - e / (1.0 + 2.0 * e)) < 1e-15
        assert abs(law.prob(-1, 1) - e / (1.0 + 2.0 * e)) < 1e-15

    @pytest.mark.parametrize("n", [2, 5, 8])
    @pytest.mark.parametrize("params", TEST_PARAMS, ids=str)
    def test_matches_brute_force(self, params, n):
        law = build_joint_law(params, n)
        assert tv_distance(law.atoms(), brute_joint_law(params, n)) < 1e-12

    def test_normalised_and_symmetric(self):
        law = build_joint_law(POINT_A, 40)
        total = math.fsum(
            p for _, _, ps in law.iter_slices() for p in ps
        )
        assert abs(total - 1.0) < 1e-12
        for s in range(1, 41):
            np.testing.assert_array_equal(law.slice_probs(s), law.slice_probs(-s))

    def test_cap(self):
        with pytest.raises(CapExceededError):
            build_joint_law(POINT_A, 101, cap=100)
        with pytest.raises(ValidationError):
            build_joint_law(POINT_A, 0)

    def test_log_partition_against_brute_force(self):
        # Z = 3^-n sum exp(-beta H); n = 4 is enough to pin the constant
        params, n = POINT_A, 4
        beta, K = params.beta, params.K
        law = build_joint_law(params, n)
        from itertools import product

        z = math.fsum(
            math.exp(-beta * sum(v * v for v in cfg) + beta * K * sum(cfg) ** 2 / n)
            for cfg in product((-1, 0, 1), repeat=n)
        ) / 3.0**n
        assert abs(law.log_partition - math.log(z)) < 1e-12


class TestMoments:
    def test_order_zero(self):
        law = build_joint_law(POINT_A, 10)
        assert moment(law, 0.5, 0) == 1.0

    @pytest.mark.parametrize("k", [1, 3, 5, 7])
    def test_odd_orders_vanish(self, k):
        law = build_joint_law(POINT_A, 25)
        assert abs(moment(law, 0.5, k)) < 1e-14

    def test_against_brute_force(self):
        params, n, gamma = POINT_A, 4, 0.5
        law = build_joint_law(params, n)
        for k in (2, 4, 6):
            assert abs(moment(law, gamma, k) - brute_moment(params, n, gamma, k)) < 1e-12

    def test_validation(self):
        law = build_joint_law(POINT_A, 10)
        with pytest.raises(ValidationError):
            moment(law, 0.7, 2)
        with pytest.raises(ValidationError):
            moment(law, 0.5, 13)

    def test_moment_set(self):
        law = build_joint_law(POINT_A, 20)
        ms = moment_set(law, 0.5)
        assert set(ms.moments) == {2, 4, 6}
        assert ms[2] == moment(law, 0.5, 2)


class TestKolmogorov:
    def test_self_comparison_is_zero(self):
        law = build_joint_law(POINT_A, 30)
        right, left = step_cdf_pair(law, 0.5)
        assert kolmogorov_distance(law, 0.5, right, cdf_left=left) == 0.0

    def test_point_mass_far_left(self):
        law = build_joint_law(POINT_A, 12)
        far = float(law.w_values(0.5)[0]) - 10.0
        cdf = lambda t: np.where(np.asarray(t) >= far, 1.0, 0.0)
        assert kolmogorov_distance(law, 0.5, cdf) == 1.0

    def test_matches_dense_grid_scan(self):
        # n = 6 law against the standard normal, oracle = 1e6-point sup scan
        law = build_joint_law(POINT_A, 6)
        d = kolmogorov_distance(law, 0.5, norm.cdf)
        w = law.w_values(0.5)
        scan = grid_scan_kolmogorov(
            w, law.s_probs, norm.cdf, float(w[0]) - 1.0, float(w[-1]) + 1.0
        )
        assert scan <= d + 1e-12  # the scan can only undershoot the sup
        assert abs(d - scan) < 1e-9


class TestHubbardStratonovich:
    @pytest.mark.parametrize(
        "params,gamma",
        [
            (POINT_A, 0.5),
            (ModelParams(1.0, critical_K(1.0)), 0.25),
            (ModelParams(BETA_C, critical_K(BETA_C)), 1.0 / 6.0),
        ],
        ids=["A", "B", "C"],
    )
    def test_identity_small_error_at_1024(self, params, gamma):
        assert hs_check(params, 1024, gamma) < 1e-3

    def test_error_shrinks_with_n(self):
        errs = [hs_check(POINT_A, n, 0.5) for n in (64, 256, 1024)]
        assert errs[-1] <= errs[0]

    def test_both_cdfs_symmetric(self):
        # symmetry of the smoothed law: P(W+Y <= -t) + P(W+Y <= t) = 1
        params, n, gamma = POINT_A, 128, 0.5
        law = build_joint_law(params, n)
        from scipy.special import ndtr

        w = law.w_values(gamma)
        sigma = 1.0 / math.sqrt(params.two_beta_K * n ** (1.0 - 2.0 * gamma))
        for t in (0.3, 1.1):
            up = float(law.s_probs @ ndtr((t - w) / sigma))
            dn = float(law.s_probs @ ndtr((-t - w) / sigma))
            assert abs(up + dn - 1.0) < 1e-10


class TestPairCovariance:
    @pytest.mark.parametrize("n", [2, 4, 6, 8])
    def test_matches_brute_force(self, n):
        for params in (POINT_A, ModelParams(2.0, 1.2)):
            got = pair_covariance(params, n)
            want = brute_pair_covariance(params, n)
            assert abs(got - want) < 1e-12

    def test_region_a_scaling(self):
        # |Cov| * n stays bounded in the single-phase region (min(4g,1) = 1)
        vals = [abs(pair_covariance(POINT_A, n)) * n for n in (64, 256, 1024, 4096)]
        assert max(vals) <= 10.0 * vals[0]

    def test_tricritical_scaling(self):
        # gamma = 1/6 so the derivative bound scales like n^(2/3)
        params = ModelParams(BETA_C, critical_K(BETA_C))
        vals = [
            abs(pair_covariance(params, n)) * n ** (2.0 / 3.0)
            for n in (64, 256, 1024, 4096)
        ]
        assert max(vals) <= 10.0 * vals[0]


class TestSerialization:
    def test_round_trip(self, tmp_path):
        law = build_joint_law(POINT_A, 15)
        csv_path = tmp_path / "law.csv"
        head_path = tmp_path / "law.json"
        save_law(law, str(csv_path), str(head_path))
        back = load_law(str(csv_path), str(head_path))
        assert back.n == law.n
        assert back.params == law.params
        assert back.log_partition == law.log_partition
        for (k1, p1), (k2, p2) in zip(
            sorted(law.atoms().items()), sorted(back.atoms().items())
        ):
            assert k1 == k2
            assert abs(p1 - p2) < 1e-15
