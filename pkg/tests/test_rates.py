import math

import numpy as np
import pytest

from begrates.cases import case_by_id, with_schedule
from begrates.errors import ComputationError, DegenerateFitError, ValidationError
from begrates.rates import default_ladder, fit_loglog, run_all, run_case, summary_row


class TestFitLogLog:
    def test_exact_power_law(self):
        pts = [(n, 3.0 * n**-0.5) for n in (8, 16, 32, 64, 128)]
        slope, intercept, r2 = fit_loglog(pts)
        assert abs(slope + 0.5) < 1e-12
        assert abs(intercept - math.log(3.0)) < 1e-12
        assert abs(r2 - 1.0) < 1e-12

    def test_constant_degenerate(self):
        with pytest.raises(DegenerateFitError):
            fit_loglog([(n, 0.25) for n in (8, 16, 32, 64)])

    def test_too_few_points(self):
        with pytest.raises(ValidationError):
            fit_loglog([(8, 0.5), (16, 0.4), (32, 0.3)])

    def test_nonpositive_distance(self):
        with pytest.raises(ValidationError):
            fit_loglog([(8, 0.5), (16, 0.4), (32, 0.0), (64, 0.2)])

    def test_noisy_power_law_recovers_slope(self):
        rng = np.random.default_rng(31415)
        truth = -0.75
        pts = [
            (n, 2.0 * n**truth * float(np.exp(0.05 * rng.standard_normal())))
            for n in (16, 32, 64, 128, 256, 512, 1024)
        ]
        slope, _, _ = fit_loglog(pts)
        assert abs(slope - truth) < 0.05


class TestRunCase:
    def test_fixed_a_small_ladder(self):
        rep = run_case(case_by_id("fixed-A"), [64, 128, 256, 512])
        assert [p.n for p in rep.ladder] == [64, 128, 256, 512]
        assert rep.fitted_slope <= -0.4
        assert rep.bounded_ok()
        assert 0.0 < rep.ladder[-1].d_k < 1.0
        assert set(rep.ladder[0].moments) == {2, 4, 6}

    def test_single_point_ladder_rejected(self):
        with pytest.raises(ComputationError):
            run_case(case_by_id("fixed-A"), [64])

    def test_duplicate_ladder_rejected(self):
        with pytest.raises(ValidationError):
            run_case(case_by_id("fixed-A"), [64, 64, 128, 256])

    def test_skipped_points_are_recorded(self):
        # a huge k makes K_n <= 0 at small n; those rungs are skipped
        case = with_schedule(case_by_id("B3.2"), k=4.9)
        rep = run_case(case, [4, 64, 128, 256, 512])
        assert any(n == 4 for n, _ in rep.skipped)
        assert [p.n for p in rep.ladder] == [64, 128, 256, 512]

    def test_default_ladder_tops(self):
        assert default_ladder(case_by_id("fixed-A"))[-1] == 2**12
        assert default_ladder(case_by_id("fixed-C"))[-1] == 2**13

    def test_summary_row_fields(self):
        rep = run_case(case_by_id("fixed-A"), [64, 128, 256, 512])
        row = summary_row(rep)
        assert row["case_id"] == "fixed-A"
        assert row["slope_ok"] and row["bounded_ok"]


class TestPhaseTransitionVisibility:
    def test_b3_slow_vs_fast(self):
        ladder = [2**e for e in range(6, 12)]
        slow = run_case(with_schedule(case_by_id("B3.1"), delta2=0.6), ladder)
        fast = run_case(with_schedule(case_by_id("B3.1"), delta2=0.8), ladder)
        assert slow.fitted_slope - fast.fitted_slope >= 0.05
        assert fast.fitted_slope < slow.fitted_slope <= 0.0


class TestRunAll:
    def test_subset_sorted_and_passing(self):
        cases = [case_by_id("fixed-A"), case_by_id("B2.1")]
        reports = run_all(cases)
        assert [r.case.case_id for r in reports] == ["B2.1", "fixed-A"]
        for r in reports:
            assert r.slope_ok() and r.bounded_ok()
