import math
from fractions import Fraction

import numpy as np
import pytest

from nsar import (
    BadDimensions,
    BadExponent,
    BudgetTooSmall,
    GapProfile,
    NotSingleArm,
    c_p,
    complexity_scores,
    gaps,
    h_measures,
    logbar,
    make_instance,
    prop1_bound,
    regime_classify,
    schedule,
    table1_constants,
)


def profile_from_deltas(deltas, m=1):
    return GapProfile.from_deltas(deltas, m)


def random_profile(rng, k=None, m=None):
    k = k or int(rng.integers(3, 30))
    m = m or int(rng.integers(1, k))
    deltas = rng.uniform(0.01, 0.9, size=k)
    return GapProfile.from_deltas(deltas, m)


class TestGaps:
    def test_two_tier_blocks(self):
        prof = gaps(make_instance([0.7, 0.7, 0.66, 0.66, 0.5], m=2))
        assert np.allclose(prof.delta, [0.04, 0.04, 0.04, 0.04, 0.2])
        assert np.allclose(prof.delta_sorted, [0.04, 0.04, 0.04, 0.04, 0.2])

    def test_uniform_block(self):
        prof = gaps(make_instance([0.7, 0.7] + [0.5] * 48, m=2))
        assert np.allclose(prof.delta, 0.2)

    def test_single_target_matches_pairwise_gaps(self):
        prof = gaps(make_instance([0.9, 0.5, 0.3], m=1))
        assert np.allclose(prof.delta, [0.4, 0.4, 0.6])

    def test_rank_based_not_index_based(self):
        prof = gaps(make_instance([0.5, 0.9, 0.3], m=1))
        assert np.allclose(prof.delta, [0.4, 0.4, 0.6])

    def test_all_positive_and_sorted(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            k = int(rng.integers(3, 20))
            m = int(rng.integers(1, k))
            means = rng.uniform(0.05, 0.95, size=k)
            try:
                inst = make_instance(means, m=m)
            except ValueError:
                continue
            prof = gaps(inst)
            assert np.all(prof.delta > 0)
            assert np.array_equal(np.sort(prof.delta), prof.delta_sorted)


class TestHMeasures:
    def test_hand_values_m1(self):
        rep = h_measures(profile_from_deltas([0.4, 0.4, 0.6]), 1.0)
        assert rep.hp == pytest.approx(12.5)
        assert rep.h1 == pytest.approx(1 / 0.16 + 1 / 0.16 + 1 / 0.36)

    def test_hand_values_block(self):
        rep = h_measures(profile_from_deltas([0.04, 0.04, 0.04, 0.04, 0.2], m=2), 1.0)
        assert rep.h2 == pytest.approx(2500.0)

    def test_hp_equals_h2_at_one_exactly(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            rep = h_measures(random_profile(rng), 1.0)
            assert rep.hp == rep.h2

    def test_ordering_in_p(self):
        rng = np.random.default_rng(12)
        for _ in range(100):
            prof = random_profile(rng)
            h2 = h_measures(prof, 1.0).h2
            assert h_measures(prof, float(rng.uniform(0.05, 0.95))).hp <= h2
            assert h_measures(prof, float(rng.uniform(1.05, 2.0))).hp >= h2

    def test_bad_exponent(self):
        prof = profile_from_deltas([0.4, 0.4])
        for p in (0.0, -1.0, 2.5):
            with pytest.raises(BadExponent):
                h_measures(prof, p)


class TestCpLogbar:
    def test_small_cases(self):
        assert c_p(2, 1.0) == pytest.approx(1.0)
        assert c_p(3, 1.0) == pytest.approx(4.0 / 3.0)
        assert c_p(4, 2.0) == pytest.approx(float(Fraction(1, 4) + Fraction(1, 4) + Fraction(1, 9) + Fraction(1, 16)))

    def test_logbar_small_cases(self):
        assert logbar(2) == pytest.approx(1.0)
        assert logbar(3) == pytest.approx(4.0 / 3.0)

    def test_identity_with_cp_at_one(self):
        for k in (2, 3, 10, 64, 333, 1000):
            assert abs(c_p(k, 1.0) - logbar(k)) <= 1e-12

    def test_cp_decreasing_in_p(self):
        for k in (2, 8, 50, 200):
            values = [c_p(k, p) for p in np.linspace(0.1, 2.0, 20)]
            assert all(a > b for a, b in zip(values, values[1:]))

    def test_cp_versus_log_k(self):
        # below p=1 the sum dominates log K at every K; above, only once p is
        # bounded away from 1 (p >= 1.1 holds from K = 8 on, p close to 1 does not)
        for k in range(8, 301):
            for p in (0.3, 0.5, 0.7, 0.9):
                assert c_p(k, p) > math.log(k)
            for p in (1.1, 1.2, 1.5, 2.0):
                assert c_p(k, p) < math.log(k)

    def test_cp_validations(self):
        with pytest.raises(BadDimensions):
            c_p(1, 1.0)
        with pytest.raises(BadExponent):
            c_p(5, 0.0)


class TestSchedule:
    def test_hand_trace_linear(self):
        sched = schedule(100, 4, 1.0)
        assert sched.n.tolist() == [16, 21, 31]
        assert sched.total_consumed() == 99

    def test_hand_trace_quadratic(self):
        sched = schedule(100, 4, 2.0)
        assert sched.n.tolist() == [9, 16, 36]
        assert sched.total_consumed() == 97

    def test_minimal_budget(self):
        for p in (0.5, 1.0, 2.0):
            assert schedule(5, 4, p).n.tolist() == [1, 1, 1]

    def test_budget_too_small(self):
        with pytest.raises(BudgetTooSmall):
            schedule(4, 4, 1.0)

    def test_feasibility_random(self):
        rng = np.random.default_rng(21)
        for _ in range(2000):
            k = int(rng.integers(2, 40))
            t = int(rng.integers(k + 1, 10 * k + 200))
            p = float(rng.uniform(0.05, 2.0))
            sched = schedule(t, k, p)
            assert np.all(np.diff(sched.n) >= 0)
            assert sched.n[0] >= 1
            assert sched.total_consumed() <= t


class TestProp1Bound:
    def test_two_arm_value(self):
        prof = gaps(make_instance([1.0, 0.5], kind="point-mass", m=1))
        oracle = 2 * 4 * math.exp(-(1000 - 2) / (8.0 * 1.0 * 8.0))
        assert prop1_bound(1000, 2, 1.0, prof) == pytest.approx(oracle, rel=1e-12)

    def test_vacuous_at_small_budget(self):
        prof = gaps(make_instance([0.7, 0.7] + [0.5] * 48, m=2))
        bound = prop1_bound(1250, 50, 1.0, prof)
        oracle = 2 * 50**2 * math.exp(-(1250 - 50) / (8.0 * c_p(50, 1.0) * 1250.0))
        assert bound == pytest.approx(oracle, rel=1e-12)
        assert bound > 1.0

    def test_decreasing_in_budget(self):
        prof = gaps(make_instance([0.8, 0.4, 0.3], m=1))
        values = [prop1_bound(t, 3, 1.5, prof) for t in (10, 100, 1000, 10000)]
        assert all(a > b for a, b in zip(values, values[1:]))
        assert prop1_bound(10**7, 3, 1.5, prof) < 1e-200

    def test_nonincreasing_in_gap_growth(self):
        base = profile_from_deltas([0.2, 0.2, 0.3], m=1)
        grown = profile_from_deltas([0.2, 0.25, 0.35], m=1)
        assert prop1_bound(500, 3, 1.0, grown) <= prop1_bound(500, 3, 1.0, base)

    def test_validations(self):
        prof = profile_from_deltas([0.5, 0.5])
        with pytest.raises(BudgetTooSmall):
            prop1_bound(2, 2, 1.0, prof)
        with pytest.raises(BadDimensions):
            prop1_bound(100, 3, 1.0, prof)


class TestTable1:
    def test_two_arm_constants(self):
        prof = gaps(make_instance([1.0, 0.5], kind="point-mass", m=1))
        consts = table1_constants(prof, 2.0)
        assert consts["sr"]["alpha"] == pytest.approx(8.0)
        assert consts["sr"]["beta"] == pytest.approx(math.exp(0.25))
        assert consts["sh"]["alpha"] == pytest.approx(64.0)
        assert consts["sh"]["beta"] == pytest.approx(3.0)
        assert consts["nse"]["alpha"] == pytest.approx(8.0)
        assert consts["nse"]["beta"] == pytest.approx(math.exp(0.25))

    def test_requires_single_target(self):
        with pytest.raises(NotSingleArm):
            table1_constants(profile_from_deltas([0.2, 0.2, 0.4], m=2), 1.0)


class TestComplexityScores:
    def test_equal_at_p_one(self):
        prof = gaps(make_instance([0.7, 0.7] + [0.5] * 48, m=2))
        scores = complexity_scores(prof, 1.0, 0.1)
        assert scores["nsar"] == scores["sar"]

    def test_sublinear_exponent_wins_on_uniform_block(self):
        prof = gaps(make_instance([0.7, 0.7] + [0.5] * 48, m=2))
        scores = complexity_scores(prof, 0.7, 0.1)
        assert scores["nsar"] < scores["sar"]

    def test_monotone_in_confidence(self):
        prof = gaps(make_instance([0.8, 0.4, 0.3], m=1))
        loose = complexity_scores(prof, 1.5, 0.5)
        tight = complexity_scores(prof, 1.5, 0.01)
        for key in ("sar", "at_lucb", "nsar"):
            assert tight[key] > loose[key]

    def test_note_present(self):
        prof = profile_from_deltas([0.3, 0.3, 0.5])
        assert "order" in complexity_scores(prof, 1.0, 0.1)["note"]


class TestRegimeClassify:
    def test_uniform_block_is_regime_one(self):
        prof = gaps(make_instance([0.7, 0.7] + [0.5] * 48, m=2))
        res = regime_classify(prof)
        assert res.regime == "regime-1"
        assert res.recommendation == "p in (0,1)"

    def test_near_uniform_with_one_larger(self):
        prof = profile_from_deltas([0.2] * 49 + [0.25], m=2)
        assert regime_classify(prof).regime == "regime-1"

    def test_single_challenger_is_regime_two(self):
        for m in (2, 4):
            means = [0.7] * m + [0.68] + [0.5] * (50 - m - 1)
            res = regime_classify(gaps(make_instance(means, m=m)))
            assert res.regime == "regime-2"
            assert res.recommendation == "p in (1,2]"

    def test_single_small_gap_profile(self):
        prof = profile_from_deltas([0.02] + [0.2] * 49, m=2)
        assert regime_classify(prof).regime == "regime-2"

    def test_arithmetic_progression_unclassified(self):
        prof = profile_from_deltas(np.arange(1, 51) * 0.01, m=2)
        assert regime_classify(prof).regime == "unclassified"


class TestRegimeScalingFamilies:
    def test_uniform_family_scales_linearly(self):
        q = 0.5
        products = {
            k: c_p(k, q) * h_measures(profile_from_deltas([0.25] * k, m=2), q).hp
            for k in (40, 80, 160)
        }
        assert 1.7 <= products[80] / products[40] <= 2.3
        assert 1.7 <= products[160] / products[80] <= 2.3

    def test_small_group_family_is_flat_when_it_dominates(self):
        # the small-gap block controls hp only while m'^p / d1^2 exceeds
        # K^p / d2^2; with d1=0.004 against d2=0.2 that holds through K=160
        p = 1.5
        products = []
        for k in (40, 80, 160):
            prof = profile_from_deltas([0.004, 0.004] + [0.2] * (k - 2), m=2)
            products.append(c_p(k, p) * h_measures(prof, p).hp)
        spread = (max(products) - min(products)) / min(products)
        assert spread < 0.10
