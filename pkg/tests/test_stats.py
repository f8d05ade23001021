import math
import random

import numpy as np
import pytest
from scipy import stats as scipy_stats

from oracles import erf_inv_norm, naive_rm_anova_oneway, naive_rm_anova_twoway
from stroopsaber.stats import (
    AnovaResult,
    DegenerateDataError,
    bonferroni_pairwise,
    f_upper_tail,
    inv_norm_cdf,
    norm_cdf,
    regularized_incomplete_beta,
    rm_anova_oneway,
    rm_anova_twoway,
    t_two_sided_p,
)


class TestInvNormCdf:
    def test_median_is_zero(self):
        assert inv_norm_cdf(0.5) == pytest.approx(0.0, abs=1e-12)

    def test_known_quantile(self):
        assert inv_norm_cdf(0.975) == pytest.approx(1.959963984540054, abs=1e-9)

    def test_against_erf_bisection_oracle(self):
        for p in (1e-6, 1e-4, 0.01, 0.1, 0.3, 0.62, 0.9, 0.99, 1 - 1e-5):
            assert inv_norm_cdf(p) == pytest.approx(erf_inv_norm(p), abs=1e-8)

    def test_against_scipy(self):
        for p in np.linspace(0.001, 0.999, 57):
            assert inv_norm_cdf(float(p)) == pytest.approx(scipy_stats.norm.ppf(p), abs=1e-9)

    def test_antisymmetry(self):
        for p in (0.01, 0.2, 0.37, 0.45):
            assert inv_norm_cdf(p) == pytest.approx(-inv_norm_cdf(1 - p), abs=1e-10)

    def test_round_trip_to_1e9(self):
        grid = list(np.geomspace(1e-6, 0.5, 40)) + [1 - p for p in np.geomspace(1e-6, 0.5, 40)]
        for p in grid:
            assert norm_cdf(inv_norm_cdf(float(p))) == pytest.approx(p, abs=1e-9)

    def test_domain_enforced(self):
        for bad in (0.0, 1.0, -0.1, 1.1):
            with pytest.raises(ValueError):
                inv_norm_cdf(bad)


class TestIncompleteBeta:
    def test_against_scipy_grid(self):
        rng = random.Random(5)
        for _ in range(300):
            a = rng.uniform(0.2, 60)
            b = rng.uniform(0.2, 60)
            x = rng.random()
            assert regularized_incomplete_beta(a, b, x) == pytest.approx(
                float(scipy_stats.beta.cdf(x, a, b)), abs=1e-11
            )

    def test_endpoints(self):
        assert regularized_incomplete_beta(2.0, 3.0, 0.0) == 0.0
        assert regularized_incomplete_beta(2.0, 3.0, 1.0) == 1.0


class TestFUpperTail:
    def test_zero_statistic(self):
        assert f_upper_tail(0.0, 2, 22) == 1.0

    def test_tail_limit(self):
        assert f_upper_tail(1e6, 2, 22) < 1e-12

    def test_reported_pair(self):
        assert f_upper_tail(8.195, 2, 22) == pytest.approx(0.002, abs=5e-4)

    def test_against_scipy(self):
        rng = random.Random(11)
        for _ in range(200):
            f = rng.uniform(0, 20)
            d1 = rng.randint(1, 12)
            d2 = rng.randint(2, 80)
            assert f_upper_tail(f, d1, d2) == pytest.approx(float(scipy_stats.f.sf(f, d1, d2)), abs=1e-10)

    def test_invalid_inputs(self):
        with pytest.raises(ValueError):
            f_upper_tail(1.0, 0, 10)
        with pytest.raises(ValueError):
            f_upper_tail(-1.0, 2, 10)


def test_t_two_sided_against_scipy():
    rng = random.Random(3)
    for _ in range(100):
        t = rng.uniform(-6, 6)
        df = rng.randint(1, 40)
        assert t_two_sided_p(t, df) == pytest.approx(float(2 * scipy_stats.t.sf(abs(t), df)), abs=1e-12)


def random_table(rng, n, k):
    subject_offsets = [rng.gauss(0, 2) for _ in range(n)]
    level_offsets = [rng.gauss(0, 1) for _ in range(k)]
    return [
        [10 + subject_offsets[s] + level_offsets[j] + rng.gauss(0, 1) for j in range(k)]
        for s in range(n)
    ]


class TestOnewayAnova:
    def test_matches_naive_oracle(self):
        rng = random.Random(42)
        for _ in range(25):
            table = random_table(rng, 12, 3)
            result = rm_anova_oneway(table)
            f, df1, df2, p = naive_rm_anova_oneway(table)
            assert result.f_stat == pytest.approx(f, rel=1e-9)
            assert (result.df_num, result.df_den) == (df1, df2)
            assert result.p == pytest.approx(p, rel=1e-9, abs=1e-12)

    def test_df_shape_for_12_by_3(self):
        result = rm_anova_oneway(random_table(random.Random(0), 12, 3))
        assert (result.df_num, result.df_den) == (2, 22)

    def test_zero_between_condition_variance(self):
        rng = random.Random(9)
        table = np.array(random_table(rng, 10, 4))
        table -= table.mean(axis=0, keepdims=True)  # equalize condition means at zero
        result = rm_anova_oneway(table)
        assert result.f_stat <= 1e-12

    def test_degenerate_error_term(self):
        # Additive subject+condition structure has exactly zero error SS.
        table = [[s + j for j in range(3)] for s in range(6)]
        with pytest.raises(DegenerateDataError):
            rm_anova_oneway(table)

    def test_validation(self):
        with pytest.raises(ValueError):
            rm_anova_oneway([[1.0, 2.0]])  # one subject
        with pytest.raises(ValueError):
            rm_anova_oneway([[1.0], [2.0]])  # one level
        with pytest.raises(ValueError):
            rm_anova_oneway([[1.0, float("nan")], [2.0, 3.0]])


def random_table_3d(rng, n, a, b):
    return [
        [
            [10 + rng.gauss(0, 2) + i - j + rng.gauss(0, 1) for j in range(b)]
            for i in range(a)
        ]
        for s in range(n)
    ]


class TestTwowayAnova:
    def test_matches_naive_oracle(self):
        rng = random.Random(77)
        for _ in range(25):
            table = random_table_3d(rng, 12, 3, 2)
            results = {r.effect: r for r in rm_anova_twoway(np.array(table))}
            oracle = naive_rm_anova_twoway(table)
            for mine, theirs in (("A", "A"), ("B", "B"), ("AxB", "AxB")):
                f, df1, df2, p = oracle[theirs]
                assert results[mine].f_stat == pytest.approx(f, rel=1e-9)
                assert (results[mine].df_num, results[mine].df_den) == (df1, df2)
                assert results[mine].p == pytest.approx(p, rel=1e-9, abs=1e-12)

    def test_effect_shapes_for_12_by_3x2(self):
        results = rm_anova_twoway(np.array(random_table_3d(random.Random(1), 12, 3, 2)))
        by_name = {r.effect: r for r in results}
        assert by_name["A"].df_num == 2
        assert by_name["B"].df_num == 1
        assert by_name["AxB"].df_num == 2

    def test_duplicated_factor_level_kills_main_effect(self):
        rng = random.Random(13)
        base = np.array(random_table_3d(rng, 8, 3, 1))
        table = np.concatenate([base, base], axis=2)  # factor B identical across levels
        results = {r.effect: r for r in rm_anova_twoway(table)}
        assert results["B"].degenerate or results["B"].f_stat <= 1e-12

    def test_decomposition_identity(self):
        rng = random.Random(21)
        data = np.array(random_table_3d(rng, 9, 3, 2))
        results = rm_anova_twoway(data)
        n = data.shape[0]
        grand = data.mean()
        ss_total = float(((data - grand) ** 2).sum())
        ss_subjects = data.shape[1] * data.shape[2] * float(((data.mean(axis=(1, 2)) - grand) ** 2).sum())
        ss_sum = ss_subjects + sum(r.ss_effect + r.ss_error for r in results)
        assert ss_sum == pytest.approx(ss_total, rel=1e-9)

    def test_invariances(self):
        rng = random.Random(31)
        data = np.array(random_table_3d(rng, 10, 3, 2))
        base = [(r.effect, r.f_stat) for r in rm_anova_twoway(data)]
        permuted = data[np.random.default_rng(0).permutation(10)]
        shifted = data + 100.0
        scaled = data * 3.7
        for variant in (permuted, shifted, scaled):
            for (name, f0), r in zip(base, rm_anova_twoway(variant)):
                assert r.effect == name
                assert r.f_stat == pytest.approx(f0, rel=1e-9)


def test_oneway_invariances():
    rng = random.Random(8)
    table = np.array(random_table(rng, 12, 4))
    f0 = rm_anova_oneway(table).f_stat
    assert rm_anova_oneway(table[np.random.default_rng(1).permutation(12)]).f_stat == pytest.approx(f0, rel=1e-9)
    assert rm_anova_oneway(table + 55.0).f_stat == pytest.approx(f0, rel=1e-9)
    assert rm_anova_oneway(table * 0.31).f_stat == pytest.approx(f0, rel=1e-9)


class TestBonferroni:
    def test_multiplication_rule(self):
        rng = random.Random(4)
        table = np.array(random_table(rng, 12, 3))
        results = bonferroni_pairwise(table)
        assert len(results) == 3
        for r in results:
            assert r.adjusted_p == pytest.approx(min(1.0, r.raw_p * 3), abs=1e-15)
            assert r.adjusted_p >= r.raw_p

    def test_t_matches_scipy_paired(self):
        rng = random.Random(6)
        table = np.array(random_table(rng, 10, 4))
        for r in bonferroni_pairwise(table, labels=["a", "b", "c", "d"]):
            i = ["a", "b", "c", "d"].index(r.pair[0])
            j = ["a", "b", "c", "d"].index(r.pair[1])
            t, p = scipy_stats.ttest_rel(table[:, i], table[:, j])
            assert r.t_stat == pytest.approx(float(t), rel=1e-9)
            assert r.raw_p == pytest.approx(float(p), rel=1e-9)

    def test_identical_columns_flagged_degenerate(self):
        table = np.array([[1.0, 1.0], [2.0, 2.0], [3.0, 3.0]])
        (result,) = bonferroni_pairwise(table)
        assert result.degenerate and result.raw_p is None


def test_anova_result_report_dict():
    result = AnovaResult("time", 8.195, 2, 22, 0.00219, 1.0, 2.0)
    assert result.to_dict() == {"name": "time", "F": 8.195, "df_num": 2, "df_den": 22, "p": 0.00219}


class TestSphericityCorrection:
    def test_off_by_default(self):
        table = random_table(random.Random(2), 12, 3)
        result = rm_anova_oneway(table)
        assert result.gg_epsilon is None
        assert (result.df_num, result.df_den) == (2, 22)

    def test_epsilon_bounds_and_f_unchanged(self):
        rng = random.Random(14)
        for _ in range(20):
            table = random_table(rng, 10, 4)
            plain = rm_anova_oneway(table)
            corrected = rm_anova_oneway(table, sphericity_correction=True)
            k = 4
            assert 1.0 / (k - 1) - 1e-12 <= corrected.gg_epsilon <= 1.0 + 1e-12
            assert corrected.f_stat == pytest.approx(plain.f_stat, rel=1e-12)
            assert corrected.df_num == pytest.approx(plain.df_num * corrected.gg_epsilon)
            assert 0.0 < corrected.p < 1.0
            assert corrected.to_dict()["gg_epsilon"] == corrected.gg_epsilon

    def test_epsilon_matches_double_centering_oracle(self):
        # Independent route: Box's formula on the double-centered covariance.
        rng = random.Random(15)
        table = np.array(random_table(rng, 12, 5))
        corrected = rm_anova_oneway(table, sphericity_correction=True)
        s = np.cov(table, rowvar=False)
        centered = s - s.mean(axis=0, keepdims=True) - s.mean(axis=1, keepdims=True) + s.mean()
        k = s.shape[0]
        oracle = float(np.trace(centered)) ** 2 / ((k - 1) * float((centered * centered).sum()))
        assert corrected.gg_epsilon == pytest.approx(oracle, rel=1e-9)

    def test_two_level_factor_epsilon_is_one(self):
        rng = random.Random(16)
        table = np.array(random_table_3d(rng, 9, 3, 2))
        results = {r.effect: r for r in rm_anova_twoway(table, sphericity_correction=True)}
        assert results["B"].gg_epsilon == pytest.approx(1.0)  # df=1 effects are always spherical
        assert 0 < results["A"].gg_epsilon <= 1.0 + 1e-12
        plain = {r.effect: r for r in rm_anova_twoway(table)}
        for name in ("A", "B", "AxB"):
            assert results[name].f_stat == pytest.approx(plain[name].f_stat, rel=1e-12)
            assert 0.0 < results[name].p < 1.0
        # With df=1 (epsilon exactly 1) the corrected shape is unchanged.
        assert results["B"].p == pytest.approx(plain["B"].p, rel=1e-12)
