import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from mosci.estimators import (
    BATCH,
    CLAMPED,
    ConfidenceSpec,
    clopper_pearson_ci,
    interval,
    jeffreys_ci,
    normal_ci,
    proportion_ci_to_mos_ci,
    simultaneous_ci,
    student_ci,
    wald_ci,
    wilson_cc_ci,
)
from mosci.model import EstimatorId, RatingSample, Scale
from mosci.numerics import DomainError

Z975 = 1.959963984540054
CHI2_099_DF1 = 6.634896601021214
S = RatingSample.from_ratings
C = RatingSample.from_counts
UNCLAMPED = [normal_ci, student_ci, simultaneous_ci, wald_ci]
ALL_CLOSED = UNCLAMPED + [wilson_cc_ci, clopper_pearson_ci, jeffreys_ci]
NEAR_FLOOR = S([1] * 19 + [2])


def test_confidence_spec():
    assert ConfidenceSpec(0.1).gamma == pytest.approx(0.9)
    for bad in (0.0, 1.0, -0.2):
        with pytest.raises(DomainError):
            ConfidenceSpec(bad)


class TestNormal:
    def test_identical_ratings(self):
        iv = normal_ci(S([4] * 12))
        assert iv.lower == iv.upper == 4.0

    def test_outlier_event(self):
        iv = normal_ci(NEAR_FLOOR)
        assert iv.point == pytest.approx(1.05)
        assert iv.lower == pytest.approx(1.05 - Z975 * math.sqrt(0.05) / math.sqrt(20), abs=1e-12)
        assert iv.lower < 1

    def test_sqrt_n_scaling(self):
        # ratings {2, 4}: S is sqrt(2n/(2n-1)) so compare the normalised half-width
        for n in (10, 20, 40):
            s = C((0, n, 0, n, 0))
            iv = normal_ci(s)
            sd = math.sqrt(2 * n / (2 * n - 1))
            assert (iv.width / 2) / (sd / math.sqrt(2 * n)) == pytest.approx(Z975, abs=1e-12)

    def test_requires_two(self):
        with pytest.raises(DomainError):
            normal_ci(S([3]))


class TestStudent:
    def test_identical(self):
        assert student_ci(S([2] * 5)).width == 0.0

    @given(st.lists(st.integers(1, 5), min_size=2, max_size=30))
    @settings(max_examples=50)
    def test_wider_than_normal(self, ratings):
        s = S(ratings)
        if len(set(ratings)) > 1:
            assert student_ci(s).width > normal_ci(s).width

    def test_large_n_limit(self):
        s = C((2000, 2000, 2000, 2000, 2000))
        assert student_ci(s).width == pytest.approx(normal_ci(s).width, rel=1e-3)

    def test_df19_quantile(self):
        s = NEAR_FLOOR
        half = student_ci(s).width / 2
        assert half == pytest.approx(oracles.t_quantile(0.975, 19) * math.sqrt(0.05 / 20), abs=1e-9)


class TestSimultaneous:
    def test_identical(self):
        assert simultaneous_ci(S([5] * 9)).width == 0.0

    def test_two_point(self):
        iv = simultaneous_ci(C((10, 0, 0, 0, 10)))
        assert iv.point == 3.0
        assert iv.width / 2 == pytest.approx(math.sqrt(CHI2_099_DF1 / 20 * 4), abs=1e-9)

    def test_quantile_order_depends_on_k(self):
        # k=3 with alpha 0.05 uses chi-square order 1 - 0.05/3
        iv = simultaneous_ci(C((5, 0, 5)))
        q = oracles.chi2_quantile(1 - 0.05 / 3, 1)
        assert iv.width / 2 == pytest.approx(math.sqrt(q / 10 * 1), abs=1e-8)


class TestWald:
    def test_degenerate(self):
        assert (wald_ci(S([1] * 20)).lower, wald_ci(S([1] * 20)).upper) == (1.0, 1.0)
        assert (wald_ci(S([5] * 20)).lower, wald_ci(S([5] * 20)).upper) == (5.0, 5.0)

    def test_half_width_example(self):
        iv = wald_ci(C((0, 0, 20, 0, 0)))
        assert iv.width / 2 == pytest.approx(Z975 * math.sqrt(0.0125) * 4, abs=1e-12)
        assert iv.width / 2 == pytest.approx(0.876, abs=1e-3)

    @given(st.lists(st.integers(1, 5), min_size=1, max_size=40))
    def test_direct_arithmetic(self, ratings):
        iv = wald_ci(S(ratings))
        n = len(ratings)
        p = (sum(ratings) / n - 1) / 4
        assert iv.width / 2 == pytest.approx(Z975 * math.sqrt(p * (1 - p) / n) * 4, abs=1e-12)


class TestProportionMap:
    @pytest.mark.parametrize("pi,expected", [((0, 1), (1, 5)), ((0.5, 0.5), (3, 3)), ((0.25, 0.75), (2, 4))])
    def test_examples(self, pi, expected):
        iv = proportion_ci_to_mos_ci(pi, Scale(5))
        assert (iv.lower, iv.upper) == expected

    def test_inverted(self):
        with pytest.raises(DomainError):
            proportion_ci_to_mos_ci((0.6, 0.4), Scale(5))


def _wilson_direct(p, trials, z, k0):
    # the d / Y0 / Y1 block written out longhand
    d = 1 + z * math.sqrt(z * z - 1 / trials + 4 * trials * p * (1 - p) + (4 * p - 2))
    lo = k0 * (2 * trials * p + z * z - d) / (2 * (trials + z * z)) + 1
    hi = k0 * (2 * trials * p + z * z + d) / (2 * (trials + z * z)) + 1
    return max(1.0, lo), min(k0 + 1.0, hi)


class TestWilson:
    def test_clamps(self):
        assert wilson_cc_ci(S([1] * 20)).lower == 1.0
        assert wilson_cc_ci(S([5] * 20)).upper == 5.0

    def test_centre_example(self):
        iv = wilson_cc_ci(C((0, 0, 20, 0, 0)))
        lo, hi = _wilson_direct(0.5, 80, Z975, 4)
        assert (iv.lower, iv.upper) == (pytest.approx(lo, abs=1e-12), pytest.approx(hi, abs=1e-12))
        tlo, thi = oracles.wilson_cc_textbook(40, 80, Z975)
        assert iv.lower == pytest.approx(1 + 4 * tlo, abs=1e-12)
        assert iv.upper == pytest.approx(1 + 4 * thi, abs=1e-12)

    def test_lower_matches_textbook(self):
        # the printed lower radical coincides with the textbook one for every p
        for c in range(1, 81):
            s = _sample_with_successes(c, n=20, k=5)
            tlo, _ = oracles.wilson_cc_textbook(c, 80, Z975)
            assert wilson_cc_ci(s).lower == pytest.approx(max(1.0, 1 + 4 * tlo), abs=1e-12)

    def test_upper_differs_from_textbook_off_centre(self):
        s = _sample_with_successes(20, n=20, k=5)
        _, thi = oracles.wilson_cc_textbook(20, 80, Z975)
        assert wilson_cc_ci(s).upper < 1 + 4 * thi

    @given(st.lists(st.integers(1, 5), min_size=1, max_size=40))
    def test_direct_formula(self, ratings):
        s = S(ratings)
        p = (sum(ratings) / len(ratings) - 1) / 4
        if 0 < p < 1:
            lo, hi = _wilson_direct(p, 4 * len(ratings), Z975, 4)
            iv = wilson_cc_ci(s)
            assert iv.lower == pytest.approx(lo, abs=1e-12)
            assert iv.upper == pytest.approx(hi, abs=1e-12)


def _sample_with_successes(c, n, k):
    """A sample of n ratings on 1..k whose shifted sum is c."""
    k0 = k - 1
    full, rest = divmod(c, k0)
    ratings = [k] * full + ([rest + 1] if full < n else [])
    ratings += [1] * (n - len(ratings))
    s = S(ratings[:n], k)
    assert sum(r - 1 for r in s.ratings) == c
    return s


class TestClopperPearson:
    def test_no_successes(self):
        iv = clopper_pearson_ci(S([1] * 20))
        assert iv.lower == 1.0
        assert iv.upper == pytest.approx(1 + 4 * (1 - 0.025 ** (1 / 80)), abs=1e-12)
        assert iv.upper == pytest.approx(1.180, abs=5e-4)

    def test_all_successes(self):
        iv = clopper_pearson_ci(S([5] * 20))
        assert iv.upper == 5.0
        assert iv.lower == pytest.approx(5 - 4 * (1 - 0.025 ** (1 / 80)), abs=1e-12)

    @pytest.mark.parametrize("c", [1, 7, 40, 79])
    def test_beta_quantile_oracle(self, c):
        iv = clopper_pearson_ci(_sample_with_successes(c, 20, 5))
        assert iv.lower == pytest.approx(1 + 4 * oracles.beta_quantile(0.025, c, 81 - c), abs=1e-9)
        assert iv.upper == pytest.approx(1 + 4 * oracles.beta_quantile(0.975, c + 1, 80 - c), abs=1e-9)


class TestJeffreys:
    def test_edges(self):
        assert jeffreys_ci(S([1] * 20)).lower == 1.0
        assert jeffreys_ci(S([5] * 20)).upper == 5.0

    def test_centre_oracle(self):
        iv = jeffreys_ci(C((0, 0, 20, 0, 0)))
        assert iv.lower == pytest.approx(1 + 4 * oracles.beta_quantile(0.025, 40.5, 40.5), abs=1e-9)
        assert iv.upper == pytest.approx(1 + 4 * oracles.beta_quantile(0.975, 40.5, 40.5), abs=1e-9)
        assert iv.lower + iv.upper == pytest.approx(6.0, abs=1e-12)


def test_cp_contains_jeffreys_bruteforce():
    # k = 2 makes the trial count equal to n, so every (c, N) is reachable
    for trials in range(1, 41):
        for c in range(trials + 1):
            s = C((trials - c, c), 2)
            cp, jf = clopper_pearson_ci(s), jeffreys_ci(s)
            assert cp.lower <= jf.lower + 1e-12
            assert jf.upper <= cp.upper + 1e-12


@pytest.mark.parametrize("fn", UNCLAMPED)
def test_unclamped_show_outlier(fn):
    assert fn(NEAR_FLOOR).lower < 1


@pytest.mark.parametrize("fn", ALL_CLOSED)
def test_deterministic(fn):
    a, b = fn(NEAR_FLOOR), fn(S([1] * 19 + [2]))
    assert (a.lower, a.upper) == (b.lower, b.upper)


samples = st.integers(2, 7).flatmap(
    lambda k: st.tuples(st.just(k), st.lists(st.integers(1, k), min_size=2, max_size=50))
)


@given(samples, st.sampled_from([0.01, 0.05, 0.1, 0.3]))
@settings(max_examples=150)
def test_bounds_ordered_and_clamped(case, alpha):
    k, ratings = case
    s = S(ratings, k)
    conf = ConfidenceSpec(alpha)
    for est in BATCH:
        iv = interval(s, est, conf)
        assert iv.lower <= iv.upper
        if est in CLAMPED:
            assert 1.0 <= iv.lower <= iv.upper <= k
            assert iv.lower <= iv.point + 1e-12 and iv.point <= iv.upper + 1e-12


def test_smaller_alpha_is_wider():
    s = S([2, 3, 3, 4, 4, 4, 5, 2, 3])
    for est in BATCH:
        assert interval(s, est, ConfidenceSpec(0.01)).width >= interval(s, est, ConfidenceSpec(0.1)).width


def test_dispatcher_parses_labels():
    assert interval(NEAR_FLOOR, "C-P") == clopper_pearson_ci(NEAR_FLOOR)
    assert interval(NEAR_FLOOR, "boot").estimator is EstimatorId.BOOT


def test_batch_matches_scalar():
    rng = np.random.default_rng(3)
    counts = rng.multinomial(20, [0.1, 0.2, 0.3, 0.25, 0.15], size=30)
    for est, fn in BATCH.items():
        lo, hi = fn(counts)
        for j in range(0, 30, 7):
            iv = interval(C(counts[j]), est)
            assert (iv.lower, iv.upper) == (lo[j], hi[j])
