#include <sfs/bounds.hpp>

#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace sfs::bounds;

TEST(KlBernoulli, Identities) {
    for (double p = 0.1; p < 0.95; p += 0.1)
        EXPECT_EQ(kl_bernoulli(p, p), 0.0);
    for (double t : {0.01, 0.028, 0.1, 0.5}) {
        EXPECT_NEAR(std::exp(-2.0 * kl_bernoulli(1.0, t)), t * t, 1e-12 * t * t);
        EXPECT_DOUBLE_EQ(kl_bernoulli(1.0, t), -std::log(t));
    }
    EXPECT_NEAR(std::exp(-2.0 * kl_bernoulli(1.0, 0.028)), 7.84e-4, 1e-15);
    // 0.5 ln 5 + 0.5 ln(5/9)
    EXPECT_NEAR(kl_bernoulli(0.5, 0.1), 0.5108256237659907, 1e-15);
    EXPECT_THROW(kl_bernoulli(0.5, 0.0), std::domain_error);
    EXPECT_THROW(kl_bernoulli(0.5, 1.0), std::domain_error);
    EXPECT_THROW(kl_bernoulli(1.5, 0.5), std::domain_error);
}

TEST(FpRateBound, TwoSubsamplesAtHighThreshold) {
    const double theta = 0.028;
    const double l1 = fp_rate_term(2, 0.9, theta, 1);
    const double l2 = fp_rate_term(2, 0.9, theta, 2);
    EXPECT_NEAR(l1, 4.0 * theta * (1.0 - theta) / 0.9, 1e-15);
    EXPECT_NEAR(l2, theta * theta / (2.0 * 0.9 - 1.0), 1e-17);
    const auto r = fp_rate_bound(2, 0.9, theta);
    EXPECT_EQ(r.l0, 2);
    EXPECT_NEAR(r.value, 9.8e-4, 1e-15);
    EXPECT_FALSE(r.vacuous);
}

TEST(FpRateBound, VacuousNearTheta) {
    const auto r = fp_rate_bound(2, 0.1001, 0.1);
    EXPECT_GE(r.value, 1.0);
    EXPECT_TRUE(r.vacuous);
    EXPECT_THROW(fp_rate_bound(2, 0.1, 0.1), std::invalid_argument);
    EXPECT_THROW(fp_rate_bound(1, 0.5, 0.1), std::invalid_argument);
}

TEST(FpRateBound, QuadraticRateForTwoHalves) {
    // L=2, l0=2 gives theta^2 / (2 tau - 1): the O(q^2 / D^2) per-covariate rate.
    for (double theta : {0.005, 0.01, 0.03}) {
        const double v = fp_rate_term(2, 0.75, theta, 2);
        EXPECT_NEAR(v, theta * theta / 0.5, 1e-14 * v + 1e-300);
    }
}

// l0 = 0: (0 + 1) / (0 - 2 tau + 1) * exp(-2 D(0, theta)) = (1 - theta)^2 / (1 - 2 tau).
TEST(FnRateBound, ClosedFormAtZero) {
    for (double theta : {0.3, 0.6, 0.9})
        for (double tau : {0.05, 0.2, 0.45}) {
            if (tau >= theta)
                continue;
            const double closed = (1.0 - theta) * (1.0 - theta) / (1.0 - 2.0 * tau);
            EXPECT_NEAR(fn_rate_term(2, tau, theta, 0), closed, 1e-14);
            EXPECT_LE(fn_rate_bound(2, tau, theta).value, closed + 1e-15);
        }
}

TEST(FnRateBound, EnumerationOracle) {
    const double want = oracle::enumerate_min(fn_rate_range(4, 0.4, 0.5),
                                              [](long l0) { return fn_rate_term(4, 0.4, 0.5, l0); });
    const auto range = fn_rate_range(4, 0.4, 0.5);
    EXPECT_EQ(range.lo, 1);
    EXPECT_EQ(range.hi, 2);
    EXPECT_EQ(fn_rate_bound(4, 0.4, 0.5).value, want);
    EXPECT_THROW(fn_rate_bound(4, 0.5, 0.4), std::invalid_argument);
}

TEST(Bounds, VersusBaseRatios) {
    for (long l0 = 1; l0 <= 8; ++l0)
        EXPECT_EQ(fp_vs_base_term(8, 0.9, 0.1, l0), fp_rate_term(8, 0.9, 0.1, l0) / 0.1);
    for (long l0 = 1; l0 <= 6; ++l0)
        EXPECT_EQ(fn_vs_base_term(8, 0.1, 0.8, l0), fn_rate_term(8, 0.1, 0.8, l0) / (1.0 - 0.8));
}

TEST(Bounds, EmptyRangeIsAnError) {
    // L=2, theta=0.45, tau=0.5: fp_vs_base range {2..1} is empty.
    EXPECT_THROW(fp_vs_base_bound(2, 0.5, 0.45), std::domain_error);
    // fn_vs_base with floor(L theta) - 1 < floor(L tau).
    EXPECT_THROW(fn_vs_base_bound(2, 0.3, 0.4), std::domain_error);
}

TEST(Bounds, RandomTuplesMatchEnumeration) {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.001, 0.999);
    int checked = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const long L = std::uniform_int_distribution<long>(2, 16)(rng);
        double a = u(rng), b = u(rng);
        if (a == b)
            continue;
        const double lo = std::min(a, b), hi = std::max(a, b);
        // false positives: theta = lo < tau = hi
        auto check = [&](auto bound, auto range, auto term, double tau, double theta) {
            const double want = oracle::enumerate_min(range(L, tau, theta), [&](long l0) { return term(L, tau, theta, l0); });
            if (std::isfinite(want)) {
                EXPECT_EQ(bound(L, tau, theta).value, want);
                EXPECT_GE(want, 0.0);
                ++checked;
            } else {
                EXPECT_THROW(bound(L, tau, theta), std::domain_error);
            }
        };
        check(fp_rate_bound, fp_rate_range, fp_rate_term, hi, lo);
        check(fp_vs_base_bound, fp_vs_base_range, fp_vs_base_term, hi, lo);
        check(fn_rate_bound, fn_rate_range, fn_rate_term, lo, hi);
        check(fn_vs_base_bound, fn_vs_base_range, fn_vs_base_term, lo, hi);
    }
    EXPECT_GT(checked, 2000);
}

TEST(FpRateBound, NonIncreasingInTau) {
    for (long L : {2L, 4L, 8L, 16L}) {
        const double theta = 0.03;
        double prev = fp_rate_bound(L, theta + 1e-3, theta).value;
        for (double tau = theta + 2e-3; tau < 1.0; tau += 1e-3) {
            const double cur = fp_rate_bound(L, tau, theta).value;
            EXPECT_LE(cur, prev * (1.0 + 1e-12)) << "L " << L << " tau " << tau;
            prev = cur;
        }
    }
}

TEST(ExpectedFp, ExpectedFalsePositives) {
    const auto r = expected_fp_bound(2, 0.9, 28, 1000, 980);
    EXPECT_NEAR(r.value, 980 * 9.8e-4, 1e-12);
    EXPECT_NEAR(r.value, 0.96, 0.005);
    EXPECT_THROW(expected_fp_bound(2, 0.028, 28, 1000, 980), std::invalid_argument);
    EXPECT_THROW(expected_fp_bound(2, 0.02, 28, 1000, 980), std::invalid_argument);

    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        const long L = std::uniform_int_distribution<long>(2, 16)(rng);
        const long l0 = std::uniform_int_distribution<long>(1, L - 1)(rng);
        const double tau = static_cast<double>(l0) / static_cast<double>(L);
        const double q = std::uniform_real_distribution<double>(1.0, 1000.0 * tau - 1.0)(rng);
        EXPECT_GE(expected_fp_at_integer_threshold(L, tau, q, 1000, 980) * (1.0 + 1e-12), expected_fp_bound(L, tau, q, 1000, 980).value);
    }
    EXPECT_THROW(expected_fp_at_integer_threshold(3, 0.5, 10, 1000, 980), std::invalid_argument);
}

TEST(TauMin, FeasibilityBoundaryForTwoHalves) {
    for (long q = 1; q <= 31; ++q)
        EXPECT_TRUE(tau_min(2, static_cast<double>(q), 1000, 980, 1.0).has_value()) << q;
    for (long q = 32; q <= 100; ++q)
        EXPECT_FALSE(tau_min(2, static_cast<double>(q), 1000, 980, 1.0).has_value()) << q;
}

TEST(TauMin, MatchesClosedFormForQ31) {
    // With l0 = 2 the bound is n_noise theta^2 / (2 tau - 1); the grid value is
    // the first grid point at or above (1 + n_noise q^2 / D^2) / 2.
    const double closed = (1.0 + 980.0 * 31.0 * 31.0 / 1e6) / 2.0;
    const auto t = tau_min(2, 31, 1000, 980, 1.0);
    ASSERT_TRUE(t.has_value());
    EXPECT_GE(*t, closed - 1e-12);
    EXPECT_LT(*t, closed + tau_grid_step + 1e-12);
    EXPECT_NEAR(*t, 0.9709, 1e-3);
    // Previous grid point fails.
    EXPECT_GT(expected_fp_bound(2, *t - tau_grid_step, 31, 1000, 980).value, 1.0);
}

TEST(TauMin, MoreSubsamplesAllowLowerThreshold) {
    const auto t2 = tau_min(2, 28, 1000, 980, 1.0);
    const auto t4 = tau_min(4, 28, 1000, 980, 1.0);
    const auto t8 = tau_min(8, 28, 1000, 980, 1.0);
    ASSERT_TRUE(t2 && t4 && t8);
    EXPECT_LE(*t8, *t4);
    EXPECT_LE(*t4, *t2);
}

TEST(TauMin, NonIncreasingInTarget) {
    for (long L : {2L, 4L, 8L})
        for (double q : {5.0, 15.0, 25.0}) {
            std::optional<double> prev;
            for (double target : {0.25, 0.5, 1.0, 2.0, 5.0}) {
                const auto cur = tau_min(L, q, 1000, 980, target);
                if (prev)
                    ASSERT_TRUE(cur.has_value());
                if (prev && cur)
                    EXPECT_LE(*cur, *prev);
                if (cur)
                    prev = cur;
            }
        }
    EXPECT_THROW(tau_min(2, 10, 1000, 980, 0.0), std::invalid_argument);
}
