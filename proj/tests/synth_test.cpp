#include <sfs/synth.hpp>

#include <gtest/gtest.h>

#include <set>

using namespace sfs;
using namespace sfs::synth;

namespace {

double sample_corr(const Eigen::MatrixXd& x, Eigen::Index a, Eigen::Index b) {
    const Eigen::VectorXd u = x.col(a).array() - x.col(a).mean();
    const Eigen::VectorXd v = x.col(b).array() - x.col(b).mean();
    return u.dot(v) / (u.norm() * v.norm());
}

double var(const Eigen::VectorXd& v) {
    return (v.array() - v.mean()).square().sum() / static_cast<double>(v.size() - 1);
}

} // namespace

TEST(Covariance, ToeplitzEntries) {
    DesignSpec s;
    s.kind = DesignKind::Toeplitz;
    s.d = 3;
    s.n_informative = 2;
    Eigen::MatrixXd expected(3, 3);
    expected << 1, 0.99, 0.9801, 0.99, 1, 0.99, 0.9801, 0.99, 1;
    EXPECT_TRUE(covariance(s).isApprox(expected, 1e-15));
}

TEST(Covariance, FourBlocksEntries) {
    DesignSpec s;
    s.kind = DesignKind::FourBlocks;
    s.d = 12;
    s.n_informative = 2;
    const auto c = covariance(s);
    EXPECT_EQ(c(0, 4), 0.8);
    EXPECT_EQ(c(0, 1), 0.0);
    EXPECT_EQ(c(0, 0), 1.0);
    EXPECT_TRUE(is_psd(c));
}

TEST(Covariance, CorrelatedInformative) {
    DesignSpec s;
    s.kind = DesignKind::CorrelatedInformative;
    s.d = 6;
    s.n_informative = 0;
    EXPECT_EQ(covariance(s), Eigen::MatrixXd::Identity(6, 6));
    const IndexList inf{1, 4};
    const auto c = covariance(s, inf);
    EXPECT_EQ(c(1, 4), 0.9);
    EXPECT_EQ(c(4, 1), 0.9);
    EXPECT_EQ(c(1, 2), 0.0);
    EXPECT_TRUE(is_psd(c));
}

TEST(Covariance, FactorReproducesMatrix) {
    DesignSpec s;
    s.kind = DesignKind::Toeplitz;
    s.d = 200;
    const auto c = covariance(s);
    EXPECT_TRUE(is_psd(c));
    const auto f = covariance_factor(c);
    EXPECT_LT((f * f.transpose() - c).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(DrawDesign, SnrIsExactInSample) {
    for (auto kind : {DesignKind::Toeplitz, DesignKind::TenFactors, DesignKind::FourBlocks}) {
        DesignSpec s;
        s.kind = kind;
        s.n = 100;
        s.d = 60;
        s.snr = 8.0;
        s.seed = 11;
        const auto [ds, gt] = draw_design(s);
        const Eigen::VectorXd signal = ds.x() * gt.beta;
        const Eigen::VectorXd noise = ds.y() - signal;
        EXPECT_NEAR(var(signal) / var(noise), 8.0, 1e-9) << to_string(kind);
    }
}

TEST(DrawDesign, SupportSizeAndDeterminism) {
    DesignSpec s;
    s.n = 50;
    s.d = 100;
    s.seed = 5;
    s.noise.family = NoiseSpec::Family::StudentT;
    const auto a = draw_design(s);
    const auto b = draw_design(s);
    EXPECT_EQ(a.first, b.first);
    EXPECT_EQ(a.second, b.second);
    EXPECT_EQ(a.second.informative.size(), 20u);
    EXPECT_EQ((a.second.beta.array() != 0.0).count(), 20);
    for (Index j : a.second.informative) {
        EXPECT_GT(a.second.beta[static_cast<Eigen::Index>(j)], 0.0);
        EXPECT_LE(a.second.beta[static_cast<Eigen::Index>(j)], 1.0);
    }
    s.seed = 6;
    EXPECT_NE(draw_design(s).second, a.second);
}

TEST(DrawDesign, GroupedSupportWindows) {
    DesignSpec s;
    s.kind = DesignKind::ToeplitzGrouped;
    s.n = 20;
    s.d = 520;
    s.seed = 3;
    const auto [ds, gt] = draw_design(s);
    ASSERT_EQ(gt.informative.size(), 20u);
    std::set<Index> uniq(gt.informative.begin(), gt.informative.end());
    EXPECT_EQ(uniq.size(), 20u);
    for (Index g = 1; g <= 5; ++g) {
        int in_window = 0;
        for (Index j : gt.informative)
            if (j + 1 >= 100 * g - 20 && j + 1 <= 100 * g + 20)
                ++in_window;
        EXPECT_EQ(in_window, 4) << "group " << g;
    }
}

TEST(DrawDesign, InvalidSpecs) {
    DesignSpec s;
    s.kind = DesignKind::ToeplitzGrouped;
    s.d = 519;
    EXPECT_THROW(draw_design(s), std::invalid_argument);
    s.d = 600;
    s.n_informative = 10;
    EXPECT_THROW(draw_design(s), std::invalid_argument);
    DesignSpec t;
    t.d = 10;
    t.n_informative = 11;
    EXPECT_THROW(draw_design(t), std::invalid_argument);
    t.n_informative = 5;
    t.snr = 0.0;
    EXPECT_THROW(draw_design(t), std::invalid_argument);
}

TEST(DrawDesign, ToeplitzAdjacentCorrelation) {
    DesignSpec s;
    s.kind = DesignKind::Toeplitz;
    s.n = 500;
    s.d = 1000;
    s.seed = 21;
    const auto [ds, gt] = draw_design(s);
    for (Eigen::Index j : {0, 250, 500, 998})
        EXPECT_NEAR(sample_corr(ds.x(), j, j + 1), 0.99, 0.02);
}

TEST(DrawDesign, FourBlocksCrossBlockCorrelationVanishes) {
    DesignSpec s;
    s.kind = DesignKind::FourBlocks;
    s.n = 500;
    s.d = 40;
    s.seed = 8;
    const auto [ds, gt] = draw_design(s);
    // Sampling sd of a correlation is about 1/sqrt(N) = 0.045 at N = 500.
    double cross_sum = 0.0;
    int cross_pairs = 0;
    for (Eigen::Index i = 0; i < 40; ++i)
        for (Eigen::Index j = i + 1; j < 40; ++j) {
            const double r = sample_corr(ds.x(), i, j);
            if (i % 4 != j % 4) {
                EXPECT_LT(std::abs(r), 5.0 / std::sqrt(500.0));
                cross_sum += r;
                ++cross_pairs;
            } else {
                EXPECT_NEAR(r, 0.8, 0.1);
            }
        }
    EXPECT_NEAR(cross_sum / cross_pairs, 0.0, 0.03);
}

TEST(DrawDesign, IndependentDesignViaZeroCorrelation) {
    DesignSpec s;
    s.kind = DesignKind::CorrelatedInformative;
    s.informative_correlation = 0.0;
    s.n = 400;
    s.d = 30;
    s.n_informative = 5;
    s.seed = 2;
    const auto [ds, gt] = draw_design(s);
    const auto a = static_cast<Eigen::Index>(gt.informative[0]);
    const auto b = static_cast<Eigen::Index>(gt.informative[1]);
    EXPECT_NEAR(sample_corr(ds.x(), a, b), 0.0, 0.15);

    s.informative_correlation = 0.9;
    const auto [ds2, gt2] = draw_design(s);
    EXPECT_NEAR(sample_corr(ds2.x(), static_cast<Eigen::Index>(gt2.informative[0]),
                            static_cast<Eigen::Index>(gt2.informative[1])),
                0.9, 0.05);
}
