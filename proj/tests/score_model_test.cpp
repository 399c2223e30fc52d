#include <sfs/score_model.hpp>

#include <gtest/gtest.h>

using namespace sfs;
using namespace sfs::scores;

TEST(ScoreModel, SingleCovariateErrorIsUninformativeShare) {
    for (const auto& law : standard_noise_laws()) {
        ScoreModelConfig cfg;
        cfg.noise = law;
        cfg.dims = {1};
        cfg.trials = 4000;
        cfg.seed = 3;
        const auto rows = error_frequency(cfg);
        ASSERT_EQ(rows.size(), 1u);
        EXPECT_NEAR(rows[0].frequency, 0.9, 3.0 * std::sqrt(0.09 / 4000.0)) << law.name();
    }
}

TEST(ScoreModel, ZeroNoiseOnlyFailsWithoutInformativeDraws) {
    ScoreModelConfig cfg;
    cfg.noise.scale = 0.0;
    cfg.dims = {1, 5, 50};
    cfg.trials = 3000;
    const auto rows = error_frequency(cfg);
    // Errors happen exactly when all D scores are zero: probability 0.9^D.
    for (const auto& r : rows)
        EXPECT_NEAR(r.frequency, std::pow(0.9, static_cast<double>(r.d)), 3.0 * r.std_error() + 1e-3);
    EXPECT_EQ(optimal_subset_size(rows).d, 50u);
}

TEST(ScoreModel, ReproducibleAndThreadIndependent) {
    ScoreModelConfig cfg;
    cfg.noise = parse_noise("cauchy");
    cfg.dims = {1, 10, 100};
    cfg.trials = 1100;
    cfg.seed = 17;
    const auto a = error_frequency(cfg);
    cfg.threads = 4;
    const auto b = error_frequency(cfg);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].errors, b[i].errors);
        EXPECT_EQ(a[i].blind_rate, b[i].blind_rate);
        EXPECT_GE(a[i].frequency, 0.0);
        EXPECT_LE(a[i].frequency, 1.0);
    }
}

TEST(ScoreModel, ArgmaxNoWorseThanBlindGuess) {
    for (const auto& law : standard_noise_laws()) {
        ScoreModelConfig cfg;
        cfg.noise = law;
        cfg.dims = {1, 3, 30, 300};
        cfg.trials = 2000;
        cfg.seed = 5;
        for (const auto& r : error_frequency(cfg))
            EXPECT_LE(r.frequency, r.blind_rate + 3.0 * r.std_error() + 1e-12) << law.name() << " D=" << r.d;
    }
}

TEST(ScoreModel, GaussianNoiseFavoursLargestSweep) {
    ScoreModelConfig cfg;
    cfg.dims = {1, 10, 100, 1000};
    cfg.trials = 2000;
    cfg.seed = 8;
    const auto rows = error_frequency(cfg);
    for (std::size_t i = 1; i < rows.size(); ++i)
        EXPECT_LE(rows[i].frequency, rows[i - 1].frequency + 3.0 * rows[i - 1].std_error());
    EXPECT_EQ(optimal_subset_size(rows).d, 1000u);
}

TEST(ScoreModel, OptimalSizeTiesGoToLargerDimension) {
    std::vector<ErrorRow> rows(3);
    rows[0].d = 1;
    rows[0].frequency = 0.5;
    rows[1].d = 10;
    rows[1].frequency = 0.1;
    rows[2].d = 100;
    rows[2].frequency = 0.1;
    EXPECT_EQ(optimal_subset_size(rows).d, 100u);
    EXPECT_THROW(optimal_subset_size(std::vector<ErrorRow>{}), std::invalid_argument);
}

TEST(ScoreModel, NoiseNamesRoundTrip) {
    for (const auto& law : standard_noise_laws())
        EXPECT_EQ(parse_noise(law.name()).name(), law.name());
    EXPECT_EQ(parse_noise("t5").df, 5.0);
    EXPECT_THROW(parse_noise("laplace"), std::invalid_argument);
}

TEST(ScoreModel, InvalidConfig) {
    ScoreModelConfig cfg;
    cfg.trials = 0;
    EXPECT_THROW(error_frequency(cfg), std::invalid_argument);
    cfg.trials = 10;
    cfg.dims = {};
    EXPECT_THROW(error_frequency(cfg), std::invalid_argument);
    cfg.dims = {0};
    EXPECT_THROW(error_frequency(cfg), std::invalid_argument);
}
