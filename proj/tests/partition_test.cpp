#include <sfs/partition.hpp>

#include <gtest/gtest.h>

#include <set>

using namespace sfs;

namespace {

void expect_valid(const PartitionPlan& p, Index n, Index d, Index l, Index v) {
    ASSERT_EQ(p.subsamples.size(), l);
    ASSERT_EQ(p.subsets.size(), v);
    std::set<Index> rows;
    for (const auto& s : p.subsamples) {
        EXPECT_EQ(s.size(), n / l);
        for (Index i : s) {
            EXPECT_LT(i, n);
            EXPECT_TRUE(rows.insert(i).second) << "row " << i << " used twice";
        }
    }
    EXPECT_EQ(rows.size(), l * (n / l));
    std::set<Index> cols;
    for (const auto& f : p.subsets) {
        EXPECT_TRUE(f.size() == d / v || f.size() == d / v + 1);
        for (Index j : f)
            EXPECT_TRUE(cols.insert(j).second) << "covariate " << j << " used twice";
    }
    EXPECT_EQ(cols.size(), d);
    if (!cols.empty())
        EXPECT_EQ(*cols.rbegin(), d - 1);
}

} // namespace

TEST(DrawPlan, RemainderObservationUnused) {
    Rng rng(1);
    const auto p = draw_plan(10, 10, 3, 3, rng);
    expect_valid(p, 10, 10, 3, 3);
    std::multiset<Index> sizes;
    for (const auto& f : p.subsets)
        sizes.insert(f.size());
    EXPECT_EQ(sizes, (std::multiset<Index>{3, 3, 4}));
    EXPECT_EQ(p.subsets[0].size(), 4u); // first D mod V subsets are the larger ones
}

TEST(DrawPlan, IdentityCase) {
    Rng rng(2);
    const auto p = draw_plan(7, 5, 1, 1, rng);
    EXPECT_EQ(p.subsamples[0], iota_indices(7));
    EXPECT_EQ(p.subsets[0], iota_indices(5));
}

TEST(DrawPlan, Errors) {
    Rng rng(3);
    EXPECT_THROW(draw_plan(3, 5, 4, 1, rng), std::invalid_argument);
    EXPECT_THROW(draw_plan(3, 5, 1, 6, rng), std::invalid_argument);
    EXPECT_THROW(draw_plan(3, 5, 0, 1, rng), std::invalid_argument);
}

TEST(DrawPlan, InvariantsOverRandomShapes) {
    Rng shapes(99);
    for (int trial = 0; trial < 300; ++trial) {
        const Index n = std::uniform_int_distribution<Index>(1, 60)(shapes);
        const Index d = std::uniform_int_distribution<Index>(1, 60)(shapes);
        const Index l = std::uniform_int_distribution<Index>(1, n)(shapes);
        const Index v = std::uniform_int_distribution<Index>(1, d)(shapes);
        Rng rng(static_cast<std::uint64_t>(trial));
        expect_valid(draw_plan(n, d, l, v, rng, static_cast<Index>(trial)), n, d, l, v);
    }
}

TEST(DrawPlan, Determinism) {
    Rng a(77), b(77);
    EXPECT_EQ(draw_plan(30, 20, 3, 4, a), draw_plan(30, 20, 3, 4, b));
}

TEST(DrawPlan, MembershipFrequencies) {
    Rng rng(2024);
    const int draws = 10000;
    std::vector<int> in_any(6, 0), in_first(6, 0);
    for (int t = 0; t < draws; ++t) {
        const auto p = draw_plan(6, 1, 2, 1, rng);
        for (Index s = 0; s < 2; ++s)
            for (Index i : p.subsamples[s]) {
                ++in_any[i];
                if (s == 0)
                    ++in_first[i];
            }
    }
    for (Index i = 0; i < 6; ++i) {
        EXPECT_EQ(in_any[i], draws);
        EXPECT_NEAR(static_cast<double>(in_first[i]) / draws, 0.5, 0.02);
    }
}
