#pragma once

#include "dataset.hpp"
#include "rng.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace sfs {

/// One iteration's disjoint observation subsamples and covariate partition.
struct PartitionPlan {
    std::vector<IndexList> subsamples; // L blocks of floor(N/L) rows each
    std::vector<IndexList> subsets;    // V blocks covering all D covariates
    Index iteration = 0;

    friend bool operator==(const PartitionPlan&, const PartitionPlan&) = default;
};

/// Shuffles rows and covariates and cuts them into consecutive blocks.
/// The N mod L leftover rows are unused; the first D mod V covariate
/// blocks get one extra member. Each block is sorted.
inline PartitionPlan draw_plan(Index n, Index d, Index l, Index v, Rng& rng, Index iteration = 0) {
    if (l < 1 || l > n)
        throw std::invalid_argument("need 1 <= L <= N (L=" + std::to_string(l) + ", N=" + std::to_string(n) + ")");
    if (v < 1 || v > d)
        throw std::invalid_argument("need 1 <= V <= D (V=" + std::to_string(v) + ", D=" + std::to_string(d) + ")");

    PartitionPlan plan;
    plan.iteration = iteration;

    IndexList rows = iota_indices(n);
    std::shuffle(rows.begin(), rows.end(), rng);
    const Index block = n / l;
    plan.subsamples.reserve(l);
    for (Index i = 0; i < l; ++i) {
        IndexList s(rows.begin() + static_cast<std::ptrdiff_t>(i * block),
                    rows.begin() + static_cast<std::ptrdiff_t>((i + 1) * block));
        std::sort(s.begin(), s.end());
        plan.subsamples.push_back(std::move(s));
    }

    IndexList cols = iota_indices(d);
    std::shuffle(cols.begin(), cols.end(), rng);
    const Index base = d / v;
    const Index extra = d % v;
    plan.subsets.reserve(v);
    Index pos = 0;
    for (Index j = 0; j < v; ++j) {
        const Index size = base + (j < extra ? 1 : 0);
        IndexList f(cols.begin() + static_cast<std::ptrdiff_t>(pos), cols.begin() + static_cast<std::ptrdiff_t>(pos + size));
        std::sort(f.begin(), f.end());
        plan.subsets.push_back(std::move(f));
        pos += size;
    }
    return plan;
}

} // namespace sfs
