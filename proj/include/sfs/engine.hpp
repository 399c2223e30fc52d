#pragma once

#include "dataset.hpp"
#include "parallel.hpp"
#include "partition.hpp"
#include "rng.hpp"
#include "selector.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sfs {

struct EngineConfig {
    Index T = 50;
    Index L = 2;
    Index V = 1;
    double tau = 0.6;
    Selector selector;
    std::string selector_label = "custom";
    std::uint64_t seed = 0;
    Index parallelism = 1;
    /// Keep a record of every base call. Defaults to on for up to 10^6 cells.
    std::optional<bool> audit;
    /// Abort when more than this fraction of base calls fail.
    double max_failure_fraction = 0.1;

    void validate() const {
        if (T < 1 || L < 1 || V < 1)
            throw std::invalid_argument("T, L and V must be at least 1");
        if (!(tau > 0.0 && tau < 1.0))
            throw std::invalid_argument("tau must lie in (0, 1)");
        if (!selector)
            throw std::invalid_argument("engine needs a base selector");
    }
};

struct CellRecord {
    Index iteration = 0;
    Index subsample = 0;
    Index subset = 0;
    IndexList selected; // original indices, ascending, duplicate-free
    bool failed = false;
    std::string error;
};

/// Selection counts per covariate; pi = counts / (L T).
struct FrequencyTable {
    std::vector<std::uint64_t> counts;
    std::uint64_t denominator = 1;
    std::vector<double> pi;
    Index runs = 0;
    Index failures = 0;
    std::vector<CellRecord> audit;

    Index d() const noexcept { return counts.size(); }

    static FrequencyTable from_counts(std::vector<std::uint64_t> counts, std::uint64_t denominator) {
        FrequencyTable t;
        t.pi.resize(counts.size());
        for (std::size_t d = 0; d < counts.size(); ++d)
            t.pi[d] = static_cast<double>(counts[d]) / static_cast<double>(denominator);
        t.counts = std::move(counts);
        t.denominator = denominator;
        return t;
    }
};

struct SelectionResult {
    FrequencyTable table;
    IndexList selected;
    double tau = 0.0;
    Index T = 0, L = 0, V = 0;
    std::uint64_t seed = 0;
    std::string selector_label;
    double wall_seconds = 0.0;
};

class EngineError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// {d : pi[d] >= tau}, ascending.
inline IndexList threshold(const FrequencyTable& t, double tau) {
    IndexList out;
    for (Index d = 0; d < t.d(); ++d)
        if (t.pi[d] >= tau)
            out.push_back(d);
    return out;
}

/// The k covariates with the largest frequencies, ties to the lowest index.
inline IndexList rank(const FrequencyTable& t, Index k) {
    if (k < 1 || k > t.d())
        throw std::invalid_argument("rank cutoff k=" + std::to_string(k) + " outside [1, " + std::to_string(t.d()) + "]");
    IndexList idx = iota_indices(t.d());
    std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) { return t.counts[a] > t.counts[b]; });
    idx.resize(k);
    return idx;
}

/// Extended stability selection: T iterations, each splitting the rows into
/// L disjoint subsamples and the covariates into V disjoint subsets, and
/// calling the base selector on every (subsample, subset) pair. Partitions
/// are drawn sequentially from one stream before any call is dispatched and
/// counts are integers, so the table does not depend on `parallelism`.
inline SelectionResult run(const Dataset& ds, const EngineConfig& cfg) {
    cfg.validate();
    if (cfg.L > ds.n())
        throw std::invalid_argument("L exceeds the number of observations");
    if (cfg.V > ds.d())
        throw std::invalid_argument("V exceeds the number of covariates");

    const auto started = std::chrono::steady_clock::now();
    const Index d = ds.d();

    Rng plan_rng = make_rng(cfg.seed, {stream::plan});
    std::vector<PartitionPlan> plans;
    plans.reserve(cfg.T);
    for (Index t = 0; t < cfg.T; ++t)
        plans.push_back(draw_plan(ds.n(), d, cfg.L, cfg.V, plan_rng, t));

    const Index per_iter = cfg.L * cfg.V;
    const Index cells = cfg.T * per_iter;
    const bool keep_audit = cfg.audit.value_or(cells <= 1'000'000);
    const Index workers = std::max<Index>(1, std::min(cfg.parallelism, cells));
    const auto allowed_failures = static_cast<Index>(cfg.max_failure_fraction * static_cast<double>(cells));

    std::vector<std::vector<std::uint64_t>> local(workers, std::vector<std::uint64_t>(d, 0));
    std::vector<CellRecord> audit(keep_audit ? cells : 0);
    std::atomic<Index> failures{0};
    std::mutex first_error_mutex;
    std::string first_error;

    parallel_for(cells, workers, [&](std::size_t cell, std::size_t w) {
        if (failures.load() > allowed_failures)
            return;
        const Index t = cell / per_iter;
        const Index i = (cell % per_iter) / cfg.V;
        const Index j = cell % cfg.V;
        const PartitionPlan& plan = plans[t];

        CellRecord rec{t, i, j, {}, false, {}};
        try {
            Dataset sub = restrict_to(ds, plan.subsamples[i], plan.subsets[j]);
            const CellContext ctx{t, i, j, derive_seed(cfg.seed, {stream::cell, t, i, j})};
            IndexList sel = cfg.selector(sub, ctx);
            std::sort(sel.begin(), sel.end());
            sel.erase(std::unique(sel.begin(), sel.end()), sel.end());
            if (!sel.empty() && sel.back() >= d)
                throw std::out_of_range("selector returned covariate " + std::to_string(sel.back()));
            for (Index s : sel)
                ++local[w][s];
            rec.selected = std::move(sel);
        } catch (const std::exception& e) {
            rec.failed = true;
            rec.error = e.what();
            ++failures;
            std::lock_guard lock(first_error_mutex);
            if (first_error.empty())
                first_error = "iteration " + std::to_string(t) + ", subsample " + std::to_string(i) + ", subset " +
                              std::to_string(j) + ": " + e.what();
        }
        if (keep_audit)
            audit[cell] = std::move(rec);
    });

    if (failures.load() > allowed_failures)
        throw EngineError(std::to_string(failures.load()) + " of " + std::to_string(cells) +
                          " base calls failed; first failure at " + first_error);

    std::vector<std::uint64_t> counts(d, 0);
    for (const auto& v : local)
        for (Index k = 0; k < d; ++k)
            counts[k] += v[k];

    SelectionResult res;
    res.table = FrequencyTable::from_counts(std::move(counts), static_cast<std::uint64_t>(cfg.L * cfg.T));
    res.table.runs = cells;
    res.table.failures = failures.load();
    res.table.audit = std::move(audit);
    res.selected = threshold(res.table, cfg.tau);
    res.tau = cfg.tau;
    res.T = cfg.T;
    res.L = cfg.L;
    res.V = cfg.V;
    res.seed = cfg.seed;
    res.selector_label = cfg.selector_label;
    res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return res;
}

} // namespace sfs
