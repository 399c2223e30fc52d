#pragma once

#include "cmim.hpp"
#include "dataset.hpp"
#include "lasso.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <variant>

namespace sfs {

/// Position of one base-method call inside a run.
struct CellContext {
    Index iteration = 0;
    Index subsample = 0;
    Index subset = 0;
    std::uint64_t seed = 0; // independent stream for randomized selectors
};

/// A base variable selector: restricted dataset in, original covariate
/// indices out.
using Selector = std::function<IndexList(const Dataset&, const CellContext&)>;

struct LassoSpec {
    Index q = 1;
    lasso::CountOptions options{};
};

struct CmimSpec {
    Index q = 1;
    Index horizon = cmim::unbounded;
    int bins = 2;
};

using BaseSelector = std::variant<LassoSpec, CmimSpec>;

inline Index target_count(const BaseSelector& b) {
    return std::visit([](const auto& s) { return s.q; }, b);
}

inline std::string describe(const BaseSelector& b) {
    if (const auto* l = std::get_if<LassoSpec>(&b))
        return "lasso(q=" + std::to_string(l->q) + ")";
    const auto& c = std::get<CmimSpec>(b);
    return "cmim(q=" + std::to_string(c.q) + ",k=" +
           (c.horizon == cmim::unbounded ? std::string("inf") : std::to_string(c.horizon)) +
           ",bins=" + std::to_string(c.bins) + ")";
}

/// Lasso selects the support at the largest lambda giving exactly q
/// nonzero coefficients. CMIM takes min(q, D') covariates of the D' it sees.
inline Selector make_selector(const BaseSelector& b) {
    if (const auto* l = std::get_if<LassoSpec>(&b)) {
        return [spec = *l](const Dataset& ds, const CellContext&) {
            return lasso::lambda_for_count(ds, spec.q, spec.options).support;
        };
    }
    const auto c = std::get<CmimSpec>(b);
    if (c.q < 1 || c.horizon < 1 || c.bins < 2)
        throw std::invalid_argument("invalid CMIM parameters");
    return [c](const Dataset& ds, const CellContext&) {
        return cmim::cmim_select(ds, std::min(c.q, ds.d()), c.horizon, c.bins);
    };
}

} // namespace sfs
