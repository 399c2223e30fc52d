#pragma once

#include "dataset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace sfs::cmim {

/// Update horizon meaning "never freeze the scores".
inline constexpr Index unbounded = std::numeric_limits<Index>::max();

/// Column of category codes 0..levels-1.
struct Coded {
    std::vector<int> codes;
    int levels = 0;
};

/// Columns with at most `bins` distinct values keep one code per value.
/// Otherwise the column is cut into `bins` equal-frequency bins at the
/// order statistics floor(k N / bins); ties can merge bins.
inline Coded discretize(const Eigen::Ref<const Eigen::VectorXd>& v, int bins) {
    if (bins < 2)
        throw std::invalid_argument("need at least two bins");
    const auto n = static_cast<std::size_t>(v.size());
    std::vector<double> sorted(v.data(), v.data() + n);
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> distinct = sorted;
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

    std::vector<double> cuts;
    if (distinct.size() > static_cast<std::size_t>(bins)) {
        for (int k = 1; k < bins; ++k)
            cuts.push_back(sorted[static_cast<std::size_t>(k) * n / static_cast<std::size_t>(bins)]);
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    } else {
        cuts.assign(distinct.begin() + (distinct.empty() ? 0 : 1), distinct.end());
    }

    Coded out;
    out.codes.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        out.codes[i] = static_cast<int>(std::upper_bound(cuts.begin(), cuts.end(), v[static_cast<Eigen::Index>(i)]) -
                                        cuts.begin());
    out.levels = static_cast<int>(cuts.size()) + 1;
    return out;
}

/// Integer-valued responses are used as class labels; anything else is
/// split at the median.
inline Coded discretize_response(const Eigen::VectorXd& y) {
    const bool integral = (y.array() == y.array().round()).all();
    if (integral) {
        std::vector<double> distinct(y.data(), y.data() + y.size());
        std::sort(distinct.begin(), distinct.end());
        distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
        Coded out;
        out.levels = static_cast<int>(distinct.size());
        out.codes.resize(static_cast<std::size_t>(y.size()));
        for (Eigen::Index i = 0; i < y.size(); ++i)
            out.codes[static_cast<std::size_t>(i)] =
                static_cast<int>(std::lower_bound(distinct.begin(), distinct.end(), y[i]) - distinct.begin());
        return out;
    }
    return discretize(y, 2);
}

/// Plug-in mutual information (nats) between two coded columns.
inline double mutual_information(const Coded& x, const Coded& y) {
    const std::size_t n = x.codes.size();
    std::vector<double> joint(static_cast<std::size_t>(x.levels * y.levels), 0.0);
    std::vector<double> px(static_cast<std::size_t>(x.levels), 0.0), py(static_cast<std::size_t>(y.levels), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        joint[static_cast<std::size_t>(x.codes[i] * y.levels + y.codes[i])] += 1.0;
        px[static_cast<std::size_t>(x.codes[i])] += 1.0;
        py[static_cast<std::size_t>(y.codes[i])] += 1.0;
    }
    const double nn = static_cast<double>(n);
    double mi = 0.0;
    for (int a = 0; a < x.levels; ++a)
        for (int b = 0; b < y.levels; ++b) {
            const double nab = joint[static_cast<std::size_t>(a * y.levels + b)];
            if (nab > 0.0)
                mi += nab / nn * std::log(nab * nn / (px[static_cast<std::size_t>(a)] * py[static_cast<std::size_t>(b)]));
        }
    return std::max(mi, 0.0);
}

/// Plug-in I(X;Y|Z) = sum_z p(z) I(X;Y|Z=z) from the three-way table.
inline double conditional_mutual_information(const Coded& x, const Coded& y, const Coded& z) {
    const std::size_t n = x.codes.size();
    const int lx = x.levels, ly = y.levels, lz = z.levels;
    std::vector<double> nxyz(static_cast<std::size_t>(lx * ly * lz), 0.0);
    std::vector<double> nxz(static_cast<std::size_t>(lx * lz), 0.0), nyz(static_cast<std::size_t>(ly * lz), 0.0),
        nz(static_cast<std::size_t>(lz), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const int a = x.codes[i], b = y.codes[i], c = z.codes[i];
        nxyz[static_cast<std::size_t>((c * lx + a) * ly + b)] += 1.0;
        nxz[static_cast<std::size_t>(c * lx + a)] += 1.0;
        nyz[static_cast<std::size_t>(c * ly + b)] += 1.0;
        nz[static_cast<std::size_t>(c)] += 1.0;
    }
    double cmi = 0.0;
    for (int c = 0; c < lz; ++c)
        for (int a = 0; a < lx; ++a)
            for (int b = 0; b < ly; ++b) {
                const double k = nxyz[static_cast<std::size_t>((c * lx + a) * ly + b)];
                if (k > 0.0)
                    cmi += k / static_cast<double>(n) *
                           std::log(k * nz[static_cast<std::size_t>(c)] /
                                    (nxz[static_cast<std::size_t>(c * lx + a)] * nyz[static_cast<std::size_t>(c * ly + b)]));
            }
    return std::max(cmi, 0.0);
}

/// Plug-in entropy (nats).
inline double entropy(const Coded& x) {
    std::vector<double> counts(static_cast<std::size_t>(x.levels), 0.0);
    for (int c : x.codes)
        counts[static_cast<std::size_t>(c)] += 1.0;
    const double n = static_cast<double>(x.codes.size());
    double h = 0.0;
    for (double k : counts)
        if (k > 0.0)
            h -= k / n * std::log(k / n);
    return h;
}

/// Scores closer than this are treated as tied and resolved by lowest index.
inline constexpr double tie_tolerance = 1e-12;

/// Greedy conditional mutual information maximization. The first pick
/// maximizes I(X_d;Y); while at most `horizon` covariates are selected, the
/// next pick maximizes min_j I(X_d;Y|X_nu(j)) over the selected ones. After
/// that the scores are frozen and the rest is taken in descending score
/// order. Returns original covariate indices in selection order.
inline IndexList cmim_select(const Dataset& ds, Index q, Index horizon = unbounded, int bins = 2) {
    const Index d = ds.d();
    if (q < 1 || q > d)
        throw std::invalid_argument("CMIM target count q=" + std::to_string(q) + " outside [1, " + std::to_string(d) + "]");
    if (horizon < 1)
        throw std::invalid_argument("CMIM update horizon must be at least 1");

    std::vector<Coded> cols;
    cols.reserve(d);
    for (Index j = 0; j < d; ++j)
        cols.push_back(discretize(ds.x().col(static_cast<Eigen::Index>(j)), bins));
    const Coded y = discretize_response(ds.y());

    std::vector<double> score(d);
    for (Index j = 0; j < d; ++j)
        score[j] = mutual_information(cols[j], y);

    std::vector<bool> taken(d, false);
    IndexList order;
    order.reserve(q);

    auto argmax = [&] {
        Index best = d;
        for (Index j = 0; j < d; ++j)
            if (!taken[j] && (best == d || score[j] > score[best] + tie_tolerance))
                best = j;
        return best;
    };

    while (order.size() < q) {
        const Index pick = argmax();
        taken[pick] = true;
        order.push_back(pick);
        if (order.size() >= q)
            break;
        if (order.size() <= horizon) {
            const bool first_update = order.size() == 1;
            for (Index j = 0; j < d; ++j) {
                if (taken[j])
                    continue;
                const double c = conditional_mutual_information(cols[j], y, cols[pick]);
                score[j] = first_update ? c : std::min(score[j], c);
            }
        }
    }

    IndexList out;
    out.reserve(order.size());
    for (Index j : order)
        out.push_back(ds.origin(j));
    return out;
}

} // namespace sfs::cmim
