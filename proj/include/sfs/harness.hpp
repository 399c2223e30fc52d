#pragma once

#include "bounds.hpp"
#include "dataset.hpp"
#include "engine.hpp"
#include "lasso.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "selector.hpp"
#include "synth.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace sfs::harness {

struct PlainLasso {};

/// Extended stability selection with L subsamples and V covariate subsets.
struct Sfs {
    Index L = 2;
    Index V = 1;
    Index T = 50;
};

using Method = std::variant<PlainLasso, Sfs>;

enum class BaseKind { Lasso, Cmim };

/// Base selector minus its target count, which the q sweep supplies.
struct BaseParams {
    BaseKind kind = BaseKind::Lasso;
    Index horizon = cmim::unbounded;
    int bins = 2;
    lasso::CountOptions lasso{};

    BaseSelector with_count(Index q) const {
        if (kind == BaseKind::Lasso)
            return LassoSpec{q, lasso};
        return CmimSpec{q, horizon, bins};
    }
};

struct FixedTau {
    double tau = 0.6;
};
/// Smallest tau whose false-positive bound is at most target_efp.
struct FromBound {
    double target_efp = 1.0;
};
using TauPolicy = std::variant<FixedTau, FromBound>;

/// Overrides the base selector, e.g. with an oracle that knows the support.
using SelectorFactory = std::function<Selector(Index q, const GroundTruth&)>;

struct ExperimentSpec {
    synth::DesignSpec design{};
    Method method = Sfs{};
    BaseParams base{};
    std::vector<Index> q_sweep{};
    Index k = 20;
    Index repetitions = 10;
    TauPolicy tau_policy = FromBound{};
    std::uint64_t seed = 0;
    Index parallelism = 1;
    SelectorFactory selector_factory{};

    void validate() const {
        design.validate();
        if (k < 1 || k > design.d)
            throw std::invalid_argument("precision cutoff k must lie in [1, D]");
        if (q_sweep.empty())
            throw std::invalid_argument("q sweep is empty");
        for (Index q : q_sweep)
            if (q < 1)
                throw std::invalid_argument("q values must be at least 1");
        if (repetitions < 1)
            throw std::invalid_argument("repetitions must be at least 1");
    }
};

inline std::vector<Index> default_q_sweep() {
    std::vector<Index> q(100);
    for (Index i = 0; i < 100; ++i)
        q[i] = i + 1;
    return q;
}

inline std::string method_label(const Method& m) {
    if (std::holds_alternative<PlainLasso>(m))
        return "lasso";
    const auto& s = std::get<Sfs>(m);
    return "sfs(" + std::to_string(s.L) + "," + std::to_string(s.V) + ")";
}

struct CellResult {
    Index q = 0;
    Index repetition = 0;
    bool skipped = false;
    double tau = 0.0;
    Index precision = 0; // informative covariates among the top k
    double precision_ratio = 0.0;
    Index fp = 0;
    Index tp = 0;
    Index selected = 0;
};

struct MetricSummary {
    double mean = 0.0;
    double se = 0.0;
    Index n = 0;
};

struct QSummary {
    Index q = 0;
    Index skipped = 0;
    MetricSummary precision, fp, tp, selected;
};

struct ExperimentResult {
    std::string protocol; // "precision" or "fptp"
    std::string method;
    Index L = 1, V = 1;
    std::string design;
    std::vector<CellResult> cells; // ordered by (repetition, q)
    std::vector<QSummary> summary; // ordered as the q sweep

    const QSummary& at(Index q) const {
        for (const auto& s : summary)
            if (s.q == q)
                return s;
        throw std::out_of_range("q not in sweep");
    }
};

inline MetricSummary summarize(const std::vector<double>& v) {
    MetricSummary s;
    s.n = v.size();
    if (v.empty())
        return s;
    double sum = 0.0;
    for (double x : v)
        sum += x;
    s.mean = sum / static_cast<double>(v.size());
    if (v.size() > 1) {
        double ss = 0.0;
        for (double x : v)
            ss += (x - s.mean) * (x - s.mean);
        s.se = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
    }
    return s;
}

/// Two-sample standard error of a difference of means.
inline double pooled_se(const MetricSummary& a, const MetricSummary& b) {
    return std::sqrt(a.se * a.se + b.se * b.se);
}

namespace detail {

inline Index count_informative(const IndexList& picks, const GroundTruth& gt) {
    Index c = 0;
    for (Index d : picks)
        if (gt.is_informative(d))
            ++c;
    return c;
}

/// Top k by |beta|, ties to the lowest index, zero coefficients excluded.
inline IndexList top_by_magnitude(const Eigen::VectorXd& beta, Index k) {
    IndexList idx;
    for (Eigen::Index j = 0; j < beta.size(); ++j)
        if (beta[j] != 0.0)
            idx.push_back(static_cast<Index>(j));
    std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) {
        return std::abs(beta[static_cast<Eigen::Index>(a)]) > std::abs(beta[static_cast<Eigen::Index>(b)]);
    });
    if (idx.size() > k)
        idx.resize(k);
    return idx;
}

/// Top k by selection frequency, never-selected covariates excluded.
inline IndexList top_by_frequency(const FrequencyTable& t, Index k) {
    IndexList idx = rank(t, k);
    std::erase_if(idx, [&](Index d) { return t.counts[d] == 0; });
    return idx;
}

inline EngineConfig engine_config(const ExperimentSpec& spec, const Sfs& m, Index q, const GroundTruth& gt, Index rep,
                                  double tau) {
    EngineConfig cfg;
    cfg.T = m.T;
    cfg.L = m.L;
    cfg.V = m.V;
    cfg.tau = tau;
    if (spec.selector_factory) {
        cfg.selector = spec.selector_factory(q, gt);
        cfg.selector_label = "custom";
    } else {
        const BaseSelector b = spec.base.with_count(q);
        cfg.selector = make_selector(b);
        cfg.selector_label = describe(b);
    }
    cfg.seed = derive_seed(spec.seed, {stream::engine, rep, q});
    cfg.parallelism = 1;
    cfg.audit = false;
    return cfg;
}

template <class CellFn>
ExperimentResult run_protocol(const ExperimentSpec& spec, const char* protocol, CellFn cell_fn) {
    spec.validate();
    ExperimentResult res;
    res.protocol = protocol;
    res.method = method_label(spec.method);
    res.design = std::string(synth::to_string(spec.design.kind));
    if (const auto* s = std::get_if<Sfs>(&spec.method)) {
        res.L = s->L;
        res.V = s->V;
    }

    synth::DesignSampler sampler(spec.design);
    const Index nq = spec.q_sweep.size();
    res.cells.resize(spec.repetitions * nq);
    for (Index rep = 0; rep < spec.repetitions; ++rep) {
        const auto [ds, gt] = sampler.draw(derive_seed(spec.design.seed, {rep}));
        parallel_for(nq, spec.parallelism, [&, &ds = ds, &gt = gt](std::size_t qi, std::size_t) {
            CellResult c = cell_fn(ds, gt, spec.q_sweep[qi], rep);
            c.q = spec.q_sweep[qi];
            c.repetition = rep;
            res.cells[rep * nq + qi] = c;
        });
    }

    for (Index qi = 0; qi < nq; ++qi) {
        QSummary s;
        s.q = spec.q_sweep[qi];
        std::vector<double> prec, fp, tp, sel;
        for (Index rep = 0; rep < spec.repetitions; ++rep) {
            const auto& c = res.cells[rep * nq + qi];
            if (c.skipped) {
                ++s.skipped;
                continue;
            }
            prec.push_back(static_cast<double>(c.precision));
            fp.push_back(static_cast<double>(c.fp));
            tp.push_back(static_cast<double>(c.tp));
            sel.push_back(static_cast<double>(c.selected));
        }
        s.precision = summarize(prec);
        s.fp = summarize(fp);
        s.tp = summarize(tp);
        s.selected = summarize(sel);
        res.summary.push_back(s);
    }
    return res;
}

} // namespace detail

/// Informative covariates among the top k, ranked by selection frequency
/// (or by |beta| at lambda_q for plain Lasso), for every q of the sweep.
inline ExperimentResult run_precision(const ExperimentSpec& spec) {
    return detail::run_protocol(spec, "precision", [&](const Dataset& ds, const GroundTruth& gt, Index q, Index rep) {
        CellResult c;
        IndexList top;
        if (std::holds_alternative<PlainLasso>(spec.method)) {
            const auto fit = lasso::lambda_for_count(ds, q, spec.base.lasso);
            top = detail::top_by_magnitude(fit.fit.beta, spec.k);
            c.selected = fit.support.size();
        } else {
            const auto& m = std::get<Sfs>(spec.method);
            const double tau = std::holds_alternative<FixedTau>(spec.tau_policy) ? std::get<FixedTau>(spec.tau_policy).tau
                                                                                 : 0.5;
            const auto r = run(ds, detail::engine_config(spec, m, q, gt, rep, tau));
            top = detail::top_by_frequency(r.table, spec.k);
            c.selected = r.selected.size();
            c.tau = tau;
        }
        c.precision = detail::count_informative(top, gt);
        const Index denom = std::min(spec.k, gt.informative.size());
        c.precision_ratio = denom ? static_cast<double>(c.precision) / static_cast<double>(denom) : 0.0;
        return c;
    });
}

/// False and true positives of the thresholded selection. With FromBound the
/// threshold is tau_min for (L, q, D, D - |informative|); q values where no
/// threshold certifies the target are skipped.
inline ExperimentResult run_fp_tp(const ExperimentSpec& spec) {
    if (std::holds_alternative<PlainLasso>(spec.method))
        throw std::invalid_argument("the FP/TP protocol needs a stability selection method");
    const auto& m = std::get<Sfs>(spec.method);
    return detail::run_protocol(spec, "fptp", [&](const Dataset& ds, const GroundTruth& gt, Index q, Index rep) {
        CellResult c;
        double tau = 0.0;
        if (const auto* f = std::get_if<FixedTau>(&spec.tau_policy)) {
            tau = f->tau;
        } else {
            const auto n_noise = static_cast<long>(ds.d() - gt.informative.size());
            const auto t = bounds::tau_min(static_cast<long>(m.L), static_cast<double>(q), static_cast<long>(ds.d()), n_noise,
                                           std::get<FromBound>(spec.tau_policy).target_efp);
            if (!t) {
                c.skipped = true;
                return c;
            }
            tau = *t;
        }
        const auto r = run(ds, detail::engine_config(spec, m, q, gt, rep, tau));
        c.tau = tau;
        c.selected = r.selected.size();
        c.tp = detail::count_informative(r.selected, gt);
        c.fp = c.selected - c.tp;
        return c;
    });
}

// ---------------------------------------------------------------- output

inline void write_long_csv_header(std::ostream& out) { out << "design,method,L,V,q,repetition,metric,value\n"; }

inline void write_long_csv(std::ostream& out, const ExperimentResult& r) {
    for (const auto& c : r.cells) {
        auto row = [&](const char* metric, double v) {
            out << r.design << ',' << r.method << ',' << r.L << ',' << r.V << ',' << c.q << ',' << c.repetition << ','
                << metric << ',' << sfs::detail::format_double(v) << '\n';
        };
        if (c.skipped) {
            row("skipped", 1);
            continue;
        }
        if (r.protocol == "precision") {
            row("precision", static_cast<double>(c.precision));
        } else {
            row("tau", c.tau);
            row("fp", static_cast<double>(c.fp));
            row("tp", static_cast<double>(c.tp));
        }
        row("selected", static_cast<double>(c.selected));
    }
}

inline void write_aggregate_csv_header(std::ostream& out) { out << "design,method,L,V,q,metric,mean,se,n\n"; }

inline void write_aggregate_csv(std::ostream& out, const ExperimentResult& r) {
    for (const auto& s : r.summary) {
        auto row = [&](const char* metric, const MetricSummary& m) {
            out << r.design << ',' << r.method << ',' << r.L << ',' << r.V << ',' << s.q << ',' << metric << ','
                << sfs::detail::format_double(m.mean) << ',' << sfs::detail::format_double(m.se) << ',' << m.n << '\n';
        };
        if (r.protocol == "precision") {
            row("precision", s.precision);
        } else {
            row("fp", s.fp);
            row("tp", s.tp);
        }
        row("selected", s.selected);
    }
}

} // namespace sfs::harness
