#pragma once

#include "dataset.hpp"
#include "parallel.hpp"
#include "rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

// Monte-Carlo study of argmax selection under additive score noise: each of
// D covariates has a true score Q_d and only Q_d + eps_d is observed. The
// error event is that the largest observed score belongs to a covariate
// whose true score is at most theta.

namespace sfs::scores {

/// Q = scale * Bernoulli(p).
struct ScaledBernoulli {
    double scale = 2.0;
    double p = 0.1;
};

/// Q ~ U[lo, hi].
struct UniformScore {
    double lo = 0.0;
    double hi = 1.0;
};

using ScoreLaw = std::variant<ScaledBernoulli, UniformScore>;

struct NoiseLaw {
    enum class Family { Gaussian, Cauchy, StudentT } family = Family::Gaussian;
    double df = 3.0;
    double scale = 1.0;

    std::string name() const {
        switch (family) {
        case Family::Gaussian: return "gaussian";
        case Family::Cauchy: return "cauchy";
        case Family::StudentT: {
            auto s = std::to_string(df);
            s.erase(s.find_last_not_of('0') + 1);
            if (!s.empty() && s.back() == '.')
                s.pop_back();
            return "t" + s;
        }
        }
        return "?";
    }
};

/// "gaussian", "cauchy", or "t<df>" such as "t3".
inline NoiseLaw parse_noise(std::string_view s) {
    if (s == "gaussian" || s == "normal")
        return {NoiseLaw::Family::Gaussian};
    if (s == "cauchy")
        return {NoiseLaw::Family::Cauchy};
    if (s.size() > 1 && s.front() == 't') {
        const double df = std::stod(std::string(s.substr(1)));
        if (!(df > 0.0))
            throw std::invalid_argument("Student-t degrees of freedom must be positive");
        return {NoiseLaw::Family::StudentT, df};
    }
    throw std::invalid_argument("unknown noise law '" + std::string(s) + "'");
}

inline std::vector<NoiseLaw> standard_noise_laws() {
    return {{NoiseLaw::Family::Gaussian}, {NoiseLaw::Family::Cauchy}, {NoiseLaw::Family::StudentT, 3.0},
            {NoiseLaw::Family::StudentT, 5.0}, {NoiseLaw::Family::StudentT, 10.0}};
}

inline std::vector<Index> default_dims() {
    return {1, 2, 5, 10, 20, 50, 100, 200, 500, 1000, 2000, 5000, 10000};
}

struct ScoreModelConfig {
    ScoreLaw score_law = ScaledBernoulli{};
    /// Covariates with true score <= theta are uninformative.
    double theta = 0.0;
    NoiseLaw noise{};
    std::vector<Index> dims = default_dims();
    Index trials = 10000;
    std::uint64_t seed = 0;
    Index threads = 1;

    void validate() const {
        if (trials < 1)
            throw std::invalid_argument("trials must be at least 1");
        if (dims.empty())
            throw std::invalid_argument("dims must not be empty");
        for (Index d : dims)
            if (d < 1)
                throw std::invalid_argument("every dimension must be at least 1");
        if (!(noise.scale >= 0.0))
            throw std::invalid_argument("noise scale must be non-negative");
    }
};

struct ErrorRow {
    Index d = 0;
    Index trials = 0;
    Index errors = 0;
    double frequency = 0.0;
    /// Mean fraction of uninformative covariates among the D drawn: the
    /// error rate of picking one covariate blindly.
    double blind_rate = 0.0;

    double std_error() const {
        return std::sqrt(std::max(frequency * (1.0 - frequency), 0.0) / static_cast<double>(trials));
    }
};

namespace detail {

class NoiseSampler {
public:
    explicit NoiseSampler(const NoiseLaw& law) : law_(law), t_(law.df) {}
    double operator()(Rng& rng) {
        switch (law_.family) {
        case NoiseLaw::Family::Gaussian: return law_.scale * normal_(rng);
        case NoiseLaw::Family::Cauchy: return law_.scale * std::tan(std::numbers::pi * (unit_(rng) - 0.5));
        case NoiseLaw::Family::StudentT: return law_.scale * t_(rng);
        }
        return 0.0;
    }

private:
    NoiseLaw law_;
    std::normal_distribution<double> normal_;
    std::uniform_real_distribution<double> unit_;
    std::student_t_distribution<double> t_;
};

inline double draw_score(const ScoreLaw& law, Rng& rng) {
    std::uniform_real_distribution<double> unit;
    if (const auto* b = std::get_if<ScaledBernoulli>(&law))
        return unit(rng) < b->p ? b->scale : 0.0;
    const auto& u = std::get<UniformScore>(law);
    return u.lo + (u.hi - u.lo) * unit(rng);
}

inline constexpr Index trials_per_block = 250;

} // namespace detail

/// Estimated probability that the largest noisy score is uninformative, for
/// every D in cfg.dims. Trials are split into fixed blocks with their own
/// streams, so the table is identical for any thread count.
inline std::vector<ErrorRow> error_frequency(const ScoreModelConfig& cfg) {
    cfg.validate();
    const Index blocks = (cfg.trials + detail::trials_per_block - 1) / detail::trials_per_block;
    const Index jobs = cfg.dims.size() * blocks;
    std::vector<Index> errors(jobs, 0);
    std::vector<double> blind(jobs, 0.0);

    parallel_for(jobs, cfg.threads, [&](std::size_t job, std::size_t) {
        const Index di = job / blocks;
        const Index b = job % blocks;
        const Index d = cfg.dims[di];
        const Index first = b * detail::trials_per_block;
        const Index last = std::min(cfg.trials, first + detail::trials_per_block);
        Rng rng = make_rng(cfg.seed, {stream::score, d, b});
        detail::NoiseSampler noise(cfg.noise);
        Index err = 0;
        double blind_sum = 0.0;
        for (Index t = first; t < last; ++t) {
            double best = -std::numeric_limits<double>::infinity();
            double best_true = 0.0;
            Index uninformative = 0;
            for (Index k = 0; k < d; ++k) {
                const double q = detail::draw_score(cfg.score_law, rng);
                const double observed = q + noise(rng);
                if (q <= cfg.theta)
                    ++uninformative;
                if (observed > best) {
                    best = observed;
                    best_true = q;
                }
            }
            if (best_true <= cfg.theta)
                ++err;
            blind_sum += static_cast<double>(uninformative) / static_cast<double>(d);
        }
        errors[job] = err;
        blind[job] = blind_sum;
    });

    std::vector<ErrorRow> rows;
    rows.reserve(cfg.dims.size());
    for (Index di = 0; di < cfg.dims.size(); ++di) {
        ErrorRow r;
        r.d = cfg.dims[di];
        r.trials = cfg.trials;
        double blind_sum = 0.0;
        for (Index b = 0; b < blocks; ++b) {
            r.errors += errors[di * blocks + b];
            blind_sum += blind[di * blocks + b];
        }
        r.frequency = static_cast<double>(r.errors) / static_cast<double>(cfg.trials);
        r.blind_rate = blind_sum / static_cast<double>(cfg.trials);
        rows.push_back(r);
    }
    return rows;
}

struct OptimalSize {
    Index d = 0;
    double frequency = 0.0;
};

/// D of the sweep with the minimal error frequency; ties go to the larger D.
inline OptimalSize optimal_subset_size(const std::vector<ErrorRow>& rows) {
    if (rows.empty())
        throw std::invalid_argument("empty error table");
    const ErrorRow* best = &rows.front();
    for (const auto& r : rows)
        if (r.frequency < best->frequency || (r.frequency == best->frequency && r.d > best->d))
            best = &r;
    return {best->d, best->frequency};
}

inline OptimalSize optimal_subset_size(const ScoreModelConfig& cfg) { return optimal_subset_size(error_frequency(cfg)); }

} // namespace sfs::scores
