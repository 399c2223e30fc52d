#pragma once

#include "dataset.hpp"
#include "rng.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace sfs::synth {

enum class DesignKind { FourBlocks, Toeplitz, ToeplitzGrouped, TenFactors, CorrelatedInformative };

inline std::string_view to_string(DesignKind k) {
    switch (k) {
    case DesignKind::FourBlocks: return "four-blocks";
    case DesignKind::Toeplitz: return "toeplitz";
    case DesignKind::ToeplitzGrouped: return "toeplitz-grouped";
    case DesignKind::TenFactors: return "ten-factors";
    case DesignKind::CorrelatedInformative: return "correlated-informative";
    }
    return "?";
}

inline DesignKind parse_design(std::string_view s) {
    for (auto k : {DesignKind::FourBlocks, DesignKind::Toeplitz, DesignKind::ToeplitzGrouped, DesignKind::TenFactors,
                   DesignKind::CorrelatedInformative})
        if (to_string(k) == s)
            return k;
    throw std::invalid_argument("unknown design '" + std::string(s) + "'");
}

struct NoiseSpec {
    enum class Family { Gaussian, StudentT } family = Family::Gaussian;
    double df = 3.0;
};

struct DesignSpec {
    DesignKind kind = DesignKind::Toeplitz;
    Index n = 500;
    Index d = 1000;
    Index n_informative = 20;
    double snr = 2.0;
    NoiseSpec noise{};
    std::uint64_t seed = 0;
    /// Off-diagonal correlation among informative covariates for
    /// CorrelatedInformative. Zero gives an independent design.
    double informative_correlation = 0.9;

    void validate() const {
        if (n < 1 || d < 1)
            throw std::invalid_argument("design needs N >= 1 and D >= 1");
        if (n_informative > d)
            throw std::invalid_argument("n_informative exceeds D");
        if (!(snr > 0.0))
            throw std::invalid_argument("snr must be positive");
        if (noise.family == NoiseSpec::Family::StudentT && !(noise.df > 0.0))
            throw std::invalid_argument("Student-t degrees of freedom must be positive");
        if (kind == DesignKind::ToeplitzGrouped) {
            if (d < 520)
                throw std::invalid_argument("toeplitz-grouped needs D >= 520");
            if (n_informative != 20)
                throw std::invalid_argument("toeplitz-grouped uses exactly 20 informative covariates");
        }
    }
};

/// Covariance of the Gaussian designs, unit diagonal. `informative` is only
/// consulted for CorrelatedInformative.
inline Eigen::MatrixXd covariance(const DesignSpec& spec, std::span<const Index> informative = {}) {
    const auto d = static_cast<Eigen::Index>(spec.d);
    Eigen::MatrixXd s = Eigen::MatrixXd::Identity(d, d);
    switch (spec.kind) {
    case DesignKind::Toeplitz:
    case DesignKind::ToeplitzGrouped:
        for (Eigen::Index i = 0; i < d; ++i)
            for (Eigen::Index j = 0; j < d; ++j)
                s(i, j) = std::pow(0.99, static_cast<double>(std::abs(i - j)));
        break;
    case DesignKind::FourBlocks:
        for (Eigen::Index i = 0; i < d; ++i)
            for (Eigen::Index j = 0; j < d; ++j)
                if (i != j && i % 4 == j % 4)
                    s(i, j) = 0.8;
        break;
    case DesignKind::CorrelatedInformative:
        for (Index a : informative)
            for (Index b : informative)
                if (a != b)
                    s(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = spec.informative_correlation;
        break;
    case DesignKind::TenFactors:
        throw std::invalid_argument("ten-factors has no closed-form covariance here; use draw_design");
    }
    return s;
}

/// Smallest eigenvalue >= -rel_tol * largest.
inline bool is_psd(const Eigen::MatrixXd& s, double rel_tol = 1e-8) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    return ev.minCoeff() >= -rel_tol * std::max(ev.maxCoeff(), 0.0);
}

/// F with F F^T = S from the symmetric eigendecomposition. Eigenvalues in
/// [-1e-10 * max, 0) are clipped to zero; anything more negative is an
/// internal error.
inline Eigen::MatrixXd covariance_factor(const Eigen::MatrixXd& s) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("eigendecomposition of covariance failed");
    Eigen::VectorXd ev = es.eigenvalues();
    const double top = std::max(ev.maxCoeff(), 0.0);
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev[i] < -1e-8 * top)
            throw std::logic_error("covariance is not positive semidefinite");
        ev[i] = ev[i] < 1e-10 * top ? 0.0 : std::sqrt(ev[i]);
    }
    return es.eigenvectors() * ev.asDiagonal();
}

namespace detail {

inline Eigen::MatrixXd standard_normal(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    std::normal_distribution<double> nd;
    Eigen::MatrixXd z(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i)
            z(i, j) = nd(rng);
    return z;
}

inline double sample_variance(const Eigen::VectorXd& v) {
    if (v.size() < 2)
        return 0.0;
    const double mean = v.mean();
    return (v.array() - mean).square().sum() / static_cast<double>(v.size() - 1);
}

/// k distinct values from [lo, hi], uniformly.
inline IndexList sample_without_replacement(Index lo, Index hi, Index k, Rng& rng) {
    IndexList pool;
    for (Index i = lo; i <= hi; ++i)
        pool.push_back(i);
    for (Index i = 0; i < k; ++i) {
        std::uniform_int_distribution<Index> pick(i, pool.size() - 1);
        std::swap(pool[i], pool[pick(rng)]);
    }
    pool.resize(k);
    return pool;
}

inline IndexList draw_support(const DesignSpec& spec, Rng& rng) {
    IndexList support;
    if (spec.kind == DesignKind::ToeplitzGrouped) {
        // Five windows [100g-20, 100g+20] in 1-based covariate numbering.
        for (Index g = 1; g <= 5; ++g) {
            auto picks = sample_without_replacement(100 * g - 21, 100 * g + 19, 4, rng);
            support.insert(support.end(), picks.begin(), picks.end());
        }
    } else {
        support = sample_without_replacement(0, spec.d - 1, spec.n_informative, rng);
    }
    std::sort(support.begin(), support.end());
    return support;
}

inline Eigen::VectorXd draw_noise(const NoiseSpec& noise, Eigen::Index n, Rng& rng) {
    Eigen::VectorXd e(n);
    if (noise.family == NoiseSpec::Family::Gaussian) {
        std::normal_distribution<double> nd;
        for (Eigen::Index i = 0; i < n; ++i)
            e[i] = nd(rng);
    } else {
        std::student_t_distribution<double> td(noise.df);
        const double scale = noise.df > 2.0 ? std::sqrt((noise.df - 2.0) / noise.df) : 1.0;
        for (Eigen::Index i = 0; i < n; ++i)
            e[i] = td(rng) * scale;
    }
    return e;
}

} // namespace detail

/// Draws designs of one spec repeatedly, caching the covariance factor for
/// kinds whose covariance does not depend on the drawn support.
class DesignSampler {
public:
    explicit DesignSampler(DesignSpec spec) : spec_(std::move(spec)) { spec_.validate(); }

    const DesignSpec& spec() const noexcept { return spec_; }

    /// Draws with an explicit seed; spec().seed is ignored.
    std::pair<Dataset, GroundTruth> draw(std::uint64_t seed) {
        Rng rng = make_rng(seed, {stream::design});
        const auto n = static_cast<Eigen::Index>(spec_.n);
        const auto d = static_cast<Eigen::Index>(spec_.d);

        IndexList support = detail::draw_support(spec_, rng);
        Eigen::VectorXd beta = Eigen::VectorXd::Zero(d);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (Index j : support) {
            double b = 0.0;
            while (b == 0.0)
                b = unit(rng);
            beta[static_cast<Eigen::Index>(j)] = b;
        }

        Eigen::MatrixXd x;
        if (spec_.kind == DesignKind::TenFactors) {
            Eigen::MatrixXd loadings = detail::standard_normal(d, 10, rng);
            Eigen::MatrixXd factors = detail::standard_normal(n, 10, rng);
            x = factors * loadings.transpose() + detail::standard_normal(n, d, rng);
        } else {
            const Eigen::MatrixXd& f = factor(support);
            x = detail::standard_normal(n, d, rng) * f.transpose();
        }

        Eigen::VectorXd signal = x * beta;
        Eigen::VectorXd eps = detail::draw_noise(spec_.noise, n, rng);
        const double var_signal = detail::sample_variance(signal);
        const double var_eps = detail::sample_variance(eps);
        // Scale the drawn noise so the sample variance ratio is exactly snr.
        const double scale = var_eps > 0.0 ? std::sqrt(var_signal / (spec_.snr * var_eps))
                                           : std::sqrt(var_signal / spec_.snr);
        Eigen::VectorXd y = signal + scale * eps;

        return {Dataset(std::move(x), std::move(y)), GroundTruth::from_beta(std::move(beta))};
    }

private:
    const Eigen::MatrixXd& factor(const IndexList& support) {
        const bool support_dependent = spec_.kind == DesignKind::CorrelatedInformative;
        if (!cached_ || (support_dependent && support != cached_support_)) {
            cached_ = std::make_unique<Eigen::MatrixXd>(covariance_factor(covariance(spec_, support)));
            cached_support_ = support;
        }
        return *cached_;
    }

    DesignSpec spec_;
    std::unique_ptr<Eigen::MatrixXd> cached_;
    IndexList cached_support_;
};

/// One realization of the linear model Y = <X, beta> + eps for `spec`.
inline std::pair<Dataset, GroundTruth> draw_design(const DesignSpec& spec) {
    DesignSampler sampler(spec);
    return sampler.draw(spec.seed);
}

} // namespace sfs::synth
