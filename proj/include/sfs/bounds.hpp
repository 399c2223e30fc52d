#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

// Error bounds for extended stability selection with L disjoint subsamples
// per iteration. theta is the base selection probability below which a
// covariate counts as uninformative, tau the frequency threshold. Each
// bound minimizes a Chernoff-type term over an integer interval of the
// auxiliary parameter l0; the minimization is done by plain enumeration.

namespace sfs::bounds {

/// KL divergence between Bernoulli(p) and Bernoulli(q), natural log,
/// with 0 log 0 = 0.
inline double kl_bernoulli(double p, double q) {
    if (!(q > 0.0 && q < 1.0))
        throw std::domain_error("kl_bernoulli: q must lie in (0, 1)");
    if (!(p >= 0.0 && p <= 1.0))
        throw std::domain_error("kl_bernoulli: p must lie in [0, 1]");
    double v = 0.0;
    if (p > 0.0)
        v += p * std::log(p / q);
    if (p < 1.0)
        v += (1.0 - p) * std::log((1.0 - p) / (1.0 - q));
    return std::max(v, 0.0);
}

struct BoundResult {
    double value = std::numeric_limits<double>::infinity();
    long l0 = 0;          // minimizing l0
    bool vacuous = false; // value > 1 (still reported, never clamped)
};

/// Integer interval {lo..hi}; empty when lo > hi.
struct L0Range {
    long lo = 0;
    long hi = -1;
    bool empty() const noexcept { return lo > hi; }
};

namespace detail {

// Products within 1e-9 of an integer are taken as that integer (0.7 * 10 must ceil to 7).
inline long ceil_snap(double x) {
    const double r = std::round(x);
    return static_cast<long>(std::abs(x - r) < 1e-9 ? r : std::ceil(x));
}
inline long floor_snap(double x) {
    const double r = std::round(x);
    return static_cast<long>(std::abs(x - r) < 1e-9 ? r : std::floor(x));
}

inline void check_common(long L, double tau, double theta) {
    if (L < 2)
        throw std::invalid_argument("L must be at least 2");
    if (!(tau > 0.0 && tau < 1.0))
        throw std::invalid_argument("tau must lie in (0, 1)");
    if (!(theta > 0.0 && theta < 1.0))
        throw std::invalid_argument("theta must lie in (0, 1)");
}

/// exp(log(ratio) - L * D(l0/L, theta)), or +inf when the ratio's
/// denominator is not positive.
inline double chernoff_term(double numer, double denom, long L, long l0, double theta) {
    if (!(denom > 0.0))
        return std::numeric_limits<double>::infinity();
    const double Ld = static_cast<double>(L);
    return std::exp(std::log(numer / denom) - Ld * kl_bernoulli(static_cast<double>(l0) / Ld, theta));
}

} // namespace detail

// ------------------------------------------------------------- l0 ranges

inline L0Range fp_rate_range(long L, double tau, double theta) {
    return {detail::ceil_snap(L * theta), detail::ceil_snap(L * tau)};
}
inline L0Range fp_vs_base_range(long L, double tau, double theta) {
    return {detail::ceil_snap(L * theta) + 1, detail::ceil_snap(L * tau)};
}
inline L0Range fn_rate_range(long L, double tau, double theta) {
    return {detail::floor_snap(L * tau), detail::floor_snap(L * theta)};
}
inline L0Range fn_vs_base_range(long L, double tau, double theta) {
    return {detail::floor_snap(L * tau), detail::floor_snap(L * theta) - 1};
}

// ------------------------------------------------------------ per-l0 terms

/// ((L - l0 + 1) / (tau L - l0 + 1)) exp(-L D(l0/L, theta))
inline double fp_rate_term(long L, double tau, double theta, long l0) {
    return detail::chernoff_term(static_cast<double>(L - l0 + 1), tau * static_cast<double>(L) - static_cast<double>(l0) + 1.0,
                                 L, l0, theta);
}
/// fp_rate_term / theta
inline double fp_vs_base_term(long L, double tau, double theta, long l0) {
    return fp_rate_term(L, tau, theta, l0) / theta;
}
/// ((l0 + 1) / (l0 - tau L + 1)) exp(-L D(l0/L, theta))
inline double fn_rate_term(long L, double tau, double theta, long l0) {
    return detail::chernoff_term(static_cast<double>(l0 + 1), static_cast<double>(l0) - tau * static_cast<double>(L) + 1.0,
                                 L, l0, theta);
}
/// fn_rate_term / (1 - theta)
inline double fn_vs_base_term(long L, double tau, double theta, long l0) {
    return fn_rate_term(L, tau, theta, l0) / (1.0 - theta);
}

namespace detail {

template <class Term>
BoundResult minimize(L0Range r, Term term, const char* what) {
    BoundResult best;
    bool any = false;
    for (long l0 = r.lo; l0 <= r.hi; ++l0) {
        const double v = term(l0);
        if (!std::isfinite(v))
            continue; // non-positive denominator
        if (!any || v < best.value) {
            best.value = v;
            best.l0 = l0;
            any = true;
        }
    }
    if (!any)
        throw std::domain_error(std::string(what) + ": no admissible l0 in {" + std::to_string(r.lo) + ".." +
                                std::to_string(r.hi) + "}");
    best.vacuous = best.value > 1.0;
    return best;
}

} // namespace detail

// ------------------------------------------------------------ the bounds

/// E|S ∩ A| / |A| for theta < tau.
inline BoundResult fp_rate_bound(long L, double tau, double theta) {
    detail::check_common(L, tau, theta);
    if (!(theta < tau))
        throw std::invalid_argument("false-positive bounds need theta < tau");
    return detail::minimize(fp_rate_range(L, tau, theta),
                            [&](long l0) { return fp_rate_term(L, tau, theta, l0); }, "fp_rate_bound");
}

/// E|S ∩ A| / E|S_base ∩ A| for theta < tau.
inline BoundResult fp_vs_base_bound(long L, double tau, double theta) {
    detail::check_common(L, tau, theta);
    if (!(theta < tau))
        throw std::invalid_argument("false-positive bounds need theta < tau");
    return detail::minimize(fp_vs_base_range(L, tau, theta),
                            [&](long l0) { return fp_vs_base_term(L, tau, theta, l0); }, "fp_vs_base_bound");
}

/// E|S^c ∩ A^c| / |A^c| for tau < theta.
inline BoundResult fn_rate_bound(long L, double tau, double theta) {
    detail::check_common(L, tau, theta);
    if (!(tau < theta))
        throw std::invalid_argument("false-negative bounds need tau < theta");
    return detail::minimize(fn_rate_range(L, tau, theta),
                            [&](long l0) { return fn_rate_term(L, tau, theta, l0); }, "fn_rate_bound");
}

/// E|S^c ∩ A^c| / E|S_base^c ∩ A^c| for tau < theta.
inline BoundResult fn_vs_base_bound(long L, double tau, double theta) {
    detail::check_common(L, tau, theta);
    if (!(tau < theta))
        throw std::invalid_argument("false-negative bounds need tau < theta");
    return detail::minimize(fn_vs_base_range(L, tau, theta),
                            [&](long l0) { return fn_vs_base_term(L, tau, theta, l0); }, "fn_vs_base_bound");
}

/// Bound on the expected number of selected noise covariates when all noise
/// covariates share the same base selection probability and the base method
/// selects q of D covariates on average: n_noise times the false-positive
/// rate bound at theta = q / D.
inline BoundResult expected_fp_bound(long L, double tau, double q, long D, long n_noise) {
    if (D < 1 || n_noise < 0 || !(q > 0.0) || q >= static_cast<double>(D))
        throw std::invalid_argument("expected_fp_bound needs 0 < q < D and n_noise >= 0");
    const double theta = q / static_cast<double>(D);
    if (!(tau > theta))
        throw std::invalid_argument("expected_fp_bound needs tau > q/D");
    BoundResult r = fp_rate_bound(L, tau, theta);
    r.value *= static_cast<double>(n_noise);
    r.vacuous = r.value > 1.0;
    return r;
}

/// The l0 = tau L special case: n_noise (L(1-tau)+1) exp(-L D(tau, q/D)).
/// Requires tau L to be an integer.
inline double expected_fp_at_integer_threshold(long L, double tau, double q, long D, long n_noise) {
    const double theta = q / static_cast<double>(D);
    if (!(tau > theta) || !(tau < 1.0))
        throw std::invalid_argument("expected_fp_at_integer_threshold needs q/D < tau < 1");
    const double tl = tau * static_cast<double>(L);
    if (std::abs(tl - std::round(tl)) > 1e-9)
        throw std::invalid_argument("expected_fp_at_integer_threshold needs tau L to be an integer");
    const double Ld = static_cast<double>(L);
    return static_cast<double>(n_noise) *
           std::exp(std::log(Ld * (1.0 - tau) + 1.0) - Ld * kl_bernoulli(tau, theta));
}

inline constexpr double tau_grid_step = 1e-4;

/// Smallest tau on the grid q/D + j * 1e-4 (j >= 1, tau < 1) whose
/// expected_fp_bound is at most target_efp; nullopt when none qualifies.
inline std::optional<double> tau_min(long L, double q, long D, long n_noise, double target_efp) {
    if (!(target_efp > 0.0))
        throw std::invalid_argument("target_efp must be positive");
    if (D < 1 || !(q > 0.0) || q >= static_cast<double>(D))
        throw std::invalid_argument("tau_min needs 0 < q < D");
    const double theta = q / static_cast<double>(D);
    for (std::int64_t j = 1;; ++j) {
        const double tau = theta + static_cast<double>(j) * tau_grid_step;
        if (!(tau < 1.0))
            return std::nullopt;
        if (expected_fp_bound(L, tau, q, D, n_noise).value <= target_efp)
            return tau;
    }
}

} // namespace sfs::bounds
