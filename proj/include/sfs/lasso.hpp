#pragma once

#include "dataset.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sfs::lasso {

struct Options {
    /// Stop once the KKT residual is at most kkt_tol * lambda_max.
    double kkt_tol = 1e-8;
    Index max_sweeps = 10000;
    /// After max_sweeps a fit within accept_tol * lambda_max is still
    /// returned; only a larger residual is reported as NonConvergence.
    double accept_tol = 1e-6;
    /// Record the objective after every coordinate sweep.
    bool trace = false;
};

/// Solution of  min_b ||y - X b||^2 + lambda ||b||_1  on the standardized
/// problem (columns centered with unit norm, y centered).
struct Fit {
    Eigen::VectorXd beta; // standardized scale, one entry per local column
    double lambda = 0.0;
    double objective = 0.0;
    double kkt_residual = 0.0;
    Index sweeps = 0;
    IndexList support; // original covariate indices with beta != 0, ascending
    std::vector<double> objective_trace;

    Index count() const noexcept { return support.size(); }
};

class NonConvergence : public std::runtime_error {
public:
    NonConvergence(Index sweeps, double residual)
        : std::runtime_error("lasso did not converge after " + std::to_string(sweeps) +
                             " sweeps (KKT residual " + std::to_string(residual) + ")"),
          residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

inline double soft_threshold(double z, double t) {
    if (z > t)
        return z - t;
    if (z < -t)
        return z + t;
    return 0.0;
}

/// Coordinate descent in covariance form: the gradient g = X^T (y - X b) is
/// maintained through lazily computed Gram columns, so a sweep over inactive
/// coordinates costs O(1) each. Consecutive calls to fit() warm-start from
/// the previous solution.
class Solver {
public:
    explicit Solver(const Dataset& ds, Options opt = {}) : opt_(opt), origins_(ds.origins()) {
        const auto n = ds.x().rows();
        const auto d = ds.x().cols();
        x_ = ds.x();
        norms_.resize(d);
        for (Eigen::Index j = 0; j < d; ++j) {
            auto col = x_.col(j);
            col.array() -= col.mean();
            const double nrm = col.norm();
            const double scale = std::max(1.0, ds.x().col(j).cwiseAbs().maxCoeff()) * static_cast<double>(n);
            if (nrm > 1e-12 * scale) {
                col /= nrm;
                norms_[j] = nrm;
            } else {
                col.setZero();
                norms_[j] = 0.0;
            }
        }
        y_ = ds.y().array() - ds.y().mean();
        yy_ = y_.squaredNorm();
        c_ = x_.transpose() * y_;
        lambda_max_ = 2.0 * c_.cwiseAbs().maxCoeff();
        beta_ = Eigen::VectorXd::Zero(d);
        g_ = c_;
        gram_slot_.assign(static_cast<std::size_t>(d), -1);
        in_active_.assign(static_cast<std::size_t>(d), false);
    }

    double lambda_max() const noexcept { return lambda_max_; }
    Index d() const noexcept { return static_cast<Index>(x_.cols()); }
    const Eigen::MatrixXd& design() const noexcept { return x_; }
    const Eigen::VectorXd& response() const noexcept { return y_; }
    /// Column norms after centering; zero marks a constant column.
    const Eigen::VectorXd& column_norms() const noexcept { return norms_; }

    Fit fit(double lambda) {
        if (!(lambda >= 0.0) || !std::isfinite(lambda))
            throw std::invalid_argument("lambda must be a finite non-negative number");
        const double half = 0.5 * lambda;
        const double tol = opt_.kkt_tol * std::max(lambda_max_, std::numeric_limits<double>::min());
        Fit out;
        out.lambda = lambda;
        Index sweeps = 0;

        auto record = [&] {
            if (opt_.trace)
                out.objective_trace.push_back(objective_from_residual(lambda));
        };

        while (true) {
            // Full sweep: every coordinate, gradient kept exact everywhere.
            for (Eigen::Index j = 0; j < beta_.size(); ++j) {
                if (norms_[j] == 0.0)
                    continue;
                const double nb = soft_threshold(g_[j] + beta_[j], half);
                if (nb != beta_[j])
                    update_full(j, nb - beta_[j]);
            }
            ++sweeps;
            record();
            if (kkt_residual(lambda) <= tol)
                break;

            // Active-set sweeps: gradient maintained on the active set only.
            while (sweeps < opt_.max_sweeps) {
                for (Eigen::Index j : active_) {
                    const double nb = soft_threshold(g_[j] + beta_[j], half);
                    if (nb != beta_[j])
                        update_active(j, nb - beta_[j]);
                }
                ++sweeps;
                record();
                if (active_kkt_residual(lambda) <= 0.5 * tol)
                    break;
                if (sweeps % 25 == 0 && face_step(lambda)) {
                    record();
                    if (active_kkt_residual(lambda) <= 0.5 * tol)
                        break;
                }
            }
            refresh_gradient();
            const double r = kkt_residual(lambda);
            if (r <= tol)
                break;
            if (sweeps >= opt_.max_sweeps) {
                if (r <= opt_.accept_tol * std::max(lambda_max_, std::numeric_limits<double>::min()))
                    break;
                throw NonConvergence(sweeps, r);
            }
        }

        out.beta = beta_;
        out.objective = objective(lambda);
        out.kkt_residual = kkt_residual(lambda);
        out.sweeps = sweeps;
        for (Eigen::Index j = 0; j < beta_.size(); ++j)
            if (beta_[j] != 0.0)
                out.support.push_back(origins_[static_cast<std::size_t>(j)]);
        std::sort(out.support.begin(), out.support.end());
        return out;
    }

    /// max_j of the subgradient optimality violation at the current iterate.
    double kkt_residual(double lambda) const {
        double r = 0.0;
        for (Eigen::Index j = 0; j < beta_.size(); ++j) {
            const double grad = 2.0 * g_[j];
            if (beta_[j] != 0.0)
                r = std::max(r, std::abs(grad - lambda * (beta_[j] > 0 ? 1.0 : -1.0)));
            else
                r = std::max(r, std::abs(grad) - lambda);
        }
        return r;
    }

    /// ||y - Xb||^2 + lambda ||b||_1 = y'y - b'c - b'g + lambda ||b||_1.
    double objective(double lambda) const {
        double bc = 0.0, bg = 0.0, l1 = 0.0;
        for (Eigen::Index j : active_) {
            bc += beta_[j] * c_[j];
            bg += beta_[j] * g_[j];
            l1 += std::abs(beta_[j]);
        }
        return yy_ - bc - bg + lambda * l1;
    }

    /// Same objective evaluated from the residual in extended precision, so
    /// that per-sweep decreases below double rounding remain visible.
    double objective_from_residual(double lambda) const {
        long double rss = 0.0L, l1 = 0.0L;
        for (Eigen::Index i = 0; i < x_.rows(); ++i) {
            long double r = y_[i];
            for (Eigen::Index j : active_)
                r -= static_cast<long double>(x_(i, j)) * beta_[j];
            rss += r * r;
        }
        for (Eigen::Index j : active_)
            l1 += std::abs(static_cast<long double>(beta_[j]));
        return static_cast<double>(rss + static_cast<long double>(lambda) * l1);
    }

private:
    const Eigen::VectorXd& gram(Eigen::Index j) {
        auto& slot = gram_slot_[static_cast<std::size_t>(j)];
        if (slot < 0) {
            slot = static_cast<int>(gram_cols_.size());
            gram_cols_.emplace_back(x_.transpose() * x_.col(j));
        }
        return gram_cols_[static_cast<std::size_t>(slot)];
    }

    void activate(Eigen::Index j) {
        if (!in_active_[static_cast<std::size_t>(j)]) {
            in_active_[static_cast<std::size_t>(j)] = true;
            active_.push_back(j);
        }
    }

    void update_full(Eigen::Index j, double delta) {
        activate(j);
        beta_[j] += delta;
        g_.noalias() -= delta * gram(j);
    }

    void update_active(Eigen::Index j, double delta) {
        beta_[j] += delta;
        const auto& gj = gram(j);
        for (Eigen::Index k : active_)
            g_[k] -= delta * gj[k];
    }

    /// On strongly correlated columns coordinate descent can crawl. With the
    /// signs s of the nonzero coefficients fixed, the objective on that face
    /// is b'Gb - 2 b'(c - (lambda/2) s). The step moves toward the face
    /// minimizer, or along a null direction of G when the face objective is
    /// unbounded, and stops at the first coefficient that reaches zero. It is
    /// kept only if the objective drops, so descent is preserved.
    bool face_step(double lambda) {
        std::vector<Eigen::Index> nz;
        for (Eigen::Index j : active_)
            if (beta_[j] != 0.0)
                nz.push_back(j);
        const auto m = static_cast<Eigen::Index>(nz.size());
        if (m == 0)
            return false;
        Eigen::MatrixXd g(m, m);
        Eigen::VectorXd r(m), b(m);
        for (Eigen::Index k = 0; k < m; ++k) {
            const Eigen::Index j = nz[static_cast<std::size_t>(k)];
            const auto& col = gram(j);
            for (Eigen::Index l = 0; l < m; ++l)
                g(l, k) = col[nz[static_cast<std::size_t>(l)]];
            b[k] = beta_[j];
            // g_ = c - G beta, so this is c - (lambda/2) s - G beta.
            r[k] = g_[j] - 0.5 * lambda * (beta_[j] > 0 ? 1.0 : -1.0);
        }
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g);
        if (eig.info() != Eigen::Success)
            return false;
        const Eigen::VectorXd& ev = eig.eigenvalues();
        const Eigen::MatrixXd& u = eig.eigenvectors();
        const double cutoff = 1e-10 * std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
        const Eigen::VectorXd proj = u.transpose() * r;
        Eigen::VectorXd range_part = Eigen::VectorXd::Zero(m), null_part = Eigen::VectorXd::Zero(m);
        for (Eigen::Index k = 0; k < m; ++k) {
            if (ev[k] > cutoff)
                range_part[k] = proj[k] / ev[k];
            else
                null_part[k] = proj[k];
        }
        Eigen::VectorXd dir;
        double t = 1.0;
        if (null_part.norm() > 1e-10 * std::max(1.0, r.norm())) {
            dir = u * null_part;
            t = std::numeric_limits<double>::infinity();
        } else {
            dir = u * range_part;
        }
        Eigen::Index blocking = -1;
        for (Eigen::Index k = 0; k < m; ++k) {
            if (b[k] * dir[k] < 0.0) {
                const double tk = -b[k] / dir[k];
                if (tk < t) {
                    t = tk;
                    blocking = k;
                }
            }
        }
        if (!(t > 0.0) || !std::isfinite(t))
            return false;

        const double before = objective_from_residual(lambda);
        const Eigen::VectorXd saved_beta = beta_, saved_g = g_;
        for (Eigen::Index k = 0; k < m; ++k) {
            const Eigen::Index j = nz[static_cast<std::size_t>(k)];
            double target = k == blocking ? 0.0 : b[k] + t * dir[k];
            if (target * b[k] < 0.0)
                target = 0.0;
            update_active(j, target - b[k]);
        }
        if (objective_from_residual(lambda) < before)
            return true;
        beta_ = saved_beta;
        g_ = saved_g;
        return false;
    }

    void refresh_gradient() {
        g_ = c_;
        for (Eigen::Index j : active_)
            if (beta_[j] != 0.0)
                g_.noalias() -= beta_[j] * gram(j);
    }

    double active_kkt_residual(double lambda) const {
        double r = 0.0;
        for (Eigen::Index j : active_) {
            const double grad = 2.0 * g_[j];
            if (beta_[j] != 0.0)
                r = std::max(r, std::abs(grad - lambda * (beta_[j] > 0 ? 1.0 : -1.0)));
            else
                r = std::max(r, std::abs(grad) - lambda);
        }
        return r;
    }

    Options opt_;
    IndexList origins_;
    Eigen::MatrixXd x_;
    Eigen::VectorXd norms_;
    Eigen::VectorXd y_;
    double yy_ = 0.0;
    Eigen::VectorXd c_;
    double lambda_max_ = 0.0;
    Eigen::VectorXd beta_;
    Eigen::VectorXd g_;
    std::vector<int> gram_slot_;
    std::vector<Eigen::VectorXd> gram_cols_;
    std::vector<Eigen::Index> active_;
    std::vector<bool> in_active_;
};

/// lambda_max = max_j |2 X_j^T y| on the standardized problem.
inline double lambda_max(const Dataset& ds) { return Solver(ds).lambda_max(); }

inline Fit lasso_fit(const Dataset& ds, double lambda, Options opt = {}) {
    Solver s(ds, opt);
    return s.fit(lambda);
}

struct CountOptions {
    Index grid_points = 400;
    double min_ratio = 1e-4;
    Index bisection_steps = 40;
    Options solver{};
};

struct CountResult {
    double lambda = 0.0;
    IndexList support;
    /// False when no lambda with exactly q nonzero coefficients was found; the
    /// result then carries the largest count below q that was seen.
    bool exact = false;
    Fit fit;
};

/// Largest lambda whose fit has exactly q nonzero coefficients: scan a
/// geometric grid from lambda_max down to min_ratio * lambda_max with warm
/// starts, then bisect between the last grid point with fewer than q and the
/// first with at least q.
inline CountResult lambda_for_count(const Dataset& ds, Index q, const CountOptions& opt = {}) {
    const Index cap = std::min(ds.n() > 0 ? ds.n() - 1 : 0, ds.d());
    if (q < 1 || q > cap)
        throw std::invalid_argument("target count q=" + std::to_string(q) + " outside [1, " + std::to_string(cap) + "]");
    if (opt.grid_points < 2)
        throw std::invalid_argument("lambda grid needs at least two points");

    Solver solver(ds, opt.solver);
    const double lmax = solver.lambda_max();

    std::optional<Fit> fallback; // largest count < q seen so far
    auto consider_fallback = [&](const Fit& f) {
        if (f.count() < q && (!fallback || f.count() > fallback->count()))
            fallback = f;
    };

    Fit prev = solver.fit(lmax);
    consider_fallback(prev);
    if (lmax <= 0.0) {
        return {prev.lambda, prev.support, false, prev};
    }

    const double log_ratio = std::log(opt.min_ratio);
    const auto steps = static_cast<double>(opt.grid_points - 1);
    for (Index k = 1; k < opt.grid_points; ++k) {
        const double lam = lmax * std::exp(log_ratio * static_cast<double>(k) / steps);
        Fit cur = solver.fit(lam);
        consider_fallback(cur);
        if (cur.count() >= q && prev.count() < q) {
            // Bracket [cur.lambda, prev.lambda]: count >= q at the low end.
            double lo = cur.lambda, hi = prev.lambda;
            std::optional<Fit> best;
            if (cur.count() == q)
                best = cur;
            for (Index b = 0; b < opt.bisection_steps; ++b) {
                const double mid = 0.5 * (lo + hi);
                if (mid <= lo || mid >= hi)
                    break;
                Fit m = solver.fit(mid);
                consider_fallback(m);
                if (m.count() >= q) {
                    lo = mid;
                    if (m.count() == q && (!best || m.lambda > best->lambda))
                        best = std::move(m);
                } else {
                    hi = mid;
                }
            }
            if (best) {
                // The bisection converges onto the point where the q-th
                // covariate enters, where its coefficient is still at the
                // solver tolerance. Step slightly inside the interval so the
                // support is reproducible by an independent refit.
                for (double margin : {1e-4, 1e-6}) {
                    Fit inner = solver.fit(lo * (1.0 - margin));
                    if (inner.count() == q)
                        return {inner.lambda, inner.support, true, inner};
                }
                return {best->lambda, best->support, true, *best};
            }
        } else if (cur.count() == q) {
            return {cur.lambda, cur.support, true, cur};
        }
        prev = std::move(cur);
    }
    const Fit& f = *fallback;
    return {f.lambda, f.support, false, f};
}

} // namespace sfs::lasso
