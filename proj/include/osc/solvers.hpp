#pragma once

// Sparse regressions used for self-representation:
//   OWL regression   min 1/2 |y - X b|^2 + Omega_w(b)      (FISTA with restart)
//   Lasso            the OWL case with constant weights
//   basis pursuit    min |b|_1  s.t.  X b = y                (over-relaxed ADMM)

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "osc/error.hpp"
#include "osc/owl.hpp"
#include "osc/random.hpp"

namespace osc {

struct SolverConfig {
    std::size_t max_iterations = 2000;
    double rel_tolerance = 1e-8;  ///< stop when relative objective change falls below this
    double admm_rho = 1.0;
    bool acceleration = true;  ///< FISTA momentum with function-value restart

    void validate() const {
        if (max_iterations < 1) {
            throw InvalidParameters("max_iterations must be at least 1");
        }
        if (!(rel_tolerance > 0.0)) {
            throw InvalidParameters("rel_tolerance must be positive");
        }
        if (!(admm_rho > 0.0)) {
            throw InvalidParameters("admm_rho must be positive");
        }
    }
};

struct SolverResult {
    Vector beta;
    std::vector<double> objective_trace;
    std::size_t iterations = 0;
    bool converged = false;
    double residual_norm = 0.0;  ///< |y - X beta|_2
};

/// Coefficients below this are treated as zero by every support-based metric.
inline double nonzero_threshold(const VectorRef& beta) {
    const double peak = beta.size() > 0 ? beta.cwiseAbs().maxCoeff() : 0.0;
    return 1e-6 * std::max(1.0, peak);
}

inline std::vector<bool> support_mask(const VectorRef& beta) {
    const double tau = nonzero_threshold(beta);
    std::vector<bool> mask(static_cast<std::size_t>(beta.size()));
    for (Eigen::Index i = 0; i < beta.size(); ++i) {
        mask[static_cast<std::size_t>(i)] = std::abs(beta[i]) > tau;
    }
    return mask;
}

/// sigma_max(X)^2 by power iteration on X^T X from a fixed-seed start vector.
inline double lipschitz_estimate(const Matrix& X) {
    if (X.size() == 0) {
        throw InvalidInput("lipschitz_estimate: empty matrix");
    }
    if (X.cwiseAbs().maxCoeff() == 0.0) {
        return 0.0;
    }
    Rng rng(derive_seed(0x5eed, stream::power_iteration));
    std::normal_distribution<double> normal;
    Vector v(X.cols());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        v[i] = normal(rng);
    }
    v.normalize();
    double estimate = 0.0;
    Vector xv(X.rows());
    for (int it = 0; it < 500; ++it) {
        xv.noalias() = X * v;
        Vector next = X.transpose() * xv;
        const double rayleigh = xv.squaredNorm();
        const double norm = next.norm();
        if (norm == 0.0) {
            break;
        }
        v = next / norm;
        const bool settled = std::abs(rayleigh - estimate) <= 1e-13 * rayleigh;
        estimate = rayleigh;
        if (settled) {
            break;
        }
    }
    return estimate;
}

namespace detail {

inline void check_design(const Matrix& X, const Vector& y) {
    if (X.rows() != y.size()) {
        throw DimensionError("design has " + std::to_string(X.rows()) + " rows but target has length "
                             + std::to_string(y.size()));
    }
    if (!X.allFinite() || !y.allFinite()) {
        throw InvalidInput("non-finite entries in design or target");
    }
}

/// Columns must be unit norm; exactly-zero columns mark excluded variables.
inline void check_unit_columns(const Matrix& X) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        const double norm = X.col(j).norm();
        if (norm != 0.0 && std::abs(norm - 1.0) > 1e-9) {
            throw InvalidInput("column " + std::to_string(j) + " has norm " + std::to_string(norm)
                               + "; columns must be unit norm (or zero when excluded)");
        }
    }
}

}  // namespace detail

/// min_b 1/2 |y - X b|^2 + Omega_w(b) by proximal gradient with step 1/L.
///
/// `lipschitz` may carry a precomputed upper bound on sigma_max(X)^2 (callers
/// regressing many targets on one design compute it once).
inline SolverResult solve_owl(const Matrix& X, const Vector& y, const WeightVector& w, const SolverConfig& cfg,
                              std::optional<double> lipschitz = std::nullopt) {
    cfg.validate();
    detail::check_design(X, y);
    detail::check_unit_columns(X);
    if (static_cast<std::size_t>(X.cols()) != w.size()) {
        throw DimensionError("design has " + std::to_string(X.cols()) + " columns but weights have length "
                             + std::to_string(w.size()));
    }

    const Eigen::Index p = X.cols();
    SolverResult result;
    result.beta = Vector::Zero(p);

    const double lip = lipschitz ? *lipschitz : lipschitz_estimate(X);
    if (!(lip > 0.0)) {
        result.converged = true;
        result.residual_norm = y.norm();
        result.objective_trace.push_back(0.5 * y.squaredNorm());
        return result;
    }
    const double step = 1.0 / lip;

    ProxWorkspace ws;
    Vector beta = Vector::Zero(p);
    Vector z = beta;
    Vector x_beta = Vector::Zero(X.rows());  // X * beta
    Vector x_z = x_beta;                     // X * z
    Vector grad(p);
    Vector candidate(p);
    Vector x_candidate(X.rows());
    double t = 1.0;
    double objective = 0.5 * y.squaredNorm();
    bool restarted = false;

    for (std::size_t it = 1; it <= cfg.max_iterations; ++it) {
        result.iterations = it;
        grad.noalias() = X.transpose() * (x_z - y);
        prox_owl_into(z - step * grad, w, step, candidate, ws);
        x_candidate.noalias() = X * candidate;
        const double next = 0.5 * (y - x_candidate).squaredNorm() + owl_norm(candidate, w);

        if (cfg.acceleration && next > objective && !restarted) {
            // Momentum overshoot: drop it and retake a plain step from beta.
            t = 1.0;
            z = beta;
            x_z = x_beta;
            restarted = true;
            continue;
        }
        restarted = false;

        const double change = std::abs(objective - next);
        const double scale = std::max(objective, std::numeric_limits<double>::min());
        if (cfg.acceleration) {
            const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
            const double momentum = (t - 1.0) / t_next;
            z = candidate + momentum * (candidate - beta);
            x_z = x_candidate + momentum * (x_candidate - x_beta);
            t = t_next;
        } else {
            z = candidate;
            x_z = x_candidate;
        }
        beta.swap(candidate);
        x_beta.swap(x_candidate);
        objective = next;
        result.objective_trace.push_back(objective);

        if (change <= cfg.rel_tolerance * scale) {
            result.converged = true;
            break;
        }
    }

    result.residual_norm = (y - x_beta).norm();
    result.beta = std::move(beta);
    return result;
}

/// min_b 1/2 |y - X b|^2 + lambda |b|_1; the OWL solver with constant weights.
inline SolverResult solve_lasso(const Matrix& X, const Vector& y, double lambda, const SolverConfig& cfg,
                                std::optional<double> lipschitz = std::nullopt) {
    if (!(lambda > 0.0)) {
        throw InvalidParameters("lasso lambda must be positive");
    }
    return solve_owl(X, y, WeightVector::constant(static_cast<std::size_t>(X.cols()), lambda), cfg, lipschitz);
}

/// min |b|_1 subject to X b = y by over-relaxed ADMM (fixed rho, relaxation 1.5).
///
/// The returned coefficients are the sparse ADMM iterate, corrected on its own
/// support so that the equality constraint holds to working precision.
inline SolverResult solve_basis_pursuit(const Matrix& X, const Vector& y, const SolverConfig& cfg) {
    cfg.validate();
    detail::check_design(X, y);
    const Eigen::Index p = X.cols();
    constexpr double relaxation = 1.5;

    const Eigen::CompleteOrthogonalDecomposition<Matrix> cod(X);
    const Vector least_norm = cod.solve(y);
    const double ls_residual = (X * least_norm - y).norm();
    if (ls_residual >= 1e-6) {
        throw InfeasibleError(ls_residual);
    }

    // Projection onto {b : X b = y}: b - X^+ (X b - y).
    auto project = [&](const Vector& b) -> Vector { return b - cod.solve(X * b - y); };
    auto soft = [](const Vector& v, double kappa) -> Vector {
        return v.unaryExpr([kappa](double a) { return a > kappa ? a - kappa : (a < -kappa ? a + kappa : 0.0); });
    };

    const double rho = cfg.admm_rho;
    Vector x = least_norm;
    Vector z = x;
    Vector u = Vector::Zero(p);
    SolverResult result;
    double objective = z.lpNorm<1>();

    for (std::size_t it = 1; it <= cfg.max_iterations; ++it) {
        result.iterations = it;
        x = project(z - u);
        const Vector x_hat = relaxation * x + (1.0 - relaxation) * z;
        const Vector z_old = z;
        z = soft(x_hat + u, 1.0 / rho);
        u += x_hat - z;

        const double next = z.lpNorm<1>();
        result.objective_trace.push_back(next);
        const double primal = (x - z).norm();
        const double dual = rho * (z - z_old).norm();
        const double scale = std::max(1.0, std::max(x.norm(), z.norm()));
        const bool small_change = std::abs(next - objective) <= cfg.rel_tolerance * std::max(next, 1e-300);
        objective = next;
        if (small_change && primal <= cfg.rel_tolerance * scale && dual <= cfg.rel_tolerance * scale) {
            result.converged = true;
            break;
        }
    }

    // Restore feasibility on the support of the sparse iterate. When that
    // support cannot reproduce y, grow it by the largest entries of the
    // feasible iterate x until it can.
    const double tau = 1e-9 * std::max(1.0, z.cwiseAbs().maxCoeff());
    const double feasible_tol = 1e-9 * std::max(1.0, y.norm());
    std::vector<Eigen::Index> order(static_cast<std::size_t>(p));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        const bool za = std::abs(z[a]) > tau;
        const bool zb = std::abs(z[b]) > tau;
        if (za != zb) {
            return za;
        }
        return za ? std::abs(z[a]) > std::abs(z[b]) : std::abs(x[a]) > std::abs(x[b]);
    });
    std::size_t size = 0;
    while (size < order.size() && std::abs(z[order[size]]) > tau) {
        ++size;
    }
    const std::size_t limit = std::min(order.size(), size + static_cast<std::size_t>(X.rows()));
    Vector beta;
    for (size = std::max<std::size_t>(size, 1); size <= limit && beta.size() == 0; ++size) {
        Matrix sub(X.rows(), static_cast<Eigen::Index>(size));
        Vector sub_beta(static_cast<Eigen::Index>(size));
        for (std::size_t s = 0; s < size; ++s) {
            sub.col(static_cast<Eigen::Index>(s)) = X.col(order[s]);
            sub_beta[static_cast<Eigen::Index>(s)] = z[order[s]];
        }
        sub_beta += sub.completeOrthogonalDecomposition().solve(y - sub * sub_beta);
        if ((sub * sub_beta - y).norm() <= feasible_tol) {
            beta = Vector::Zero(p);
            for (std::size_t s = 0; s < size; ++s) {
                beta[order[s]] = sub_beta[static_cast<Eigen::Index>(s)];
            }
        }
    }
    if (beta.size() == 0) {
        beta = project(z);
    }

    result.beta = std::move(beta);
    result.residual_norm = (y - X * result.beta).norm();
    return result;
}

}  // namespace osc
