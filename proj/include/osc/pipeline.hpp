#pragma once

// OSC end to end: seed selection, self-representation with k regressions,
// affinity graph, spectral clustering and label matching. Also the greedy
// peeling variant.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "osc/error.hpp"
#include "osc/metrics.hpp"
#include "osc/owl.hpp"
#include "osc/parallel.hpp"
#include "osc/random.hpp"
#include "osc/solvers.hpp"
#include "osc/spectral.hpp"

namespace osc {

struct ExactL1 {};
struct Lasso {
    double lambda = 0.0;
};
struct OwlRamp {
    RampParams ramp;
};
using Regularizer = std::variant<ExactL1, Lasso, OwlRamp>;

inline std::string regularizer_name(const Regularizer& reg) {
    return std::visit(
        [](const auto& r) -> std::string {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, ExactL1>) {
                return "exact_l1";
            } else if constexpr (std::is_same_v<T, Lasso>) {
                return "lasso";
            } else {
                return "owl_ramp";
            }
        },
        reg);
}

struct OscConfig {
    std::size_t k = 0;  ///< number of seed regressions
    Regularizer regularizer = ExactL1{};
    std::size_t num_clusters = 0;
    std::uint64_t seed = 42;
    SolverConfig solver;
    std::size_t threads = 0;  ///< 0: one per hardware thread

    void validate(std::size_t N) const {
        if (k < 1 || k > N) {
            throw InvalidParameters("k=" + std::to_string(k) + " outside [1, " + std::to_string(N) + "]");
        }
        if (num_clusters < 1) {
            throw InvalidParameters("number of clusters must be at least 1");
        }
        solver.validate();
        if (const auto* l = std::get_if<Lasso>(&regularizer); l && !(l->lambda > 0.0)) {
            throw InvalidParameters("lasso lambda must be positive");
        }
        if (const auto* o = std::get_if<OwlRamp>(&regularizer)) {
            make_ramp_weights(o->ramp, N);
        }
    }
};

struct SeedDiagnostics {
    std::size_t index = 0;
    double fpr = std::numeric_limits<double>::quiet_NaN();  ///< NaN without ground truth
    double tpr = std::numeric_limits<double>::quiet_NaN();
    std::size_t iterations = 0;
    bool converged = false;
    bool failed = false;
    double residual_norm = 0.0;
    std::string error;
};

struct CoefficientMatrix {
    Matrix B;
    std::vector<std::size_t> computed_columns;
    std::vector<SeedDiagnostics> diagnostics;  ///< aligned with computed_columns
    std::size_t failures = 0;
};

struct ClusteringResult {
    std::vector<int> predicted_labels;
    std::optional<double> clustering_error;
    std::vector<SeedDiagnostics> per_seed_diagnostics;
    std::vector<std::size_t> seeds;
    std::size_t failures = 0;
    bool degenerate = false;
};

/// k distinct indices from [0, N), uniform without replacement.
inline std::vector<std::size_t> select_seeds(std::size_t N, std::size_t k, std::uint64_t seed) {
    if (k > N) {
        throw InvalidParameters("cannot select " + std::to_string(k) + " seeds from " + std::to_string(N) + " points");
    }
    std::vector<std::size_t> idx(N);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng = make_rng(seed, stream::seeds);
    // Partial Fisher-Yates with explicit draws: std::shuffle is not portable across standard libraries.
    for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, N - 1);
        std::swap(idx[i], idx[pick(rng)]);
    }
    idx.resize(k);
    return idx;
}

namespace detail {

inline void check_points(const Matrix& X) {
    if (X.cols() < 1 || X.rows() < 1) {
        throw InvalidInput("data matrix is empty");
    }
    if (!X.allFinite()) {
        throw InvalidInput("data matrix has non-finite entries");
    }
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        const double norm = X.col(j).norm();
        if (std::abs(norm - 1.0) > 1e-9) {
            throw InvalidInput("point " + std::to_string(j) + " has norm " + std::to_string(norm)
                               + "; points must be unit norm");
        }
    }
}

/// Regression of column j on the others (column j zeroed). `lipschitz` bounds
/// sigma_max^2 of the full design, hence also of the design with j removed.
inline SolverResult regress_column(const Matrix& X, std::size_t j, const Regularizer& reg, const SolverConfig& solver,
                                   double lipschitz) {
    Matrix design = X;
    const auto jj = static_cast<Eigen::Index>(j);
    design.col(jj).setZero();
    const Vector y = X.col(jj);
    SolverResult res = std::visit(
        [&](const auto& r) -> SolverResult {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, ExactL1>) {
                return solve_basis_pursuit(design, y, solver);
            } else if constexpr (std::is_same_v<T, Lasso>) {
                return solve_lasso(design, y, r.lambda, solver, lipschitz);
            } else {
                return solve_owl(design, y, make_ramp_weights(r.ramp, static_cast<std::size_t>(X.cols())), solver,
                                 lipschitz);
            }
        },
        reg);
    res.beta[jj] = 0.0;
    return res;
}

}  // namespace detail

/// Step 1 of OSC: regress each seed column on the remaining columns and store
/// the coefficients as that column of B. A column whose solve throws is
/// zero-filled and counted as a failure.
inline CoefficientMatrix compute_coefficients(const Matrix& X, const std::vector<std::size_t>& seeds,
                                              const Regularizer& reg, const SolverConfig& solver,
                                              const std::vector<int>* truth = nullptr, std::size_t threads = 0) {
    detail::check_points(X);
    solver.validate();
    const auto N = static_cast<std::size_t>(X.cols());
    if (truth && truth->size() != N) {
        throw DimensionError("ground-truth labels do not match the number of points");
    }
    for (const auto j : seeds) {
        if (j >= N) {
            throw InvalidParameters("seed index " + std::to_string(j) + " out of range");
        }
    }
    const double lipschitz = lipschitz_estimate(X);

    CoefficientMatrix out;
    out.B = Matrix::Zero(X.cols(), X.cols());
    out.computed_columns = seeds;
    out.diagnostics.resize(seeds.size());

    parallel_for(seeds.size(), threads, [&](std::size_t s) {
        const std::size_t j = seeds[s];
        SeedDiagnostics& diag = out.diagnostics[s];
        diag.index = j;
        try {
            const SolverResult res = detail::regress_column(X, j, reg, solver, lipschitz);
            out.B.col(static_cast<Eigen::Index>(j)) = res.beta;
            diag.iterations = res.iterations;
            diag.converged = res.converged;
            diag.residual_norm = res.residual_norm;
            if (truth) {
                const auto mask = membership_mask(*truth, j);
                const bool rated = std::count(mask.begin(), mask.end(), Membership::same) > 0
                                   && std::count(mask.begin(), mask.end(), Membership::other) > 0;
                if (rated) {
                    const DiscoveryRates rates = fpr_tpr(res.beta, mask);
                    diag.fpr = rates.fpr;
                    diag.tpr = rates.tpr;
                }
            }
        } catch (const Error& e) {
            diag.failed = true;
            diag.error = e.what();
        }
    });
    for (const auto& d : out.diagnostics) {
        out.failures += d.failed ? 1 : 0;
    }
    return out;
}

/// W = |B| + |B|^T.
inline Matrix build_affinity(const Matrix& B) {
    if (B.rows() != B.cols()) {
        throw DimensionError("coefficient matrix must be square");
    }
    const Matrix A = B.cwiseAbs();
    Matrix W = A + A.transpose();
    W.diagonal().setZero();
    return W;
}

/// Spectral clustering of W; isolated points join the cluster of the
/// non-isolated point with the largest |<x_i, x_j>|, with a seeded random
/// label when no such point correlates at all.
inline SpectralResult cluster_affinity(const Matrix& W, const Matrix& X, std::size_t L, std::uint64_t seed) {
    SpectralResult sc = spectral_clustering(W, L, derive_seed(seed, stream::kmeans));
    std::vector<Eigen::Index> anchors;
    for (std::size_t i = 0; i < sc.isolated.size(); ++i) {
        if (!sc.isolated[i]) {
            anchors.push_back(static_cast<Eigen::Index>(i));
        }
    }
    if (anchors.empty()) {
        return sc;
    }
    Rng fallback = make_rng(seed, stream::fallback);
    std::uniform_int_distribution<int> any_label(0, static_cast<int>(L) - 1);
    for (std::size_t i = 0; i < sc.isolated.size(); ++i) {
        if (!sc.isolated[i]) {
            continue;
        }
        const auto ii = static_cast<Eigen::Index>(i);
        double best = 0.0;
        Eigen::Index best_j = -1;
        for (const auto j : anchors) {
            const double c = std::abs(X.col(ii).dot(X.col(j)));
            if (c > best) {
                best = c;
                best_j = j;
            }
        }
        sc.labels[i] = best_j >= 0 ? sc.labels[static_cast<std::size_t>(best_j)] : any_label(fallback);
    }
    return sc;
}

/// Steps 2-3 of OSC on a (possibly partially) computed coefficient matrix.
inline ClusteringResult cluster_from_coefficients(const CoefficientMatrix& coeffs, const Matrix& X, std::size_t L,
                                                  std::uint64_t seed, const std::vector<int>* truth = nullptr) {
    ClusteringResult result;
    const SpectralResult sc = cluster_affinity(build_affinity(coeffs.B), X, L, seed);
    result.predicted_labels = sc.labels;
    result.degenerate = sc.degenerate;
    result.per_seed_diagnostics = coeffs.diagnostics;
    result.seeds = coeffs.computed_columns;
    result.failures = coeffs.failures;
    if (truth) {
        result.clustering_error = clustering_error(result.predicted_labels, *truth, L);
    }
    return result;
}

/// OSC with k random seeds.
inline ClusteringResult run_osc(const Matrix& X, const OscConfig& cfg, const std::vector<int>* truth = nullptr) {
    const auto N = static_cast<std::size_t>(X.cols());
    cfg.validate(N);
    if (cfg.num_clusters > N) {
        throw InvalidParameters("number of clusters exceeds number of points");
    }
    const auto seeds = select_seeds(N, cfg.k, cfg.seed);
    const CoefficientMatrix coeffs = compute_coefficients(X, seeds, cfg.regularizer, cfg.solver, truth, cfg.threads);
    if (coeffs.failures == seeds.size()) {
        throw Error("all " + std::to_string(seeds.size()) + " seed regressions failed: "
                    + coeffs.diagnostics.front().error);
    }
    return cluster_from_coefficients(coeffs, X, cfg.num_clusters, cfg.seed, truth);
}

struct PeelResult {
    std::vector<int> labels;
    std::size_t clusters = 0;
    std::size_t rounds = 0;
};

/// Greedy peeling: pick a random remaining point, solve one OWL regression on
/// the remaining points, and remove the seed together with its support as a
/// new cluster. The ramp length is clamped to the number of candidates.
inline PeelResult greedy_peel(const Matrix& X, const RampParams& ramp, std::uint64_t seed,
                              const SolverConfig& solver = {}) {
    detail::check_points(X);
    const auto N = static_cast<std::size_t>(X.cols());
    PeelResult out;
    out.labels.assign(N, -1);
    std::vector<std::size_t> remaining(N);
    std::iota(remaining.begin(), remaining.end(), std::size_t{0});
    Rng rng = make_rng(seed, stream::peel);

    while (!remaining.empty()) {
        std::uniform_int_distribution<std::size_t> pick(0, remaining.size() - 1);
        const std::size_t pos = pick(rng);
        const std::size_t j = remaining[pos];
        const int label = static_cast<int>(out.clusters);
        out.labels[j] = label;
        ++out.clusters;
        ++out.rounds;

        std::vector<std::size_t> candidates;
        for (const auto i : remaining) {
            if (i != j) {
                candidates.push_back(i);
            }
        }
        std::vector<std::size_t> next;
        if (!candidates.empty()) {
            Matrix design(X.rows(), static_cast<Eigen::Index>(candidates.size()));
            for (std::size_t c = 0; c < candidates.size(); ++c) {
                design.col(static_cast<Eigen::Index>(c)) = X.col(static_cast<Eigen::Index>(candidates[c]));
            }
            RampParams p = ramp;
            p.r = std::clamp<std::size_t>(p.r, 1, candidates.size());
            const SolverResult res =
                solve_owl(design, X.col(static_cast<Eigen::Index>(j)), make_ramp_weights(p, candidates.size()), solver);
            const std::vector<bool> support = support_mask(res.beta);
            for (std::size_t c = 0; c < candidates.size(); ++c) {
                if (support[c]) {
                    out.labels[candidates[c]] = label;
                } else {
                    next.push_back(candidates[c]);
                }
            }
        }
        remaining = std::move(next);
    }
    return out;
}

/// Synthetic-data defaults: lambda = 0.25/sqrt(d), ramp over one subspace's
/// worth of points (r = N/L), slope so that w_1 = 2 lambda.
inline RampParams default_ramp(std::size_t N, std::size_t L, std::size_t d) {
    if (N < 1 || L < 1 || d < 1) {
        throw InvalidParameters("default ramp needs N, L, d >= 1");
    }
    RampParams p;
    p.lambda = 0.25 / std::sqrt(static_cast<double>(d));
    p.r = std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(static_cast<double>(N) / static_cast<double>(L))),
                                  1, N);
    p.delta = p.lambda / static_cast<double>(p.r);
    return p;
}

inline double default_lambda(std::size_t d) { return 0.25 / std::sqrt(static_cast<double>(d)); }

/// Real-data rule: r = round(N/4) and w_1 = lambda + r*delta in {4 lambda,
/// 2 lambda}, taking the first for which no sampled column is trivial.
/// Returns the 2 lambda ramp (possibly trivial) when neither qualifies.
inline RampParams real_data_ramp(const Matrix& X, double lambda, const std::vector<std::size_t>& probe) {
    const auto N = static_cast<std::size_t>(X.cols());
    if (!(lambda > 0.0)) {
        throw InvalidParameters("lambda must be positive");
    }
    RampParams p;
    p.lambda = lambda;
    p.r = std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(static_cast<double>(N) / 4.0)), 1, N);
    for (const double multiple : {4.0, 2.0}) {
        p.delta = (multiple - 1.0) * lambda / static_cast<double>(p.r);
        const WeightVector w = make_ramp_weights(p, N);
        bool trivial = false;
        for (const auto j : probe) {
            Vector g = X.transpose() * X.col(static_cast<Eigen::Index>(j));
            g[static_cast<Eigen::Index>(j)] = 0.0;
            if (predict_trivial_solution(g, w)) {
                trivial = true;
                break;
            }
        }
        if (!trivial) {
            return p;
        }
    }
    return p;
}

}  // namespace osc
