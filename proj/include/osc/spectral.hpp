#pragma once

// Normalized spectral clustering, k-means and label matching.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "osc/error.hpp"
#include "osc/owl.hpp"
#include "osc/random.hpp"

namespace osc {

struct KMeansResult {
    std::vector<int> labels;
    Matrix centers;  // dim x k
    double inertia = 0.0;
};

namespace detail {

inline KMeansResult kmeans_once(const Matrix& P, std::size_t k, Rng& rng, std::size_t max_iter) {
    const Eigen::Index n = P.cols();
    const auto kk = static_cast<Eigen::Index>(k);
    KMeansResult res;
    res.centers.resize(P.rows(), kk);

    // k-means++ seeding.
    std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
    res.centers.col(0) = P.col(pick(rng));
    Vector dist(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        dist[i] = (P.col(i) - res.centers.col(0)).squaredNorm();
    }
    for (Eigen::Index c = 1; c < kk; ++c) {
        Eigen::Index chosen = 0;
        if (dist.sum() > 0.0) {
            std::discrete_distribution<Eigen::Index> weighted(dist.data(), dist.data() + n);
            chosen = weighted(rng);
        } else {
            chosen = pick(rng);
        }
        res.centers.col(c) = P.col(chosen);
        for (Eigen::Index i = 0; i < n; ++i) {
            dist[i] = std::min(dist[i], (P.col(i) - res.centers.col(c)).squaredNorm());
        }
    }

    res.labels.assign(static_cast<std::size_t>(n), -1);
    for (std::size_t it = 0; it < max_iter; ++it) {
        bool changed = false;
        res.inertia = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            int best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (Eigen::Index c = 0; c < kk; ++c) {
                const double dd = (P.col(i) - res.centers.col(c)).squaredNorm();
                if (dd < best_d) {
                    best_d = dd;
                    best = static_cast<int>(c);
                }
            }
            res.inertia += best_d;
            if (res.labels[static_cast<std::size_t>(i)] != best) {
                res.labels[static_cast<std::size_t>(i)] = best;
                changed = true;
            }
        }
        if (!changed) {
            break;
        }
        Matrix sums = Matrix::Zero(P.rows(), kk);
        std::vector<std::size_t> counts(k, 0);
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto c = res.labels[static_cast<std::size_t>(i)];
            sums.col(c) += P.col(i);
            ++counts[static_cast<std::size_t>(c)];
        }
        for (Eigen::Index c = 0; c < kk; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) {
                res.centers.col(c) = sums.col(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
            } else {
                // Empty cluster: move it to the point farthest from its center.
                Eigen::Index far = 0;
                double far_d = -1.0;
                for (Eigen::Index i = 0; i < n; ++i) {
                    const double dd =
                        (P.col(i) - res.centers.col(res.labels[static_cast<std::size_t>(i)])).squaredNorm();
                    if (dd > far_d) {
                        far_d = dd;
                        far = i;
                    }
                }
                res.centers.col(c) = P.col(far);
            }
        }
    }
    return res;
}

}  // namespace detail

/// k-means on the columns of P with k-means++ seeding; keeps the restart with
/// the smallest within-cluster sum of squares.
inline KMeansResult kmeans(const Matrix& P, std::size_t k, std::uint64_t seed, std::size_t restarts = 20,
                           std::size_t max_iter = 300) {
    if (k < 1 || static_cast<Eigen::Index>(k) > P.cols()) {
        throw InvalidParameters("k-means needs 1 <= k <= number of points");
    }
    KMeansResult best;
    best.inertia = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < std::max<std::size_t>(restarts, 1); ++r) {
        Rng rng = make_rng(seed, stream::kmeans, r);
        KMeansResult cur = detail::kmeans_once(P, k, rng, max_iter);
        if (cur.inertia < best.inertia) {
            best = std::move(cur);
        }
    }
    return best;
}

struct SpectralResult {
    std::vector<int> labels;
    std::vector<bool> isolated;  ///< zero-degree vertices, labelled -1 here
    bool degenerate = false;     ///< fewer than L vertices carry any edge weight
};

/// Spectral clustering of the graph W into L groups using the symmetric
/// normalized Laplacian. Isolated vertices get label -1 and are flagged; the
/// caller decides how to place them.
inline SpectralResult spectral_clustering(const Matrix& W, std::size_t L, std::uint64_t seed) {
    const Eigen::Index n = W.rows();
    if (W.cols() != n) {
        throw DimensionError("affinity matrix must be square");
    }
    if (L < 1) {
        throw InvalidParameters("number of clusters must be at least 1");
    }
    if (static_cast<Eigen::Index>(L) > n) {
        throw InvalidParameters("number of clusters " + std::to_string(L) + " exceeds number of points "
                                + std::to_string(n));
    }
    SpectralResult out;
    out.labels.assign(static_cast<std::size_t>(n), -1);
    out.isolated.assign(static_cast<std::size_t>(n), false);

    const Vector degree = W.rowwise().sum();
    const double max_degree = degree.maxCoeff();
    std::vector<Eigen::Index> active;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (degree[i] > 0.0) {
            active.push_back(i);
        } else {
            out.isolated[static_cast<std::size_t>(i)] = true;
        }
    }
    if (active.size() < L) {
        out.degenerate = true;
        if (active.empty()) {
            std::fill(out.labels.begin(), out.labels.end(), 0);
            std::fill(out.isolated.begin(), out.isolated.end(), false);
            return out;
        }
    }
    if (L == 1) {
        for (const auto i : active) {
            out.labels[static_cast<std::size_t>(i)] = 0;
        }
        return out;
    }

    // Isolated vertices contribute only zero rows to the embedding, so the
    // eigenproblem is restricted to the active vertices.
    const auto m = static_cast<Eigen::Index>(active.size());
    const double eps = 1e-8 * max_degree;
    Matrix M(m, m);
    for (Eigen::Index a = 0; a < m; ++a) {
        for (Eigen::Index b = 0; b < m; ++b) {
            M(a, b) = W(active[a], active[b]) / std::sqrt((degree[active[a]] + eps) * (degree[active[b]] + eps));
        }
    }
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(M);
    // Largest eigenvalues of D^-1/2 W D^-1/2 are the smallest of L_sym.
    const Eigen::Index dims = std::min<Eigen::Index>(static_cast<Eigen::Index>(L), m);
    const Matrix V = eig.eigenvectors().rightCols(dims);

    const std::size_t k = std::min(L, active.size());
    Matrix E(dims, m);
    for (Eigen::Index a = 0; a < m; ++a) {
        Vector row = V.row(a).transpose();
        const double norm = row.norm();
        if (norm > 0.0) {
            row /= norm;
        }
        E.col(a) = row;
    }
    const KMeansResult km = kmeans(E, k, seed);
    for (std::size_t a = 0; a < active.size(); ++a) {
        out.labels[static_cast<std::size_t>(active[a])] = km.labels[a];
    }
    return out;
}

/// Minimum-cost perfect assignment on a square cost matrix (Hungarian method,
/// O(n^3)). Returns assignment[row] = column.
inline std::vector<std::size_t> hungarian(const Matrix& cost) {
    const auto n = static_cast<std::size_t>(cost.rows());
    if (cost.cols() != cost.rows()) {
        throw DimensionError("assignment cost matrix must be square");
    }
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
    std::vector<bool> used(n + 1);
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), false);
        do {
            used[j0] = true;
            const std::size_t i0 = p[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) {
                    continue;
                }
                const double cur = cost(static_cast<Eigen::Index>(i0 - 1), static_cast<Eigen::Index>(j - 1)) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<std::size_t> assignment(n);
    for (std::size_t j = 1; j <= n; ++j) {
        assignment[p[j] - 1] = j - 1;
    }
    return assignment;
}

/// Fraction of misclassified points under the best matching of predicted to
/// true labels. Labels must be in [0, L) (more labels than L are tolerated by
/// padding the confusion matrix).
inline double clustering_error(const std::vector<int>& predicted, const std::vector<int>& truth, std::size_t L) {
    if (predicted.size() != truth.size()) {
        throw InvalidInput("label vectors differ in length (" + std::to_string(predicted.size()) + " vs "
                           + std::to_string(truth.size()) + ")");
    }
    if (predicted.empty()) {
        return 0.0;
    }
    int max_label = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (predicted[i] < 0 || truth[i] < 0) {
            throw InvalidInput("labels must be nonnegative");
        }
        max_label = std::max({max_label, predicted[i], truth[i]});
    }
    const auto m = static_cast<Eigen::Index>(std::max<std::size_t>(L, static_cast<std::size_t>(max_label) + 1));
    Matrix confusion = Matrix::Zero(m, m);
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        confusion(predicted[i], truth[i]) += 1.0;
    }
    const auto assignment = hungarian(-confusion);
    double matched = 0.0;
    for (Eigen::Index r = 0; r < m; ++r) {
        matched += confusion(r, static_cast<Eigen::Index>(assignment[static_cast<std::size_t>(r)]));
    }
    return 1.0 - matched / static_cast<double>(predicted.size());
}

}  // namespace osc
