#pragma once

// Ordered weighted l1 (OWL) norm family: weights, norm, dual norm, and the
// proximal operator shared by every solver.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "osc/error.hpp"

namespace osc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using VectorRef = Eigen::Ref<const Vector>;

/// Nonincreasing, nonnegative OWL weights with a strictly positive head.
/// Validated once at construction; every operation taking a WeightVector
/// relies on the invariant.
class WeightVector {
public:
    explicit WeightVector(Vector w) : w_(std::move(w)) { validate(); }
    explicit WeightVector(const std::vector<double>& w)
        : WeightVector(Vector(Eigen::Map<const Vector>(w.data(), static_cast<Eigen::Index>(w.size())))) {}

    static WeightVector constant(std::size_t n, double value) {
        return WeightVector(Vector::Constant(static_cast<Eigen::Index>(n), value));
    }

    std::size_t size() const noexcept { return static_cast<std::size_t>(w_.size()); }
    double operator[](std::size_t i) const { return w_[static_cast<Eigen::Index>(i)]; }
    const Vector& values() const noexcept { return w_; }
    double head() const noexcept { return w_[0]; }
    double mean() const noexcept { return w_.mean(); }

    /// Mean of the weights from position `first` (0-based) to the end.
    double tail_mean(std::size_t first) const {
        if (first >= size()) {
            return 0.0;
        }
        return w_.tail(static_cast<Eigen::Index>(size() - first)).mean();
    }

    bool operator==(const WeightVector& other) const { return w_ == other.w_; }

private:
    void validate() const {
        if (w_.size() == 0) {
            throw InvalidParameters("weight vector must be nonempty");
        }
        if (!w_.allFinite()) {
            throw InvalidParameters("weight vector has non-finite entries");
        }
        if (!(w_[0] > 0.0)) {
            throw InvalidParameters("leading weight must be positive");
        }
        for (Eigen::Index i = 1; i < w_.size(); ++i) {
            if (w_[i] > w_[i - 1]) {
                throw InvalidParameters("weights must be nonincreasing (position " + std::to_string(i) + ")");
            }
        }
        if (w_[w_.size() - 1] < 0.0) {
            throw InvalidParameters("weights must be nonnegative");
        }
    }

    Vector w_;
};

/// OWL-Ramp parameters: l1 level `lambda`, ramp slope `delta`, ramp length `r`.
struct RampParams {
    double lambda = 0.0;
    double delta = 0.0;
    std::size_t r = 1;
};

/// w_i = (r - i + 1) * delta + lambda for i <= r, lambda afterwards (1-based i).
inline WeightVector make_ramp_weights(const RampParams& p, std::size_t n) {
    if (!(p.lambda > 0.0) || !std::isfinite(p.lambda)) {
        throw InvalidParameters("ramp lambda must be positive");
    }
    if (!(p.delta >= 0.0) || !std::isfinite(p.delta)) {
        throw InvalidParameters("ramp slope must be nonnegative");
    }
    if (p.r < 1 || p.r > n) {
        throw InvalidParameters("ramp length r=" + std::to_string(p.r) + " outside [1, " + std::to_string(n) + "]");
    }
    Vector w(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        w[static_cast<Eigen::Index>(i)] =
            i < p.r ? static_cast<double>(p.r - i) * p.delta + p.lambda : p.lambda;
    }
    return WeightVector(std::move(w));
}

namespace detail {

inline void require_same_size(Eigen::Index a, std::size_t b, const char* what) {
    if (static_cast<std::size_t>(a) != b) {
        throw DimensionError(std::string(what) + ": length " + std::to_string(a) + " does not match weights of length "
                             + std::to_string(b));
    }
}

/// Magnitudes sorted in decreasing order.
inline Vector sorted_magnitudes(const VectorRef& v) {
    Vector m = v.cwiseAbs();
    std::sort(m.data(), m.data() + m.size(), std::greater<>());
    return m;
}

}  // namespace detail

/// Omega_w(beta) = sum_i w_i |beta|_[i].
inline double owl_norm(const VectorRef& beta, const WeightVector& w) {
    detail::require_same_size(beta.size(), w.size(), "owl_norm");
    return detail::sorted_magnitudes(beta).dot(w.values());
}

/// Dual norm: max_i (sum of the i largest magnitudes) / (sum of the i largest weights).
inline double owl_dual_norm(const VectorRef& beta, const WeightVector& w) {
    detail::require_same_size(beta.size(), w.size(), "owl_dual_norm");
    const Vector m = detail::sorted_magnitudes(beta);
    double top = 0.0;
    double weight = 0.0;
    double best = 0.0;
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        top += m[i];
        weight += w.values()[i];
        best = std::max(best, top / weight);
    }
    return best;
}

/// Smallest gap between consecutive weights.
inline double min_gap(const WeightVector& w) {
    if (w.size() < 2) {
        throw InvalidInput("min_gap needs at least two weights");
    }
    double gap = w[0] - w[1];
    for (std::size_t i = 1; i + 1 < w.size(); ++i) {
        gap = std::min(gap, w[i] - w[i + 1]);
    }
    return gap;
}

/// Reusable buffers for prox_owl so solver loops do not allocate.
struct ProxWorkspace {
    std::vector<Eigen::Index> order;
    std::vector<double> block_sum;
    std::vector<std::size_t> block_start;
    std::vector<std::size_t> block_len;

    void resize(std::size_t n) {
        order.resize(n);
        block_sum.reserve(n);
        block_start.reserve(n);
        block_len.reserve(n);
    }
};

/// Writes argmin_x 1/2 |x - v|^2 + scale * Omega_w(x) into `out`.
///
/// Sorts |v| decreasingly (ties by index), subtracts the scaled weights, projects
/// onto the nonincreasing cone by pool-adjacent-violators, clips at zero, then
/// restores order and signs.
inline void prox_owl_into(const VectorRef& v, const WeightVector& w, double scale, Vector& out, ProxWorkspace& ws) {
    detail::require_same_size(v.size(), w.size(), "prox_owl");
    const auto n = static_cast<std::size_t>(v.size());
    ws.resize(n);
    std::iota(ws.order.begin(), ws.order.end(), Eigen::Index{0});
    std::stable_sort(ws.order.begin(), ws.order.end(),
                     [&v](Eigen::Index a, Eigen::Index b) { return std::abs(v[a]) > std::abs(v[b]); });

    ws.block_sum.clear();
    ws.block_start.clear();
    ws.block_len.clear();
    const Vector& wv = w.values();
    for (std::size_t i = 0; i < n; ++i) {
        const auto idx = static_cast<Eigen::Index>(i);
        ws.block_sum.push_back(std::abs(v[ws.order[i]]) - scale * wv[idx]);
        ws.block_start.push_back(i);
        ws.block_len.push_back(1);
        // Merge while the previous block's mean does not exceed the current one.
        while (ws.block_sum.size() > 1) {
            const std::size_t top = ws.block_sum.size() - 1;
            const double cur = ws.block_sum[top] / static_cast<double>(ws.block_len[top]);
            const double prev = ws.block_sum[top - 1] / static_cast<double>(ws.block_len[top - 1]);
            if (prev > cur) {
                break;
            }
            ws.block_sum[top - 1] += ws.block_sum[top];
            ws.block_len[top - 1] += ws.block_len[top];
            ws.block_sum.pop_back();
            ws.block_start.pop_back();
            ws.block_len.pop_back();
        }
    }

    out.resize(v.size());
    for (std::size_t b = 0; b < ws.block_sum.size(); ++b) {
        const double level = std::max(0.0, ws.block_sum[b] / static_cast<double>(ws.block_len[b]));
        for (std::size_t i = ws.block_start[b]; i < ws.block_start[b] + ws.block_len[b]; ++i) {
            const Eigen::Index j = ws.order[i];
            out[j] = v[j] < 0.0 ? -level : level;
        }
    }
}

inline Vector prox_owl(const VectorRef& v, const WeightVector& w) {
    Vector out;
    ProxWorkspace ws;
    prox_owl_into(v, w, 1.0, out, ws);
    return out;
}

/// True iff Omega*_w(X^T y) < 1, in which case zero solves the OWL regression.
inline bool predict_trivial_solution(const VectorRef& gram_response, const WeightVector& w) {
    return owl_dual_norm(gram_response, w) < 1.0;
}

}  // namespace osc
