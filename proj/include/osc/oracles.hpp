#pragma once

// Brute-force reference for the OWL prox on short vectors. Shares no code
// with prox_owl: every candidate face of the sorted-magnitude cone is
// enumerated and the true objective decides.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include "osc/error.hpp"
#include "osc/owl.hpp"

namespace osc::oracle {

/// 1/2 |x - v|^2 + Omega_w(x), evaluated directly from the definition.
inline double prox_objective(const Vector& x, const Vector& v, const Vector& w) {
    std::vector<double> m(static_cast<std::size_t>(x.size()));
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        m[static_cast<std::size_t>(i)] = std::abs(x[i]);
    }
    std::sort(m.begin(), m.end(), std::greater<>());
    double penalty = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        penalty += w[static_cast<Eigen::Index>(i)] * m[i];
    }
    return 0.5 * (x - v).squaredNorm() + penalty;
}

/// Exact prox for n <= 8 by enumeration. For every ordering of the entries and
/// every split of that ordering into consecutive groups, a group sharing one
/// magnitude m minimizes sum 1/2 (m - |v_i|)^2 + m * sum w over its positions,
/// so m = max(0, mean|v| - mean w). The minimizer of the strongly convex prox
/// objective is one of these candidates.
inline Vector prox_owl_enumerate(const Vector& v, const Vector& w) {
    const auto n = static_cast<std::size_t>(v.size());
    if (static_cast<std::size_t>(w.size()) != n) {
        throw DimensionError("oracle: length mismatch");
    }
    if (n == 0 || n > 8) {
        throw InvalidParameters("oracle enumeration supports 1 <= n <= 8");
    }
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Vector best = Vector::Zero(static_cast<Eigen::Index>(n));
    double best_value = prox_objective(best, v, w);
    Vector candidate(static_cast<Eigen::Index>(n));
    const std::size_t splits = std::size_t{1} << (n - 1);
    do {
        for (std::size_t mask = 0; mask < splits; ++mask) {
            // Bit b set: a group boundary after sorted position b.
            std::size_t start = 0;
            for (std::size_t pos = 0; pos < n; ++pos) {
                const bool boundary = pos == n - 1 || ((mask >> pos) & 1U) != 0;
                if (!boundary) {
                    continue;
                }
                double sum_v = 0.0;
                double sum_w = 0.0;
                for (std::size_t q = start; q <= pos; ++q) {
                    sum_v += std::abs(v[static_cast<Eigen::Index>(perm[q])]);
                    sum_w += w[static_cast<Eigen::Index>(q)];
                }
                const double len = static_cast<double>(pos - start + 1);
                const double m = std::max(0.0, (sum_v - sum_w) / len);
                for (std::size_t q = start; q <= pos; ++q) {
                    const auto idx = static_cast<Eigen::Index>(perm[q]);
                    candidate[idx] = v[idx] < 0.0 ? -m : m;
                }
                start = pos + 1;
            }
            const double value = prox_objective(candidate, v, w);
            if (value < best_value) {
                best_value = value;
                best = candidate;
            }
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

}  // namespace osc::oracle
