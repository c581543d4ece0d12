#pragma once

// Per-regression discovery rates.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "osc/error.hpp"
#include "osc/owl.hpp"
#include "osc/solvers.hpp"

namespace osc {

enum class Membership : std::uint8_t { other, same, excluded };

/// Membership of every column relative to the regressed column j: same label,
/// other label, or j itself (excluded from both counts).
inline std::vector<Membership> membership_mask(const std::vector<int>& labels, std::size_t j) {
    if (j >= labels.size()) {
        throw InvalidParameters("regressed index out of range");
    }
    std::vector<Membership> mask(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        mask[i] = i == j ? Membership::excluded : (labels[i] == labels[j] ? Membership::same : Membership::other);
    }
    return mask;
}

struct DiscoveryRates {
    double fpr = 0.0;
    double tpr = 0.0;
};

/// FPR = |supp(beta) in S^c| / |S^c|, TPR = |supp(beta) in S| / |S|.
inline DiscoveryRates fpr_tpr(const VectorRef& beta, const std::vector<Membership>& mask) {
    if (static_cast<std::size_t>(beta.size()) != mask.size()) {
        throw DimensionError("membership mask has length " + std::to_string(mask.size()) + " but coefficients have "
                             + std::to_string(beta.size()));
    }
    const std::vector<bool> support = support_mask(beta);
    std::size_t same = 0, other = 0, true_pos = 0, false_pos = 0;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (mask[i] == Membership::same) {
            ++same;
            true_pos += support[i] ? 1 : 0;
        } else if (mask[i] == Membership::other) {
            ++other;
            false_pos += support[i] ? 1 : 0;
        }
    }
    if (same == 0 || other == 0) {
        throw InvalidParameters("discovery rates need at least one same-subspace and one other-subspace column");
    }
    return {static_cast<double>(false_pos) / static_cast<double>(other),
            static_cast<double>(true_pos) / static_cast<double>(same)};
}

}  // namespace osc
