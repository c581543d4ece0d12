#pragma once

// Delta random geometric graphs on sphere points and their connectivity.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "osc/error.hpp"
#include "osc/geometry.hpp"
#include "osc/owl.hpp"
#include "osc/random.hpp"

namespace osc {

/// Undirected simple graph stored as an edge list plus adjacency lists.
struct Graph {
    std::size_t vertices = 0;
    std::vector<std::pair<std::size_t, std::size_t>> edges;  // i < j
    std::vector<std::vector<std::size_t>> adjacency;

    std::size_t edge_count() const noexcept { return edges.size(); }
};

/// Edge between columns i and j iff |x_i - x_j| <= delta.
inline Graph build_delta_rgg(const Matrix& points, double delta) {
    if (!(delta >= 0.0)) {
        throw InvalidParameters("RGG radius must be nonnegative");
    }
    Graph g;
    g.vertices = static_cast<std::size_t>(points.cols());
    g.adjacency.resize(g.vertices);
    const double delta_sq = delta * delta;
    for (Eigen::Index i = 0; i < points.cols(); ++i) {
        for (Eigen::Index j = i + 1; j < points.cols(); ++j) {
            if ((points.col(i) - points.col(j)).squaredNorm() <= delta_sq) {
                const auto a = static_cast<std::size_t>(i);
                const auto b = static_cast<std::size_t>(j);
                g.edges.emplace_back(a, b);
                g.adjacency[a].push_back(b);
                g.adjacency[b].push_back(a);
            }
        }
    }
    return g;
}

/// Union-find with path halving and union by size.
class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n), size_(n, 1), components_(n) {
        std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    }

    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    bool unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) {
            return false;
        }
        if (size_[a] < size_[b]) {
            std::swap(a, b);
        }
        parent_[b] = a;
        size_[a] += size_[b];
        --components_;
        return true;
    }

    std::size_t components() const noexcept { return components_; }

private:
    std::vector<std::size_t> parent_;
    std::vector<std::size_t> size_;
    std::size_t components_;
};

struct Connectivity {
    bool connected = false;
    std::size_t components = 0;
};

inline Connectivity rgg_connected(const Graph& g) {
    if (g.vertices == 0) {
        throw InvalidInput("connectivity of an empty graph is undefined");
    }
    DisjointSets sets(g.vertices);
    for (const auto& [a, b] : g.edges) {
        sets.unite(a, b);
    }
    return {sets.components() == 1, sets.components()};
}

/// ceil(kappa1 * delta^-d * log(delta^-d / prob)).
inline std::size_t rgg_sample_bound(double delta, std::size_t d, double prob, const TheoremBounds& bounds) {
    bounds.validate();
    if (!(delta > 0.0 && delta <= 2.0)) {
        throw InvalidParameters("RGG radius must lie in (0, 2]");
    }
    if (d < 1) {
        throw InvalidParameters("sphere dimension must be at least 1");
    }
    if (!(prob > 0.0 && prob < 1.0)) {
        throw InvalidParameters("failure probability must lie in (0, 1)");
    }
    const double scale = std::pow(delta, -static_cast<double>(d));
    const double value = bounds.kappa1 * scale * std::log(scale / prob);
    return static_cast<std::size_t>(std::ceil(std::max(value, 1.0)));
}

/// `count` uniform points on the unit sphere S^d of R^{d+1}, one column each.
inline Matrix sample_sphere_points(std::size_t d, std::size_t count, std::uint64_t seed) {
    Matrix P(static_cast<Eigen::Index>(d + 1), static_cast<Eigen::Index>(count));
    for (std::size_t j = 0; j < count; ++j) {
        Rng rng = make_rng(seed, stream::sphere, j);
        P.col(static_cast<Eigen::Index>(j)) = sample_sphere_uniform(d + 1, rng);
    }
    return P;
}

struct ConnectivityTrial {
    std::size_t d = 0;
    double delta = 0.0;
    std::size_t points = 0;
    std::size_t trials = 0;
    std::size_t connected = 0;

    double frequency() const { return trials == 0 ? 0.0 : static_cast<double>(connected) / static_cast<double>(trials); }
};

/// Monte Carlo connectivity frequency of Delta-RGGs on S^d with `points` samples.
inline ConnectivityTrial rgg_connectivity_frequency(std::size_t d, double delta, std::size_t points, std::size_t trials,
                                                    std::uint64_t seed) {
    if (points < 1 || trials < 1) {
        throw InvalidParameters("connectivity Monte Carlo needs points >= 1 and trials >= 1");
    }
    ConnectivityTrial out{d, delta, points, trials, 0};
    for (std::size_t t = 0; t < trials; ++t) {
        const Matrix P = sample_sphere_points(d, points, derive_seed(seed, stream::trial, t));
        if (rgg_connected(build_delta_rgg(P, delta)).connected) {
            ++out.connected;
        }
    }
    return out;
}

}  // namespace osc
