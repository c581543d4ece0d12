#pragma once

// Executable property suites: prox oracle agreement, OWL coefficient
// clustering, RGG connectivity, no-false-discovery and top-group size.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "osc/error.hpp"
#include "osc/geometry.hpp"
#include "osc/oracles.hpp"
#include "osc/owl.hpp"
#include "osc/parallel.hpp"
#include "osc/params.hpp"
#include "osc/random.hpp"
#include "osc/rgg.hpp"
#include "osc/solvers.hpp"

namespace osc::props {

/// Relative tolerance for "equal magnitude" checks on solver output.
inline constexpr double magnitude_rtol = 1e-4;

struct Check {
    std::string name;
    double measured = 0.0;
    double threshold = 0.0;
    bool at_least = true;  ///< pass iff measured >= threshold (else <=)

    bool passed() const { return at_least ? measured >= threshold : measured <= threshold; }
};

struct Report {
    std::string suite;
    std::vector<Check> checks;

    bool passed() const {
        return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed(); });
    }

    std::string text() const {
        std::ostringstream out;
        out.precision(6);
        for (const auto& c : checks) {
            out << (c.passed() ? "PASS " : "FAIL ") << suite << ' ' << c.name << ": " << c.measured
                << (c.at_least ? " >= " : " <= ") << c.threshold << '\n';
        }
        return out.str();
    }
};

/// Solver settings for property checks, tighter than the pipeline defaults.
inline SolverConfig tight_solver() {
    SolverConfig cfg;
    cfg.max_iterations = 20000;
    cfg.rel_tolerance = 1e-13;
    return cfg;
}

/// Random nonincreasing weights with w_1 > 0, sometimes with ties and zeros.
inline Vector random_weights(std::size_t n, Rng& rng) {
    std::uniform_real_distribution<double> unit(0.0, 2.0);
    std::bernoulli_distribution tie(0.25);
    std::vector<double> w(n);
    for (auto& x : w) {
        x = unit(rng);
    }
    std::sort(w.begin(), w.end(), std::greater<>());
    for (std::size_t i = 1; i < n; ++i) {
        if (tie(rng)) {
            w[i] = w[i - 1];
        }
    }
    if (std::bernoulli_distribution(0.2)(rng)) {
        w[n - 1] = 0.0;
    }
    w[0] = std::max(w[0], 1e-3);
    return Eigen::Map<Vector>(w.data(), static_cast<Eigen::Index>(n));
}

/// prox_owl against exhaustive face enumeration on random (v, w), n <= n_max.
inline Report prox_oracle_suite(std::size_t n_max, std::size_t trials, std::uint64_t seed) {
    if (n_max < 1 || n_max > 8) {
        throw InvalidParameters("prox-oracle supports n in [1, 8]");
    }
    double worst = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
        Rng rng = make_rng(seed, stream::trial, t);
        const std::size_t n = std::uniform_int_distribution<std::size_t>(1, n_max)(rng);
        const Vector w = random_weights(n, rng);
        std::normal_distribution<double> normal(0.0, 2.0);
        Vector v(static_cast<Eigen::Index>(n));
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            v[i] = normal(rng);
        }
        if (n > 1 && std::bernoulli_distribution(0.2)(rng)) {
            v[1] = -v[0];  // tied magnitudes
        }
        const Vector expected = oracle::prox_owl_enumerate(v, w);
        const Vector got = prox_owl(v, WeightVector(w));
        worst = std::max(worst, (expected - got).cwiseAbs().maxCoeff());
    }
    return {"prox-oracle", {{"max deviation over " + std::to_string(trials) + " trials", worst, 1e-6, false}}};
}

/// Coefficient clustering: with OSCAR weights (gap delta), every column pair
/// closer than delta/|y| receives equal coefficient magnitudes.
inline Report lemma1_suite(std::size_t instances, std::uint64_t seed, std::size_t threads = 0) {
    constexpr std::size_t n = 10;
    constexpr std::size_t groups = 6;
    constexpr std::size_t copies = 3;
    constexpr std::size_t N = groups * copies;
    constexpr double lambda = 0.02;
    constexpr double gap = 0.02;

    std::vector<double> worst(instances, 0.0);
    std::vector<std::size_t> pairs(instances, 0);
    std::vector<bool> nontrivial(instances, false);
    parallel_for(instances, threads, [&](std::size_t t) {
        Rng rng = make_rng(seed, stream::trial, t);
        std::uniform_real_distribution<double> spread(0.0, 0.9);
        Matrix X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(N));
        for (std::size_t g = 0; g < groups; ++g) {
            const Vector center = sample_sphere_uniform(n, rng);
            for (std::size_t c = 0; c < copies; ++c) {
                // Jitter of radius below half the gap keeps each group within the clustering radius.
                Vector x = center + spread(rng) * 0.5 * gap * sample_sphere_uniform(n, rng);
                X.col(static_cast<Eigen::Index>(g * copies + c)) = x.normalized();
            }
        }
        const Vector y = sample_sphere_uniform(n, rng);
        const WeightVector w = make_ramp_weights({lambda, gap, N}, N);
        const SolverResult res = solve_owl(X, y, w, tight_solver());
        const double scale = std::max(1.0, res.beta.cwiseAbs().maxCoeff());
        nontrivial[t] = res.beta.cwiseAbs().maxCoeff() > 0.0;
        const double radius = min_gap(w) / y.norm();
        for (Eigen::Index i = 0; i < X.cols(); ++i) {
            for (Eigen::Index j = i + 1; j < X.cols(); ++j) {
                if ((X.col(i) - X.col(j)).norm() < radius) {
                    ++pairs[t];
                    worst[t] = std::max(worst[t], std::abs(std::abs(res.beta[i]) - std::abs(res.beta[j])) / scale);
                }
            }
        }
    });
    Report r{"lemma1", {}};
    std::size_t total_pairs = 0;
    for (const auto p : pairs) {
        total_pairs += p;
    }
    r.checks.push_back({"close pairs examined", static_cast<double>(total_pairs), 1.0, true});
    r.checks.push_back({"nontrivial instances", static_cast<double>(std::count(nontrivial.begin(), nontrivial.end(), true)),
                        static_cast<double>(instances) / 2.0, true});
    r.checks.push_back({"max relative magnitude gap in close pairs", *std::max_element(worst.begin(), worst.end()),
                        magnitude_rtol, false});
    return r;
}

/// Delta-RGG connectivity when the sample size follows the bound.
inline Report lemma4_suite(const std::vector<std::size_t>& dims, const std::vector<double>& deltas, double prob,
                           std::size_t trials, const TheoremBounds& bounds, std::uint64_t seed) {
    Report r{"lemma4", {}};
    std::size_t cell = 0;
    for (const auto d : dims) {
        for (const double delta : deltas) {
            const std::size_t N = rgg_sample_bound(delta, d, prob, bounds);
            const auto res = rgg_connectivity_frequency(d, delta, N, trials, derive_seed(seed, stream::cell, cell++));
            std::ostringstream name;
            name << "d=" << d << " delta=" << delta << " N=" << N << " connected frequency";
            r.checks.push_back({name.str(), res.frequency(), 1.0 - prob, true});
        }
    }
    return r;
}

/// Right-hand side of the no-false-discovery affinity condition.
inline double no_false_discovery_bound(const WeightVector& w, std::size_t N_l, std::size_t d_l, std::size_t N,
                                       const TheoremBounds& bounds) {
    return bounds.kappa0 * (w.tail_mean(N_l) / w.head())
           * std::sqrt(std::log(static_cast<double>(N_l) / static_cast<double>(d_l))) / std::log(static_cast<double>(N));
}

struct Theorem1Params {
    std::size_t d = 5;
    double rho = 5.0;
    double w1_ratio = 2.0;
    std::size_t draws = 100;
};

struct Theorem1Outcome {
    double alpha = 0.0;
    double false_discovery_frequency = 0.0;
    double nontrivial_frequency = 0.0;
};

/// B2 unions at affinity `alpha`; one regression of a random S1 column per draw.
inline Theorem1Outcome false_discovery_frequency(const Theorem1Params& p, double alpha, std::uint64_t seed,
                                                 std::size_t threads = 0) {
    const std::size_t N_l = static_cast<std::size_t>(std::lround(p.rho * static_cast<double>(p.d)));
    const std::size_t N = 3 * N_l;
    const double lambda = 0.25 / std::sqrt(static_cast<double>(p.d));
    RampParams ramp{lambda, (p.w1_ratio - 1.0) * lambda / static_cast<double>(N_l), N_l};
    const WeightVector w = make_ramp_weights(ramp, N);
    const auto bases = generate_b2(p.d, alpha);
    std::vector<int> fd(p.draws, 0), nz(p.draws, 0);
    parallel_for(p.draws, threads, [&](std::size_t t) {
        const UnionOfSubspaces u = sample_union(bases, p.rho, derive_seed(seed, stream::trial, t));
        Rng rng = make_rng(seed, stream::seeds, t);
        const std::size_t j = std::uniform_int_distribution<std::size_t>(0, N_l - 1)(rng);  // S1 occupies [0, N_l)
        Matrix design = u.X;
        design.col(static_cast<Eigen::Index>(j)).setZero();
        const SolverResult res = solve_owl(design, u.X.col(static_cast<Eigen::Index>(j)), w, tight_solver());
        const auto support = support_mask(res.beta);
        bool any = false;
        for (std::size_t i = N_l; i < N; ++i) {
            any = any || support[i];
        }
        fd[t] = any ? 1 : 0;
        nz[t] = res.beta.cwiseAbs().maxCoeff() > 0.0 ? 1 : 0;
    });
    const double draws = static_cast<double>(p.draws);
    return {alpha, std::count(fd.begin(), fd.end(), 1) / draws, std::count(nz.begin(), nz.end(), 1) / draws};
}

/// No false discovery at the largest affinity the condition admits.
inline Report theorem1_suite(const Theorem1Params& p, const TheoremBounds& bounds, std::uint64_t seed,
                             std::size_t threads = 0) {
    bounds.validate();
    const std::size_t N_l = static_cast<std::size_t>(std::lround(p.rho * static_cast<double>(p.d)));
    const std::size_t N = 3 * N_l;
    const double lambda = 0.25 / std::sqrt(static_cast<double>(p.d));
    const WeightVector w =
        make_ramp_weights({lambda, (p.w1_ratio - 1.0) * lambda / static_cast<double>(N_l), N_l}, N);
    const double alpha = std::min(1.0, no_false_discovery_bound(w, N_l, p.d, N, bounds));
    const Theorem1Outcome out = false_discovery_frequency(p, alpha, seed, threads);
    Report r{"theorem1", {}};
    std::ostringstream name;
    name << "alpha=" << alpha << " false-discovery frequency";
    r.checks.push_back({name.str(), out.false_discovery_frequency, 0.01, false});
    r.checks.push_back({"nontrivial frequency", out.nontrivial_frequency, 0.5, true});
    return r;
}

struct Theorem2Params {
    std::vector<std::size_t> dims{2, 3};
    double delta = 0.5;
    double prob = 0.1;
    double lambda = 0.05;
    std::size_t r = 20;
    std::size_t trials = 100;
};

/// Size of the maximal-magnitude set on orthogonal unions whose per-subspace
/// sample size satisfies the bound.
inline Report theorem2_suite(const Theorem2Params& p, const TheoremBounds& bounds, std::uint64_t seed,
                             std::size_t threads = 0) {
    Report r{"theorem2", {}};
    for (const auto d : p.dims) {
        const std::size_t N_l = rgg_sample_bound(p.delta, d, p.prob, bounds) + 1;
        const std::size_t L = 3;
        const std::size_t N = L * N_l;
        const std::size_t ramp_len = std::min(p.r, N_l);
        const WeightVector w = make_ramp_weights({p.lambda, p.delta, ramp_len}, N);
        std::vector<int> ok(p.trials, 0), nz(p.trials, 0);
        parallel_for(p.trials, threads, [&](std::size_t t) {
            const std::uint64_t s = derive_seed(seed, stream::trial, t * 8 + d);
            const UnionOfSubspaces u =
                sample_union(generate_orthogonal(L, d, L * d, s), std::vector<std::size_t>(L, N_l), s);
            Rng rng = make_rng(s, stream::seeds);
            const std::size_t j = std::uniform_int_distribution<std::size_t>(0, N - 1)(rng);
            Matrix design = u.X;
            design.col(static_cast<Eigen::Index>(j)).setZero();
            const SolverResult res = solve_owl(design, u.X.col(static_cast<Eigen::Index>(j)), w, tight_solver());
            const double peak = res.beta.cwiseAbs().maxCoeff();
            nz[t] = peak > 0.0 ? 1 : 0;
            std::size_t top = 0;
            for (Eigen::Index i = 0; i < res.beta.size(); ++i) {
                top += std::abs(res.beta[i]) >= peak * (1.0 - magnitude_rtol) ? 1 : 0;
            }
            ok[t] = top >= ramp_len ? 1 : 0;
        });
        const double trials = static_cast<double>(p.trials);
        std::ostringstream name;
        name << "d=" << d << " N_l=" << N_l << " r=" << ramp_len << " |M|>=r frequency";
        r.checks.push_back({name.str(), std::count(ok.begin(), ok.end(), 1) / trials, 0.95, true});
        r.checks.push_back({"d=" + std::to_string(d) + " nontrivial frequency",
                            std::count(nz.begin(), nz.end(), 1) / trials, 0.5, true});
    }
    return r;
}

}  // namespace osc::props
