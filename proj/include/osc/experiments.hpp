#pragma once

// Sweep harness for the synthetic studies: ROC trade-off, error vs k,
// affinity / density / noise surfaces, and their CSV form.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "osc/csv.hpp"
#include "osc/error.hpp"
#include "osc/geometry.hpp"
#include "osc/metrics.hpp"
#include "osc/parallel.hpp"
#include "osc/pipeline.hpp"
#include "osc/random.hpp"

namespace osc {

/// A regularizer family resolved against the data size. OWL slopes are given
/// by the head-to-tail weight ratio w_1 / lambda so one method spec scales
/// across N.
struct MethodSpec {
    enum class Kind { exact_l1, lasso, owl_ramp };

    std::string name;
    Kind kind = Kind::lasso;
    double lambda = 0.0;
    double w1_ratio = 2.0;  ///< owl_ramp only
    std::size_t r = 0;      ///< owl_ramp only; 0 means round(N / L)

    Regularizer resolve(std::size_t N, std::size_t L) const {
        switch (kind) {
        case Kind::exact_l1:
            return ExactL1{};
        case Kind::lasso:
            return Lasso{lambda};
        case Kind::owl_ramp: {
            if (!(w1_ratio >= 1.0)) {
                throw InvalidParameters("w1/lambda ratio must be at least 1");
            }
            RampParams p;
            p.lambda = lambda;
            p.r = r > 0 ? r
                        : std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(
                                                       static_cast<double>(N) / static_cast<double>(L))));
            p.r = std::min(p.r, N);
            p.delta = (w1_ratio - 1.0) * lambda / static_cast<double>(p.r);
            return OwlRamp{p};
        }
        }
        throw InvalidParameters("unknown method kind");
    }

    static MethodSpec lasso_method(double lambda) { return {"lasso", Kind::lasso, lambda, 1.0, 0}; }
    static MethodSpec owl_method(double lambda, double w1_ratio = 2.0) {
        return {"owl", Kind::owl_ramp, lambda, w1_ratio, 0};
    }
    static MethodSpec exact_l1_method() { return {"exact_l1", Kind::exact_l1, 0.0, 1.0, 0}; }
};

struct SweepOptions {
    std::size_t replications = 100;
    std::uint64_t seed = 42;
    SolverConfig solver;
    std::size_t threads = 0;
};

struct SweepCell {
    std::vector<double> axis;
    std::string method;
    std::string metric = "error";
    double mean = 0.0;
    double std = 0.0;
    std::size_t replications = 0;
    std::uint64_t seed = 0;
};

struct SweepResult {
    std::vector<std::string> axis_names;
    std::vector<SweepCell> cells;

    /// Cell lookup by method and exact axis values.
    const SweepCell* find(const std::string& method, const std::vector<double>& axis,
                          const std::string& metric = "error") const {
        for (const auto& c : cells) {
            if (c.method == method && c.axis == axis && c.metric == metric) {
                return &c;
            }
        }
        return nullptr;
    }
};

/// Sample mean and standard deviation (n - 1 denominator; 0 for one sample).
inline std::pair<double, double> mean_std(const std::vector<double>& v) {
    if (v.empty()) {
        return {0.0, 0.0};
    }
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    if (v.size() == 1) {
        return {mean, 0.0};
    }
    double ss = 0.0;
    for (const double x : v) {
        ss += (x - mean) * (x - mean);
    }
    return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

/// Seed for replication `rep`; run_osc with this seed draws the same seed set
/// and k-means streams as the sweep.
inline std::uint64_t replication_seed(std::uint64_t master, std::size_t rep) {
    return derive_seed(master, stream::replication, rep);
}

/// Coefficients of every column, computed once and subset per replication.
/// Each column's regression is independent of which other columns are
/// selected, so masking the full matrix equals running OSC on the subset.
inline CoefficientMatrix all_coefficients(const Matrix& X, const Regularizer& reg, const SweepOptions& opt,
                                          const std::vector<int>* truth = nullptr) {
    std::vector<std::size_t> all(static_cast<std::size_t>(X.cols()));
    std::iota(all.begin(), all.end(), std::size_t{0});
    return compute_coefficients(X, all, reg, opt.solver, truth, opt.threads);
}

inline CoefficientMatrix restrict_columns(const CoefficientMatrix& full, const std::vector<std::size_t>& seeds) {
    CoefficientMatrix out;
    out.B = Matrix::Zero(full.B.rows(), full.B.cols());
    out.computed_columns = seeds;
    for (const auto j : seeds) {
        out.B.col(static_cast<Eigen::Index>(j)) = full.B.col(static_cast<Eigen::Index>(j));
        const auto& d = full.diagnostics.at(j);
        out.diagnostics.push_back(d);
        out.failures += d.failed ? 1 : 0;
    }
    return out;
}

namespace detail {

/// Clustering errors for each (k, replication) given full coefficient matrices.
inline std::vector<std::vector<double>> replicate_errors(const CoefficientMatrix& full, const UnionOfSubspaces& u,
                                                         const Matrix& X, const std::vector<std::size_t>& ks,
                                                         const SweepOptions& opt) {
    const std::size_t reps = opt.replications;
    std::vector<std::vector<double>> errors(ks.size(), std::vector<double>(reps, 0.0));
    const auto N = static_cast<std::size_t>(X.cols());
    parallel_for(ks.size() * reps, opt.threads, [&](std::size_t task) {
        const std::size_t ki = task / reps;
        const std::size_t rep = task % reps;
        const std::uint64_t seed = replication_seed(opt.seed, rep);
        const auto seeds = select_seeds(N, ks[ki], seed);
        const CoefficientMatrix sub = restrict_columns(full, seeds);
        const ClusteringResult res = cluster_from_coefficients(sub, X, u.subspace_count(), seed, &u.labels);
        errors[ki][rep] = *res.clustering_error;
    });
    return errors;
}

inline void check_sweep(const std::vector<MethodSpec>& methods, const std::vector<std::size_t>& ks,
                        const SweepOptions& opt) {
    if (methods.empty()) {
        throw InvalidParameters("at least one method is required");
    }
    if (ks.empty()) {
        throw InvalidParameters("k grid is empty");
    }
    if (opt.replications < 1) {
        throw InvalidParameters("replications must be at least 1");
    }
}

/// Error-vs-k cells for data X with ground truth from `u`, prefixed by `prefix` axis values.
inline void append_error_cells(SweepResult& out, const UnionOfSubspaces& u, const Matrix& X,
                               const std::vector<MethodSpec>& methods, const std::vector<std::size_t>& ks,
                               const SweepOptions& opt, const std::vector<double>& prefix) {
    const auto N = static_cast<std::size_t>(X.cols());
    std::vector<std::size_t> valid;
    for (const auto k : ks) {
        if (k >= 1 && k <= N) {
            valid.push_back(k);
        }
    }
    for (const auto& m : methods) {
        const CoefficientMatrix full = all_coefficients(X, m.resolve(N, u.subspace_count()), opt, &u.labels);
        const auto errors = replicate_errors(full, u, X, valid, opt);
        for (std::size_t ki = 0; ki < valid.size(); ++ki) {
            SweepCell cell;
            cell.axis = prefix;
            cell.axis.push_back(static_cast<double>(valid[ki]));
            cell.method = m.name;
            std::tie(cell.mean, cell.std) = mean_std(errors[ki]);
            cell.replications = opt.replications;
            cell.seed = opt.seed;
            out.cells.push_back(std::move(cell));
        }
    }
}

}  // namespace detail

/// Mean and std of the clustering error per (method, k) over random seed subsets.
/// All methods see the same data and the same seed subsets.
inline SweepResult error_vs_k(const UnionOfSubspaces& u, const std::vector<MethodSpec>& methods,
                              const std::vector<std::size_t>& ks, const SweepOptions& opt) {
    detail::check_sweep(methods, ks, opt);
    for (const auto k : ks) {
        if (k < 1 || k > u.size()) {
            throw InvalidParameters("k=" + std::to_string(k) + " outside [1, " + std::to_string(u.size()) + "]");
        }
    }
    SweepResult out;
    out.axis_names = {"k"};
    detail::append_error_cells(out, u, u.X, methods, ks, opt, {});
    return out;
}

/// B2 unions at each target affinity (d-dimensional subspaces, rho points per dimension).
inline SweepResult affinity_sweep(std::size_t d, double rho, const std::vector<double>& alphas,
                                  const std::vector<MethodSpec>& methods, const std::vector<std::size_t>& ks,
                                  const SweepOptions& opt) {
    detail::check_sweep(methods, ks, opt);
    SweepResult out;
    out.axis_names = {"alpha", "k"};
    for (const double alpha : alphas) {
        const UnionOfSubspaces u = sample_union(generate_b2(d, alpha), rho, opt.seed);
        detail::append_error_cells(out, u, u.X, methods, ks, opt, {alpha});
    }
    return out;
}

/// B1 unions (fixed bases) sampled at each density rho. Cells with k > N are skipped.
inline SweepResult rho_sweep(std::size_t L, std::size_t d, std::size_t n, const std::vector<double>& rhos,
                             const std::vector<MethodSpec>& methods, const std::vector<std::size_t>& ks,
                             const SweepOptions& opt) {
    detail::check_sweep(methods, ks, opt);
    SweepResult out;
    out.axis_names = {"rho", "k"};
    const auto bases = generate_b1(L, d, n, opt.seed);
    for (const double rho : rhos) {
        const UnionOfSubspaces u = sample_union(bases, rho, opt.seed);
        detail::append_error_cells(out, u, u.X, methods, ks, opt, {rho});
    }
    return out;
}

/// One base union perturbed at each noise level; the perturbation directions
/// are shared across levels.
inline SweepResult noise_sweep(const UnionOfSubspaces& u, const std::vector<double>& sigmas,
                               const std::vector<MethodSpec>& methods, const std::vector<std::size_t>& ks,
                               const SweepOptions& opt) {
    detail::check_sweep(methods, ks, opt);
    SweepResult out;
    out.axis_names = {"sigma", "k"};
    for (const double sigma : sigmas) {
        if (!(sigma >= 0.0)) {
            throw InvalidParameters("noise level must be nonnegative");
        }
        const Matrix X = add_noise(u.X, NoiseConfig{sigma, derive_seed(opt.seed, stream::noise)});
        detail::append_error_cells(out, u, X, methods, ks, opt, {sigma});
    }
    return out;
}

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
    double fpr_std = 0.0;
    double tpr_std = 0.0;
    double lambda = 0.0;
    double delta = 0.0;
    std::string method;
    std::size_t points = 0;
};

struct RocGrid {
    std::vector<double> lambdas;
    std::vector<double> w1_ratios;  ///< ratio 1 is the Lasso
    bool include_exact_l1 = true;

    /// `count` values log-spaced over [lo, hi].
    static std::vector<double> log_space(double lo, double hi, std::size_t count) {
        std::vector<double> v;
        for (std::size_t i = 0; i < count; ++i) {
            const double t = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
            v.push_back(std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo))));
        }
        return v;
    }
};

/// Average (FPR, TPR) over `points` regressed columns for every grid cell.
inline std::vector<RocPoint> roc_sweep(const UnionOfSubspaces& u, const RocGrid& grid, std::size_t points,
                                       const SweepOptions& opt) {
    if (grid.lambdas.empty() || grid.w1_ratios.empty()) {
        throw InvalidParameters("ROC grid is empty");
    }
    const auto N = u.size();
    const auto seeds = select_seeds(N, std::min(points, N), derive_seed(opt.seed, stream::cell));

    std::vector<MethodSpec> cells;
    for (const double ratio : grid.w1_ratios) {
        for (const double lambda : grid.lambdas) {
            cells.push_back(ratio == 1.0 ? MethodSpec::lasso_method(lambda) : MethodSpec::owl_method(lambda, ratio));
        }
    }
    if (grid.include_exact_l1) {
        cells.push_back(MethodSpec::exact_l1_method());
    }

    std::vector<RocPoint> out;
    for (const auto& m : cells) {
        const Regularizer reg = m.resolve(N, u.subspace_count());
        const CoefficientMatrix co = compute_coefficients(u.X, seeds, reg, opt.solver, &u.labels, opt.threads);
        std::vector<double> f, t;
        for (const auto& d : co.diagnostics) {
            if (!d.failed && !std::isnan(d.fpr)) {
                f.push_back(d.fpr);
                t.push_back(d.tpr);
            }
        }
        RocPoint p;
        std::tie(p.fpr, p.fpr_std) = mean_std(f);
        std::tie(p.tpr, p.tpr_std) = mean_std(t);
        p.lambda = m.lambda;
        if (const auto* o = std::get_if<OwlRamp>(&reg)) {
            p.delta = o->ramp.delta;
        }
        p.method = m.name;
        p.points = f.size();
        out.push_back(p);
    }
    return out;
}

/// Pareto-optimal (FPR, TPR) vertices of the named method's points, sorted by
/// FPR with strictly increasing TPR, anchored at (0, 0).
inline std::vector<std::pair<double, double>> roc_envelope(const std::vector<RocPoint>& points,
                                                           const std::string& method) {
    std::vector<std::pair<double, double>> pts{{0.0, 0.0}};
    for (const auto& p : points) {
        if (p.method == method) {
            pts.emplace_back(p.fpr, p.tpr);
        }
    }
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
        return a.first < b.first || (a.first == b.first && a.second > b.second);
    });
    std::vector<std::pair<double, double>> env;
    for (const auto& p : pts) {
        if (env.empty() || p.second > env.back().second) {
            if (!env.empty() && env.back().first == p.first) {
                env.back().second = p.second;
            } else {
                env.push_back(p);
            }
        }
    }
    return env;
}

/// Envelope TPR at `fpr`, linear between vertices and flat past the last one.
inline double envelope_tpr(const std::vector<std::pair<double, double>>& env, double fpr) {
    if (env.empty()) {
        return 0.0;
    }
    if (fpr <= env.front().first) {
        return env.front().second;
    }
    for (std::size_t i = 1; i < env.size(); ++i) {
        if (fpr <= env[i].first) {
            const auto& [x0, y0] = env[i - 1];
            const auto& [x1, y1] = env[i];
            return y0 + (y1 - y0) * (fpr - x0) / (x1 - x0);
        }
    }
    return env.back().second;
}

/// ROC points as sweep cells (axes lambda, delta; metrics fpr and tpr).
inline SweepResult roc_to_sweep(const std::vector<RocPoint>& points, std::uint64_t seed) {
    SweepResult out;
    out.axis_names = {"lambda", "delta"};
    for (const auto& p : points) {
        out.cells.push_back({{p.lambda, p.delta}, p.method, "fpr", p.fpr, p.fpr_std, p.points, seed});
        out.cells.push_back({{p.lambda, p.delta}, p.method, "tpr", p.tpr, p.tpr_std, p.points, seed});
    }
    return out;
}

inline std::string sweep_csv_text(const SweepResult& result) {
    std::string out;
    for (const auto& name : result.axis_names) {
        out += csv::escape(name) + ',';
    }
    out += "method,metric,mean,std,replications,seed\n";
    for (const auto& c : result.cells) {
        if (c.axis.size() != result.axis_names.size()) {
            throw DimensionError("sweep cell has " + std::to_string(c.axis.size()) + " axis values, expected "
                                 + std::to_string(result.axis_names.size()));
        }
        for (const double a : c.axis) {
            out += csv::format_double(a) + ',';
        }
        out += csv::escape(c.method) + ',' + csv::escape(c.metric) + ',' + csv::format_double(c.mean) + ','
               + csv::format_double(c.std) + ',' + std::to_string(c.replications) + ',' + std::to_string(c.seed)
               + '\n';
    }
    return out;
}

inline void csv_export(const SweepResult& result, const std::filesystem::path& path) {
    csv::atomic_write(path, sweep_csv_text(result));
}

inline SweepResult csv_import(const std::filesystem::path& path) {
    const std::string source = path.string();
    const auto records = csv::parse(csv::read_file(path), source);
    if (records.empty()) {
        throw ParseError(source, 1, "missing header");
    }
    const auto& header = records.front().fields;
    if (header.size() < 6) {
        throw ParseError(source, 1, "header has too few columns");
    }
    SweepResult out;
    const std::size_t axes = header.size() - 6;
    out.axis_names.assign(header.begin(), header.begin() + static_cast<std::ptrdiff_t>(axes));
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (rec.fields.size() != header.size()) {
            throw ParseError(source, rec.line, "expected " + std::to_string(header.size()) + " fields");
        }
        SweepCell c;
        for (std::size_t a = 0; a < axes; ++a) {
            c.axis.push_back(csv::parse_double(rec.fields[a], source, rec.line));
        }
        c.method = rec.fields[axes];
        c.metric = rec.fields[axes + 1];
        c.mean = csv::parse_double(rec.fields[axes + 2], source, rec.line);
        c.std = csv::parse_double(rec.fields[axes + 3], source, rec.line);
        try {
            c.replications = std::stoull(rec.fields[axes + 4]);
            c.seed = std::stoull(rec.fields[axes + 5]);
        } catch (const std::exception&) {
            throw ParseError(source, rec.line, "invalid integer field");
        }
        out.cells.push_back(std::move(c));
    }
    return out;
}

}  // namespace osc
