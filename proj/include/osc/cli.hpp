#pragma once

// Command dispatch for the osc executable. Configuration is a flat key/value
// map merged from (lowest to highest precedence) built-in defaults, a JSON
// file, --set overrides and the dedicated flags.

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "osc/csv.hpp"
#include "osc/error.hpp"
#include "osc/experiments.hpp"
#include "osc/geometry.hpp"
#include "osc/matrix_io.hpp"
#include "osc/params.hpp"
#include "osc/pipeline.hpp"
#include "osc/properties.hpp"

namespace osc::cli {

namespace exit_code {
inline constexpr int success = 0;
inline constexpr int property_failure = 1;
inline constexpr int usage = 2;
inline constexpr int io = 3;
}  // namespace exit_code

class UsageError : public Error {
public:
    using Error::Error;
};

enum class Command { generate, cluster, sweep, validate };

inline Command parse_command(const std::string& name) {
    if (name == "generate") {
        return Command::generate;
    }
    if (name == "cluster") {
        return Command::cluster;
    }
    if (name == "sweep") {
        return Command::sweep;
    }
    if (name == "validate") {
        return Command::validate;
    }
    throw UsageError("unknown command '" + name + "' (expected generate, cluster, sweep or validate)");
}

struct RunSpec {
    Command command = Command::cluster;
    std::optional<std::filesystem::path> config_path;
    std::optional<std::filesystem::path> output_path;
    std::optional<std::uint64_t> seed;  ///< --seed; the resolved master seed defaults to 42
    std::optional<std::size_t> replications;
    std::map<std::string, std::string> overrides;  ///< --set key=value, later wins
    std::optional<std::string> suite;              ///< validate only
};

/// Splits "key=value"; the key must be nonempty.
inline std::pair<std::string, std::string> split_assignment(const std::string& s) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw UsageError("expected key=value, got '" + s + "'");
    }
    return {s.substr(0, eq), s.substr(eq + 1)};
}

/// Reads a flat JSON object. Arrays of scalars become comma-separated lists.
inline std::map<std::string, std::string> load_config(const std::filesystem::path& path) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(csv::read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw UsageError("config " + path.string() + ": " + e.what());
    }
    if (!doc.is_object()) {
        throw UsageError("config " + path.string() + ": top level must be an object");
    }
    auto scalar = [&](const std::string& key, const nlohmann::json& v) -> std::string {
        if (v.is_string()) {
            return v.get<std::string>();
        }
        if (v.is_boolean()) {
            return v.get<bool>() ? "1" : "0";
        }
        if (v.is_number_integer() || v.is_number_unsigned()) {
            return v.dump();
        }
        if (v.is_number_float()) {
            return csv::format_double(v.get<double>());
        }
        throw UsageError("config " + path.string() + ": field '" + key + "' must be a scalar or a list of scalars");
    };
    std::map<std::string, std::string> out;
    for (const auto& [key, v] : doc.items()) {
        if (v.is_array()) {
            std::string joined;
            for (const auto& item : v) {
                joined += (joined.empty() ? "" : ",") + scalar(key, item);
            }
            out[key] = joined;
        } else {
            out[key] = scalar(key, v);
        }
    }
    return out;
}

/// Effective parameters for a run, with the master seed under "seed".
inline Params resolve_params(const RunSpec& spec) {
    std::map<std::string, std::string> merged;
    if (spec.config_path) {
        merged = load_config(*spec.config_path);
    }
    for (const auto& [k, v] : spec.overrides) {
        merged[k] = v;
    }
    if (spec.seed) {
        merged["seed"] = std::to_string(*spec.seed);
    }
    if (spec.replications) {
        merged["replications"] = std::to_string(*spec.replications);
    }
    return Params(std::move(merged));
}

namespace detail {

inline std::uint64_t master_seed(const Params& p) {
    const std::string s = p.text("seed", "42");
    try {
        std::size_t used = 0;
        const auto v = std::stoull(s, &used);
        if (used == s.size() && s.front() != '-') {
            return v;
        }
    } catch (const std::exception&) {
    }
    throw UsageError("field 'seed' must be a nonnegative integer, got '" + s + "'");
}

inline std::size_t required_count(const Params& p, const std::string& key) {
    if (!p.has(key)) {
        throw UsageError("missing required field '" + key + "'");
    }
    return p.count(key, 0);
}

inline std::filesystem::path output_path(const RunSpec& spec) {
    if (!spec.output_path) {
        throw UsageError("missing required output path (--out)");
    }
    return *spec.output_path;
}

/// `labels.csv` -> `labels.<suffix>.csv`
inline std::filesystem::path sibling(const std::filesystem::path& out, const std::string& suffix) {
    std::filesystem::path p = out;
    const std::string ext = out.has_extension() ? out.extension().string() : ".csv";
    p.replace_filename(out.stem().string() + "." + suffix + ext);
    return p;
}

inline SolverConfig solver_config(const Params& p) {
    SolverConfig s;
    s.max_iterations = p.count("max_iterations", s.max_iterations);
    s.rel_tolerance = p.number("tolerance", s.rel_tolerance);
    s.validate();
    return s;
}

inline void check_unused(const Params& p) {
    const auto extra = p.unused();
    if (!extra.empty()) {
        std::string names;
        for (const auto& k : extra) {
            names += (names.empty() ? "'" : ", '") + k + "'";
        }
        throw UsageError("unknown configuration field(s) " + names);
    }
}

/// Synthetic union from the generator fields. `default_L` of 0 makes L required.
inline UnionOfSubspaces generate_union(const Params& p, std::uint64_t seed, std::size_t default_L) {
    const std::string kind = p.text("generator", "b1");
    UnionOfSubspaces u;
    if (kind == "b1" || kind == "orthogonal") {
        const std::size_t L = default_L == 0 ? required_count(p, "L") : p.count("L", default_L);
        const std::size_t d = p.count("d", kind == "b1" ? 20 : 5);
        const std::size_t n = p.count("n", kind == "b1" ? 40 : L * d);
        auto bases = kind == "b1" ? generate_b1(L, d, n, seed) : generate_orthogonal(L, d, n, seed);
        if (p.has("points_per_subspace")) {
            u = sample_union(std::move(bases), std::vector<std::size_t>(L, p.count("points_per_subspace", 0)), seed);
        } else {
            u = sample_union(std::move(bases), p.number("rho", kind == "b1" ? 5.0 : 10.0), seed);
        }
    } else if (kind == "b2") {
        if (p.has("L") && p.count("L", 3) != 3) {
            throw UsageError("field 'L' must be 3 for the b2 generator");
        }
        u = sample_union(generate_b2(p.count("d", 5), p.number("alpha", 0.75)), p.number("rho", 5.0), seed);
    } else {
        throw UsageError("field 'generator' must be b1, b2 or orthogonal, got '" + kind + "'");
    }
    const double sigma = p.number("sigma", 0.0);
    if (sigma > 0.0) {
        u.X = add_noise(u.X, NoiseConfig{sigma, derive_seed(seed, stream::noise)});
    }
    return u;
}

/// Subspace dimension the default lambda is scaled by.
inline std::size_t generator_dim(const UnionOfSubspaces& u) { return u.bases.front().dim(); }

inline MethodSpec method_spec(const std::string& name, double lambda, const Params& p) {
    if (name == "owl") {
        MethodSpec m = MethodSpec::owl_method(lambda, p.number("w1_ratio", 2.0));
        m.r = p.count("r", 0);
        return m;
    }
    if (name == "lasso") {
        return MethodSpec::lasso_method(lambda);
    }
    if (name == "exact_l1") {
        return MethodSpec::exact_l1_method();
    }
    throw UsageError("unknown method '" + name + "' (expected owl, lasso or exact_l1)");
}

inline std::vector<std::string> split_names(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item.erase(std::remove(item.begin(), item.end(), ' '), item.end());
        if (!item.empty()) {
            out.push_back(item);
        }
    }
    return out;
}

inline std::string diagnostics_csv_text(const ClusteringResult& r) {
    std::string out = "seed_index,fpr,tpr,iterations,converged,failed,residual_norm,clustering_error,message\n";
    const std::string err = r.clustering_error ? csv::format_double(*r.clustering_error) : "";
    for (const auto& d : r.per_seed_diagnostics) {
        out += std::to_string(d.index) + ',' + csv::format_double(d.fpr) + ',' + csv::format_double(d.tpr) + ','
               + std::to_string(d.iterations) + ',' + (d.converged ? "1" : "0") + ',' + (d.failed ? "1" : "0") + ','
               + csv::format_double(d.residual_norm) + ',' + err + ',' + csv::escape(d.error) + '\n';
    }
    return out;
}

}  // namespace detail

inline int generate_command(const RunSpec& spec, const Params& p, std::ostream& out) {
    const std::uint64_t seed = detail::master_seed(p);
    const UnionOfSubspaces u = detail::generate_union(p, seed, 0);
    detail::check_unused(p);
    const auto path = detail::output_path(spec);
    const auto labels_path = detail::sibling(path, "labels");
    write_matrix_csv(u.X, path);
    write_labels_csv(u.labels, labels_path);
    out << "wrote " << u.size() << " points in R^" << u.X.rows() << " to " << path.string() << " and labels to "
        << labels_path.string() << '\n';
    return exit_code::success;
}

inline int cluster_command(const RunSpec& spec, const Params& p, std::ostream& out) {
    const std::uint64_t seed = detail::master_seed(p);
    const bool b2 = !p.has("data") && p.text("generator", "b1") == "b2";
    const std::size_t L = b2 ? p.count("L", 3) : detail::required_count(p, "L");

    Matrix X;
    std::optional<std::vector<int>> truth;
    std::optional<std::size_t> subspace_dim;
    if (p.has("data")) {
        X = read_matrix_csv(p.text("data", ""));
        if (p.has("labels")) {
            truth = read_labels_csv(p.text("labels", ""));
            if (truth->size() != static_cast<std::size_t>(X.cols())) {
                throw UsageError("field 'labels': " + std::to_string(truth->size()) + " labels for "
                                 + std::to_string(X.cols()) + " points");
            }
        }
    } else {
        const UnionOfSubspaces u = detail::generate_union(p, seed, 0);
        X = u.X;
        truth = u.labels;
        subspace_dim = detail::generator_dim(u);
    }
    const auto N = static_cast<std::size_t>(X.cols());

    OscConfig cfg;
    cfg.num_clusters = L;
    cfg.seed = seed;
    cfg.k = p.count("k", N);
    cfg.solver = detail::solver_config(p);
    cfg.threads = p.count("threads", 0);
    const std::string method = p.text("method", "owl");
    if (method != "exact_l1" && !subspace_dim && !p.has("lambda")) {
        throw UsageError("missing required field 'lambda' (no generator to derive a default from)");
    }
    const double lambda = p.number("lambda", subspace_dim ? default_lambda(*subspace_dim) : 0.0);
    if (method == "owl" && !subspace_dim && !p.has("w1_ratio")) {
        cfg.regularizer = OwlRamp{real_data_ramp(X, lambda, select_seeds(N, std::min<std::size_t>(N, 20), seed))};
    } else {
        cfg.regularizer = detail::method_spec(method, lambda, p).resolve(N, L);
    }
    detail::check_unused(p);

    const ClusteringResult r = run_osc(X, cfg, truth ? &*truth : nullptr);
    const auto path = detail::output_path(spec);
    write_labels_csv(r.predicted_labels, path);
    csv::atomic_write(detail::sibling(path, "diagnostics"), detail::diagnostics_csv_text(r));
    out << regularizer_name(cfg.regularizer) << ": " << N << " points, k=" << cfg.k << ", failures=" << r.failures;
    if (r.clustering_error) {
        out << ", clustering error=" << *r.clustering_error;
    }
    out << '\n';
    return exit_code::success;
}

inline int sweep_command(const RunSpec& spec, const Params& p, std::ostream& out, std::ostream& log) {
    const std::uint64_t seed = detail::master_seed(p);
    if (!p.has("kind")) {
        throw UsageError("missing required field 'kind'");
    }
    const std::string kind = p.text("kind", "");
    SweepOptions opt;
    opt.seed = seed;
    opt.replications = p.count("replications", opt.replications);
    opt.solver = detail::solver_config(p);
    opt.threads = p.count("threads", 0);

    auto methods_for = [&](std::size_t d) {
        const double lambda = p.number("lambda", default_lambda(d));
        std::vector<MethodSpec> ms;
        for (const auto& name : detail::split_names(p.text("methods", "owl,lasso"))) {
            ms.push_back(detail::method_spec(name, lambda, p));
        }
        return ms;
    };
    auto progress = [&](const std::string& what) { log << "sweep " << kind << ": " << what << std::endl; };

    SweepResult result;
    if (kind == "error_vs_k" || kind == "noise" || kind == "roc") {
        const UnionOfSubspaces u = detail::generate_union(p, seed, 3);
        const std::size_t d = detail::generator_dim(u);
        if (kind == "roc") {
            RocGrid grid;
            grid.lambdas = RocGrid::log_space(p.number("lambda_min", 1e-3), p.number("lambda_max", 2.0),
                                              p.count("lambda_count", 10));
            grid.w1_ratios = p.list("w1_ratios", {1.0, 1.25, 1.5, 2.0, 3.0, 5.0});
            grid.include_exact_l1 = p.number("exact_l1", 1.0) != 0.0;
            const std::size_t points = p.count("points", 100);
            detail::check_unused(p);
            progress(std::to_string(grid.lambdas.size() * grid.w1_ratios.size() + (grid.include_exact_l1 ? 1 : 0))
                     + " grid cells over " + std::to_string(points) + " points");
            result = roc_to_sweep(roc_sweep(u, grid, points, opt), seed);
        } else if (kind == "error_vs_k") {
            const auto ms = methods_for(d);
            const auto ks = p.counts("ks", {10, 20, 40, 80, 150, 300});
            detail::check_unused(p);
            progress(std::to_string(ms.size() * ks.size()) + " cells x " + std::to_string(opt.replications)
                     + " replications");
            result = error_vs_k(u, ms, ks, opt);
        } else {
            const auto ms = methods_for(d);
            const auto ks = p.counts("ks", {10});
            const auto sigmas = p.list("sigmas", {0.0, 0.1, 0.2, 0.3, 0.4, 0.5});
            detail::check_unused(p);
            result.axis_names = {"sigma", "k"};
            for (const double sigma : sigmas) {
                progress("sigma=" + csv::format_double(sigma));
                const auto part = noise_sweep(u, {sigma}, ms, ks, opt);
                result.cells.insert(result.cells.end(), part.cells.begin(), part.cells.end());
            }
        }
    } else if (kind == "affinity") {
        const std::size_t d = p.count("d", 5);
        const double rho = p.number("rho", 5.0);
        const auto ms = methods_for(d);
        const auto alphas = p.list("alphas", {0.75, 0.85, 0.95, 1.0});
        const auto ks = p.counts("ks", {5, 10, 20, 40, 75});
        detail::check_unused(p);
        result.axis_names = {"alpha", "k"};
        for (const double alpha : alphas) {
            progress("alpha=" + csv::format_double(alpha));
            const auto part = affinity_sweep(d, rho, {alpha}, ms, ks, opt);
            result.cells.insert(result.cells.end(), part.cells.begin(), part.cells.end());
        }
    } else if (kind == "rho") {
        const std::size_t L = p.count("L", 3);
        const std::size_t d = p.count("d", 20);
        const std::size_t n = p.count("n", 40);
        const auto ms = methods_for(d);
        const auto rhos = p.list("rhos", {1.0, 2.0, 3.0, 4.0, 5.0});
        const auto ks = p.counts("ks", {10, 20, 40, 80});
        detail::check_unused(p);
        result.axis_names = {"rho", "k"};
        for (const double rho : rhos) {
            progress("rho=" + csv::format_double(rho));
            const auto part = rho_sweep(L, d, n, {rho}, ms, ks, opt);
            result.cells.insert(result.cells.end(), part.cells.begin(), part.cells.end());
        }
    } else {
        throw UsageError("field 'kind' must be roc, error_vs_k, affinity, rho or noise, got '" + kind + "'");
    }

    const auto path = detail::output_path(spec);
    csv_export(result, path);
    progress("wrote " + std::to_string(result.cells.size()) + " rows to " + path.string());
    out << result.cells.size() << " rows written to " << path.string() << '\n';
    return exit_code::success;
}

inline int validate_command(const RunSpec& spec, const Params& p, std::ostream& out) {
    const std::uint64_t seed = detail::master_seed(p);
    const std::string suite = spec.suite ? *spec.suite : p.text("suite", "");
    if (suite.empty()) {
        throw UsageError("missing required field 'suite'");
    }
    const std::size_t threads = p.count("threads", 0);
    TheoremBounds bounds;
    bounds.kappa0 = p.number("kappa0", bounds.kappa0);
    bounds.kappa1 = p.number("kappa1", bounds.kappa1);
    bounds.validate();

    std::vector<props::Report> reports;
    if (suite == "prox-oracle") {
        reports.push_back(props::prox_oracle_suite(p.count("n", 5), p.count("trials", 1000), seed));
    } else if (suite == "lemma1") {
        reports.push_back(props::lemma1_suite(p.count("instances", 100), seed, threads));
    } else if (suite == "lemma4") {
        reports.push_back(props::lemma4_suite(p.counts("d", {1, 2, 3}), p.list("delta", {0.5, 0.8}),
                                              p.number("prob", 0.1), p.count("trials", 200), bounds, seed));
    } else if (suite == "theorem1") {
        props::Theorem1Params tp;
        tp.d = p.count("d", tp.d);
        tp.rho = p.number("rho", tp.rho);
        tp.draws = p.count("draws", tp.draws);
        for (const double ratio : p.list("w1_ratio", {1.0, 2.0, 4.0})) {
            tp.w1_ratio = ratio;
            reports.push_back(props::theorem1_suite(tp, bounds, seed, threads));
        }
    } else if (suite == "theorem2") {
        props::Theorem2Params tp;
        tp.dims = p.counts("d", tp.dims);
        tp.delta = p.number("delta", tp.delta);
        tp.prob = p.number("prob", tp.prob);
        tp.lambda = p.number("lambda", tp.lambda);
        tp.r = p.count("r", tp.r);
        tp.trials = p.count("trials", tp.trials);
        reports.push_back(props::theorem2_suite(tp, bounds, seed, threads));
    } else {
        throw UsageError("unknown suite '" + suite + "' (expected prox-oracle, lemma1, lemma4, theorem1 or theorem2)");
    }
    detail::check_unused(p);

    std::string text;
    bool passed = true;
    for (const auto& r : reports) {
        text += r.text();
        passed = passed && r.passed();
    }
    out << text;
    if (spec.output_path) {
        csv::atomic_write(*spec.output_path, text);
    }
    return passed ? exit_code::success : exit_code::property_failure;
}

/// Runs one command, reporting errors on `err`; returns the process exit code.
inline int run(const RunSpec& spec, std::ostream& out, std::ostream& err) {
    try {
        const Params p = resolve_params(spec);
        switch (spec.command) {
        case Command::generate:
            return generate_command(spec, p, out);
        case Command::cluster:
            return cluster_command(spec, p, out);
        case Command::sweep:
            return sweep_command(spec, p, out, err);
        case Command::validate:
            return validate_command(spec, p, out);
        }
        return exit_code::usage;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return exit_code::usage;
    } catch (const InvalidParameters& e) {
        err << "invalid configuration: " << e.what() << '\n';
        return exit_code::usage;
    } catch (const IoError& e) {
        err << "i/o error: " << e.what() << '\n';
        return exit_code::io;
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << '\n';
        return exit_code::io;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code::property_failure;
    }
}

}  // namespace osc::cli
