#include <catch_amalgamated.hpp>

#include <random>

#include "osc/geometry.hpp"
#include "osc/oracles.hpp"
#include "osc/owl.hpp"
#include "osc/pipeline.hpp"
#include "osc/properties.hpp"
#include "osc/solvers.hpp"

using namespace osc;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Matrix col_major(Eigen::Index rows, Eigen::Index cols, std::initializer_list<double> values) {
    if (static_cast<Eigen::Index>(values.size()) != rows * cols) {
        throw DimensionError("reference matrix literal has the wrong size");
    }
    Matrix M(rows, cols);
    std::copy(values.begin(), values.end(), M.data());
    return M;
}

Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    std::copy(v.begin(), v.end(), out.data());
    return out;
}

Matrix random_unit_design(Eigen::Index n, Eigen::Index N, Rng& rng) {
    std::normal_distribution<double> g;
    Matrix X(n, N);
    for (Eigen::Index i = 0; i < X.size(); ++i) {
        X.data()[i] = g(rng);
    }
    X.colwise().normalize();
    return X;
}

Vector random_unit(Eigen::Index n, Rng& rng) {
    std::normal_distribution<double> g;
    Vector y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        y[i] = g(rng);
    }
    return y.normalized();
}

double owl_objective(const Matrix& X, const Vector& y, const Vector& beta, const WeightVector& w) {
    return 0.5 * (y - X * beta).squaredNorm() + owl_norm(beta, w);
}

SolverConfig precise() {
    SolverConfig cfg;
    cfg.max_iterations = 200000;
    cfg.rel_tolerance = 1e-15;
    return cfg;
}

// Frozen reference: 6x8 unit-column design solved offline with a conic solver
// (sum-of-largest reformulation of the OWL norm).
const Matrix kOwlX = col_major(6, 8, {
    -0.07628282120302908, -0.70488446690602524, -0.28451826223719845, 0.086555440609680664, 0.61280649279972743,
    -0.18260486313568372, -0.24710453875341803, -0.075607518596506801, 0.15245053764884037, -0.096694019685242175,
    -0.93645179356129327, -0.15391552398204031, 0.059072258148755177, -0.28876905417408805, 0.33851808579210207,
    0.33802359354283329, 0.34522626264393452, -0.75172287782769465, -0.77924646098646999, 0.17836427772290808,
    0.099609860212572107, 0.08814715006601602, -0.44565523272937518, -0.38034261751353188, 0.16625257928283696,
    0.2585920103042546, 0.020338968802114537, 0.80003140115688931, -0.50769420536545495, -0.085281471832741151,
    -0.23330500100036652, -0.67291875187399031, -0.62910324198050971, -0.29605151626636206, -0.013317578765924504,
    -0.095678537961153193, -0.3339028183063068, -0.42915401163133088, 0.090032637694534512, 0.3476510993988946,
    -0.69469017629733709, -0.30458847387962729, 0.047442791523562872, -0.70777953429388829, -0.39273044987859496,
    0.10840824730875595, -0.57515552897575317, -0.0019686313518958529});
const Vector kOwlY = vec({-0.28394768557579553, 0.64906283703285084, -0.4475331261693436, 0.032690344497629878,
                          -0.27079527449762186, 0.47265897548496238});
const Vector kOwlW = vec({0.30, 0.26, 0.22, 0.18, 0.10, 0.10, 0.10, 0.10});
const Vector kOwlBeta = vec({-0.052773761015788193, 0.0, -0.48313924970837147, 0.052773761015788422,
                             0.052773761015784668, 0.0, 0.0, -0.052773761015499847});
constexpr double kOwlObjective = 0.37003827023583147;

// Frozen reference: 5x10 basis pursuit solved offline as a linear program.
const Matrix kBpX = col_major(5, 10, {
    -0.5044139522056954, 0.45458118581953433, -0.25366219911618221, -0.40078162615234697, 0.56031427538244927,
    0.53313597842849503, 0.47698286845988419, 0.38142707472715071, 0.24017592845741509, 0.53393097096495479,
    -0.38583961840367859, 0.10743686867113338, -0.38780773777238559, 0.62338743021952969, 0.54825028817904065,
    -0.65342444834157032, 0.43662094499427312, 0.34672131250124616, -0.47692773644111663, 0.18634083388347403,
    -0.24502184978490738, 0.41981080600705761, -0.56461957714280364, 0.51605639812739779, 0.42262714932496387,
    0.038143804001306097, -0.45923277759151859, 0.15556667958391085, 0.44780345669450355, 0.75028086646107361,
    -0.52386422677168487, 0.75263830180262437, -0.073438032543888199, -0.38577308257668852, 0.069913108241078659,
    -0.56564940609649894, -0.054891109697667834, -0.56261300322669106, 0.21342392305537808, -0.56119920984150706,
    -0.0023854568249724638, -0.36405034777105832, 0.091966570367687892, 0.3148428246319887, -0.87170969915222563,
    -0.028074509452954938, 0.47384728628198841, -0.45423416094837932, -0.71916547848855117, 0.22617009700671367});
const Vector kBpY = vec({-0.67574401543975549, 0.58534567394693549, 0.078475860223925789, 0.43249679749181041,
                         0.086767085409192216});
const Vector kBpBeta = vec({0, 0.0066582081336175472, 0.099195921237070481, 0, 0.34512308149700838, 0,
                            1.1083073710916203, 0, 0, -0.86004175796039972});
constexpr double kBpL1 = 2.4193263399197162;

}  // namespace

TEST_CASE("solver config validation", "[solvers]") {
    SolverConfig cfg;
    cfg.max_iterations = 0;
    CHECK_THROWS_AS(cfg.validate(), InvalidParameters);
    cfg = {};
    cfg.rel_tolerance = 0.0;
    CHECK_THROWS_AS(cfg.validate(), InvalidParameters);
    cfg = {};
    cfg.admm_rho = -1.0;
    CHECK_THROWS_AS(cfg.validate(), InvalidParameters);
}

TEST_CASE("lipschitz estimate", "[solvers]") {
    CHECK_THAT(lipschitz_estimate(Matrix::Identity(5, 5)), WithinRel(1.0, 1e-10));
    Matrix twice(3, 2);
    twice.col(0) = vec({0.6, 0.8, 0.0});
    twice.col(1) = twice.col(0);
    CHECK_THAT(lipschitz_estimate(twice), WithinRel(2.0, 1e-10));
    CHECK(lipschitz_estimate(Matrix::Zero(3, 4)) == 0.0);
    Rng rng(3);
    const Matrix X = random_unit_design(10, 20, rng);
    const double sigma = Eigen::JacobiSVD<Matrix>(X).singularValues()[0];
    CHECK_THAT(lipschitz_estimate(X), WithinRel(sigma * sigma, 1e-4));
}

TEST_CASE("identity design gives soft thresholding", "[solvers]") {
    const Matrix I = Matrix::Identity(4, 4);
    const Vector y = vec({0.7, -0.5, 0.1, 0.5}).normalized();
    const double lambda = 0.2;
    const auto res = solve_owl(I, y, WeightVector::constant(4, lambda), precise());
    for (Eigen::Index i = 0; i < 4; ++i) {
        CHECK_THAT(res.beta[i], WithinAbs(std::copysign(std::max(std::abs(y[i]) - lambda, 0.0), y[i]), 1e-10));
    }
    const auto lasso = solve_lasso(I, y, lambda, precise());
    CHECK((lasso.beta - res.beta).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("trivial dual certificate forces a zero solution", "[solvers]") {
    Rng rng(4);
    const Matrix X = random_unit_design(6, 12, rng);
    const Vector y = random_unit(6, rng);
    const Vector g = X.transpose() * y;
    const double lambda = 1.01 * g.cwiseAbs().maxCoeff();
    const WeightVector w = WeightVector::constant(12, lambda);
    REQUIRE(predict_trivial_solution(g, w));
    CHECK(solve_owl(X, y, w, {}).beta.cwiseAbs().maxCoeff() <= 1e-8);
    CHECK(solve_lasso(X, y, lambda, {}).beta.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("trivial-solution predicate agrees with the solver", "[solvers][property]") {
    Rng rng(5);
    int trivial = 0, nontrivial = 0;
    for (int t = 0; t < 60; ++t) {
        const Matrix X = random_unit_design(5, 9, rng);
        const Vector y = random_unit(5, rng);
        const Vector g = X.transpose() * y;
        const double scale = std::uniform_real_distribution<double>(0.05, 0.5)(rng);
        const WeightVector w = make_ramp_weights({scale, scale / 9.0, 9}, 9);
        const double dual = owl_dual_norm(g, w);
        if (std::abs(dual - 1.0) < 1e-3) {
            continue;  // too close to the threshold to separate numerically
        }
        const bool predicted = predict_trivial_solution(g, w);
        const auto res = solve_owl(X, y, w, precise());
        CHECK(predicted == (res.beta.cwiseAbs().maxCoeff() < 1e-8));
        (predicted ? trivial : nontrivial)++;
    }
    CHECK(trivial > 0);
    CHECK(nontrivial > 0);
}

TEST_CASE("OWL solver matches the frozen conic-solver reference", "[solvers][oracle]") {
    const WeightVector w(kOwlW);
    const auto res = solve_owl(kOwlX, kOwlY, w, precise());
    CHECK_THAT(owl_objective(kOwlX, kOwlY, res.beta, w), WithinAbs(kOwlObjective, 1e-6));
    CHECK((res.beta - kOwlBeta).cwiseAbs().maxCoeff() < 1e-5);
    // The default configuration is also within the stated tolerance.
    const auto fast = solve_owl(kOwlX, kOwlY, w, {});
    CHECK_THAT(owl_objective(kOwlX, kOwlY, fast.beta, w), WithinAbs(kOwlObjective, 1e-6));
}

TEST_CASE("lasso is bit-identical to OWL with constant weights", "[solvers]") {
    Rng rng(6);
    for (int t = 0; t < 10; ++t) {
        const Matrix X = random_unit_design(6, 15, rng);
        const Vector y = random_unit(6, rng);
        const double lambda = 0.05 + 0.02 * t;
        const auto a = solve_lasso(X, y, lambda, {});
        const auto b = solve_owl(X, y, WeightVector::constant(15, lambda), {});
        CHECK(a.beta == b.beta);
        CHECK(a.iterations == b.iterations);
        CHECK(a.objective_trace == b.objective_trace);
    }
    CHECK_THROWS_AS(solve_lasso(Matrix::Identity(2, 2), vec({1, 0}), 0.0, {}), InvalidParameters);
}

TEST_CASE("solver input validation", "[solvers]") {
    const Matrix I = Matrix::Identity(3, 3);
    CHECK_THROWS_AS(solve_owl(I, vec({1, 0}), WeightVector::constant(3, 0.1), {}), DimensionError);
    CHECK_THROWS_AS(solve_owl(I, vec({1, 0, 0}), WeightVector::constant(2, 0.1), {}), DimensionError);
    CHECK_THROWS_AS(solve_owl(I, vec({std::nan(""), 0, 0}), WeightVector::constant(3, 0.1), {}), InvalidInput);
    CHECK_THROWS_AS(solve_owl(2.0 * I, vec({1, 0, 0}), WeightVector::constant(3, 0.1), {}), InvalidInput);
}

TEST_CASE("non-convergence is reported, not thrown", "[solvers]") {
    Rng rng(7);
    const Matrix X = random_unit_design(6, 20, rng);
    const Vector y = random_unit(6, rng);
    SolverConfig cfg;
    cfg.max_iterations = 2;
    const auto res = solve_owl(X, y, WeightVector::constant(20, 0.01), cfg);
    CHECK_FALSE(res.converged);
    CHECK(res.iterations == 2);
}

TEST_CASE("plain proximal gradient decreases the objective monotonically", "[solvers][property]") {
    Rng rng(8);
    SolverConfig cfg;
    cfg.acceleration = false;
    for (int t = 0; t < 100; ++t) {
        const Matrix X = random_unit_design(8, 16, rng);
        const Vector y = random_unit(8, rng);
        const WeightVector w(props::random_weights(16, rng) * 0.2);
        const auto res = solve_owl(X, y, w, cfg);
        for (std::size_t i = 1; i < res.objective_trace.size(); ++i) {
            CHECK(res.objective_trace[i] <= res.objective_trace[i - 1] * (1.0 + 1e-15) + 1e-15);
        }
    }
}

TEST_CASE("converged solutions are prox fixed points", "[solvers][property]") {
    Rng rng(9);
    for (int t = 0; t < 30; ++t) {
        const Matrix X = random_unit_design(8, 16, rng);
        const Vector y = random_unit(8, rng);
        const WeightVector w(props::random_weights(16, rng) * 0.1);
        SolverConfig cfg = precise();
        cfg.rel_tolerance = 1e-12;
        const auto res = solve_owl(X, y, w, cfg);
        REQUIRE(res.converged);
        const double L = lipschitz_estimate(X);
        const Vector step = res.beta - X.transpose() * (X * res.beta - y) / L;
        const Vector fixed = prox_owl(step, WeightVector(w.values() / L));
        CHECK((fixed - res.beta).cwiseAbs().maxCoeff() < 1e-6);
        const auto& tr = res.objective_trace;
        REQUIRE(tr.size() >= 2);
        CHECK(std::abs(tr[tr.size() - 2] - tr.back()) <= cfg.rel_tolerance * tr[tr.size() - 2]);
    }
}

TEST_CASE("basis pursuit on trivial designs", "[solvers][bp]") {
    const Vector y = vec({0.48, -0.6, 0.64});
    const auto id = solve_basis_pursuit(Matrix::Identity(3, 3), y, {});
    CHECK((id.beta - y).cwiseAbs().maxCoeff() < 1e-9);

    Rng rng(10);
    const Matrix X = random_unit_design(5, 12, rng);
    const auto single = solve_basis_pursuit(X, X.col(4), {});
    Vector e = Vector::Zero(12);
    e[4] = 1.0;
    CHECK((single.beta - e).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(single.residual_norm <= 1e-6);
}

TEST_CASE("basis pursuit reports infeasible targets", "[solvers][bp]") {
    Matrix X = Matrix::Zero(3, 2);
    X(0, 0) = 1.0;
    X(1, 1) = 1.0;
    try {
        solve_basis_pursuit(X, vec({0, 0, 1}), {});
        FAIL("expected InfeasibleError");
    } catch (const InfeasibleError& e) {
        CHECK_THAT(e.residual(), WithinAbs(1.0, 1e-9));
        CHECK(std::string(e.what()).find("residual") != std::string::npos);
    }
}

TEST_CASE("basis pursuit matches the frozen linear-program reference", "[solvers][bp][oracle]") {
    const auto res = solve_basis_pursuit(kBpX, kBpY, {});
    CHECK(res.residual_norm <= 1e-6);
    CHECK((kBpY - kBpX * res.beta).norm() <= 1e-6);
    CHECK_THAT(res.beta.lpNorm<1>(), WithinAbs(kBpL1, 1e-5));
    CHECK((res.beta - kBpBeta).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("basis pursuit agrees with the small-lambda lasso", "[solvers][bp]") {
    SolverConfig cfg = precise();
    cfg.max_iterations = 2000000;
    const double lambda = 1e-6;
    const auto lasso = solve_lasso(kBpX, kBpY, lambda, cfg);
    const auto bp = solve_basis_pursuit(kBpX, kBpY, {});
    // Lasso shrinks by O(lambda); undo the scale so the two fits are comparable.
    const double scale = kBpY.dot(kBpX * lasso.beta) / (kBpX * lasso.beta).squaredNorm();
    CHECK((scale * lasso.beta - bp.beta).cwiseAbs().maxCoeff() < 1e-3);
    const auto a = support_mask(lasso.beta);
    const auto b = support_mask(bp.beta);
    CHECK(a == b);
}

TEST_CASE("coefficient clustering on near-duplicate columns", "[solvers][property]") {
    const auto report = props::lemma1_suite(100, 77);
    INFO(report.text());
    CHECK(report.passed());
}

TEST_CASE("ramp weights group a dense component of at least r coefficients", "[solvers][property]") {
    // Points dense on a circle: any two neighbours are closer than the ramp slope,
    // so the top-magnitude group spans at least r of them.
    const std::size_t count = 240;
    const std::size_t r = 20;
    const auto bases = generate_orthogonal(3, 2, 6, 5);
    const UnionOfSubspaces u = sample_union(bases, std::vector<std::size_t>(3, count), 6);
    Matrix design = u.X;
    design.col(0).setZero();
    const WeightVector w = make_ramp_weights({0.05, 0.5, r}, u.size());
    const auto res = solve_owl(design, u.X.col(0), w, props::tight_solver());
    const double peak = res.beta.cwiseAbs().maxCoeff();
    REQUIRE(peak > 0.0);
    std::size_t top = 0;
    for (Eigen::Index i = 0; i < res.beta.size(); ++i) {
        top += std::abs(res.beta[i]) >= peak * (1.0 - props::magnitude_rtol) ? 1 : 0;
    }
    CHECK(top >= r);
}

TEST_CASE("residual stays under the frozen self-expression bound", "[solvers][property]") {
    // c fitted on separate seeds (largest observed ratio 1.26), frozen with margin.
    constexpr double c = 1.5;
    for (const std::size_t d : {3, 5, 8}) {
        for (const double rho : {3.0, 5.0, 8.0}) {
            const auto u = sample_union(generate_b1(3, d, 2 * d, 300 + d), rho, 400 + d);
            const std::size_t N = u.size();
            const std::size_t Nl = u.points_per_subspace[0];
            const RampParams ramp = default_ramp(N, 3, d);
            const WeightVector w = make_ramp_weights(ramp, N);
            const double bound = c * w.head() * std::sqrt(static_cast<double>(d) / std::log(static_cast<double>(Nl) / d));
            const double L = lipschitz_estimate(u.X);
            for (std::size_t j = 0; j < N; j += 7) {
                const auto res = detail::regress_column(u.X, j, OwlRamp{ramp}, {}, L);
                CHECK(res.residual_norm <= bound);
            }
        }
    }
}
