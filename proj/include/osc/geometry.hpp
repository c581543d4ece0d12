#pragma once

// Union-of-subspaces data model: random bases, semi-random sampling, noise,
// principal angles, affinity and PCA projection.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "osc/error.hpp"
#include "osc/owl.hpp"
#include "osc/random.hpp"

namespace osc {

/// An n x d matrix with orthonormal columns.
class SubspaceBasis {
public:
    explicit SubspaceBasis(Matrix U) : U_(std::move(U)) {
        if (U_.cols() < 1 || U_.cols() > U_.rows()) {
            throw InvalidParameters("subspace basis must be n x d with 1 <= d <= n");
        }
        const Matrix gram = U_.transpose() * U_;
        const double defect = (gram - Matrix::Identity(U_.cols(), U_.cols())).cwiseAbs().maxCoeff();
        if (!(defect <= 1e-10)) {
            throw InvalidInput("basis columns are not orthonormal (defect " + std::to_string(defect) + ")");
        }
    }

    const Matrix& matrix() const noexcept { return U_; }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(U_.cols()); }
    std::size_t ambient() const noexcept { return static_cast<std::size_t>(U_.rows()); }

private:
    Matrix U_;
};

/// Ground truth for a sample from a union of subspaces. Column j of X lies in
/// span(bases[labels[j]]) before noise; columns are unit norm.
struct UnionOfSubspaces {
    std::vector<SubspaceBasis> bases;
    std::vector<std::size_t> points_per_subspace;
    std::vector<int> labels;
    Matrix X;

    std::size_t size() const noexcept { return static_cast<std::size_t>(X.cols()); }
    std::size_t subspace_count() const noexcept { return bases.size(); }

    /// Sampling density N_l / d_l.
    double density(std::size_t ell) const {
        return static_cast<double>(points_per_subspace.at(ell)) / static_cast<double>(bases.at(ell).dim());
    }
};

struct NoiseConfig {
    double sigma = 0.0;
    std::uint64_t seed = 0;
};

/// Stand-ins for the unspecified numerical constants of the no-false-discovery
/// condition (kappa0) and the RGG connectivity bound (kappa1). Defaults are
/// Monte Carlo calibrations (see the README).
struct TheoremBounds {
    double kappa0 = 1.0;
    double kappa1 = 16.0;

    void validate() const {
        if (!(kappa0 > 0.0) || !(kappa1 > 0.0)) {
            throw InvalidParameters("theorem constants must be positive");
        }
    }
};

/// Uniform point on the unit sphere of R^d drawn from `rng`.
inline Vector sample_sphere_uniform(std::size_t d, Rng& rng) {
    if (d == 0) {
        throw InvalidParameters("sphere dimension must be at least 1");
    }
    std::normal_distribution<double> normal;
    Vector v(static_cast<Eigen::Index>(d));
    double norm = 0.0;
    while (norm == 0.0) {
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            v[i] = normal(rng);
        }
        norm = v.norm();
    }
    return v / norm;
}

inline Vector sample_sphere_uniform(std::size_t d, std::uint64_t seed) {
    Rng rng(derive_seed(seed, stream::sphere));
    return sample_sphere_uniform(d, rng);
}

/// Haar-distributed n x d orthonormal matrix: Q factor of a Gaussian matrix
/// with the sign ambiguity of QR removed.
inline Matrix random_orthonormal(std::size_t n, std::size_t d, Rng& rng) {
    std::normal_distribution<double> normal;
    Matrix G(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (Eigen::Index j = 0; j < G.cols(); ++j) {
        for (Eigen::Index i = 0; i < G.rows(); ++i) {
            G(i, j) = normal(rng);
        }
    }
    const Eigen::HouseholderQR<Matrix> qr(G);
    Matrix Q = qr.householderQ() * Matrix::Identity(G.rows(), G.cols());
    const Matrix R = qr.matrixQR().topRows(G.cols()).triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < Q.cols(); ++j) {
        if (R(j, j) < 0.0) {
            Q.col(j) *= -1.0;
        }
    }
    return Q;
}

/// B1: L independent uniformly random d-dimensional subspaces of R^n.
inline std::vector<SubspaceBasis> generate_b1(std::size_t L, std::size_t d, std::size_t n, std::uint64_t seed) {
    if (d < 1 || d > n) {
        throw InvalidParameters("B1 requires 1 <= d <= n (d=" + std::to_string(d) + ", n=" + std::to_string(n) + ")");
    }
    std::vector<SubspaceBasis> bases;
    bases.reserve(L);
    for (std::size_t ell = 0; ell < L; ++ell) {
        Rng rng = make_rng(seed, stream::basis, ell);
        bases.emplace_back(random_orthonormal(n, d, rng));
    }
    return bases;
}

/// L mutually orthogonal d-dimensional subspaces of R^n under a common random rotation.
inline std::vector<SubspaceBasis> generate_orthogonal(std::size_t L, std::size_t d, std::size_t n,
                                                      std::uint64_t seed) {
    if (d < 1 || L * d > n) {
        throw InvalidParameters("orthogonal subspaces need L*d <= n");
    }
    Rng rng = make_rng(seed, stream::basis, 0);
    const Matrix Q = random_orthonormal(n, L * d, rng);
    std::vector<SubspaceBasis> bases;
    for (std::size_t ell = 0; ell < L; ++ell) {
        bases.emplace_back(Q.middleCols(static_cast<Eigen::Index>(ell * d), static_cast<Eigen::Index>(d)));
    }
    return bases;
}

/// Principal angles for the third B2 basis: cos^2 theta_i spaced linearly
/// (decreasing) with mean equal to target^2, so the normalized affinity of
/// S1 and S3 equals the target.
inline Vector b2_angles(std::size_t d, double target_affinity) {
    if (!(target_affinity >= 0.0 && target_affinity <= 1.0)) {
        throw InvalidParameters("target affinity must lie in [0, 1]");
    }
    if (d < 1) {
        throw InvalidParameters("B2 requires d >= 1");
    }
    const double mean_sq = target_affinity * target_affinity;
    const double hi = std::min(1.0, 2.0 * mean_sq);
    const double lo = 2.0 * mean_sq - hi;
    Vector theta(static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i) {
        const double frac = d == 1 ? 0.5 : static_cast<double>(i) / static_cast<double>(d - 1);
        const double cos_sq = d == 1 ? mean_sq : hi - (hi - lo) * frac;
        theta[static_cast<Eigen::Index>(i)] = std::acos(std::sqrt(std::clamp(cos_sq, 0.0, 1.0)));
    }
    return theta;
}

/// B2 bases in R^{2d}: U1 = [I; 0], U2 = [0; I], U3 = [diag cos theta; diag sin theta].
inline std::vector<SubspaceBasis> generate_b2_from_angles(const Vector& theta) {
    const Eigen::Index d = theta.size();
    Matrix U1 = Matrix::Zero(2 * d, d);
    Matrix U2 = Matrix::Zero(2 * d, d);
    Matrix U3 = Matrix::Zero(2 * d, d);
    U1.topRows(d).setIdentity();
    U2.bottomRows(d).setIdentity();
    U3.topRows(d).diagonal() = theta.array().cos().matrix();
    U3.bottomRows(d).diagonal() = theta.array().sin().matrix();
    std::vector<SubspaceBasis> bases;
    bases.emplace_back(std::move(U1));
    bases.emplace_back(std::move(U2));
    bases.emplace_back(std::move(U3));
    return bases;
}

inline std::vector<SubspaceBasis> generate_b2(std::size_t d, double target_affinity) {
    return generate_b2_from_angles(b2_angles(d, target_affinity));
}

/// Semi-random model: N_l points uniform on the unit sphere of each subspace.
/// Point j draws from its own derived stream.
inline UnionOfSubspaces sample_union(std::vector<SubspaceBasis> bases, const std::vector<std::size_t>& counts,
                                     std::uint64_t seed) {
    if (bases.empty()) {
        throw InvalidParameters("at least one subspace is required");
    }
    if (counts.size() != bases.size()) {
        throw DimensionError("one point count per subspace is required");
    }
    const std::size_t n = bases.front().ambient();
    std::size_t total = 0;
    for (std::size_t ell = 0; ell < bases.size(); ++ell) {
        if (bases[ell].ambient() != n) {
            throw DimensionError("all bases must share the ambient dimension");
        }
        if (counts[ell] < 1) {
            throw InvalidParameters("each subspace needs at least one point");
        }
        total += counts[ell];
    }

    UnionOfSubspaces u;
    u.X.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(total));
    u.labels.reserve(total);
    std::size_t j = 0;
    for (std::size_t ell = 0; ell < bases.size(); ++ell) {
        for (std::size_t i = 0; i < counts[ell]; ++i, ++j) {
            Rng rng = make_rng(seed, stream::point, j);
            const Vector a = sample_sphere_uniform(bases[ell].dim(), rng);
            Vector x = bases[ell].matrix() * a;
            x.normalize();
            u.X.col(static_cast<Eigen::Index>(j)) = x;
            u.labels.push_back(static_cast<int>(ell));
        }
    }
    u.points_per_subspace = counts;
    u.bases = std::move(bases);
    return u;
}

/// Samples round(rho * d_l) points per subspace.
inline UnionOfSubspaces sample_union(std::vector<SubspaceBasis> bases, double rho, std::uint64_t seed) {
    if (!(rho > 0.0)) {
        throw InvalidParameters("sampling density must be positive");
    }
    std::vector<std::size_t> counts;
    for (const auto& b : bases) {
        counts.push_back(std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(rho * static_cast<double>(b.dim())))));
    }
    return sample_union(std::move(bases), counts, seed);
}

/// x <- (x + sigma u) / |x + sigma u| with u uniform on the unit sphere of R^n.
inline Matrix add_noise(const Matrix& X, const NoiseConfig& cfg) {
    if (!(cfg.sigma >= 0.0)) {
        throw InvalidParameters("noise level must be nonnegative");
    }
    if (cfg.sigma == 0.0) {
        return X;
    }
    Matrix out = X;
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        Rng rng = make_rng(cfg.seed, stream::noise, static_cast<std::uint64_t>(j));
        const Vector u = sample_sphere_uniform(static_cast<std::size_t>(X.rows()), rng);
        Vector x = X.col(j) + cfg.sigma * u;
        const double norm = x.norm();
        if (norm > 0.0) {
            x /= norm;
        }
        out.col(j) = x;
    }
    return out;
}

/// Cosines of the principal angles: singular values of U^T V clipped to [0, 1],
/// nonincreasing, length min(d, d').
inline Vector principal_cosines(const SubspaceBasis& U, const SubspaceBasis& V) {
    if (U.ambient() != V.ambient()) {
        throw DimensionError("bases live in different ambient spaces");
    }
    const Matrix cross = U.matrix().transpose() * V.matrix();
    Vector s = Eigen::JacobiSVD<Matrix>(cross).singularValues();
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        s[i] = std::clamp(s[i], 0.0, 1.0);
    }
    return s;
}

/// Principal angles in radians, nondecreasing. Each angle is atan2(sin, cos)
/// with the sine measured as the distance of a principal vector from the
/// other subspace, which keeps small angles accurate.
inline Vector principal_angles(const SubspaceBasis& U, const SubspaceBasis& V) {
    if (U.ambient() != V.ambient()) {
        throw DimensionError("bases live in different ambient spaces");
    }
    const bool swap = V.dim() > U.dim();
    const Matrix& A = swap ? V.matrix() : U.matrix();  // larger subspace
    const Matrix& B = swap ? U.matrix() : V.matrix();
    const Eigen::JacobiSVD<Matrix> svd(A.transpose() * B, Eigen::ComputeThinV);
    const Matrix principal = B * svd.matrixV();
    const Matrix residual = principal - A * (A.transpose() * principal);
    const Vector& c = svd.singularValues();
    Vector theta(c.size());
    for (Eigen::Index i = 0; i < c.size(); ++i) {
        theta[i] = std::atan2(residual.col(i).norm(), std::clamp(c[i], 0.0, 1.0));
    }
    return theta;
}

/// Normalized affinity sqrt(sum cos^2 / min(d, d')), always in [0, 1].
inline double affinity(const SubspaceBasis& U, const SubspaceBasis& V) {
    const Vector c = principal_cosines(U, V);
    return std::clamp(std::sqrt(c.squaredNorm() / static_cast<double>(c.size())), 0.0, 1.0);
}

/// Largest affinity between subspace `ell` and any other subspace.
inline double max_affinity(const std::vector<SubspaceBasis>& bases, std::size_t ell) {
    if (bases.size() < 2) {
        throw InvalidParameters("max_affinity needs at least two subspaces");
    }
    if (ell >= bases.size()) {
        throw InvalidParameters("subspace index out of range");
    }
    double best = 0.0;
    for (std::size_t k = 0; k < bases.size(); ++k) {
        if (k != ell) {
            best = std::max(best, affinity(bases[ell], bases[k]));
        }
    }
    return best;
}

inline double max_affinity(const UnionOfSubspaces& u, std::size_t ell) { return max_affinity(u.bases, ell); }

struct PcaProjection {
    Matrix data;            ///< target_dim x N, unit-norm columns
    double captured_energy;  ///< sum of retained squared singular values over the total
};

/// Projects columns onto the top `target_dim` left singular vectors and renormalizes.
inline PcaProjection pca_project(const Matrix& X, std::size_t target_dim) {
    const auto limit = static_cast<std::size_t>(std::min(X.rows(), X.cols()));
    if (target_dim < 1 || target_dim > limit) {
        throw InvalidParameters("PCA target dimension " + std::to_string(target_dim) + " outside [1, "
                                + std::to_string(limit) + "]");
    }
    const Eigen::JacobiSVD<Matrix> svd(X, Eigen::ComputeThinU);
    const auto k = static_cast<Eigen::Index>(target_dim);
    PcaProjection out;
    out.data = svd.matrixU().leftCols(k).transpose() * X;
    for (Eigen::Index j = 0; j < out.data.cols(); ++j) {
        const double norm = out.data.col(j).norm();
        if (norm > 0.0) {
            out.data.col(j) /= norm;
        }
    }
    const Vector s2 = svd.singularValues().array().square().matrix();
    const double total = s2.sum();
    out.captured_energy = total > 0.0 ? s2.head(k).sum() / total : 1.0;
    return out;
}

}  // namespace osc
