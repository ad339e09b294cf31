#pragma once

// Two-source FastICA: whitening by eigendecomposition of the 2x2 covariance,
// then the symmetric (parallel) fixed-point iteration with the logcosh
// contrast, g(u) = tanh(u), g'(u) = 1 - tanh(u)^2.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "stegica/error.hpp"
#include "stegica/pca.hpp"
#include "stegica/rng.hpp"

namespace stegica {

struct ICAParams {
    double tolerance = 1e-4;
    int max_iterations = 200;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(tolerance > 0)) throw UsageError("ICA tolerance must be positive");
        if (max_iterations < 1) throw UsageError("ICA max_iterations must be at least 1");
    }
};

/// Estimated independent components: zero-mean, unit-variance, decorrelated.
struct ComponentPair {
    std::vector<double> c1;
    std::vector<double> c2;
    /// Unmixing in whitened space (orthonormal rows).
    Eigen::Matrix2d unmixing = Eigen::Matrix2d::Identity();
    /// Whitening applied to the centered input before unmixing.
    Eigen::Matrix2d whitening = Eigen::Matrix2d::Identity();
    std::optional<ComponentIndexPair> selected_indices;
    bool converged = false;
    int iterations = 0;
};

namespace detail {

/// (W W^T)^{-1/2} W
inline Eigen::Matrix2d symmetric_decorrelation(const Eigen::Matrix2d& w) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(w * w.transpose());
    const Eigen::Vector2d inv_sqrt = es.eigenvalues().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
    return es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().transpose() * w;
}

} // namespace detail

inline ComponentPair fastica(const Eigen::MatrixXd& x, const ICAParams& params) {
    params.validate();
    if (x.rows() != 2) throw UsageError("fastica expects a 2 x N matrix");
    const Eigen::Index n = x.cols();
    if (n < 2) throw DataError("fastica needs at least 2 samples");
    if (!x.allFinite()) throw DataError("fastica input contains non-finite values");
    const double dn = static_cast<double>(n);

    const Eigen::Vector2d mean = x.rowwise().sum() / dn;
    const Eigen::MatrixXd xc = x.colwise() - mean;

    const Eigen::Matrix2d cov = (xc * xc.transpose()) / dn;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov);
    const Eigen::Vector2d d = es.eigenvalues();
    // A zero-variance row (or two proportional rows) cannot be whitened.
    if (!(d(1) > 0) || !(d(0) > 1e-12 * d(1))) throw NumericalError("degenerate projection");

    const Eigen::Matrix2d whitening = d.cwiseSqrt().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
    const Eigen::MatrixXd xw = whitening * xc;

    Rng rng(params.seed);
    Eigen::Matrix2d w0;
    w0 << rng.normal(), rng.normal(), rng.normal(), rng.normal();
    Eigen::Matrix2d w = detail::symmetric_decorrelation(w0);

    ComponentPair out;
    Eigen::MatrixXd gwtx(2, n);
    for (int it = 1; it <= params.max_iterations; ++it) {
        gwtx = (w * xw).array().tanh().matrix();
        const Eigen::Vector2d g_prime_mean = (1.0 - gwtx.array().square()).rowwise().sum() / dn;
        const Eigen::Matrix2d update = (gwtx * xw.transpose()) / dn - g_prime_mean.asDiagonal() * w;
        const Eigen::Matrix2d w1 = detail::symmetric_decorrelation(update);
        const double lim = ((w1 * w.transpose()).diagonal().cwiseAbs().array() - 1.0).abs().maxCoeff();
        w = w1;
        out.iterations = it;
        if (lim < params.tolerance) {
            out.converged = true;
            break;
        }
    }

    const Eigen::MatrixXd s = w * xw;
    out.c1.resize(static_cast<std::size_t>(n));
    out.c2.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        out.c1[static_cast<std::size_t>(i)] = s(0, i);
        out.c2[static_cast<std::size_t>(i)] = s(1, i);
    }
    out.unmixing = w;
    out.whitening = whitening;
    return out;
}

} // namespace stegica
