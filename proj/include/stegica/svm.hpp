#pragma once

// Soft-margin RBF-kernel SVM trained by SMO with maximal-violating-pair
// working-set selection.
//
// Dual problem: min 1/2 a^T Q a - e^T a, 0 <= a_i <= C, y^T a = 0,
// with Q_ij = y_i y_j K(x_i, x_j) and K(x, z) = exp(-gamma_k |x - z|^2).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "stegica/error.hpp"
#include "stegica/manifest.hpp"

namespace stegica {

/// Per-feature z-scoring with training-set statistics (population std).
struct Standardizer {
    Eigen::VectorXd mean;
    Eigen::VectorXd scale;

    static Standardizer identity(Eigen::Index dim) {
        return {Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Ones(dim)};
    }

    Eigen::Index dim() const { return mean.size(); }

    Eigen::VectorXd apply(const Eigen::VectorXd& x) const {
        if (x.size() != dim())
            throw DataError("feature dimension " + std::to_string(x.size()) + " does not match model dimension " +
                            std::to_string(dim()));
        return ((x - mean).array() / scale.array()).matrix();
    }

    /// Row-wise apply to an n x d matrix.
    Eigen::MatrixXd apply_rows(const Eigen::MatrixXd& x) const {
        if (x.cols() != dim()) throw DataError("feature dimension does not match standardizer");
        return ((x.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array()).matrix();
    }
};

/// Zero-variance columns keep scale 1, so they map to 0 after centering.
inline Standardizer standardize_fit(const Eigen::MatrixXd& x) {
    if (x.rows() < 2) throw DataError("standardizer needs at least 2 training rows");
    const double n = static_cast<double>(x.rows());
    Standardizer s;
    s.mean = x.colwise().sum().transpose() / n;
    s.scale.resize(x.cols());
    for (Eigen::Index k = 0; k < x.cols(); ++k) {
        const double sd = std::sqrt((x.col(k).array() - s.mean(k)).square().sum() / n);
        s.scale(k) = sd > 1e-12 * std::max(1.0, std::abs(s.mean(k))) ? sd : 1.0;
    }
    return s;
}

inline double rbf_kernel(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b,
                         double gamma_k) {
    return std::exp(-gamma_k * (a - b).squaredNorm());
}

struct SVMModel {
    /// M x d, in standardized feature space.
    Eigen::MatrixXd support_vectors;
    /// alpha_i * y_i for each support vector.
    Eigen::VectorXd dual_coefs;
    double bias = 0.0;
    double gamma_k = 0.125;
    double C = 1.0;
    Standardizer standardizer;

    Eigen::Index dim() const { return support_vectors.cols(); }

    double decision_standardized(const Eigen::VectorXd& z) const {
        double f = 0.0;
        for (Eigen::Index i = 0; i < support_vectors.rows(); ++i)
            f += dual_coefs(i) * std::exp(-gamma_k * (support_vectors.row(i).transpose() - z).squaredNorm());
        return f + bias;
    }

    /// Decision value for a raw (unstandardized) feature vector.
    double decision(const Eigen::VectorXd& x) const { return decision_standardized(standardizer.apply(x)); }
};

struct SVMParams {
    double C = 1.0;
    double gamma_k = 0.125;
    /// Stop when the maximal KKT violation drops to this value.
    double tolerance = 1e-3;
    long max_iterations = 0; // 0: max(10^7, 100 n)
};

struct SVMTrainResult {
    SVMModel model;
    /// Full dual vector over the training rows.
    Eigen::VectorXd alpha;
    bool converged = false;
    long iterations = 0;
    /// m(alpha) - M(alpha) at exit.
    double final_gap = 0.0;
};

namespace detail {

// Kernel rows, precomputed for small problems and computed on demand otherwise.
class KernelRows {
public:
    KernelRows(const Eigen::MatrixXd& x, double gamma_k) : x_(x), gamma_(gamma_k) {
        const Eigen::Index n = x.rows();
        sq_norms_ = x.rowwise().squaredNorm();
        if (n <= kPrecomputeLimit) {
            full_.resize(n, n);
            for (Eigen::Index i = 0; i < n; ++i) full_.col(i) = compute(i);
        } else {
            buf_[0].resize(n);
            buf_[1].resize(n);
        }
    }

    double diag() const { return 1.0; }

    /// The returned span stays valid until the next-but-one call.
    std::span<const double> row(Eigen::Index i) {
        if (full_.size() > 0) return {full_.col(i).data(), static_cast<std::size_t>(full_.rows())};
        auto& b = buf_[next_];
        next_ ^= 1;
        b = compute(i);
        return {b.data(), static_cast<std::size_t>(b.size())};
    }

private:
    static constexpr Eigen::Index kPrecomputeLimit = 4000;

    Eigen::VectorXd compute(Eigen::Index i) const {
        Eigen::VectorXd d2 = (sq_norms_.array() + sq_norms_(i)).matrix() - 2.0 * (x_ * x_.row(i).transpose());
        return (-gamma_ * d2.array().max(0.0)).exp().matrix();
    }

    const Eigen::MatrixXd& x_;
    double gamma_;
    Eigen::VectorXd sq_norms_;
    Eigen::MatrixXd full_;
    Eigen::VectorXd buf_[2];
    int next_ = 0;
};

} // namespace detail

/// Trains on already-standardized rows; `standardizer` is stored in the model.
/// Labels must be -1 (cover) or +1 (stego), both present.
inline SVMTrainResult svm_train(const Eigen::MatrixXd& x, std::span<const int> y, const SVMParams& params,
                                Standardizer standardizer = {}) {
    const Eigen::Index n = x.rows();
    if (static_cast<std::size_t>(n) != y.size()) throw UsageError("svm_train: label count does not match rows");
    if (!(params.C > 0) || !(params.gamma_k > 0)) throw UsageError("svm_train: C and gamma_k must be positive");
    if (!x.allFinite()) throw DataError("svm_train: non-finite features");
    bool has_pos = false, has_neg = false;
    for (int v : y) {
        if (v == 1) {
            has_pos = true;
        } else if (v == -1) {
            has_neg = true;
        } else {
            throw UsageError("svm_train: labels must be -1 or +1");
        }
    }
    if (!has_pos || !has_neg) throw DataError("svm_train: both classes must be present");
    if (standardizer.dim() == 0) standardizer = Standardizer::identity(x.cols());

    const double c = params.C;
    const long max_iter = params.max_iterations > 0 ? params.max_iterations : std::max<long>(10'000'000L, 100L * n);
    constexpr double kTau = 1e-12;

    detail::KernelRows kernel(x, params.gamma_k);
    std::vector<double> alpha(static_cast<std::size_t>(n), 0.0);
    std::vector<double> grad(static_cast<std::size_t>(n), -1.0);
    auto yi = [&](Eigen::Index i) { return static_cast<double>(y[static_cast<std::size_t>(i)]); };
    auto in_up = [&](Eigen::Index t) {
        const double a = alpha[static_cast<std::size_t>(t)];
        return (yi(t) > 0 && a < c) || (yi(t) < 0 && a > 0);
    };
    auto in_low = [&](Eigen::Index t) {
        const double a = alpha[static_cast<std::size_t>(t)];
        return (yi(t) > 0 && a > 0) || (yi(t) < 0 && a < c);
    };

    SVMTrainResult res;
    long it = 0;
    for (; it < max_iter; ++it) {
        double gmax = -std::numeric_limits<double>::infinity();
        double gmin = std::numeric_limits<double>::infinity();
        Eigen::Index i = -1, j = -1;
        for (Eigen::Index t = 0; t < n; ++t) {
            const double v = -yi(t) * grad[static_cast<std::size_t>(t)];
            if (in_up(t) && v > gmax) {
                gmax = v;
                i = t;
            }
            if (in_low(t) && v < gmin) {
                gmin = v;
                j = t;
            }
        }
        res.final_gap = gmax - gmin;
        if (i < 0 || j < 0 || gmax - gmin <= params.tolerance) {
            res.converged = true;
            break;
        }

        const auto qi = kernel.row(i);
        const auto qj = kernel.row(j);
        const auto ui = static_cast<std::size_t>(i), uj = static_cast<std::size_t>(j);
        const double kij = qi[uj];
        const double old_ai = alpha[ui], old_aj = alpha[uj];
        double& ai = alpha[ui];
        double& aj = alpha[uj];

        if (yi(i) != yi(j)) {
            double quad = kernel.diag() + kernel.diag() + 2.0 * kij;
            if (quad <= 0) quad = kTau;
            const double delta = (-grad[ui] - grad[uj]) / quad;
            const double diff = ai - aj;
            ai += delta;
            aj += delta;
            if (diff > 0) {
                if (aj < 0) {
                    aj = 0;
                    ai = diff;
                }
            } else if (ai < 0) {
                ai = 0;
                aj = -diff;
            }
            if (diff > 0) {
                if (ai > c) {
                    ai = c;
                    aj = c - diff;
                }
            } else if (aj > c) {
                aj = c;
                ai = c + diff;
            }
        } else {
            double quad = kernel.diag() + kernel.diag() - 2.0 * kij;
            if (quad <= 0) quad = kTau;
            const double delta = (grad[ui] - grad[uj]) / quad;
            const double sum = ai + aj;
            ai -= delta;
            aj += delta;
            if (sum > c) {
                if (ai > c) {
                    ai = c;
                    aj = sum - c;
                }
                if (aj > c) {
                    aj = c;
                    ai = sum - c;
                }
            } else {
                if (aj < 0) {
                    aj = 0;
                    ai = sum;
                }
                if (ai < 0) {
                    ai = 0;
                    aj = sum;
                }
            }
        }

        // G_k += Q_ki da_i + Q_kj da_j, with Q_kt = y_k y_t K_kt.
        const double dai = (ai - old_ai) * yi(i);
        const double daj = (aj - old_aj) * yi(j);
        for (Eigen::Index k = 0; k < n; ++k) {
            const auto uk = static_cast<std::size_t>(k);
            grad[uk] += yi(k) * (qi[uk] * dai + qj[uk] * daj);
        }
    }
    res.iterations = it;

    // Bias from free vectors, or the midpoint of the feasible interval.
    double ub = std::numeric_limits<double>::infinity();
    double lb = -std::numeric_limits<double>::infinity();
    double sum_free = 0.0;
    long n_free = 0;
    for (Eigen::Index t = 0; t < n; ++t) {
        const auto ut = static_cast<std::size_t>(t);
        const double yg = yi(t) * grad[ut];
        if (alpha[ut] >= c) {
            if (yi(t) < 0) {
                ub = std::min(ub, yg);
            } else {
                lb = std::max(lb, yg);
            }
        } else if (alpha[ut] <= 0) {
            if (yi(t) > 0) {
                ub = std::min(ub, yg);
            } else {
                lb = std::max(lb, yg);
            }
        } else {
            ++n_free;
            sum_free += yg;
        }
    }
    const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : 0.5 * (ub + lb);

    res.alpha = Eigen::Map<const Eigen::VectorXd>(alpha.data(), n);
    Eigen::Index m = 0;
    for (double a : alpha)
        if (a > 0) ++m;
    res.model.support_vectors.resize(m, x.cols());
    res.model.dual_coefs.resize(m);
    Eigen::Index r = 0;
    for (Eigen::Index t = 0; t < n; ++t) {
        if (alpha[static_cast<std::size_t>(t)] > 0) {
            res.model.support_vectors.row(r) = x.row(t);
            res.model.dual_coefs(r) = alpha[static_cast<std::size_t>(t)] * yi(t);
            ++r;
        }
    }
    res.model.bias = -rho;
    res.model.gamma_k = params.gamma_k;
    res.model.C = c;
    res.model.standardizer = std::move(standardizer);
    return res;
}

/// Largest KKT violation of a dual solution on its (standardized) training set:
/// a=0 needs y f >= 1, 0<a<C needs y f = 1, a=C needs y f <= 1.
inline double kkt_max_violation(const SVMModel& model, const Eigen::MatrixXd& x, std::span<const int> y,
                                const Eigen::VectorXd& alpha) {
    double worst = 0.0;
    for (Eigen::Index t = 0; t < x.rows(); ++t) {
        const double u = y[static_cast<std::size_t>(t)] * model.decision_standardized(x.row(t).transpose()) - 1.0;
        const double a = alpha(t);
        double v;
        if (a <= 0) {
            v = std::max(0.0, -u);
        } else if (a >= model.C) {
            v = std::max(0.0, u);
        } else {
            v = std::abs(u);
        }
        worst = std::max(worst, v);
    }
    return worst;
}

struct Prediction {
    Label label = Label::cover;
    double decision = 0.0;
};

/// Positive decision means stego; a decision of exactly 0 is reported as cover.
inline Prediction svm_predict(const SVMModel& model, const Eigen::VectorXd& x) {
    if (x.size() != model.dim())
        throw DataError("expected a " + std::to_string(model.dim()) + "-dimensional feature vector, got " +
                        std::to_string(x.size()));
    Prediction p;
    p.decision = model.decision(x);
    p.label = p.decision > 0 ? Label::stego : Label::cover;
    return p;
}

/// Labels as SVM targets: cover -> -1, stego -> +1.
inline int svm_target(Label l) { return l == Label::stego ? 1 : -1; }

/// Fits the standardizer on `x` and trains on the standardized rows.
inline SVMTrainResult train_classifier(const Eigen::MatrixXd& x, std::span<const int> y, const SVMParams& params) {
    Standardizer s = standardize_fit(x);
    const Eigen::MatrixXd z = s.apply_rows(x);
    return svm_train(z, y, params, std::move(s));
}

} // namespace stegica
