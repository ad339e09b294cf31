#pragma once

// Per-image PCA over the 12 flattened wavelet sub-bands. Sub-bands are the
// variables, pixel positions the samples.
//
// Component indices are 1-based and ordered by decreasing variance:
// component 1 carries the most variance, component 12 the least.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstddef>
#include <string>

#include "stegica/error.hpp"
#include "stegica/wavelet.hpp"

namespace stegica {

/// 12 x N matrix of mean-centered sub-band rows.
struct ObservationMatrix {
    Eigen::MatrixXd values;
    std::array<double, kNumBands> row_means{};

    Eigen::Index samples() const { return values.cols(); }
};

inline ObservationMatrix build_observations(const SubBandStack& stack) {
    stack.check_consistent();
    const auto n = static_cast<Eigen::Index>(stack.band_size());
    ObservationMatrix obs;
    obs.values.resize(kNumBands, n);
    for (int k = 0; k < kNumBands; ++k) {
        auto band = stack.band(k);
        obs.values.row(k) = Eigen::Map<const Eigen::RowVectorXd>(band.data(), n);
        double mean = 0.0;
        if (n > 0) {
            // Corrected two-pass mean: exact for constant rows.
            mean = obs.values.row(k).sum() / static_cast<double>(n);
            mean += (obs.values.row(k).array() - mean).sum() / static_cast<double>(n);
        }
        obs.values.row(k).array() -= mean;
        obs.row_means[static_cast<std::size_t>(k)] = mean;
    }
    return obs;
}

struct PCAModel {
    /// Column k is the loading vector of component k+1.
    Eigen::Matrix<double, kNumBands, kNumBands> components;
    Eigen::Matrix<double, kNumBands, 1> eigenvalues;
    Eigen::Matrix<double, kNumBands, 1> explained_variance_ratio;
};

/// Two distinct 1-based component indices in [1, 12].
class ComponentIndexPair {
public:
    ComponentIndexPair(int first, int second) : first_(first), second_(second) {
        if (first < 1 || first > kNumBands || second < 1 || second > kNumBands)
            throw UsageError("PCA component index out of range [1,12]: (" + std::to_string(first) + "," +
                             std::to_string(second) + ")");
        if (first == second) throw UsageError("PCA component indices must differ, got (" + std::to_string(first) + "," +
                                              std::to_string(second) + ")");
    }

    int first() const { return first_; }
    int second() const { return second_; }

    friend bool operator==(const ComponentIndexPair&, const ComponentIndexPair&) = default;

private:
    int first_;
    int second_;
};

/// Eigendecomposition of the population (divisor N) covariance. Each loading
/// vector is signed so that its largest-magnitude entry is positive, ties
/// going to the lowest index.
inline PCAModel pca_fit(const ObservationMatrix& obs) {
    const Eigen::Index n = obs.samples();
    if (obs.values.rows() != kNumBands) throw DataError("observation matrix must have 12 rows");
    if (n < kNumBands) throw DataError("PCA needs at least 12 samples, got " + std::to_string(n));
    if (!obs.values.allFinite()) throw DataError("observation matrix contains non-finite values");

    Eigen::Matrix<double, kNumBands, kNumBands> cov = (obs.values * obs.values.transpose()) / static_cast<double>(n);
    cov = 0.5 * (cov + cov.transpose()).eval();

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, kNumBands, kNumBands>> es(cov);
    if (es.info() != Eigen::Success) throw NumericalError("covariance eigendecomposition failed");

    PCAModel m;
    // Eigen sorts ascending; reverse to descending.
    for (int k = 0; k < kNumBands; ++k) {
        const int src = kNumBands - 1 - k;
        m.eigenvalues(k) = std::max(0.0, es.eigenvalues()(src));
        Eigen::Matrix<double, kNumBands, 1> v = es.eigenvectors().col(src);
        int arg = 0;
        for (int i = 1; i < kNumBands; ++i)
            if (std::abs(v(i)) > std::abs(v(arg))) arg = i;
        if (v(arg) < 0) v = -v;
        m.components.col(k) = v;
    }
    const double total = m.eigenvalues.sum();
    if (total > 0) {
        m.explained_variance_ratio = m.eigenvalues / total;
    } else {
        m.explained_variance_ratio.setZero();
    }
    return m;
}

/// Projections of the centered observations onto two loading vectors (2 x N).
inline Eigen::MatrixXd pca_project(const ObservationMatrix& obs, const PCAModel& model, ComponentIndexPair pair) {
    Eigen::MatrixXd out(2, obs.samples());
    out.row(0) = model.components.col(pair.first() - 1).transpose() * obs.values;
    out.row(1) = model.components.col(pair.second() - 1).transpose() * obs.values;
    return out;
}

} // namespace stegica
