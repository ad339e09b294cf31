#pragma once

// First four moments of the independent components and the 8-value feature
// vector {mu1, mu2, sigma1, sigma2, gamma1, gamma2, kappa1, kappa2}.

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <utility>

#include "stegica/error.hpp"
#include "stegica/fastica.hpp"
#include "stegica/feature_store.hpp"

namespace stegica {

/// Population moments; kappa is excess kurtosis (0 for a Gaussian).
struct MomentSet {
    double mu = 0.0;
    double sigma = 0.0;
    double gamma = 0.0;
    double kappa = 0.0;
};

using FeatureVector = std::array<double, kFeatureDim>;

namespace detail {

// Neumaier-compensated accumulator.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

} // namespace detail

/// Corrected two-pass evaluation with compensated sums. Throws
/// NumericalError("zero variance") for a constant vector.
inline MomentSet moments(std::span<const double> v) {
    if (v.size() < 2) throw UsageError("moments need at least 2 values");
    const double n = static_cast<double>(v.size());

    detail::CompensatedSum s;
    double max_abs = 0.0;
    for (double x : v) {
        if (!std::isfinite(x)) throw DataError("moments: non-finite value");
        s.add(x);
        max_abs = std::max(max_abs, std::abs(x));
    }
    double mean = s.value() / n;
    detail::CompensatedSum resid;
    for (double x : v) resid.add(x - mean);
    mean += resid.value() / n;

    detail::CompensatedSum s2, s3, s4;
    for (double x : v) {
        const double d = x - mean;
        const double d2 = d * d;
        s2.add(d2);
        s3.add(d2 * d);
        s4.add(d2 * d2);
    }
    const double var = s2.value() / n;
    const double sigma = std::sqrt(var);
    if (!(sigma > 1e-13 * max_abs) || var == 0.0) throw NumericalError("zero variance");

    MomentSet m;
    m.mu = mean;
    m.sigma = sigma;
    m.gamma = (s3.value() / n) / (var * sigma);
    m.kappa = (s4.value() / n) / (var * var) - 3.0;
    return m;
}

/// Resolves ICA's sign and order ambiguity: each component is negated when
/// its skewness is negative, then components are ordered by decreasing
/// kurtosis, ties by decreasing skewness, then by original order.
inline ComponentPair canonicalize(ComponentPair pair) {
    MomentSet m1 = moments(pair.c1);
    MomentSet m2 = moments(pair.c2);
    auto flip = [](std::vector<double>& c, MomentSet& m) {
        for (double& x : c) x = -x;
        m.mu = -m.mu;
        m.gamma = -m.gamma;
    };
    if (m1.gamma < 0) {
        flip(pair.c1, m1);
        pair.unmixing.row(0) *= -1.0;
    }
    if (m2.gamma < 0) {
        flip(pair.c2, m2);
        pair.unmixing.row(1) *= -1.0;
    }
    const bool swap = m1.kappa < m2.kappa || (m1.kappa == m2.kappa && m1.gamma < m2.gamma);
    if (swap) {
        std::swap(pair.c1, pair.c2);
        pair.unmixing.row(0).swap(pair.unmixing.row(1));
    }
    return pair;
}

/// Moments of c1 and c2 interleaved in feature order. Expects a canonical pair.
inline FeatureVector assemble_features(const ComponentPair& pair) {
    const MomentSet a = moments(pair.c1);
    const MomentSet b = moments(pair.c2);
    return {a.mu, b.mu, a.sigma, b.sigma, a.gamma, b.gamma, a.kappa, b.kappa};
}

} // namespace stegica
