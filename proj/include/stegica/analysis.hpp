#pragma once

// Mixing analysis: embedding changes per sub-band and the payload-vs-change
// Pearson correlation matrix, averaged per triplet.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "stegica/error.hpp"
#include "stegica/feature_store.hpp"
#include "stegica/image.hpp"
#include "stegica/image_io.hpp"
#include "stegica/wavelet.hpp"

namespace stegica {

struct Correlation {
    double value = 0.0;
    /// Set when either input has zero variance; value is then 0.
    bool degenerate = false;
};

/// Population covariance over the product of population standard deviations.
inline Correlation pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw DataError("pearson: length mismatch");
    if (x.size() < 2) throw DataError("pearson: need at least 2 values");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (!(sxx > 0) || !(syy > 0)) return {0.0, true};
    const double r = sxy / std::sqrt(sxx * syy);
    return {std::clamp(r, -1.0, 1.0), false};
}

/// dwt(stego) - dwt(cover).
inline SubBandStack embedding_changes(const Image& cover, const Image& stego) {
    if (cover.height() != stego.height() || cover.width() != stego.width())
        throw DataError("cover and stego dimensions differ");
    return subtract(haar_dwt(stego), haar_dwt(cover));
}

struct Triplet {
    Image cover;
    Image payload;
    Image stego;
};

/// Rows are payload sub-bands, columns embedding-change sub-bands.
struct CorrelationMatrix {
    Eigen::Matrix<double, kNumBands, kNumBands> values = Eigen::Matrix<double, kNumBands, kNumBands>::Zero();
    /// Entries where at least one triplet had a zero-variance input.
    Eigen::Matrix<bool, kNumBands, kNumBands> degenerate = Eigen::Matrix<bool, kNumBands, kNumBands>::Constant(false);
    std::size_t triplets = 0;

    /// Mean over channels of the (band, band) blocks: a 4x4 view.
    Eigen::Matrix4d channel_averaged() const {
        Eigen::Matrix4d out = Eigen::Matrix4d::Zero();
        for (int c = 0; c < kChannels; ++c)
            out += values.block<kBandsPerChannel, kBandsPerChannel>(c * kBandsPerChannel, c * kBandsPerChannel);
        return out / kChannels;
    }
};

/// Per-triplet correlation matrix.
inline CorrelationMatrix triplet_correlations(const Triplet& t) {
    if (t.cover.height() != t.payload.height() || t.cover.width() != t.payload.width())
        throw DataError("triplet images differ in size");
    const SubBandStack pay = haar_dwt(t.payload);
    const SubBandStack chg = embedding_changes(t.cover, t.stego);
    CorrelationMatrix m;
    m.triplets = 1;
    for (int i = 0; i < kNumBands; ++i) {
        for (int j = 0; j < kNumBands; ++j) {
            const Correlation r = pearson(pay.band(i), chg.band(j));
            m.values(i, j) = r.value;
            m.degenerate(i, j) = r.degenerate;
        }
    }
    return m;
}

/// Entrywise mean of the per-triplet matrices, accumulated in input order.
/// A running mean is used so that k identical matrices average to exactly
/// that matrix (a sum followed by a division can round).
inline CorrelationMatrix correlation_matrix(std::span<const Triplet> triplets) {
    if (triplets.empty()) throw DataError("correlation_matrix needs at least one triplet");
    CorrelationMatrix acc;
    for (std::size_t k = 0; k < triplets.size(); ++k) {
        const CorrelationMatrix m = triplet_correlations(triplets[k]);
        acc.values += (m.values - acc.values) / static_cast<double>(k + 1);
        acc.degenerate = acc.degenerate.array() || m.degenerate.array();
    }
    acc.values = acc.values.cwiseMax(-1.0).cwiseMin(1.0);
    acc.triplets = triplets.size();
    return acc;
}

/// Labeled CSV: header "payload\change,R-LL,...", one row per payload band.
inline void write_correlation_csv(const CorrelationMatrix& m, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << "payload\\change";
    for (int j = 0; j < kNumBands; ++j) out << ',' << band_name(j);
    out << '\n';
    for (int i = 0; i < kNumBands; ++i) {
        out << band_name(i);
        for (int j = 0; j < kNumBands; ++j) out << ',' << format_real(m.values(i, j));
        out << '\n';
    }
    if (!out) throw DataError("write failure on " + path.string());
}

/// Heatmap with each matrix cell drawn as a cell x cell block; -1 -> 0, +1 -> 255.
inline void write_correlation_heatmap(const CorrelationMatrix& m, const std::filesystem::path& path, int cell = 16) {
    const int side = kNumBands * cell;
    std::vector<double> plane(static_cast<std::size_t>(side) * side);
    for (int y = 0; y < side; ++y)
        for (int x = 0; x < side; ++x) plane[static_cast<std::size_t>(y) * side + x] = m.values(y / cell, x / cell);
    const std::string header = "P5\n" + std::to_string(side) + " " + std::to_string(side) + "\n255\n";
    std::vector<std::uint8_t> bytes(header.begin(), header.end());
    for (double v : plane) bytes.push_back(static_cast<std::uint8_t>(std::nearbyint((std::clamp(v, -1.0, 1.0) + 1.0) * 127.5)));
    detail::write_file_bytes(path, bytes);
}

} // namespace stegica
