#pragma once

// One-level orthonormal 2-D Haar transform, per color channel.
//
// For each 2x2 block [a b; c d]:
//   LL = (a+b+c+d)/2   LH = (a-b+c-d)/2
//   HL = (a+b-c-d)/2   HH = (a-b-c+d)/2
// The basis is orthonormal, so energy is preserved exactly (up to rounding).

#include <array>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stegica/error.hpp"
#include "stegica/image.hpp"

namespace stegica {

enum class BandKind { LL = 0, LH = 1, HL = 2, HH = 3 };

inline constexpr int kBandsPerChannel = 4;
inline constexpr int kNumBands = kChannels * kBandsPerChannel;

/// Slot of (channel, band) in the fixed order R-LL, R-LH, R-HL, R-HH, G-LL, ...
constexpr int band_slot(int channel, BandKind kind) { return channel * kBandsPerChannel + static_cast<int>(kind); }

inline std::string band_name(int slot) {
    static constexpr std::array<std::string_view, 3> ch = {"R", "G", "B"};
    static constexpr std::array<std::string_view, 4> kind = {"LL", "LH", "HL", "HH"};
    return std::string(ch[static_cast<std::size_t>(slot / kBandsPerChannel)]) + "-" +
           std::string(kind[static_cast<std::size_t>(slot % kBandsPerChannel)]);
}

/// The 12 half-resolution sub-bands of one image, each row-major.
struct SubBandStack {
    int band_height = 0;
    int band_width = 0;
    int source_height = 0;
    int source_width = 0;
    std::array<std::vector<double>, kNumBands> bands;

    SubBandStack() = default;
    SubBandStack(int bh, int bw) : band_height(bh), band_width(bw), source_height(2 * bh), source_width(2 * bw) {
        for (auto& b : bands) b.assign(static_cast<std::size_t>(bh) * bw, 0.0);
    }

    std::size_t band_size() const { return static_cast<std::size_t>(band_height) * band_width; }

    std::span<double> band(int slot) { return bands[static_cast<std::size_t>(slot)]; }
    std::span<const double> band(int slot) const { return bands[static_cast<std::size_t>(slot)]; }

    bool same_shape(const SubBandStack& o) const { return band_height == o.band_height && band_width == o.band_width; }

    /// Throws DataError unless every band has band_height*band_width entries.
    void check_consistent() const {
        for (const auto& b : bands)
            if (b.size() != band_size()) throw DataError("sub-band stack has mismatched band shapes");
    }

    double energy() const {
        double e = 0.0;
        for (const auto& b : bands)
            for (double v : b) e += v * v;
        return e;
    }

    friend bool operator==(const SubBandStack&, const SubBandStack&) = default;
};

inline SubBandStack haar_dwt(const Raster& img) {
    if (img.height % 2 != 0 || img.width % 2 != 0)
        throw UsageError("haar_dwt requires even dimensions, got " + std::to_string(img.height) + "x" +
                         std::to_string(img.width));
    const int bh = img.height / 2;
    const int bw = img.width / 2;
    SubBandStack s(bh, bw);
    for (int c = 0; c < kChannels; ++c) {
        auto ll = s.band(band_slot(c, BandKind::LL));
        auto lh = s.band(band_slot(c, BandKind::LH));
        auto hl = s.band(band_slot(c, BandKind::HL));
        auto hh = s.band(band_slot(c, BandKind::HH));
        for (int y = 0; y < bh; ++y) {
            for (int x = 0; x < bw; ++x) {
                const double a = img.at(c, 2 * y, 2 * x);
                const double b = img.at(c, 2 * y, 2 * x + 1);
                const double cc = img.at(c, 2 * y + 1, 2 * x);
                const double d = img.at(c, 2 * y + 1, 2 * x + 1);
                const std::size_t i = static_cast<std::size_t>(y) * bw + x;
                ll[i] = 0.5 * ((a + b) + (cc + d));
                lh[i] = 0.5 * ((a - b) + (cc - d));
                hl[i] = 0.5 * ((a + b) - (cc + d));
                hh[i] = 0.5 * ((a - b) - (cc - d));
            }
        }
    }
    return s;
}

inline SubBandStack haar_dwt(const Image& img) { return haar_dwt(img.raster()); }

/// Exact inverse of haar_dwt. No clamping: synthetic stacks may map outside [0,1].
inline Raster haar_idwt(const SubBandStack& s) {
    s.check_consistent();
    Raster r(2 * s.band_height, 2 * s.band_width);
    for (int c = 0; c < kChannels; ++c) {
        auto ll = s.band(band_slot(c, BandKind::LL));
        auto lh = s.band(band_slot(c, BandKind::LH));
        auto hl = s.band(band_slot(c, BandKind::HL));
        auto hh = s.band(band_slot(c, BandKind::HH));
        for (int y = 0; y < s.band_height; ++y) {
            for (int x = 0; x < s.band_width; ++x) {
                const std::size_t i = static_cast<std::size_t>(y) * s.band_width + x;
                r.at(c, 2 * y, 2 * x) = 0.5 * ((ll[i] + lh[i]) + (hl[i] + hh[i]));
                r.at(c, 2 * y, 2 * x + 1) = 0.5 * ((ll[i] - lh[i]) + (hl[i] - hh[i]));
                r.at(c, 2 * y + 1, 2 * x) = 0.5 * ((ll[i] + lh[i]) - (hl[i] + hh[i]));
                r.at(c, 2 * y + 1, 2 * x + 1) = 0.5 * ((ll[i] - lh[i]) - (hl[i] - hh[i]));
            }
        }
    }
    return r;
}

/// Band-wise a - b.
inline SubBandStack subtract(const SubBandStack& a, const SubBandStack& b) {
    if (!a.same_shape(b)) throw DataError("sub-band stacks differ in shape");
    SubBandStack d = a;
    for (int k = 0; k < kNumBands; ++k) {
        auto out = d.band(k);
        auto rhs = b.band(k);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] -= rhs[i];
    }
    return d;
}

} // namespace stegica
