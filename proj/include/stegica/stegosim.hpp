#pragma once

// Image-in-image embedding simulators used to build test corpora:
//  - a toy invertible coupling network applied in the Haar domain, and
//  - an additive mixer that adds payload LL energy into chosen cover sub-bands.

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "stegica/coupling.hpp"
#include "stegica/error.hpp"
#include "stegica/image.hpp"
#include "stegica/rng.hpp"
#include "stegica/wavelet.hpp"

namespace stegica {

/// Peak signal-to-noise ratio in dB with peak 1.0; +infinity for identical inputs.
inline double psnr(const Raster& a, const Raster& b) {
    if (!a.same_shape(b)) throw DataError("psnr: images differ in size");
    if (a.data.empty()) throw DataError("psnr: empty images");
    double se = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double d = a.data[i] - b.data[i];
        se += d * d;
    }
    if (se == 0.0) return std::numeric_limits<double>::infinity();
    const double mse = se / static_cast<double>(a.data.size());
    return 10.0 * std::log10(1.0 / mse);
}

inline double psnr(const Image& a, const Image& b) { return psnr(a.raster(), b.raster()); }

struct InnEmbedding {
    Image stego;
    /// Payload-branch output; only an analyst with the network state sees it.
    SubBandStack residual;
    /// Cover-branch output before the stego is clamped and quantized.
    SubBandStack stego_bands;
};

inline InnEmbedding inn_embed(const Image& cover, const Image& payload, const CouplingNet& net) {
    if (cover.height() != payload.height() || cover.width() != payload.width())
        throw DataError("cover and payload dimensions differ");
    auto [y1, y2] = net_forward(haar_dwt(cover), haar_dwt(payload), net);
    InnEmbedding out{quantize_8bit(haar_idwt(y1)), std::move(y2), {}};
    out.stego_bands = std::move(y1);
    return out;
}

/// Runs the inverse network on the stego's sub-bands with `noise` standing in
/// for the unknown residual (zero when absent) and returns the clamped payload
/// estimate.
inline Image inn_reveal(const Image& stego, const std::optional<SubBandStack>& noise, const CouplingNet& net) {
    SubBandStack y1 = haar_dwt(stego);
    SubBandStack y2 = noise ? *noise : SubBandStack(y1.band_height, y1.band_width);
    if (!y2.same_shape(y1)) throw DataError("reveal noise shape does not match the stego image");
    auto [x1, x2] = net_inverse(std::move(y1), std::move(y2), net);
    return clamp_unit(haar_idwt(x2));
}

/// Unit-variance Gaussian sub-band noise of the given shape.
inline SubBandStack gaussian_stack(int band_height, int band_width, std::uint64_t seed) {
    SubBandStack s(band_height, band_width);
    Rng rng(seed);
    for (auto& b : s.bands)
        for (double& v : b) v = rng.normal();
    return s;
}

struct MixParams {
    double alpha = 0.2;
    /// Sub-band slots receiving payload LL energy.
    std::vector<int> target_bands = default_targets();

    static std::vector<int> default_targets() {
        std::vector<int> t;
        for (int c = 0; c < kChannels; ++c) {
            t.push_back(band_slot(c, BandKind::LL));
            t.push_back(band_slot(c, BandKind::LH));
        }
        return t;
    }

    void validate() const {
        if (!(alpha >= 0.0 && alpha <= 1.0)) throw UsageError("mix alpha must lie in [0, 1]");
        if (target_bands.empty()) throw UsageError("mix target bands must not be empty");
        for (int s : target_bands)
            if (s < 0 || s >= kNumBands) throw UsageError("mix target band out of range: " + std::to_string(s));
    }
};

/// For each target slot (channel c, band k):
///   stego_k += alpha * (|cover_k| / |payload_LL_c|) * payload_LL_c
/// then inverse DWT, clamp and 8-bit quantization.
inline Image additive_mix(const Image& cover, const Image& payload, const MixParams& params) {
    params.validate();
    if (cover.height() != payload.height() || cover.width() != payload.width())
        throw DataError("cover and payload dimensions differ");
    const SubBandStack cb = haar_dwt(cover);
    const SubBandStack pb = haar_dwt(payload);
    SubBandStack sb = cb;
    auto norm = [](std::span<const double> v) {
        double s = 0.0;
        for (double x : v) s += x * x;
        return std::sqrt(s);
    };
    for (int slot : params.target_bands) {
        const int channel = slot / kBandsPerChannel;
        const auto p_ll = pb.band(band_slot(channel, BandKind::LL));
        const double p_norm = norm(p_ll);
        const double factor = p_norm > 0 ? norm(cb.band(slot)) / p_norm : 0.0;
        auto dst = sb.band(slot);
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += params.alpha * factor * p_ll[i];
    }
    return quantize_8bit(haar_idwt(sb));
}

} // namespace stegica
