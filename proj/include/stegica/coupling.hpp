#pragma once

// Affine coupling blocks on 12-channel wavelet tensors.
//
//   forward:  y2 = x2 + phi(x1)
//             y1 = x1 * exp(sigmoid(rho(y2) + b)) + eta(y2)
//   inverse:  x1 = (y1 - eta(y2)) * exp(-sigmoid(rho(y2) + b))
//             x2 = y2 - phi(x1)
//
// phi, rho and eta are fixed random 3x3 convolutions over all 12 channels
// (zero padding, no bias). b is a constant offset on the rho branch; with
// b = 0 the block reduces exactly to the textbook form.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "stegica/error.hpp"
#include "stegica/rng.hpp"
#include "stegica/wavelet.hpp"

namespace stegica {

/// 12 -> 12 channel 3x3 convolution with zero padding.
struct ConvMap {
    // weights[((out * 12 + in) * 3 + ky) * 3 + kx]
    std::vector<double> weights = std::vector<double>(kNumBands * kNumBands * 9, 0.0);

    double& w(int out, int in, int ky, int kx) { return weights[static_cast<std::size_t>(((out * kNumBands + in) * 3 + ky) * 3 + kx)]; }
    double w(int out, int in, int ky, int kx) const {
        return weights[static_cast<std::size_t>(((out * kNumBands + in) * 3 + ky) * 3 + kx)];
    }

    static ConvMap random(Rng& rng, double cap) {
        ConvMap m;
        for (double& v : m.weights) v = rng.uniform(-cap, cap);
        return m;
    }

    SubBandStack apply(const SubBandStack& x) const {
        const int h = x.band_height, wd = x.band_width;
        SubBandStack out(h, wd);
        out.source_height = x.source_height;
        out.source_width = x.source_width;
        for (int o = 0; o < kNumBands; ++o) {
            double* dst = out.bands[static_cast<std::size_t>(o)].data();
            for (int i = 0; i < kNumBands; ++i) {
                const double* src = x.bands[static_cast<std::size_t>(i)].data();
                for (int ky = 0; ky < 3; ++ky) {
                    for (int kx = 0; kx < 3; ++kx) {
                        const double wt = w(o, i, ky, kx);
                        if (wt == 0.0) continue;
                        const int dy = ky - 1, dx = kx - 1;
                        const int y0 = std::max(0, -dy), y1 = std::min(h, h - dy);
                        const int x0 = std::max(0, -dx), x1 = std::min(wd, wd - dx);
                        for (int y = y0; y < y1; ++y) {
                            double* drow = dst + static_cast<std::size_t>(y) * wd;
                            const double* srow = src + static_cast<std::size_t>(y + dy) * wd + dx;
                            for (int xx = x0; xx < x1; ++xx) drow[xx] += wt * srow[xx];
                        }
                    }
                }
            }
        }
        return out;
    }
};

struct CouplingBlock {
    ConvMap phi;
    ConvMap rho;
    ConvMap eta;
    double rho_bias = 0.0;
};

inline constexpr int kDefaultCouplingBlocks = 16;
/// Calibrated so that stego PSNR on synthetic covers lands in 30-45 dB.
inline constexpr double kDefaultWeightCap = 0.002;
/// Keeps exp(sigmoid(.)) close to 1 so the cover branch is not amplified 16 times.
inline constexpr double kDefaultRhoBias = -8.0;

struct CouplingNet {
    std::vector<CouplingBlock> blocks;
    std::uint64_t seed = 0;
    double weight_cap = 0.0;

    /// All maps identically zero.
    static CouplingNet zero(int num_blocks, double rho_bias = 0.0) {
        if (num_blocks < 1) throw UsageError("a coupling net needs at least one block");
        CouplingNet net;
        net.blocks.resize(static_cast<std::size_t>(num_blocks));
        for (auto& b : net.blocks) b.rho_bias = rho_bias;
        return net;
    }

    static CouplingNet random(std::uint64_t seed, int num_blocks = kDefaultCouplingBlocks,
                              double weight_cap = kDefaultWeightCap, double rho_bias = kDefaultRhoBias) {
        if (num_blocks < 1) throw UsageError("a coupling net needs at least one block");
        if (!(weight_cap >= 0.0 && weight_cap <= 0.1)) throw UsageError("coupling weight cap must lie in [0, 0.1]");
        CouplingNet net;
        net.seed = seed;
        net.weight_cap = weight_cap;
        Rng rng(seed);
        for (int k = 0; k < num_blocks; ++k) {
            CouplingBlock b;
            b.phi = ConvMap::random(rng, weight_cap);
            b.rho = ConvMap::random(rng, weight_cap);
            b.eta = ConvMap::random(rng, weight_cap);
            b.rho_bias = rho_bias;
            net.blocks.push_back(std::move(b));
        }
        return net;
    }
};

namespace detail {

inline double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

inline void check_pair_shape(const SubBandStack& a, const SubBandStack& b) {
    if (!a.same_shape(b)) throw DataError("coupling inputs differ in shape");
    a.check_consistent();
    b.check_consistent();
}

} // namespace detail

using StackPair = std::pair<SubBandStack, SubBandStack>;

inline StackPair coupling_forward(const SubBandStack& x1, const SubBandStack& x2, const CouplingBlock& blk) {
    detail::check_pair_shape(x1, x2);
    SubBandStack y2 = blk.phi.apply(x1);
    for (int k = 0; k < kNumBands; ++k) {
        auto o = y2.band(k);
        auto a = x2.band(k);
        for (std::size_t i = 0; i < o.size(); ++i) o[i] += a[i];
    }
    SubBandStack y1 = blk.eta.apply(y2);
    const SubBandStack r = blk.rho.apply(y2);
    for (int k = 0; k < kNumBands; ++k) {
        auto o = y1.band(k);
        auto a = x1.band(k);
        auto s = r.band(k);
        for (std::size_t i = 0; i < o.size(); ++i) o[i] += a[i] * std::exp(detail::sigmoid(s[i] + blk.rho_bias));
    }
    y1.source_height = y2.source_height = x1.source_height;
    y1.source_width = y2.source_width = x1.source_width;
    return {std::move(y1), std::move(y2)};
}

inline StackPair coupling_inverse(const SubBandStack& y1, const SubBandStack& y2, const CouplingBlock& blk) {
    detail::check_pair_shape(y1, y2);
    const SubBandStack e = blk.eta.apply(y2);
    const SubBandStack r = blk.rho.apply(y2);
    SubBandStack x1 = y1;
    for (int k = 0; k < kNumBands; ++k) {
        auto o = x1.band(k);
        auto ev = e.band(k);
        auto s = r.band(k);
        for (std::size_t i = 0; i < o.size(); ++i) o[i] = (o[i] - ev[i]) * std::exp(-detail::sigmoid(s[i] + blk.rho_bias));
    }
    SubBandStack x2 = y2;
    const SubBandStack p = blk.phi.apply(x1);
    for (int k = 0; k < kNumBands; ++k) {
        auto o = x2.band(k);
        auto pv = p.band(k);
        for (std::size_t i = 0; i < o.size(); ++i) o[i] -= pv[i];
    }
    return {std::move(x1), std::move(x2)};
}

/// All blocks in order.
inline StackPair net_forward(SubBandStack x1, SubBandStack x2, const CouplingNet& net) {
    for (const auto& b : net.blocks) std::tie(x1, x2) = coupling_forward(x1, x2, b);
    return {std::move(x1), std::move(x2)};
}

/// All blocks in reverse order.
inline StackPair net_inverse(SubBandStack y1, SubBandStack y2, const CouplingNet& net) {
    for (auto it = net.blocks.rbegin(); it != net.blocks.rend(); ++it) std::tie(y1, y2) = coupling_inverse(y1, y2, *it);
    return {std::move(y1), std::move(y2)};
}

} // namespace stegica
