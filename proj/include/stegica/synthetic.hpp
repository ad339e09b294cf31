#pragma once

// Seeded synthetic "natural-looking" RGB images: a smooth illumination
// gradient, overlapping flat-colored ellipses and rectangles (sharp edges),
// an oriented sinusoidal texture and mild sensor noise. Channels share a
// luminance structure plus per-object tints, so sub-bands are correlated
// across channels the way photographs are.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>

#include "stegica/image.hpp"
#include "stegica/rng.hpp"

namespace stegica {

inline Image synthetic_image(int height, int width, std::uint64_t seed) {
    if (height <= 0 || width <= 0 || height % 2 || width % 2)
        throw UsageError("synthetic image dimensions must be even and positive");
    Rng rng(seed);
    Raster r(height, width);

    // Illumination gradient.
    double base[kChannels], gx[kChannels], gy[kChannels];
    const double lum = rng.uniform(0.3, 0.6);
    const double lgx = rng.uniform(-0.2, 0.2), lgy = rng.uniform(-0.2, 0.2);
    for (int c = 0; c < kChannels; ++c) {
        base[c] = lum + rng.uniform(-0.08, 0.08);
        gx[c] = lgx + rng.uniform(-0.03, 0.03);
        gy[c] = lgy + rng.uniform(-0.03, 0.03);
    }
    for (int c = 0; c < kChannels; ++c)
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x)
                r.at(c, y, x) = base[c] + gx[c] * (x / double(width) - 0.5) + gy[c] * (y / double(height) - 0.5);

    // Flat objects.
    const int objects = 4 + static_cast<int>(rng.below(9));
    for (int k = 0; k < objects; ++k) {
        const bool ellipse = rng.uniform() < 0.6;
        const double cx = rng.uniform(0, width), cy = rng.uniform(0, height);
        const double ax = rng.uniform(0.05, 0.35) * width, ay = rng.uniform(0.05, 0.35) * height;
        const double angle = rng.uniform(0, std::numbers::pi);
        const double ca = std::cos(angle), sa = std::sin(angle);
        const double l = rng.uniform(0.1, 0.85);
        double col[kChannels];
        for (int c = 0; c < kChannels; ++c) col[c] = l + rng.uniform(-0.12, 0.12);
        const double opacity = rng.uniform(0.5, 1.0);
        for (int y = 0; y < height; ++y) {
            for (int x = 0; x < width; ++x) {
                const double u = ((x - cx) * ca + (y - cy) * sa) / ax;
                const double v = (-(x - cx) * sa + (y - cy) * ca) / ay;
                const bool inside = ellipse ? (u * u + v * v <= 1.0) : (std::abs(u) <= 1.0 && std::abs(v) <= 1.0);
                if (!inside) continue;
                for (int c = 0; c < kChannels; ++c) r.at(c, y, x) = (1 - opacity) * r.at(c, y, x) + opacity * col[c];
            }
        }
    }

    // Oriented texture.
    const double freq = rng.uniform(0.05, 0.6);
    const double theta = rng.uniform(0, std::numbers::pi);
    const double amp = rng.uniform(0.0, 0.06);
    const double phase = rng.uniform(0, 2 * std::numbers::pi);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const double t = amp * std::sin(freq * (x * std::cos(theta) + y * std::sin(theta)) + phase);
            for (int c = 0; c < kChannels; ++c) r.at(c, y, x) += t;
        }
    }

    // Sensor noise: a shared luminance part plus a small per-channel part.
    const double sigma = rng.uniform(0.004, 0.02);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const double shared = rng.normal() * sigma;
            for (int c = 0; c < kChannels; ++c) r.at(c, y, x) += shared + 0.5 * sigma * rng.normal();
        }
    }

    for (double& v : r.data) v = std::clamp(v, 0.02, 0.95);
    return quantize_8bit(r);
}

} // namespace stegica
