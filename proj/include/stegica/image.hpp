#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stegica/error.hpp"

namespace stegica {

inline constexpr int kChannels = 3;

/// Planar three-channel raster (R, G, B planes, each row-major).
/// Values are unconstrained; see Image for the validated [0,1] form.
struct Raster {
    int height = 0;
    int width = 0;
    std::vector<double> data;

    Raster() = default;
    Raster(int h, int w, double fill = 0.0)
        : height(h), width(w), data(static_cast<std::size_t>(kChannels) * h * w, fill) {
        if (h < 0 || w < 0) throw UsageError("raster dimensions must be non-negative");
    }

    std::size_t plane_size() const { return static_cast<std::size_t>(height) * width; }

    double& at(int c, int y, int x) {
        return data[static_cast<std::size_t>(c) * plane_size() + static_cast<std::size_t>(y) * width + x];
    }
    double at(int c, int y, int x) const {
        return data[static_cast<std::size_t>(c) * plane_size() + static_cast<std::size_t>(y) * width + x];
    }

    std::span<double> plane(int c) { return {data.data() + c * plane_size(), plane_size()}; }
    std::span<const double> plane(int c) const { return {data.data() + c * plane_size(), plane_size()}; }

    bool same_shape(const Raster& o) const { return height == o.height && width == o.width; }

    friend bool operator==(const Raster&, const Raster&) = default;
};

/// An RGB image with intensities in [0,1] and even, non-zero dimensions.
class Image {
public:
    Image() = default;

    /// Validates the raster; throws DataError when an invariant is broken.
    explicit Image(Raster r) : r_(std::move(r)) {
        if (r_.height <= 0 || r_.width <= 0 || r_.height % 2 != 0 || r_.width % 2 != 0)
            throw DataError("image dimensions must be even and positive, got " +
                            std::to_string(r_.height) + "x" + std::to_string(r_.width));
        for (double v : r_.data) {
            if (!(v >= 0.0 && v <= 1.0))
                throw DataError("image intensity outside [0,1]");
        }
    }

    int height() const { return r_.height; }
    int width() const { return r_.width; }
    const Raster& raster() const { return r_; }
    double at(int c, int y, int x) const { return r_.at(c, y, x); }

    friend bool operator==(const Image&, const Image&) = default;

private:
    Raster r_;
};

/// Clamps to [0,1] and rounds to the nearest 8-bit level, as any exchanged
/// image would be.
inline Image quantize_8bit(const Raster& r) {
    Raster q = r;
    for (double& v : q.data) {
        const double c = std::clamp(std::isnan(v) ? 0.0 : v, 0.0, 1.0);
        v = std::nearbyint(c * 255.0) / 255.0;
    }
    return Image(std::move(q));
}

/// Clamp to [0,1] without quantizing.
inline Image clamp_unit(const Raster& r) {
    Raster q = r;
    for (double& v : q.data) v = std::clamp(std::isnan(v) ? 0.0 : v, 0.0, 1.0);
    return Image(std::move(q));
}

} // namespace stegica
