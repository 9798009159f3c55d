#pragma once

#include "rsbench/raster.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace rsbench::enhance {

struct StretchConfig {
    double p_low = 1.0;
    double p_high = 99.0;

    /// Throws InvalidArgument unless 0 <= p_low < p_high <= 100.
    void validate() const;
};

/// Percentile by linear interpolation between order statistics at rank
/// p / 100 * (n - 1).
double percentile(std::span<const double> values, double p);

struct ClipResult {
    std::vector<double> values;
    double i_min = 0.0;
    double i_max = 0.0;
};

ClipResult percentile_clip(std::span<const double> channel, const StretchConfig& cfg);

struct StretchResult {
    std::vector<std::uint8_t> values;
    bool degenerate = false;  // i_min == i_max; every output is 0
};

/// (v - i_min) / (i_max - i_min) * 255 rounded half away from zero.
StretchResult linear_stretch(std::span<const double> channel, double i_min, double i_max);

struct EnhanceResult {
    raster::GeoGrid grid;
    std::array<bool, 3> degenerate{};
};

/// Per channel: min-max normalization to [0, 255], percentile clip, linear stretch.
EnhanceResult enhance_rgb(const raster::GeoGrid& rgb, const StretchConfig& cfg = {});

}  // namespace rsbench::enhance
