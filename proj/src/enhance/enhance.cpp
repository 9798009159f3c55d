#include "rsbench/enhance.hpp"

#include "rsbench/error.hpp"

#include <algorithm>
#include <cmath>

namespace rsbench::enhance {

void StretchConfig::validate() const {
    if (!(p_low >= 0.0 && p_low < p_high && p_high <= 100.0)) {
        throw Error(ErrorKind::InvalidArgument, "stretch percentiles must satisfy 0 <= low < high <= 100");
    }
}

double percentile(std::span<const double> values, double p) {
    if (values.empty()) throw Error(ErrorKind::InvalidArgument, "percentile of an empty channel");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double pos = p / 100.0 * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    if (frac == 0.0) return sorted[lo];
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

ClipResult percentile_clip(std::span<const double> channel, const StretchConfig& cfg) {
    cfg.validate();
    if (channel.empty()) throw Error(ErrorKind::InvalidArgument, "empty channel");
    ClipResult r;
    r.i_min = percentile(channel, cfg.p_low);
    r.i_max = percentile(channel, cfg.p_high);
    r.values.reserve(channel.size());
    for (const double v : channel) r.values.push_back(std::clamp(v, r.i_min, r.i_max));
    return r;
}

StretchResult linear_stretch(std::span<const double> channel, double i_min, double i_max) {
    if (i_min > i_max) throw Error(ErrorKind::InvalidArgument, "i_min must not exceed i_max");
    StretchResult r;
    r.values.resize(channel.size(), 0);
    if (i_min == i_max) {
        r.degenerate = true;
        return r;
    }
    const double range = i_max - i_min;
    for (std::size_t i = 0; i < channel.size(); ++i) {
        r.values[i] = raster::round_to_u8((channel[i] - i_min) / range * 255.0);
    }
    return r;
}

EnhanceResult enhance_rgb(const raster::GeoGrid& rgb, const StretchConfig& cfg) {
    cfg.validate();
    if (rgb.is_dem()) throw Error(ErrorKind::BandMismatch, "enhancement expects a 3-band RGB grid");
    const auto px = rgb.u8();
    const std::size_t n = rgb.pixel_count();
    std::vector<std::uint8_t> out(px.size());
    std::array<bool, 3> degenerate{};

    std::vector<double> channel(n);
    for (int b = 0; b < 3; ++b) {
        for (std::size_t i = 0; i < n; ++i) channel[i] = px[i * 3 + b];
        const auto [lo, hi] = std::minmax_element(channel.begin(), channel.end());
        const double cmin = *lo;
        const double cmax = *hi;
        if (cmax > cmin) {
            for (auto& v : channel) v = (v - cmin) / (cmax - cmin) * 255.0;
        }
        const auto clipped = percentile_clip(channel, cfg);
        const auto stretched = linear_stretch(clipped.values, clipped.i_min, clipped.i_max);
        degenerate[static_cast<std::size_t>(b)] = stretched.degenerate;
        for (std::size_t i = 0; i < n; ++i) out[i * 3 + b] = stretched.values[i];
    }
    return {rgb.with_samples(std::move(out)), degenerate};
}

}  // namespace rsbench::enhance
