#include "rsbench/align.hpp"

#include "rsbench/error.hpp"
#include "rsbench/geodesy.hpp"
#include "rsbench/terrain.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <tuple>

namespace rsbench::align {

namespace {

using raster::GeoGrid;
using raster::GridSpec;

constexpr double kNodeSnap = 1e-9;
constexpr double kMinOverlap = 0.95;
constexpr double kMadScale = 1.4826;
constexpr double kMadFloor = 0.1;
constexpr int kIdwNeighbours = 8;

struct Box {
    double x0, x1, y0, y1;
    double area() const { return std::max(0.0, x1 - x0) * std::max(0.0, y1 - y0); }
};

Box extent(const raster::GeoTransform& t, int width, int height) {
    const double xa = t.origin_x;
    const double xb = t.origin_x + width * t.pixel_dx;
    const double ya = t.origin_y;
    const double yb = t.origin_y + height * t.pixel_dy;
    return {std::min(xa, xb), std::max(xa, xb), std::min(ya, yb), std::max(ya, yb)};
}

Box intersect(const Box& a, const Box& b) {
    return {std::max(a.x0, b.x0), std::min(a.x1, b.x1), std::max(a.y0, b.y0), std::min(a.y1, b.y1)};
}

double snap(double v) {
    const double r = std::round(v);
    return std::abs(v - r) < kNodeSnap ? r : v;
}

// Shared resampling loop; `to_source` maps a target-CRS point into the source CRS
// and returns false when the point cannot be mapped.
template <typename ToSource>
GeoGrid resample_impl(const GeoGrid& src, const GridSpec& target, ToSource to_source) {
    const std::size_t n = static_cast<std::size_t>(target.width) * static_cast<std::size_t>(target.height);
    bool filled = false;

    const auto source_index = [&](int r, int c, double& sr, double& sc) -> bool {
        const auto geo = raster::pixel_to_geo(target.transform, r + 0.5, c + 0.5);
        raster::GeoPoint2 p{};
        if (!to_source(geo, p)) return false;
        const auto px = raster::geo_to_pixel(src.transform(), p.x, p.y);
        if (!(px.row >= 0.0 && px.row <= src.height() && px.col >= 0.0 && px.col <= src.width())) return false;
        sr = snap(px.row - 0.5);
        sc = snap(px.col - 0.5);
        return true;
    };

    if (src.is_dem()) {
        const double fill = src.nodata().value_or(kDefaultDemNodata);
        std::vector<float> out(n);
        for (int r = 0; r < target.height; ++r) {
            for (int c = 0; c < target.width; ++c) {
                double sr = 0.0;
                double sc = 0.0;
                std::optional<double> v;
                if (source_index(r, c, sr, sc)) v = raster::sample_bilinear(src, 0, sr, sc);
                if (!v) filled = true;
                out[static_cast<std::size_t>(r) * target.width + c] = static_cast<float>(v ? *v : fill);
            }
        }
        auto nodata = src.nodata();
        if (filled && !nodata) nodata = kDefaultDemNodata;
        return GeoGrid::dem(target.width, target.height, target.transform, target.crs, std::move(out), nodata);
    }

    std::vector<std::uint8_t> out(n * 3, 0);
    for (int r = 0; r < target.height; ++r) {
        for (int c = 0; c < target.width; ++c) {
            double sr = 0.0;
            double sc = 0.0;
            if (!source_index(r, c, sr, sc)) continue;
            for (int b = 0; b < 3; ++b) {
                out[(static_cast<std::size_t>(r) * target.width + c) * 3 + b] =
                    raster::round_to_u8(*raster::sample_bilinear(src, b, sr, sc));
            }
        }
    }
    return GeoGrid::rgb(target.width, target.height, target.transform, target.crs, std::move(out), src.nodata());
}

void check_target(const GridSpec& target) {
    if (target.width <= 0 || target.height <= 0) throw Error(ErrorKind::InvalidArgument, "target grid is empty");
}

double median_in_place(std::vector<double>& v) {
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double upper = v[mid];
    if (v.size() % 2 == 1) return upper;
    const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

std::vector<double> gradient_magnitude(std::span<const double> field, int width, int height) {
    const auto g = terrain::horn_gradient(field, width, height, 1.0, 1.0);
    std::vector<double> out(g.east.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::hypot(g.east[i], g.north[i]);
    return out;
}

}  // namespace

std::size_t OutlierMask::flagged_count() const {
    return static_cast<std::size_t>(std::count(flags.begin(), flags.end(), std::uint8_t{1}));
}

double extent_overlap(const GeoGrid& src, const GridSpec& target) {
    const Box t = extent(target.transform, target.width, target.height);
    Box s{};
    if (src.crs() == target.crs) {
        s = extent(src.transform(), src.width(), src.height());
    } else {
        // Bounding box of the source outline sampled along its edges.
        s = {std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
             std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
        constexpr int kSteps = 16;
        for (int i = 0; i <= kSteps; ++i) {
            const double f = static_cast<double>(i) / kSteps;
            const std::array<std::pair<double, double>, 4> edge = {{
                {0.0, f * src.width()},
                {static_cast<double>(src.height()), f * src.width()},
                {f * src.height(), 0.0},
                {f * src.height(), static_cast<double>(src.width())},
            }};
            for (const auto& [row, col] : edge) {
                const auto p = raster::pixel_to_geo(src, row, col);
                try {
                    const auto q = geodesy::transform_point(src.crs(), target.crs, p);
                    s.x0 = std::min(s.x0, q.x);
                    s.x1 = std::max(s.x1, q.x);
                    s.y0 = std::min(s.y0, q.y);
                    s.y1 = std::max(s.y1, q.y);
                } catch (const Error&) {
                    // Outline points outside a projection's domain do not contribute.
                }
            }
        }
        if (!(s.x1 > s.x0)) return 0.0;
    }
    const double area = t.area();
    return area > 0.0 ? intersect(s, t).area() / area : 0.0;
}

GeoGrid resample_to_grid(const GeoGrid& src, const GridSpec& target) {
    check_target(target);
    if (!(src.crs() == target.crs)) {
        throw Error(ErrorKind::CrsMismatch, src.crs().to_string() + " vs " + target.crs.to_string());
    }
    const double overlap = extent_overlap(src, target);
    if (overlap < kMinOverlap) {
        throw Error(ErrorKind::InsufficientOverlap, "source covers " + std::to_string(overlap * 100.0) + "% of target");
    }
    return resample_impl(src, target, [](raster::GeoPoint2 in, raster::GeoPoint2& out) {
        out = in;
        return true;
    });
}

GeoGrid warp_to_grid(const GeoGrid& src, const GridSpec& target) {
    if (src.crs() == target.crs) return resample_to_grid(src, target);
    check_target(target);
    const double overlap = extent_overlap(src, target);
    if (overlap < kMinOverlap) {
        throw Error(ErrorKind::InsufficientOverlap, "source covers " + std::to_string(overlap * 100.0) + "% of target");
    }
    return resample_impl(src, target, [&](raster::GeoPoint2 in, raster::GeoPoint2& out) {
        try {
            out = geodesy::transform_point(target.crs, src.crs(), in);
            return true;
        } catch (const Error&) {
            return false;
        }
    });
}

OutlierMask detect_outliers(const GeoGrid& dem, OutlierParams params) {
    if (params.window < 3 || params.window % 2 == 0) {
        throw Error(ErrorKind::InvalidArgument, "window must be odd and at least 3");
    }
    if (!(params.z_threshold > 0.0)) throw Error(ErrorKind::InvalidArgument, "z threshold must be positive");

    const int w = dem.width();
    const int h = dem.height();
    const int half = params.window / 2;
    const auto z = dem.f32();

    OutlierMask mask{w, h, std::vector<std::uint8_t>(z.size(), 0)};
    std::vector<double> window;
    std::vector<double> deviations;
    window.reserve(static_cast<std::size_t>(params.window) * params.window);
    deviations.reserve(window.capacity());

    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            const std::size_t i = static_cast<std::size_t>(r) * w + c;
            if (dem.is_nodata(z[i])) {
                mask.flags[i] = 1;
                continue;
            }
            window.clear();
            for (int rr = std::max(0, r - half); rr <= std::min(h - 1, r + half); ++rr) {
                for (int cc = std::max(0, c - half); cc <= std::min(w - 1, c + half); ++cc) {
                    const float v = z[static_cast<std::size_t>(rr) * w + cc];
                    if (!dem.is_nodata(v)) window.push_back(v);
                }
            }
            const double med = median_in_place(window);
            deviations.clear();
            for (const double v : window) deviations.push_back(std::abs(v - med));
            const double mad = std::max(median_in_place(deviations), kMadFloor);
            if (std::abs(static_cast<double>(z[i]) - med) > params.z_threshold * kMadScale * mad) mask.flags[i] = 1;
        }
    }
    return mask;
}

GeoGrid repair_voids(const GeoGrid& dem, const OutlierMask& mask) {
    const int w = dem.width();
    const int h = dem.height();
    if (mask.width != w || mask.height != h || mask.flags.size() != dem.pixel_count()) {
        throw Error(ErrorKind::DimensionMismatch, "mask does not match DEM dimensions");
    }
    const auto z = dem.f32();
    std::vector<std::uint8_t> usable(z.size());
    bool any_usable = false;
    bool any_target = false;
    for (std::size_t i = 0; i < z.size(); ++i) {
        usable[i] = mask.flags[i] == 0 && !dem.is_nodata(z[i]);
        any_usable = any_usable || usable[i];
        any_target = any_target || !usable[i];
    }
    if (!any_usable) throw Error(ErrorKind::AllPixelsFlagged, "no unflagged pixel to interpolate from");
    if (!any_target) return dem;

    std::vector<float> out(z.begin(), z.end());
    using Candidate = std::tuple<long, int, int>;  // squared distance, row, col
    std::vector<Candidate> candidates;
    const int max_radius = std::max(w, h);

    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            const std::size_t i = static_cast<std::size_t>(r) * w + c;
            if (usable[i]) continue;
            candidates.clear();
            for (int radius = 1; radius <= max_radius; ++radius) {
                for (int dr = -radius; dr <= radius; ++dr) {
                    const int rr = r + dr;
                    if (rr < 0 || rr >= h) continue;
                    const bool edge_row = std::abs(dr) == radius;
                    for (int dc = -radius; dc <= radius; dc += edge_row ? 1 : 2 * radius) {
                        const int cc = c + dc;
                        if (cc < 0 || cc >= w) continue;
                        if (usable[static_cast<std::size_t>(rr) * w + cc]) {
                            candidates.emplace_back(static_cast<long>(dr) * dr + static_cast<long>(dc) * dc, rr, cc);
                        }
                    }
                }
                if (static_cast<int>(candidates.size()) >= kIdwNeighbours) {
                    std::nth_element(candidates.begin(), candidates.begin() + (kIdwNeighbours - 1), candidates.end());
                    const long kth = std::get<0>(candidates[kIdwNeighbours - 1]);
                    const long next_ring = static_cast<long>(radius + 1) * (radius + 1);
                    if (kth < next_ring) break;
                }
            }
            std::sort(candidates.begin(), candidates.end());
            const std::size_t k = std::min<std::size_t>(kIdwNeighbours, candidates.size());
            double num = 0.0;
            double den = 0.0;
            for (std::size_t j = 0; j < k; ++j) {
                const auto& [d2, rr, cc] = candidates[j];
                const double weight = 1.0 / static_cast<double>(d2);
                num += weight * z[static_cast<std::size_t>(rr) * w + cc];
                den += weight;
            }
            out[i] = static_cast<float>(num / den);
        }
    }
    return dem.with_samples(std::move(out));
}

AlignmentScore alignment_score(const GeoGrid& rgb, const GeoGrid& dem) {
    if (rgb.is_dem() || !dem.is_dem()) throw Error(ErrorKind::InvalidArgument, "expected an RGB and a DEM grid");
    if (!(GridSpec::of(rgb).transform == GridSpec::of(dem).transform) || rgb.width() != dem.width() ||
        rgb.height() != dem.height() || !(rgb.crs() == dem.crs())) {
        throw Error(ErrorKind::InvalidArgument, "RGB and DEM must share one grid");
    }
    const int w = rgb.width();
    const int h = rgb.height();
    const auto px = rgb.u8();
    std::vector<double> luminance(rgb.pixel_count());
    for (std::size_t i = 0; i < luminance.size(); ++i) {
        luminance[i] = 0.299 * px[3 * i] + 0.587 * px[3 * i + 1] + 0.114 * px[3 * i + 2];
    }
    const auto shade = terrain::hillshade(dem);
    const auto a = gradient_magnitude(luminance, w, h);
    const auto b = gradient_magnitude(shade, w, h);

    const double n = static_cast<double>(a.size());
    double ma = 0.0;
    double mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0.0;
    double saa = 0.0;
    double sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma;
        const double db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    constexpr double kTinyVariance = 1e-18;
    if (saa <= kTinyVariance * n || sbb <= kTinyVariance * n) return {0.5, true};
    const double ncc = std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
    return {(ncc + 1.0) / 2.0, false};
}

}  // namespace rsbench::align
