#include "rsbench/terrain.hpp"

#include "rsbench/annotation.hpp"
#include "rsbench/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

namespace rsbench::terrain {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr double kMetresPerDegreeLon = 111320.0;
constexpr double kMetresPerDegreeLat = 110574.0;

constexpr std::array<std::string_view, 6> kClassNames = {
    "ocean", "plain", "hill", "low_undulating_mountains", "high_undulating_mountains", "highland",
};

constexpr std::array<std::string_view, 4> kTierNames = {"30m", "5m", "2m", "0.5m"};
constexpr std::array<double, 4> kTierMetres = {30.0, 5.0, 2.0, 0.5};

}  // namespace

std::string_view to_string(TerrainClass c) { return kClassNames[static_cast<std::size_t>(c)]; }

TerrainClass parse_terrain_class(std::string_view name) {
    for (std::size_t i = 0; i < kClassNames.size(); ++i) {
        if (kClassNames[i] == name) return kAllClasses[i];
    }
    throw Error(ErrorKind::InvalidArgument, "unknown terrain class '" + std::string(name) + "'");
}

double metres(ResolutionTier tier) { return kTierMetres[static_cast<std::size_t>(tier)]; }

std::string_view to_string(ResolutionTier tier) { return kTierNames[static_cast<std::size_t>(tier)]; }

ResolutionTier parse_resolution_tier(std::string_view name) {
    for (std::size_t i = 0; i < kTierNames.size(); ++i) {
        if (kTierNames[i] == name) return kAllTiers[i];
    }
    throw Error(ErrorKind::InvalidArgument, "unknown resolution tier '" + std::string(name) + "'");
}

ResolutionTier nearest_tier(double metres_per_pixel) {
    if (!(metres_per_pixel > 0.0)) throw Error(ErrorKind::InvalidArgument, "pixel size must be positive");
    std::size_t best = 0;
    double best_distance = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < kTierMetres.size(); ++i) {
        const double d = std::abs(std::log(metres_per_pixel / kTierMetres[i]));
        if (d < best_distance) {
            best_distance = d;
            best = i;
        }
    }
    return kAllTiers[best];
}

std::pair<double, double> pixel_size_metres(const raster::GeoGrid& dem) {
    const auto& t = dem.transform();
    if (dem.crs().is_projected()) return {t.pixel_dx, t.pixel_dy};
    const double lat = t.origin_y + 0.5 * dem.height() * t.pixel_dy;
    return {t.pixel_dx * kMetresPerDegreeLon * std::cos(lat * kDeg), t.pixel_dy * kMetresPerDegreeLat};
}

Gradient horn_gradient(std::span<const double> z, int width, int height, double pixel_dx, double pixel_dy) {
    if (pixel_dx == 0.0 || pixel_dy == 0.0 || !std::isfinite(pixel_dx) || !std::isfinite(pixel_dy)) {
        throw Error(ErrorKind::DegenerateInput, "pixel size must be non-zero");
    }
    const auto at = [&](int r, int c) { return z[static_cast<std::size_t>(r) * width + c]; };

    // Derivative along columns for one row; central in the interior, one-sided at the edge.
    const auto d_col = [&](int r, int c) -> double {
        if (width == 1) return 0.0;
        if (c == 0) return at(r, 1) - at(r, 0);
        if (c == width - 1) return at(r, c) - at(r, c - 1);
        return 0.5 * (at(r, c + 1) - at(r, c - 1));
    };
    const auto d_row = [&](int r, int c) -> double {
        if (height == 1) return 0.0;
        if (r == 0) return at(1, c) - at(0, c);
        if (r == height - 1) return at(r, c) - at(r - 1, c);
        return 0.5 * (at(r + 1, c) - at(r - 1, c));
    };

    Gradient g;
    const std::size_t n = static_cast<std::size_t>(width) * height;
    g.east.resize(n);
    g.north.resize(n);
    for (int r = 0; r < height; ++r) {
        const int ru = std::max(r - 1, 0);
        const int rd = std::min(r + 1, height - 1);
        for (int c = 0; c < width; ++c) {
            const int cl = std::max(c - 1, 0);
            const int cr = std::min(c + 1, width - 1);
            // Horn weights 1-2-1 across the perpendicular direction.
            const double dc = (d_col(ru, c) + 2.0 * d_col(r, c) + d_col(rd, c)) / 4.0;
            const double dr = (d_row(r, cl) + 2.0 * d_row(r, c) + d_row(r, cr)) / 4.0;
            const std::size_t i = static_cast<std::size_t>(r) * width + c;
            g.east[i] = dc / pixel_dx;
            g.north[i] = dr / pixel_dy;
        }
    }
    return g;
}

Gradient horn_gradient(const raster::GeoGrid& dem) {
    const auto f = dem.f32();
    const std::vector<double> z(f.begin(), f.end());
    const auto [dx, dy] = pixel_size_metres(dem);
    return horn_gradient(z, dem.width(), dem.height(), dx, dy);
}

std::vector<double> slope_map(const raster::GeoGrid& dem) {
    const auto g = horn_gradient(dem);
    std::vector<double> out(g.east.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::atan(std::hypot(g.east[i], g.north[i])) / kDeg;
    return out;
}

std::vector<double> hillshade(const Gradient& g, Illumination light) {
    const double az = light.azimuth_deg * kDeg;
    const double alt = light.altitude_deg * kDeg;
    const double lx = std::sin(az) * std::cos(alt);
    const double ly = std::cos(az) * std::cos(alt);
    const double lz = std::sin(alt);
    std::vector<double> out(g.east.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double nx = -g.east[i];
        const double ny = -g.north[i];
        const double norm = std::sqrt(nx * nx + ny * ny + 1.0);
        out[i] = std::max(0.0, (nx * lx + ny * ly + lz) / norm);
    }
    return out;
}

std::vector<double> hillshade(const raster::GeoGrid& dem, Illumination light) {
    return hillshade(horn_gradient(dem), light);
}

TerrainClass classify_terrain(const raster::GeoGrid& dem, const std::optional<std::string>& annotation,
                              const ClassifierThresholds& th) {
    std::size_t valid = 0;
    std::size_t at_sea_level = 0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (const float v : dem.f32()) {
        if (dem.is_nodata(v)) continue;
        ++valid;
        if (v <= th.sea_level) ++at_sea_level;
        lo = std::min<double>(lo, v);
        hi = std::max<double>(hi, v);
        sum += v;
    }
    if (valid == 0) throw Error(ErrorKind::DegenerateInput, "DEM has no valid pixels");

    const double sea_fraction = static_cast<double>(at_sea_level) / static_cast<double>(valid);
    const bool text_says_ocean = annotation && catalog::validate_annotation(*annotation).has("oceans");
    if (sea_fraction >= th.ocean_fraction || text_says_ocean) return TerrainClass::Ocean;

    const double relief = hi - lo;
    const double mean = sum / static_cast<double>(valid);
    if (relief > th.relief_high) return TerrainClass::HighUndulatingMountains;
    if (relief > th.relief_low) return TerrainClass::LowUndulatingMountains;
    if (mean >= th.highland_mean) return TerrainClass::Highland;
    if (relief > th.relief_hill) return TerrainClass::Hill;
    return TerrainClass::Plain;
}

void StatsAccumulator::add(const TileSummary& tile) {
    const auto c = index(tile.terrain);
    ++tiles_[c];
    std::uint64_t count = 0;
    for (const float v : tile.elevations) {
        if (!std::isfinite(v) || (tile.nodata && v == static_cast<float>(*tile.nodata))) continue;
        ++count;
        if (v < kHistogramMin) {
            ++below_[c];
        } else if (v >= kHistogramMax) {
            ++above_[c];
        } else {
            const auto bin = static_cast<std::size_t>(std::floor((v - kHistogramMin) / kHistogramBin));
            ++histogram_[c][std::min<std::size_t>(bin, kHistogramBins - 1)];
        }
    }
    pixels_[index(tile.tier)][c] += count;
}

void StatsAccumulator::merge(const StatsAccumulator& other) {
    for (std::size_t c = 0; c < 6; ++c) {
        tiles_[c] += other.tiles_[c];
        below_[c] += other.below_[c];
        above_[c] += other.above_[c];
        for (std::size_t b = 0; b < kHistogramBins; ++b) histogram_[c][b] += other.histogram_[c][b];
        for (std::size_t t = 0; t < 4; ++t) pixels_[t][c] += other.pixels_[t][c];
    }
}

std::size_t StatsAccumulator::tile_count() const {
    std::size_t n = 0;
    for (const auto t : tiles_) n += t;
    return n;
}

TerrainStats finalize_stats(const StatsAccumulator& acc) {
    const std::size_t total = acc.tile_count();
    if (total == 0) throw Error(ErrorKind::EmptyCatalog, "no tiles to summarize");
    TerrainStats s;
    s.tile_count = total;
    for (const auto c : kAllClasses) {
        s.class_proportions[c] = static_cast<double>(acc.tiles(c)) / static_cast<double>(total);
        s.elevation_histogram_by_class[c] = acc.histogram(c);
    }
    for (const auto t : kAllTiers) {
        for (const auto c : kAllClasses) s.depth_count_cube_root[t][c] = std::cbrt(static_cast<double>(acc.pixels(t, c)));
    }
    return s;
}

TerrainStats dataset_stats(std::span<const TileSummary> tiles) {
    StatsAccumulator acc;
    for (const auto& t : tiles) acc.add(t);
    return finalize_stats(acc);
}

std::string stats_to_json(const TerrainStats& s) {
    nlohmann::ordered_json j;
    j["tile_count"] = s.tile_count;
    for (const auto c : kAllClasses) j["class_proportions"][std::string(to_string(c))] = s.class_proportions.at(c);
    j["elevation_histogram"]["bin_min"] = kHistogramMin;
    j["elevation_histogram"]["bin_width"] = kHistogramBin;
    j["elevation_histogram"]["bins"] = kHistogramBins;
    for (const auto c : kAllClasses) {
        const auto& h = s.elevation_histogram_by_class.at(c);
        j["elevation_histogram"]["counts"][std::string(to_string(c))] = std::vector<std::uint64_t>(h.begin(), h.end());
    }
    for (const auto t : kAllTiers) {
        for (const auto c : kAllClasses) {
            j["depth_count_cube_root"][std::string(to_string(t))][std::string(to_string(c))] =
                s.depth_count_cube_root.at(t).at(c);
        }
    }
    return j.dump(2);
}

std::string proportions_csv(const TerrainStats& s) {
    std::ostringstream out;
    out << "terrain,proportion\n" << std::setprecision(17);
    for (const auto c : kAllClasses) out << to_string(c) << ',' << s.class_proportions.at(c) << '\n';
    return out.str();
}

std::string elevation_histogram_csv(const TerrainStats& s) {
    std::ostringstream out;
    out << "bin_lower_m";
    for (const auto c : kAllClasses) out << ',' << to_string(c);
    out << '\n';
    for (int b = 0; b < kHistogramBins; ++b) {
        out << kHistogramMin + b * kHistogramBin;
        for (const auto c : kAllClasses) out << ',' << s.elevation_histogram_by_class.at(c)[b];
        out << '\n';
    }
    return out.str();
}

std::string pixel_count_csv(const TerrainStats& s) {
    std::ostringstream out;
    out << "resolution" << std::setprecision(17);
    for (const auto c : kAllClasses) out << ',' << to_string(c);
    out << '\n';
    for (const auto t : kAllTiers) {
        out << to_string(t);
        for (const auto c : kAllClasses) out << ',' << s.depth_count_cube_root.at(t).at(c);
        out << '\n';
    }
    return out.str();
}

}  // namespace rsbench::terrain
