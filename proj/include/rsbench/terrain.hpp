#pragma once

#include "rsbench/raster.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rsbench::terrain {

enum class TerrainClass {
    Ocean,
    Plain,
    Hill,
    LowUndulatingMountains,
    HighUndulatingMountains,
    Highland,
};

inline constexpr std::array<TerrainClass, 6> kAllClasses = {
    TerrainClass::Ocean,
    TerrainClass::Plain,
    TerrainClass::Hill,
    TerrainClass::LowUndulatingMountains,
    TerrainClass::HighUndulatingMountains,
    TerrainClass::Highland,
};

/// snake_case names used in manifests and reports ("low_undulating_mountains").
std::string_view to_string(TerrainClass c);
TerrainClass parse_terrain_class(std::string_view name);

/// The four resolution tiers of the dataset, in metres per pixel.
enum class ResolutionTier { M30, M5, M2, M0_5 };

inline constexpr std::array<ResolutionTier, 4> kAllTiers = {
    ResolutionTier::M30, ResolutionTier::M5, ResolutionTier::M2, ResolutionTier::M0_5};

double metres(ResolutionTier tier);
/// "30m", "5m", "2m", "0.5m"
std::string_view to_string(ResolutionTier tier);
ResolutionTier parse_resolution_tier(std::string_view name);
/// Nearest tier in log scale.
ResolutionTier nearest_tier(double metres_per_pixel);

/// Horizontal pixel size of a DEM in metres. Geographic grids are converted at
/// the latitude of the tile centre (111 320 m per degree of longitude at the equator).
std::pair<double, double> pixel_size_metres(const raster::GeoGrid& dem);

/// Surface derivatives per pixel: dz/dx towards east and dz/dy towards north,
/// both in metres per metre. Interior pixels use the Horn 3x3 operator; the
/// border falls back to one-sided differences.
struct Gradient {
    std::vector<double> east;
    std::vector<double> north;
};

Gradient horn_gradient(const raster::GeoGrid& dem);
Gradient horn_gradient(std::span<const double> values, int width, int height, double pixel_dx, double pixel_dy);

/// Slope in degrees for every pixel.
std::vector<double> slope_map(const raster::GeoGrid& dem);

struct Illumination {
    double azimuth_deg = 315.0;
    double altitude_deg = 45.0;
};

/// Lambertian hillshade in [0, 1]: dot product between the surface normal and
/// the light direction, clamped at zero.
std::vector<double> hillshade(const raster::GeoGrid& dem, Illumination light = {});
std::vector<double> hillshade(const Gradient& gradient, Illumination light = {});

/// Thresholds for the ordered decision list in classify_terrain.
struct ClassifierThresholds {
    double ocean_fraction = 0.90;      // fraction of pixels at or below sea level
    double sea_level = 0.0;            // metres
    double relief_high = 500.0;        // relief above -> high undulating mountains
    double relief_low = 200.0;         // relief above -> low undulating mountains
    double highland_mean = 1000.0;     // mean elevation at or above -> highland
    double relief_hill = 30.0;         // relief above -> hill
};

/// First match wins: ocean (sea-level fraction or an "ocean(s)" annotation),
/// high undulating, low undulating, highland, hill, plain.
TerrainClass classify_terrain(const raster::GeoGrid& dem, const std::optional<std::string>& annotation = std::nullopt,
                              const ClassifierThresholds& thresholds = {});

/// Elevation histogram layout: 50 m bins over [-200, 5000).
inline constexpr double kHistogramMin = -200.0;
inline constexpr double kHistogramMax = 5000.0;
inline constexpr double kHistogramBin = 50.0;
inline constexpr int kHistogramBins = 104;

/// Per-tile contribution to dataset statistics.
struct TileSummary {
    TerrainClass terrain = TerrainClass::Plain;
    ResolutionTier tier = ResolutionTier::M30;
    std::span<const float> elevations;
    std::optional<double> nodata;
};

/// Mergeable accumulator. merge() is associative and commutative so tiles can
/// be reduced in any order or in parallel.
class StatsAccumulator {
public:
    void add(const TileSummary& tile);
    void merge(const StatsAccumulator& other);

    std::size_t tile_count() const;
    std::size_t tiles(TerrainClass c) const { return tiles_[index(c)]; }
    std::uint64_t pixels(ResolutionTier tier, TerrainClass c) const { return pixels_[index(tier)][index(c)]; }
    const std::array<std::uint64_t, kHistogramBins>& histogram(TerrainClass c) const { return histogram_[index(c)]; }
    std::uint64_t below_range(TerrainClass c) const { return below_[index(c)]; }
    std::uint64_t above_range(TerrainClass c) const { return above_[index(c)]; }

private:
    static std::size_t index(TerrainClass c) { return static_cast<std::size_t>(c); }
    static std::size_t index(ResolutionTier t) { return static_cast<std::size_t>(t); }

    std::array<std::size_t, 6> tiles_{};
    std::array<std::array<std::uint64_t, 6>, 4> pixels_{};
    std::array<std::array<std::uint64_t, kHistogramBins>, 6> histogram_{};
    std::array<std::uint64_t, 6> below_{};
    std::array<std::uint64_t, 6> above_{};
};

struct TerrainStats {
    std::map<TerrainClass, double> class_proportions;
    /// counts[class][bin]
    std::map<TerrainClass, std::array<std::uint64_t, kHistogramBins>> elevation_histogram_by_class;
    /// cube root of pixel counts per (tier, class)
    std::map<ResolutionTier, std::map<TerrainClass, double>> depth_count_cube_root;
    std::size_t tile_count = 0;
};

/// Throws EmptyCatalog when no tile has been accumulated.
TerrainStats finalize_stats(const StatsAccumulator& acc);
TerrainStats dataset_stats(std::span<const TileSummary> tiles);

/// JSON report and the three CSV panels (proportions, elevation histogram,
/// cube-root pixel counts).
std::string stats_to_json(const TerrainStats& stats);
std::string proportions_csv(const TerrainStats& stats);
std::string elevation_histogram_csv(const TerrainStats& stats);
std::string pixel_count_csv(const TerrainStats& stats);

}  // namespace rsbench::terrain
