#include "rsbench/error.hpp"
#include "rsbench/geodesy.hpp"
#include "rsbench/io.hpp"
#include "rsbench/pipeline.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace rsbench::pipeline {

namespace {

namespace fs = std::filesystem;
using raster::CrsId;
using raster::GeoGrid;
using raster::GeoTransform;

constexpr double kDemNodata = -9999.0;
constexpr int kOctaves = 6;

struct ClassRecipe {
    double base;
    double amplitude;
    const char* annotation;
};

// Ocean, plain, hill, low undulating, high undulating, highland.
constexpr std::array<ClassRecipe, 6> kRecipes = {{
    {-50.0, 40.0, "Open oceans around a small island"},
    {200.0, 20.0, "Flat plains with farmland and a river"},
    {300.0, 120.0, "Gentle hills above farmland"},
    {400.0, 350.0, "Low mountains and wooded ridges"},
    {800.0, 1500.0, "High mountains with sharp ridges and a lake"},
    {1500.0, 100.0, "A high plateau dotted with lakes"},
}};

constexpr std::array<double, 4> kTierMetres = {30.0, 5.0, 2.0, 0.5};

std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double lattice(std::int64_t ix, std::int64_t iy, int octave, std::uint64_t seed) {
    const auto h = mix(seed ^ mix(static_cast<std::uint64_t>(ix) * 0x100000001b3ULL ^
                                  mix(static_cast<std::uint64_t>(iy) + 0x51ed270b27ULL * (octave + 1))));
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double fade(double t) { return t * t * (3.0 - 2.0 * t); }

// Multi-octave value noise in [0, 1], continuous in (x, y).
double fractal(double x, double y, std::uint64_t seed) {
    double sum = 0.0;
    double norm = 0.0;
    double amp = 1.0;
    for (int o = 0; o < kOctaves; ++o) {
        const double fx = std::floor(x);
        const double fy = std::floor(y);
        const auto ix = static_cast<std::int64_t>(fx);
        const auto iy = static_cast<std::int64_t>(fy);
        const double tx = fade(x - fx);
        const double ty = fade(y - fy);
        const double a = lattice(ix, iy, o, seed);
        const double b = lattice(ix + 1, iy, o, seed);
        const double c = lattice(ix, iy + 1, o, seed);
        const double d = lattice(ix + 1, iy + 1, o, seed);
        sum += amp * ((a + (b - a) * tx) + ((c + (d - c) * tx) - (a + (b - a) * tx)) * ty);
        norm += amp;
        amp *= 0.5;
        x *= 2.0;
        y *= 2.0;
    }
    return sum / norm;
}

struct Terrain {
    double east0, north0, extent;
    double lo, hi;
    std::uint64_t seed;
    ClassRecipe recipe;

    double raw(double e, double n) const {
        return fractal((e - east0) / extent * 2.5, (n - north0) / extent * 2.5, seed);
    }
    double elevation(double e, double n) const {
        const double f = std::clamp((raw(e, n) - lo) / (hi - lo), 0.0, 1.0);
        return recipe.base + recipe.amplitude * f;
    }
};

GeoGrid rgb_tile(const Terrain& t, int size) {
    const double px = t.extent / size;
    const GeoTransform gt{t.east0, t.north0 + t.extent, px, -px};
    std::vector<float> z(static_cast<std::size_t>(size) * size);
    for (int r = 0; r < size; ++r) {
        for (int c = 0; c < size; ++c) {
            const auto p = raster::pixel_to_geo(gt, r + 0.5, c + 0.5);
            z[static_cast<std::size_t>(r) * size + c] = static_cast<float>(t.elevation(p.x, p.y));
        }
    }
    const auto dem = GeoGrid::dem(size, size, gt, CrsId::lv95(), std::move(z));
    const auto shade = terrain::hillshade(dem);
    std::vector<std::uint8_t> rgb(shade.size() * 3);
    for (std::size_t i = 0; i < shade.size(); ++i) {
        rgb[3 * i] = raster::round_to_u8(20.0 + 220.0 * shade[i]);
        rgb[3 * i + 1] = raster::round_to_u8(30.0 + 200.0 * shade[i]);
        rgb[3 * i + 2] = raster::round_to_u8(40.0 + 180.0 * shade[i]);
    }
    return GeoGrid::rgb(size, size, gt, CrsId::lv95(), std::move(rgb));
}

GeoGrid dem_tile(const Terrain& t, int size, bool geographic, bool defects) {
    GeoTransform gt;
    CrsId crs = CrsId::lv95();
    if (geographic) {
        double lon0 = std::numeric_limits<double>::infinity();
        double lon1 = -lon0;
        double lat0 = lon0;
        double lat1 = -lon0;
        for (const double e : {t.east0, t.east0 + t.extent}) {
            for (const double n : {t.north0, t.north0 + t.extent}) {
                const auto g = geodesy::lv95_to_wgs84({e, n, CrsId::lv95()});
                lon0 = std::min(lon0, g.lon);
                lon1 = std::max(lon1, g.lon);
                lat0 = std::min(lat0, g.lat);
                lat1 = std::max(lat1, g.lat);
            }
        }
        const double mx = 0.05 * (lon1 - lon0);
        const double my = 0.05 * (lat1 - lat0);
        gt = {lon0 - mx, lat1 + my, (lon1 - lon0 + 2 * mx) / size, -(lat1 - lat0 + 2 * my) / size};
        crs = CrsId::wgs84();
    } else {
        const double px = t.extent / size;
        gt = {t.east0, t.north0 + t.extent, px, -px};
    }
    std::vector<float> z(static_cast<std::size_t>(size) * size);
    for (int r = 0; r < size; ++r) {
        for (int c = 0; c < size; ++c) {
            auto p = raster::pixel_to_geo(gt, r + 0.5, c + 0.5);
            if (geographic) p = geodesy::transform_point(CrsId::wgs84(), CrsId::lv95(), p);
            z[static_cast<std::size_t>(r) * size + c] = static_cast<float>(t.elevation(p.x, p.y));
        }
    }
    std::optional<double> nodata;
    if (defects) {
        nodata = kDemNodata;
        const int q = size / 4;
        for (const auto& [r, c] : std::array<std::pair<int, int>, 4>{{{q, q}, {q, 3 * q}, {3 * q, q}, {2 * q, 2 * q + 3}}}) {
            z[static_cast<std::size_t>(r) * size + c] += 3000.0f;
        }
        for (int r = 3 * q - 2; r <= 3 * q + 2; ++r) {
            for (int c = 3 * q - 2; c <= 3 * q + 2; ++c) z[static_cast<std::size_t>(r) * size + c] = static_cast<float>(kDemNodata);
        }
    }
    return GeoGrid::dem(size, size, gt, crs, std::move(z), nodata);
}

}  // namespace

void write_synthetic_dataset(const fs::path& dir, const SynthOptions& options) {
    if (options.count < 1 || options.size < 16) {
        throw Error(ErrorKind::InvalidArgument, "synthetic dataset needs count >= 1 and size >= 16");
    }
    fs::create_directories(dir / "rgb");
    fs::create_directories(dir / "dem");
    std::string annotations;
    for (int i = 0; i < options.count; ++i) {
        const auto& recipe = kRecipes[static_cast<std::size_t>(i) % kRecipes.size()];
        const double dem_px = kTierMetres[static_cast<std::size_t>(i) % kTierMetres.size()];
        Terrain t{2600000.0 + (i % 5) * 20000.0, 1200000.0 + (i / 5) * 20000.0, dem_px * options.size, 0.0, 1.0,
                  mix(options.seed * 1000003ULL + static_cast<std::uint64_t>(i)), recipe};

        // Normalise the noise range on a reference lattice over the tile.
        constexpr int kRef = 96;
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (int r = 0; r <= kRef; ++r) {
            for (int c = 0; c <= kRef; ++c) {
                const double v = t.raw(t.east0 + t.extent * c / kRef, t.north0 + t.extent * r / kRef);
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        }
        t.lo = lo;
        t.hi = hi;

        char id[32];
        std::snprintf(id, sizeof id, "tile_%03d", i);
        raster::save_tile(rgb_tile(t, 2 * options.size), dir / "rgb" / (std::string(id) + ".rst"));
        raster::save_tile(dem_tile(t, options.size, i % 2 == 1, i % 3 == 0), dir / "dem" / (std::string(id) + ".rst"));
        annotations += nlohmann::ordered_json{{"id", id}, {"text", recipe.annotation}}.dump() + "\n";
    }
    write_file_atomic(dir / "annotations.jsonl", annotations);
}

}  // namespace rsbench::pipeline
