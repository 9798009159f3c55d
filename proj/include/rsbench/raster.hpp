#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace rsbench::raster {

enum class CrsKind { Wgs84, Lv95, Utm };
enum class Hemisphere { North, South };

/// Coordinate reference system. `zone` is meaningful only for UTM.
struct CrsId {
    CrsKind kind = CrsKind::Wgs84;
    int zone = 0;
    Hemisphere hemisphere = Hemisphere::North;

    static CrsId wgs84() { return {CrsKind::Wgs84, 0, Hemisphere::North}; }
    static CrsId lv95() { return {CrsKind::Lv95, 0, Hemisphere::North}; }
    /// Throws InvalidArgument for zones outside 1..60.
    static CrsId utm(int zone, Hemisphere hemisphere);
    /// Accepts 4326, 2056, 326xx and 327xx.
    static CrsId from_epsg(int code);

    int epsg() const;
    /// "EPSG:<code>"
    std::string to_string() const;
    static CrsId parse(const std::string& text);
    bool is_projected() const { return kind != CrsKind::Wgs84; }

    bool operator==(const CrsId&) const = default;
};

/// North-up affine geotransform. The origin is the outer corner of pixel (0, 0).
struct GeoTransform {
    double origin_x = 0.0;
    double origin_y = 0.0;
    double pixel_dx = 1.0;
    double pixel_dy = -1.0;

    bool operator==(const GeoTransform&) const = default;
};

enum class DType { Float32, UInt8 };

std::string to_string(DType dtype);

/// Georeferenced raster. Samples are row-major and pixel-interleaved
/// (index = (row * width + col) * bands + band). Only two layouts exist:
/// single-band float32 (DEM) and three-band uint8 (RGB). Immutable after
/// construction apart from explicit copies.
class GeoGrid {
public:
    static GeoGrid dem(int width, int height, GeoTransform transform, CrsId crs,
                       std::vector<float> samples, std::optional<double> nodata = std::nullopt);
    static GeoGrid rgb(int width, int height, GeoTransform transform, CrsId crs,
                       std::vector<std::uint8_t> samples, std::optional<double> nodata = std::nullopt);

    int width() const { return width_; }
    int height() const { return height_; }
    int bands() const { return dtype_ == DType::Float32 ? 1 : 3; }
    DType dtype() const { return dtype_; }
    bool is_dem() const { return dtype_ == DType::Float32; }
    const GeoTransform& transform() const { return transform_; }
    const CrsId& crs() const { return crs_; }
    const std::optional<double>& nodata() const { return nodata_; }
    std::size_t pixel_count() const { return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_); }

    /// Throws InvalidArgument when called on the wrong dtype.
    std::span<const float> f32() const;
    std::span<const std::uint8_t> u8() const;

    float at(int row, int col) const { return f32()[static_cast<std::size_t>(row) * width_ + col]; }
    std::uint8_t at(int row, int col, int band) const {
        return u8()[(static_cast<std::size_t>(row) * width_ + col) * 3 + band];
    }

    /// True for a DEM sample that equals the nodata sentinel or is not finite.
    bool is_nodata(float value) const;

    GeoGrid with_samples(std::vector<float> samples) const;
    GeoGrid with_samples(std::vector<std::uint8_t> samples) const;
    GeoGrid with_transform(GeoTransform transform) const;
    GeoGrid with_nodata(std::optional<double> nodata) const;

    bool operator==(const GeoGrid&) const = default;

private:
    GeoGrid() = default;
    void validate() const;

    int width_ = 0;
    int height_ = 0;
    DType dtype_ = DType::Float32;
    GeoTransform transform_;
    CrsId crs_;
    std::optional<double> nodata_;
    std::variant<std::vector<float>, std::vector<std::uint8_t>> samples_;
};

/// Target geometry for resampling: transform, size and CRS without samples.
struct GridSpec {
    GeoTransform transform;
    int width = 0;
    int height = 0;
    CrsId crs;

    static GridSpec of(const GeoGrid& grid) { return {grid.transform(), grid.width(), grid.height(), grid.crs()}; }
};

enum class TileFormat { Internal, GeoTiffSubset };

/// Chooses the format from the extension: ".rst" internal, ".tif"/".tiff" GeoTIFF.
TileFormat format_for_path(const std::filesystem::path& path);

GeoGrid load_tile(const std::filesystem::path& path, TileFormat format);
GeoGrid load_tile(const std::filesystem::path& path);

/// Writes the internal format: one JSON header line, then little-endian samples.
void save_tile(const GeoGrid& grid, const std::filesystem::path& path);

/// Serialized internal-format bytes, as written by save_tile.
std::string encode_tile(const GeoGrid& grid);
GeoGrid decode_tile(std::span<const char> bytes);

struct GeoPoint2 {
    double x = 0.0;
    double y = 0.0;
};

struct PixelPoint {
    double row = 0.0;
    double col = 0.0;
};

GeoPoint2 pixel_to_geo(const GeoTransform& transform, double row, double col);
PixelPoint geo_to_pixel(const GeoTransform& transform, double x, double y);
inline GeoPoint2 pixel_to_geo(const GeoGrid& grid, double row, double col) {
    return pixel_to_geo(grid.transform(), row, col);
}
inline PixelPoint geo_to_pixel(const GeoGrid& grid, double x, double y) {
    return geo_to_pixel(grid.transform(), x, y);
}

inline constexpr int kCanonicalSize = 512;

/// Bilinear resize to the canonical tile shape (pixel-centre alignment, extent
/// preserved). uint8 results are rounded half away from zero. A grid that is
/// already 512x512 is returned unchanged.
GeoGrid resize_canonical(const GeoGrid& grid);

/// General form of resize_canonical for an arbitrary output shape.
GeoGrid resize_bilinear(const GeoGrid& grid, int width, int height);

/// Bilinear sample at fractional pixel-centre coordinates: integer (row, col)
/// hit pixel centres exactly. Coordinates are clamped to the centre lattice.
/// Returns nullopt when a sample with non-zero weight is nodata.
std::optional<double> sample_bilinear(const GeoGrid& grid, int band, double row, double col);

/// Half-away-from-zero rounding clamped to [0, 255].
std::uint8_t round_to_u8(double value);

}  // namespace rsbench::raster
