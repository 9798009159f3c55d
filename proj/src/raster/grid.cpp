#include "rsbench/error.hpp"
#include "rsbench/raster.hpp"

#include <cmath>
#include <sstream>

namespace rsbench::raster {

CrsId CrsId::utm(int zone, Hemisphere hemisphere) {
    if (zone < 1 || zone > 60) {
        throw Error(ErrorKind::InvalidArgument, "UTM zone must be in 1..60, got " + std::to_string(zone));
    }
    return {CrsKind::Utm, zone, hemisphere};
}

CrsId CrsId::from_epsg(int code) {
    if (code == 4326) return wgs84();
    if (code == 2056) return lv95();
    if (code > 32600 && code <= 32660) return utm(code - 32600, Hemisphere::North);
    if (code > 32700 && code <= 32760) return utm(code - 32700, Hemisphere::South);
    throw Error(ErrorKind::UnsupportedFormat, "unsupported EPSG code " + std::to_string(code));
}

int CrsId::epsg() const {
    switch (kind) {
        case CrsKind::Wgs84: return 4326;
        case CrsKind::Lv95: return 2056;
        case CrsKind::Utm: return (hemisphere == Hemisphere::North ? 32600 : 32700) + zone;
    }
    return 0;
}

std::string CrsId::to_string() const { return "EPSG:" + std::to_string(epsg()); }

CrsId CrsId::parse(const std::string& text) {
    std::string digits = text;
    if (digits.rfind("EPSG:", 0) == 0) digits = digits.substr(5);
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos) {
        throw Error(ErrorKind::CorruptHeader, "malformed CRS '" + text + "'");
    }
    return from_epsg(std::stoi(digits));
}

std::string to_string(DType dtype) { return dtype == DType::Float32 ? "float32" : "uint8"; }

GeoGrid GeoGrid::dem(int width, int height, GeoTransform transform, CrsId crs, std::vector<float> samples,
                     std::optional<double> nodata) {
    GeoGrid g;
    g.width_ = width;
    g.height_ = height;
    g.dtype_ = DType::Float32;
    g.transform_ = transform;
    g.crs_ = crs;
    g.nodata_ = nodata;
    g.samples_ = std::move(samples);
    g.validate();
    return g;
}

GeoGrid GeoGrid::rgb(int width, int height, GeoTransform transform, CrsId crs, std::vector<std::uint8_t> samples,
                     std::optional<double> nodata) {
    GeoGrid g;
    g.width_ = width;
    g.height_ = height;
    g.dtype_ = DType::UInt8;
    g.transform_ = transform;
    g.crs_ = crs;
    g.nodata_ = nodata;
    g.samples_ = std::move(samples);
    g.validate();
    return g;
}

void GeoGrid::validate() const {
    if (width_ <= 0 || height_ <= 0) {
        throw Error(ErrorKind::InvalidArgument, "grid dimensions must be positive");
    }
    if (transform_.pixel_dx == 0.0 || transform_.pixel_dy == 0.0 || !std::isfinite(transform_.pixel_dx) ||
        !std::isfinite(transform_.pixel_dy)) {
        throw Error(ErrorKind::InvalidArgument, "pixel size must be finite and non-zero");
    }
    const std::size_t expected = pixel_count() * static_cast<std::size_t>(bands());
    const std::size_t actual = std::visit([](const auto& v) { return v.size(); }, samples_);
    if (actual != expected) {
        std::ostringstream msg;
        msg << "expected " << expected << " samples, got " << actual;
        throw Error(ErrorKind::DimensionMismatch, msg.str());
    }
}

std::span<const float> GeoGrid::f32() const {
    if (const auto* v = std::get_if<std::vector<float>>(&samples_)) return *v;
    throw Error(ErrorKind::InvalidArgument, "grid is not float32");
}

std::span<const std::uint8_t> GeoGrid::u8() const {
    if (const auto* v = std::get_if<std::vector<std::uint8_t>>(&samples_)) return *v;
    throw Error(ErrorKind::InvalidArgument, "grid is not uint8");
}

bool GeoGrid::is_nodata(float value) const {
    if (!std::isfinite(value)) return true;
    return nodata_.has_value() && value == static_cast<float>(*nodata_);
}

GeoGrid GeoGrid::with_samples(std::vector<float> samples) const {
    return dem(width_, height_, transform_, crs_, std::move(samples), nodata_);
}

GeoGrid GeoGrid::with_samples(std::vector<std::uint8_t> samples) const {
    return rgb(width_, height_, transform_, crs_, std::move(samples), nodata_);
}

GeoGrid GeoGrid::with_transform(GeoTransform transform) const {
    GeoGrid g = *this;
    g.transform_ = transform;
    g.validate();
    return g;
}

GeoGrid GeoGrid::with_nodata(std::optional<double> nodata) const {
    GeoGrid g = *this;
    g.nodata_ = nodata;
    return g;
}

GeoPoint2 pixel_to_geo(const GeoTransform& t, double row, double col) {
    return {t.origin_x + col * t.pixel_dx, t.origin_y + row * t.pixel_dy};
}

PixelPoint geo_to_pixel(const GeoTransform& t, double x, double y) {
    return {(y - t.origin_y) / t.pixel_dy, (x - t.origin_x) / t.pixel_dx};
}

std::uint8_t round_to_u8(double value) {
    if (!(value > 0.0)) return 0;
    if (value >= 255.0) return 255;
    return static_cast<std::uint8_t>(std::floor(value + 0.5));
}

}  // namespace rsbench::raster
