#include "rsbench/error.hpp"
#include "rsbench/io.hpp"
#include "rsbench/raster.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace rsbench {
namespace {

using raster::CrsId;
using testing::TiffOptions;

raster::GeoGrid sample_dem() {
    return testing::dem_from(6, 5, [](int r, int c) { return 100.0 + r * 7.25 - c * 1.5; },
                             {2600000.0, 1200000.0, 2.0, -2.0}, CrsId::lv95());
}

raster::GeoGrid load(const raster::GeoGrid& grid, const TiffOptions& options = {}) {
    testing::TempDir dir;
    testing::write_geotiff(grid, dir / "t.tif", options);
    return raster::load_tile(dir / "t.tif");
}

TEST(GeoTiff, LittleEndianFloatDem) {
    const auto dem = sample_dem();
    EXPECT_EQ(load(dem), dem);
}

TEST(GeoTiff, BigEndianMultiStripDem) {
    const auto dem = sample_dem();
    TiffOptions o;
    o.big_endian = true;
    o.rows_per_strip = 2;
    EXPECT_EQ(load(dem, o), dem);
}

TEST(GeoTiff, DeflateStrips) {
    const auto dem = sample_dem();
    TiffOptions o;
    o.compression = 8;
    o.rows_per_strip = 3;
    EXPECT_EQ(load(dem, o), dem);
}

TEST(GeoTiff, RgbWgs84) {
    const auto rgb = testing::rgb_from(
        5, 4, [](int r, int c, int b) { return static_cast<std::uint8_t>(r * 40 + c * 7 + b * 3); },
        {7.4, 46.9, 1e-4, -1e-4}, CrsId::wgs84());
    EXPECT_EQ(load(rgb), rgb);
}

TEST(GeoTiff, UtmCrsAndNodata) {
    const auto dem = testing::dem_from(3, 3, [](int r, int c) { return r == c ? -9999.0 : 12.5; },
                                       {381000.0, 5200000.0, 30.0, -30.0},
                                       CrsId::utm(32, raster::Hemisphere::North), -9999.0);
    const auto got = load(dem);
    EXPECT_EQ(got.crs().epsg(), 32632);
    ASSERT_TRUE(got.nodata().has_value());
    EXPECT_DOUBLE_EQ(*got.nodata(), -9999.0);
    EXPECT_EQ(got, dem);
}

TEST(GeoTiff, PixelIsPointShiftsOriginToCorner) {
    const auto dem = sample_dem();
    TiffOptions o;
    o.pixel_is_point = true;
    const auto got = load(dem, o);
    EXPECT_DOUBLE_EQ(got.transform().origin_x, dem.transform().origin_x);
    EXPECT_DOUBLE_EQ(got.transform().origin_y, dem.transform().origin_y);
}

TEST(GeoTiff, UnsupportedVariants) {
    const auto dem = sample_dem();
    TiffOptions lzw;
    lzw.compression = 5;
    EXPECT_ERROR_KIND(load(dem, lzw), ErrorKind::UnsupportedFormat);
    TiffOptions tiled;
    tiled.tiled = true;
    EXPECT_ERROR_KIND(load(dem, tiled), ErrorKind::UnsupportedFormat);
    TiffOptions predictor;
    predictor.predictor = 3;
    EXPECT_ERROR_KIND(load(dem, predictor), ErrorKind::UnsupportedFormat);
    TiffOptions planar;
    planar.planar = 2;
    EXPECT_ERROR_KIND(load(dem, planar), ErrorKind::UnsupportedFormat);
    TiffOptions plain;
    plain.georeferenced = false;
    EXPECT_ERROR_KIND(load(dem, plain), ErrorKind::UnsupportedFormat);
}

TEST(GeoTiff, ShortStripIsDimensionMismatch) {
    TiffOptions o;
    o.rows_per_strip = 2;
    o.truncate_last_strip = 4;
    EXPECT_ERROR_KIND(load(sample_dem(), o), ErrorKind::DimensionMismatch);
}

TEST(GeoTiff, CorruptHeaders) {
    testing::TempDir dir;
    write_file_atomic(dir / "a.tif", "XX*\0");
    EXPECT_ERROR_KIND(raster::load_tile(dir / "a.tif"), ErrorKind::CorruptHeader);
    write_file_atomic(dir / "b.tif", std::string("II+\0\x08\0\0\0\0\0\0\0\0\0\0\0", 16));
    EXPECT_ERROR_KIND(raster::load_tile(dir / "b.tif"), ErrorKind::UnsupportedFormat);
    auto bytes = testing::make_geotiff(sample_dem());
    bytes.resize(40);
    write_file_atomic(dir / "c.tif", bytes);
    EXPECT_ERROR_KIND(raster::load_tile(dir / "c.tif"), ErrorKind::CorruptHeader);
}

}  // namespace
}  // namespace rsbench
