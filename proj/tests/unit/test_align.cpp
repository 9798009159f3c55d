#include "rsbench/align.hpp"
#include "rsbench/error.hpp"
#include "rsbench/geodesy.hpp"
#include "rsbench/random.hpp"
#include "rsbench/terrain.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace rsbench::align {
namespace {

using raster::CrsId;
using raster::GeoTransform;
using raster::GridSpec;
using testing::dem_from;

raster::GeoGrid ramp(int size = 16, GeoTransform t = {2600000.0, 1200000.0, 1.0, -1.0}) {
    return dem_from(size, size, [](int r, int c) { return 3.0 * c - 2.0 * r + 100.0; }, t);
}

TEST(Resample, IdentityIsBitExact) {
    const auto dem = ramp();
    EXPECT_EQ(resample_to_grid(dem, GridSpec::of(dem)), dem);
}

TEST(Resample, SubPixelShiftInterpolatesLinearField) {
    const auto dem = ramp();
    GridSpec target = GridSpec::of(dem);
    target.transform.origin_x += 0.25;
    target.transform.origin_y -= 0.5;
    const auto out = resample_to_grid(dem, target);
    for (int r = 0; r < 15; ++r) {
        for (int c = 0; c < 15; ++c) EXPECT_NEAR(out.at(r, c), 3.0 * (c + 0.25) - 2.0 * (r + 0.5) + 100.0, 1e-4);
    }
}

TEST(Resample, UncoveredPixelsBecomeNodata) {
    const auto dem = dem_from(40, 40, [](int, int) { return 5.0; });
    GridSpec target = GridSpec::of(dem);
    target.transform.origin_x += 1.0;  // last target column lies past the source
    const auto out = resample_to_grid(dem, target);
    ASSERT_TRUE(out.nodata().has_value());
    EXPECT_DOUBLE_EQ(*out.nodata(), kDefaultDemNodata);
    EXPECT_FLOAT_EQ(out.at(3, 39), static_cast<float>(kDefaultDemNodata));
    EXPECT_FLOAT_EQ(out.at(3, 38), 5.0f);
}

TEST(Resample, ChecksCrsAndOverlap) {
    const auto dem = ramp();
    GridSpec other = GridSpec::of(dem);
    other.crs = CrsId::utm(32, raster::Hemisphere::North);
    EXPECT_ERROR_KIND(resample_to_grid(dem, other), ErrorKind::CrsMismatch);

    GridSpec shifted = GridSpec::of(dem);
    shifted.transform.origin_x += 8.0;
    EXPECT_NEAR(extent_overlap(dem, shifted), 0.5, 1e-12);
    EXPECT_ERROR_KIND(resample_to_grid(dem, shifted), ErrorKind::InsufficientOverlap);
}

TEST(Warp, Wgs84DemOntoLv95Grid) {
    // Elevation linear in lon/lat, so bilinear sampling is exact up to float storage.
    const double lon0 = 7.40;
    const double lat0 = 46.98;
    const double step = 2e-4;
    const auto f = [](double lon, double lat) { return 1000.0 + 5000.0 * (lon - 7.4) - 3000.0 * (lat - 46.9); };
    const auto dem = dem_from(
        300, 300, [&](int r, int c) { return f(lon0 + (c + 0.5) * step, lat0 - (r + 0.5) * step); },
        {lon0, lat0, step, -step}, CrsId::wgs84());

    const auto corner = geodesy::wgs84_to_lv95({lon0 + 0.01, lat0 - 0.01});
    const GridSpec target{{corner.easting, corner.northing, 10.0, -10.0}, 32, 32, CrsId::lv95()};
    const auto out = warp_to_grid(dem, target);
    EXPECT_EQ(out.crs(), CrsId::lv95());
    for (int r = 0; r < 32; r += 5) {
        for (int c = 0; c < 32; c += 5) {
            const auto p = raster::pixel_to_geo(target.transform, r + 0.5, c + 0.5);
            const auto g = geodesy::lv95_to_wgs84({p.x, p.y, CrsId::lv95()});
            EXPECT_NEAR(out.at(r, c), f(g.lon, g.lat), 2e-3);
        }
    }
}

TEST(Warp, DisjointExtentIsInsufficientOverlap) {
    const auto dem = dem_from(10, 10, [](int, int) { return 0.0; }, {7.0, 47.0, 1e-3, -1e-3}, CrsId::wgs84());
    const GridSpec target{{2700000.0, 1100000.0, 10.0, -10.0}, 10, 10, CrsId::lv95()};
    EXPECT_ERROR_KIND(warp_to_grid(dem, target), ErrorKind::InsufficientOverlap);
}

TEST(Outliers, FlagsSpikesOnly) {
    Rng rng(3);
    std::vector<double> noise(400);
    for (auto& v : noise) v = rng.normal();
    auto dem = dem_from(20, 20, [&](int r, int c) {
        if (r == 7 && c == 9) return 3000.0;
        return 500.0 + 2.0 * c + noise[static_cast<std::size_t>(r) * 20 + c];
    });
    const auto mask = detect_outliers(dem);
    EXPECT_EQ(mask.flagged_count(), 1u);
    EXPECT_TRUE(mask.flagged(7, 9));
}

TEST(Outliers, NodataAlwaysFlaggedAndParamsChecked) {
    const auto dem = dem_from(6, 6, [](int r, int c) { return r == 2 && c == 2 ? -9999.0 : 10.0; }, {},
                              CrsId::lv95(), -9999.0);
    const auto mask = detect_outliers(dem);
    EXPECT_EQ(mask.flagged_count(), 1u);
    EXPECT_TRUE(mask.flagged(2, 2));
    EXPECT_ERROR_KIND(detect_outliers(dem, {4, 5.0}), ErrorKind::InvalidArgument);
    EXPECT_ERROR_KIND(detect_outliers(dem, {1, 5.0}), ErrorKind::InvalidArgument);
    EXPECT_ERROR_KIND(detect_outliers(dem, {5, 0.0}), ErrorKind::InvalidArgument);
}

TEST(Outliers, FlatFieldMadFloorAvoidsFalsePositives) {
    // MAD is zero here; the 0.1 m floor keeps a 0.5 m bump below 5 robust sigmas.
    const auto dem = dem_from(9, 9, [](int r, int c) { return r == 4 && c == 4 ? 100.5 : 100.0; });
    EXPECT_EQ(detect_outliers(dem).flagged_count(), 0u);
    const auto spike = dem_from(9, 9, [](int r, int c) { return r == 4 && c == 4 ? 101.0 : 100.0; });
    EXPECT_EQ(detect_outliers(spike).flagged_count(), 1u);
}

TEST(Repair, InverseDistanceWeightsOfEightNeighbours) {
    const auto dem = dem_from(3, 3, [](int r, int c) { return r * 3.0 + c * c; });
    OutlierMask mask{3, 3, std::vector<std::uint8_t>(9, 0)};
    mask.flags[4] = 1;
    const auto out = repair_voids(dem, mask);
    double edges = 0.0;
    double corners = 0.0;
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            if (r == 1 && c == 1) continue;
            ((r == 1 || c == 1) ? edges : corners) += dem.at(r, c);
        }
    }
    EXPECT_NEAR(out.at(1, 1), (edges + 0.5 * corners) / 6.0, 1e-5);
    for (int i = 0; i < 9; ++i) {
        if (i != 4) {
            EXPECT_EQ(out.f32()[i], dem.f32()[i]);
        }
    }
}

TEST(Repair, FillsVoidInConstantField) {
    const auto dem = dem_from(12, 12, [](int r, int c) { return r >= 4 && r < 9 && c >= 4 && c < 9 ? -9999.0 : 42.0; },
                              {}, CrsId::lv95(), -9999.0);
    const auto out = repair_voids(dem, detect_outliers(dem));
    for (const float v : out.f32()) EXPECT_FLOAT_EQ(v, 42.0f);
}

TEST(Repair, Errors) {
    const auto dem = dem_from(2, 2, [](int, int) { return 1.0; });
    EXPECT_ERROR_KIND(repair_voids(dem, OutlierMask{2, 2, {1, 1, 1, 1}}), ErrorKind::AllPixelsFlagged);
    EXPECT_ERROR_KIND(repair_voids(dem, OutlierMask{3, 1, {0, 0, 0}}), ErrorKind::DimensionMismatch);
}

raster::GeoGrid hills(double phase) {
    return dem_from(64, 64, [=](int r, int c) {
        return 200.0 * std::sin(0.21 * c + phase) * std::cos(0.17 * r - phase) + 30.0 * std::sin(0.05 * (r + c));
    });
}

raster::GeoGrid shaded_rgb(const raster::GeoGrid& dem) {
    const auto shade = terrain::hillshade(dem);
    return testing::rgb_from(
        dem.width(), dem.height(),
        [&](int r, int c, int) { return raster::round_to_u8(255.0 * shade[static_cast<std::size_t>(r) * dem.width() + c]); },
        dem.transform(), dem.crs());
}

TEST(AlignmentScore, MatchedPairScoresHigherThanMismatched) {
    const auto dem = hills(0.0);
    const auto good = alignment_score(shaded_rgb(dem), dem);
    const auto other = dem_from(64, 64, [](int r, int c) { return 150.0 * std::sin(0.37 * r + 0.4) * std::sin(0.09 * c); });
    const auto bad = alignment_score(shaded_rgb(other), dem);
    EXPECT_FALSE(good.degenerate);
    EXPECT_GT(good.score, 0.95);
    EXPECT_LE(good.score, 1.0);
    EXPECT_LT(bad.score, good.score - 0.2);
    EXPECT_GE(bad.score, 0.0);
}

TEST(AlignmentScore, FlatInputIsDegenerate) {
    const auto flat = dem_from(16, 16, [](int, int) { return 7.0; });
    const auto s = alignment_score(shaded_rgb(hills(0.0).with_samples(std::vector<float>(64 * 64, 1.0f))), hills(0.0));
    EXPECT_TRUE(s.degenerate);
    EXPECT_DOUBLE_EQ(s.score, 0.5);
    EXPECT_ERROR_KIND(alignment_score(shaded_rgb(hills(0.0)), flat), ErrorKind::InvalidArgument);
}

}  // namespace
}  // namespace rsbench::align
