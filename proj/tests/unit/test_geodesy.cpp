#include "rsbench/error.hpp"
#include "rsbench/geodesy.hpp"
#include "rsbench/random.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace rsbench::geodesy {
namespace {

using raster::CrsId;
using raster::Hemisphere;

// Reference coordinates computed with PROJ (pyproj 3.x, EPSG:4326 -> target,
// always_xy) and frozen here; the library does not depend on PROJ.
struct Lv95Reference {
    double lon, lat, easting, northing;
};
constexpr Lv95Reference kLv95Reference[] = {
    {7.438632, 46.951083, 2599999.9685, 1200000.0265},
    {8.5417, 47.3769, 2683303.8937, 1247925.6279},
    {6.1432, 46.2044, 2500016.0161, 1117821.0697},
    {9.8, 46.5, 2781243.5334, 1152581.5688},
};

struct UtmReference {
    double lon, lat;
    int zone;
    Hemisphere hemisphere;
    double easting, northing;
};
constexpr UtmReference kUtmReference[] = {
    {139.6917, 35.6895, 54, Hemisphere::North, 381622.230039, 3950298.907881},
    {7.438632, 46.951083, 32, Hemisphere::North, 381188.783593, 5200911.325278},
    {151.2093, -33.8688, 56, Hemisphere::South, 334368.633648, 6250948.345385},
};

TEST(Lv95, MatchesProjWithinOneMetre) {
    for (const auto& ref : kLv95Reference) {
        const auto p = wgs84_to_lv95({ref.lon, ref.lat});
        EXPECT_NEAR(p.easting, ref.easting, 1.0) << ref.lon << "," << ref.lat;
        EXPECT_NEAR(p.northing, ref.northing, 1.0) << ref.lon << "," << ref.lat;
        EXPECT_EQ(p.crs, CrsId::lv95());
    }
}

TEST(Lv95, InverseOfOriginMatchesProj) {
    const auto g = lv95_to_wgs84({2600000.0, 1200000.0, CrsId::lv95()});
    // One metre is roughly 1.3e-5 degrees of longitude and 9e-6 of latitude here.
    EXPECT_NEAR(g.lon, 7.438632421, 2e-5);
    EXPECT_NEAR(g.lat, 46.951082772, 1e-5);
}

TEST(Lv95, RoundTripClosesTightly) {
    Rng rng(11);
    for (int i = 0; i < 500; ++i) {
        const GeoPoint p{rng.uniform(5.9, 10.5), rng.uniform(45.8, 47.8)};
        const auto back = lv95_to_wgs84(wgs84_to_lv95(p));
        EXPECT_NEAR(back.lon, p.lon, 1e-9);
        EXPECT_NEAR(back.lat, p.lat, 1e-9);
    }
}

TEST(Lv95, OutsideDomainThrows) {
    EXPECT_ERROR_KIND(wgs84_to_lv95({2.35, 48.85}), ErrorKind::OutOfDomain);
    EXPECT_ERROR_KIND(lv95_to_wgs84({100.0, 100.0, CrsId::lv95()}), ErrorKind::OutOfDomain);
    EXPECT_ERROR_KIND(lv95_to_wgs84({2600000.0, 1200000.0, CrsId::utm(32, Hemisphere::North)}),
                      ErrorKind::OutOfDomain);
}

TEST(Utm, MatchesProjWithinOneCentimetre) {
    for (const auto& ref : kUtmReference) {
        const auto p = wgs84_to_utm({ref.lon, ref.lat}, ref.zone, ref.hemisphere);
        EXPECT_NEAR(p.easting, ref.easting, 0.01);
        EXPECT_NEAR(p.northing, ref.northing, 0.01);
        EXPECT_EQ(p.crs, CrsId::utm(ref.zone, ref.hemisphere));
    }
}

TEST(Utm, CentralMeridianMapsToFalseEasting) {
    EXPECT_DOUBLE_EQ(utm_central_meridian(32), 9.0);
    EXPECT_DOUBLE_EQ(utm_central_meridian(1), -177.0);
    const auto p = wgs84_to_utm({9.0, 0.0}, 32, Hemisphere::North);
    EXPECT_NEAR(p.easting, 500000.0, 1e-6);
    EXPECT_NEAR(p.northing, 0.0, 1e-6);
}

TEST(Utm, RoundTripClosesTightly) {
    Rng rng(12);
    for (int i = 0; i < 500; ++i) {
        const int zone = 1 + static_cast<int>(rng.below(60));
        const double lon = utm_central_meridian(zone) + rng.uniform(-3.0, 3.0);
        const double lat = rng.uniform(-80.0, 84.0);
        const auto hemi = lat < 0 ? Hemisphere::South : Hemisphere::North;
        const auto back = utm_to_wgs84(wgs84_to_utm({lon, lat}, zone, hemi));
        EXPECT_NEAR(back.lon, lon, 1e-10);
        EXPECT_NEAR(back.lat, lat, 1e-10);
    }
}

TEST(Utm, DomainChecks) {
    EXPECT_ERROR_KIND(wgs84_to_utm({0.0, 85.0}, 31, Hemisphere::North), ErrorKind::OutOfDomain);
    EXPECT_ERROR_KIND(wgs84_to_utm({0.0, 10.0}, 0, Hemisphere::North), ErrorKind::OutOfDomain);
    EXPECT_ERROR_KIND(utm_to_wgs84({500000.0, 0.0, CrsId::lv95()}), ErrorKind::OutOfDomain);
}

TEST(TransformPoint, RoutesThroughWgs84) {
    const auto lv95 = transform_point(CrsId::wgs84(), CrsId::lv95(), {8.5417, 47.3769});
    EXPECT_NEAR(lv95.x, 2683303.8937, 1.0);
    const auto utm = transform_point(CrsId::lv95(), CrsId::utm(32, Hemisphere::North), lv95);
    const auto direct = wgs84_to_utm({8.5417, 47.3769}, 32, Hemisphere::North);
    EXPECT_NEAR(utm.x, direct.easting, 1e-4);
    EXPECT_NEAR(utm.y, direct.northing, 1e-4);
    const auto same = transform_point(CrsId::lv95(), CrsId::lv95(), {1.0, 2.0});
    EXPECT_EQ(same.x, 1.0);
    EXPECT_EQ(same.y, 2.0);
}

}  // namespace
}  // namespace rsbench::geodesy
