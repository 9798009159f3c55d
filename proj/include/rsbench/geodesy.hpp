#pragma once

#include "rsbench/raster.hpp"

namespace rsbench::geodesy {

/// Geographic WGS84 coordinate in degrees.
struct GeoPoint {
    double lon = 0.0;
    double lat = 0.0;
};

/// Projected coordinate in metres; crs is LV95 or UTM.
struct ProjectedPoint {
    double easting = 0.0;
    double northing = 0.0;
    raster::CrsId crs = raster::CrsId::lv95();
};

/// WGS84 -> Swiss LV95 using the swisstopo approximate polynomial (about 1 m
/// accuracy). Domain: lon 5..11, lat 45..48 degrees.
ProjectedPoint wgs84_to_lv95(GeoPoint p);

/// Inverse of wgs84_to_lv95, solved by Newton iteration on the forward
/// polynomial so the round trip closes to ~1e-12 degrees. Domain:
/// easting 2.45e6..2.85e6, northing 1.05e6..1.35e6.
GeoPoint lv95_to_wgs84(const ProjectedPoint& p);

/// Transverse Mercator with the 6th-order Krüger series on WGS84,
/// k0 = 0.9996, false easting 500 km, false northing 10000 km south.
ProjectedPoint wgs84_to_utm(GeoPoint p, int zone, raster::Hemisphere hemisphere);
GeoPoint utm_to_wgs84(const ProjectedPoint& p);

/// Central meridian of a UTM zone, degrees.
double utm_central_meridian(int zone);

/// Converts (x, y) in `from` to `to`, routing through WGS84 when neither end is
/// geographic. x/y are lon/lat for WGS84 and easting/northing otherwise.
raster::GeoPoint2 transform_point(const raster::CrsId& from, const raster::CrsId& to, raster::GeoPoint2 xy);

}  // namespace rsbench::geodesy
