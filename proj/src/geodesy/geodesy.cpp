#include "rsbench/geodesy.hpp"

#include "rsbench/error.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

namespace rsbench::geodesy {

namespace {

using raster::CrsId;
using raster::CrsKind;
using raster::Hemisphere;

constexpr double kDeg = std::numbers::pi / 180.0;

// ---------------------------------------------------------------------------
// LV95 (swisstopo approximate formulas). Auxiliary units are 10000 arc-seconds
// relative to the old Bern observatory.

constexpr double kBernLonSec = 26782.5;
constexpr double kBernLatSec = 169028.66;

struct Lv95Aux {
    double l;  // longitude
    double p;  // latitude
};

std::array<double, 2> lv95_poly(Lv95Aux a) {
    const double l = a.l;
    const double p = a.p;
    const double e = 2600072.37 + 211455.93 * l - 10938.51 * l * p - 0.36 * l * p * p - 44.54 * l * l * l;
    const double n = 1200147.07 + 308807.95 * p + 3745.25 * l * l + 76.63 * p * p - 194.56 * l * l * p +
                     119.79 * p * p * p;
    return {e, n};
}

// d(E, N) / d(l, p), row-major.
std::array<double, 4> lv95_jacobian(Lv95Aux a) {
    const double l = a.l;
    const double p = a.p;
    return {
        211455.93 - 10938.51 * p - 0.36 * p * p - 133.62 * l * l,
        -10938.51 * l - 0.72 * l * p,
        7490.5 * l - 389.12 * l * p,
        308807.95 + 153.26 * p - 194.56 * l * l + 359.37 * p * p,
    };
}

Lv95Aux to_aux(GeoPoint p) {
    return {(p.lon * 3600.0 - kBernLonSec) / 1e4, (p.lat * 3600.0 - kBernLatSec) / 1e4};
}

GeoPoint from_aux(Lv95Aux a) {
    return {(a.l * 1e4 + kBernLonSec) / 3600.0, (a.p * 1e4 + kBernLatSec) / 3600.0};
}

// ---------------------------------------------------------------------------
// UTM: Krüger n-series to sixth order (Karney 2011 form).

constexpr double kA = 6378137.0;
constexpr double kF = 1.0 / 298.257223563;
constexpr double kK0 = 0.9996;
constexpr double kFalseEasting = 500000.0;
constexpr double kFalseNorthingSouth = 10000000.0;

struct KruegerSeries {
    double e = 0.0;  // first eccentricity
    double e2 = 0.0;
    double rect_radius = 0.0;  // A
    std::array<double, 6> alpha{};
    std::array<double, 6> beta{};

    KruegerSeries() {
        const double n = kF / (2.0 - kF);
        const double n2 = n * n;
        const double n3 = n2 * n;
        const double n4 = n3 * n;
        const double n5 = n4 * n;
        const double n6 = n5 * n;
        e2 = kF * (2.0 - kF);
        e = std::sqrt(e2);
        rect_radius = kA / (1.0 + n) * (1.0 + n2 / 4.0 + n4 / 64.0 + n6 / 256.0);
        alpha = {
            n / 2.0 - 2.0 * n2 / 3.0 + 5.0 * n3 / 16.0 + 41.0 * n4 / 180.0 - 127.0 * n5 / 288.0 +
                7891.0 * n6 / 37800.0,
            13.0 * n2 / 48.0 - 3.0 * n3 / 5.0 + 557.0 * n4 / 1440.0 + 281.0 * n5 / 630.0 -
                1983433.0 * n6 / 1935360.0,
            61.0 * n3 / 240.0 - 103.0 * n4 / 140.0 + 15061.0 * n5 / 26880.0 + 167603.0 * n6 / 181440.0,
            49561.0 * n4 / 161280.0 - 179.0 * n5 / 168.0 + 6601661.0 * n6 / 7257600.0,
            34729.0 * n5 / 80640.0 - 3418889.0 * n6 / 1995840.0,
            212378941.0 * n6 / 319334400.0,
        };
        beta = {
            n / 2.0 - 2.0 * n2 / 3.0 + 37.0 * n3 / 96.0 - n4 / 360.0 - 81.0 * n5 / 512.0 + 96199.0 * n6 / 604800.0,
            n2 / 48.0 + n3 / 15.0 - 437.0 * n4 / 1440.0 + 46.0 * n5 / 105.0 - 1118711.0 * n6 / 3870720.0,
            17.0 * n3 / 480.0 - 37.0 * n4 / 840.0 - 209.0 * n5 / 4480.0 + 5569.0 * n6 / 90720.0,
            4397.0 * n4 / 161280.0 - 11.0 * n5 / 504.0 - 830251.0 * n6 / 7257600.0,
            4583.0 * n5 / 161280.0 - 108847.0 * n6 / 3991680.0,
            20648693.0 * n6 / 638668800.0,
        };
    }
};

const KruegerSeries& series() {
    static const KruegerSeries s;
    return s;
}

// tau' (conformal) from tau = tan(phi).
double conformal_tau(double tau, double e) {
    const double sig = std::sinh(e * std::atanh(e * tau / std::hypot(1.0, tau)));
    return tau * std::hypot(1.0, sig) - sig * std::hypot(1.0, tau);
}

// Inverse of conformal_tau by Newton iteration.
double geodetic_tau(double tau_prime, double e, double e2) {
    double tau = tau_prime;
    for (int i = 0; i < 10; ++i) {
        const double tp = conformal_tau(tau, e);
        const double dtau = (tau_prime - tp) / std::hypot(1.0, tp) * (1.0 + (1.0 - e2) * tau * tau) /
                            ((1.0 - e2) * std::hypot(1.0, tau));
        tau += dtau;
        if (std::abs(dtau) < 1e-15 * std::max(1.0, std::abs(tau))) break;
    }
    return tau;
}

void check_utm_zone(int zone) {
    if (zone < 1 || zone > 60) throw Error(ErrorKind::OutOfDomain, "UTM zone must be in 1..60");
}

std::string describe(double a, double b) {
    std::ostringstream s;
    s.precision(12);
    s << "(" << a << ", " << b << ")";
    return s.str();
}

}  // namespace

ProjectedPoint wgs84_to_lv95(GeoPoint p) {
    if (!(p.lon >= 5.0 && p.lon <= 11.0 && p.lat >= 45.0 && p.lat <= 48.0)) {
        throw Error(ErrorKind::OutOfDomain, "point " + describe(p.lon, p.lat) + " outside the LV95 validity box");
    }
    const auto en = lv95_poly(to_aux(p));
    return {en[0], en[1], CrsId::lv95()};
}

GeoPoint lv95_to_wgs84(const ProjectedPoint& p) {
    if (p.crs.kind != CrsKind::Lv95) throw Error(ErrorKind::OutOfDomain, "point is not in LV95");
    if (!(p.easting >= 2.45e6 && p.easting <= 2.85e6 && p.northing >= 1.05e6 && p.northing <= 1.35e6)) {
        throw Error(ErrorKind::OutOfDomain, "LV95 point " + describe(p.easting, p.northing) + " out of range");
    }

    // Seed with the official approximate inverse polynomial.
    const double y = (p.easting - 2600000.0) / 1e6;
    const double x = (p.northing - 1200000.0) / 1e6;
    const double lon_aux = 2.6779094 + 4.728982 * y + 0.791484 * y * x + 0.1306 * y * x * x - 0.0436 * y * y * y;
    const double lat_aux = 16.9023892 + 3.238272 * x - 0.270978 * y * y - 0.002528 * x * x -
                           0.0447 * y * y * x - 0.0140 * x * x * x;
    Lv95Aux a = to_aux({lon_aux * 100.0 / 36.0, lat_aux * 100.0 / 36.0});

    for (int i = 0; i < 20; ++i) {
        const auto en = lv95_poly(a);
        const double re = p.easting - en[0];
        const double rn = p.northing - en[1];
        const auto j = lv95_jacobian(a);
        const double det = j[0] * j[3] - j[1] * j[2];
        const double dl = (j[3] * re - j[1] * rn) / det;
        const double dp = (-j[2] * re + j[0] * rn) / det;
        a.l += dl;
        a.p += dp;
        if (std::abs(dl) < 1e-15 && std::abs(dp) < 1e-15) break;
    }
    return from_aux(a);
}

double utm_central_meridian(int zone) { return -183.0 + 6.0 * zone; }

ProjectedPoint wgs84_to_utm(GeoPoint p, int zone, Hemisphere hemisphere) {
    check_utm_zone(zone);
    if (!(std::abs(p.lat) <= 84.0)) throw Error(ErrorKind::OutOfDomain, "UTM is undefined beyond 84 degrees latitude");
    if (!(std::abs(p.lon) <= 180.0)) throw Error(ErrorKind::OutOfDomain, "longitude out of range");

    const auto& s = series();
    double dlon = p.lon - utm_central_meridian(zone);
    dlon = std::remainder(dlon, 360.0);
    const double lam = dlon * kDeg;
    const double tau = std::tan(p.lat * kDeg);
    const double tau_p = conformal_tau(tau, s.e);

    const double xi_p = std::atan2(tau_p, std::cos(lam));
    const double eta_p = std::asinh(std::sin(lam) / std::hypot(tau_p, std::cos(lam)));

    double xi = xi_p;
    double eta = eta_p;
    for (int j = 1; j <= 6; ++j) {
        const double a = s.alpha[j - 1];
        xi += a * std::sin(2.0 * j * xi_p) * std::cosh(2.0 * j * eta_p);
        eta += a * std::cos(2.0 * j * xi_p) * std::sinh(2.0 * j * eta_p);
    }

    const double easting = kFalseEasting + kK0 * s.rect_radius * eta;
    double northing = kK0 * s.rect_radius * xi;
    if (hemisphere == Hemisphere::South) northing += kFalseNorthingSouth;
    return {easting, northing, CrsId::utm(zone, hemisphere)};
}

GeoPoint utm_to_wgs84(const ProjectedPoint& p) {
    if (p.crs.kind != CrsKind::Utm) throw Error(ErrorKind::OutOfDomain, "point is not in UTM");
    check_utm_zone(p.crs.zone);
    const auto& s = series();
    const double northing = p.northing - (p.crs.hemisphere == Hemisphere::South ? kFalseNorthingSouth : 0.0);
    const double xi = northing / (kK0 * s.rect_radius);
    const double eta = (p.easting - kFalseEasting) / (kK0 * s.rect_radius);
    if (!std::isfinite(xi) || !std::isfinite(eta) || std::abs(eta) > 1.5) {
        throw Error(ErrorKind::OutOfDomain, "UTM coordinate too far from the central meridian");
    }

    double xi_p = xi;
    double eta_p = eta;
    for (int j = 1; j <= 6; ++j) {
        const double b = s.beta[j - 1];
        xi_p -= b * std::sin(2.0 * j * xi) * std::cosh(2.0 * j * eta);
        eta_p -= b * std::cos(2.0 * j * xi) * std::sinh(2.0 * j * eta);
    }

    const double tau_p = std::sin(xi_p) / std::hypot(std::sinh(eta_p), std::cos(xi_p));
    const double lam = std::atan2(std::sinh(eta_p), std::cos(xi_p));
    const double tau = geodetic_tau(tau_p, s.e, s.e2);
    const double lat = std::atan(tau) / kDeg;
    if (std::abs(lat) > 84.0 + 1e-9) throw Error(ErrorKind::OutOfDomain, "UTM inverse lands beyond 84 degrees");
    double lon = utm_central_meridian(p.crs.zone) + lam / kDeg;
    lon = std::remainder(lon, 360.0);
    return {lon, lat};
}

raster::GeoPoint2 transform_point(const CrsId& from, const CrsId& to, raster::GeoPoint2 xy) {
    if (from == to) return xy;
    GeoPoint geo;
    switch (from.kind) {
        case CrsKind::Wgs84: geo = {xy.x, xy.y}; break;
        case CrsKind::Lv95: geo = lv95_to_wgs84({xy.x, xy.y, from}); break;
        case CrsKind::Utm: geo = utm_to_wgs84({xy.x, xy.y, from}); break;
    }
    switch (to.kind) {
        case CrsKind::Wgs84: return {geo.lon, geo.lat};
        case CrsKind::Lv95: {
            const auto q = wgs84_to_lv95(geo);
            return {q.easting, q.northing};
        }
        case CrsKind::Utm: {
            const auto q = wgs84_to_utm(geo, to.zone, to.hemisphere);
            return {q.easting, q.northing};
        }
    }
    return xy;
}

}  // namespace rsbench::geodesy
