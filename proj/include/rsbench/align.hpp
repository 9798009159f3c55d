#pragma once

#include "rsbench/raster.hpp"

#include <cstdint>
#include <vector>

namespace rsbench::align {

struct OutlierMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> flags;  // 1 = flagged

    std::size_t flagged_count() const;
    bool flagged(int row, int col) const { return flags[static_cast<std::size_t>(row) * width + col] != 0; }
};

struct AlignedPair {
    raster::GeoGrid rgb;
    raster::GeoGrid dem;
    double alignment_score = 0.5;
};

/// Fill value for target pixels outside the source extent when the source
/// carries no nodata sentinel.
inline constexpr double kDefaultDemNodata = -9999.0;

/// Bilinear resample onto `target` (same CRS). Exact at coincident pixel
/// centres; pixels whose centre falls outside the source extent become nodata.
/// Throws CrsMismatch, or InsufficientOverlap when less than 95% of the target
/// extent is covered.
raster::GeoGrid resample_to_grid(const raster::GeoGrid& src, const raster::GridSpec& target);

/// Like resample_to_grid, but maps each target pixel centre into the source
/// CRS through the geodesy module first.
raster::GeoGrid warp_to_grid(const raster::GeoGrid& src, const raster::GridSpec& target);

/// Fraction of the target extent covered by the source extent (both in the target CRS).
double extent_overlap(const raster::GeoGrid& src, const raster::GridSpec& target);

struct OutlierParams {
    int window = 5;
    double z_threshold = 5.0;
};

/// Robust local z-score test: a pixel is flagged iff
/// |z - median| > z_threshold * 1.4826 * max(MAD, 0.1 m) over the window
/// centred on it (clipped at the border, nodata excluded). Nodata is always flagged.
OutlierMask detect_outliers(const raster::GeoGrid& dem, OutlierParams params = {});

/// Replaces flagged and nodata pixels with inverse-distance-weighted (power 2)
/// values from the 8 nearest valid unflagged pixels. Ties in distance are
/// broken by row then column. Throws AllPixelsFlagged.
raster::GeoGrid repair_voids(const raster::GeoGrid& dem, const OutlierMask& mask);

struct AlignmentScore {
    double score = 0.5;
    bool degenerate = false;
};

/// Triage score in [0, 1]: normalized cross-correlation between the gradient
/// magnitude of RGB luminance and the gradient magnitude of the DEM hillshade
/// (315/45), mapped from [-1, 1]. A zero-variance field yields 0.5 with the
/// degenerate flag set.
AlignmentScore alignment_score(const raster::GeoGrid& rgb, const raster::GeoGrid& dem);

}  // namespace rsbench::align
