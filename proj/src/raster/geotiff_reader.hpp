#pragma once

#include "rsbench/raster.hpp"

#include <cstdint>
#include <span>

namespace rsbench::raster::detail {

// Supported subset: classic TIFF (II or MM), striped, chunky planar layout,
// compression none or Deflate, no predictor, single-band float32 or
// three-band uint8, georeferenced through ModelPixelScale + ModelTiepoint and
// a GeoKey directory naming EPSG 4326, 2056 or 326xx/327xx.
GeoGrid decode_geotiff(std::span<const std::uint8_t> bytes);

}  // namespace rsbench::raster::detail
