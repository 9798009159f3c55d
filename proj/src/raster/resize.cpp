#include "rsbench/error.hpp"
#include "rsbench/raster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rsbench::raster {

std::optional<double> sample_bilinear(const GeoGrid& grid, int band, double row, double col) {
    const int w = grid.width();
    const int h = grid.height();
    row = std::clamp(row, 0.0, static_cast<double>(h - 1));
    col = std::clamp(col, 0.0, static_cast<double>(w - 1));
    const int r0 = static_cast<int>(std::floor(row));
    const int c0 = static_cast<int>(std::floor(col));
    const int r1 = std::min(r0 + 1, h - 1);
    const int c1 = std::min(c0 + 1, w - 1);
    const double fr = row - r0;
    const double fc = col - c0;

    const int rows[2] = {r0, r1};
    const int cols[2] = {c0, c1};
    const double wr[2] = {1.0 - fr, fr};
    const double wc[2] = {1.0 - fc, fc};

    double acc = 0.0;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            const double weight = wr[i] * wc[j];
            if (weight == 0.0) continue;
            double v = 0.0;
            if (grid.is_dem()) {
                const float f = grid.at(rows[i], cols[j]);
                if (grid.is_nodata(f)) return std::nullopt;
                v = f;
            } else {
                v = grid.at(rows[i], cols[j], band);
            }
            acc += weight * v;
        }
    }
    return acc;
}

GeoGrid resize_bilinear(const GeoGrid& grid, int width, int height) {
    if (grid.width() < 2 || grid.height() < 2) {
        throw Error(ErrorKind::DegenerateInput, "resize needs at least 2x2 pixels");
    }
    if (width <= 0 || height <= 0) throw Error(ErrorKind::InvalidArgument, "target size must be positive");
    if (width == grid.width() && height == grid.height()) return grid;

    const double sx = static_cast<double>(grid.width()) / width;
    const double sy = static_cast<double>(grid.height()) / height;
    GeoTransform t = grid.transform();
    t.pixel_dx *= sx;
    t.pixel_dy *= sy;

    const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    if (grid.is_dem()) {
        const float fill = grid.nodata() ? static_cast<float>(*grid.nodata()) : std::numeric_limits<float>::quiet_NaN();
        std::vector<float> out(n);
        for (int r = 0; r < height; ++r) {
            const double src_r = (r + 0.5) * sy - 0.5;
            for (int c = 0; c < width; ++c) {
                const double src_c = (c + 0.5) * sx - 0.5;
                const auto v = sample_bilinear(grid, 0, src_r, src_c);
                out[static_cast<std::size_t>(r) * width + c] = v ? static_cast<float>(*v) : fill;
            }
        }
        return GeoGrid::dem(width, height, t, grid.crs(), std::move(out), grid.nodata());
    }

    std::vector<std::uint8_t> out(n * 3);
    for (int r = 0; r < height; ++r) {
        const double src_r = (r + 0.5) * sy - 0.5;
        for (int c = 0; c < width; ++c) {
            const double src_c = (c + 0.5) * sx - 0.5;
            for (int b = 0; b < 3; ++b) {
                out[(static_cast<std::size_t>(r) * width + c) * 3 + b] =
                    round_to_u8(*sample_bilinear(grid, b, src_r, src_c));
            }
        }
    }
    return GeoGrid::rgb(width, height, t, grid.crs(), std::move(out), grid.nodata());
}

GeoGrid resize_canonical(const GeoGrid& grid) { return resize_bilinear(grid, kCanonicalSize, kCanonicalSize); }

}  // namespace rsbench::raster
