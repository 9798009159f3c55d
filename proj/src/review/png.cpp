#include "rsbench/error.hpp"
#include "rsbench/review.hpp"

#include <png.h>

namespace rsbench::review {

namespace {

void append_bytes(png_structp png, png_bytep data, png_size_t length) {
    auto* out = static_cast<std::string*>(png_get_io_ptr(png));
    out->append(reinterpret_cast<const char*>(data), length);
}

void no_flush(png_structp) {}

}  // namespace

std::string encode_png(int width, int height, int channels, std::span<const std::uint8_t> pixels) {
    if (width <= 0 || height <= 0 || (channels != 1 && channels != 3)) {
        throw Error(ErrorKind::InvalidArgument, "PNG needs a positive size and 1 or 3 channels");
    }
    const std::size_t stride = static_cast<std::size_t>(width) * channels;
    if (pixels.size() != stride * static_cast<std::size_t>(height)) {
        throw Error(ErrorKind::DimensionMismatch, "pixel buffer does not match PNG dimensions");
    }

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw Error(ErrorKind::IoFailure, "libpng initialisation failed");
    }
    std::string out;
    std::vector<png_bytep> rows(static_cast<std::size_t>(height));
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw Error(ErrorKind::IoFailure, "PNG encoding failed");
    }
    png_set_write_fn(png, &out, append_bytes, no_flush);
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
                 channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_set_compression_level(png, 6);
    for (int r = 0; r < height; ++r) {
        rows[static_cast<std::size_t>(r)] = const_cast<png_bytep>(pixels.data() + stride * static_cast<std::size_t>(r));
    }
    png_set_rows(png, info, rows.data());
    png_write_png(png, info, PNG_TRANSFORM_IDENTITY, nullptr);
    png_destroy_write_struct(&png, &info);
    return out;
}

}  // namespace rsbench::review
