#include "test_support.hpp"

#include <png.h>
#include <zlib.h>

#include <atomic>
#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <random>
#include <stdexcept>

namespace rsbench::testing {

namespace {

class ByteWriter {
public:
    explicit ByteWriter(bool big_endian) : big_(big_endian) {}

    void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
    void u16(std::uint16_t v) { put(v, 2); }
    void u32(std::uint32_t v) { put(v, 4); }
    void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }
    void f32(float v) { put(std::bit_cast<std::uint32_t>(v), 4); }
    void raw(const std::string& s) { out_ += s; }
    std::size_t size() const { return out_.size(); }
    std::string& bytes() { return out_; }
    void patch_u32(std::size_t pos, std::uint32_t v) {
        for (int i = 0; i < 4; ++i) {
            const int shift = big_ ? 8 * (3 - i) : 8 * i;
            out_[pos + i] = static_cast<char>((v >> shift) & 0xff);
        }
    }

private:
    void put(std::uint64_t v, int n) {
        for (int i = 0; i < n; ++i) {
            const int shift = big_ ? 8 * (n - 1 - i) : 8 * i;
            out_.push_back(static_cast<char>((v >> shift) & 0xff));
        }
    }
    bool big_;
    std::string out_;
};

struct TagValue {
    std::uint16_t type;  // 2 ASCII, 3 SHORT, 4 LONG, 12 DOUBLE
    std::vector<std::uint32_t> ints;
    std::vector<double> doubles;
    std::string ascii;

    std::uint32_t count() const {
        if (type == 2) return static_cast<std::uint32_t>(ascii.size() + 1);
        if (type == 12) return static_cast<std::uint32_t>(doubles.size());
        return static_cast<std::uint32_t>(ints.size());
    }
    std::size_t byte_size() const {
        const std::size_t unit = type == 2 ? 1 : type == 3 ? 2 : type == 4 ? 4 : 8;
        return unit * count();
    }
};

void write_value(ByteWriter& w, const TagValue& v) {
    if (v.type == 2) {
        w.raw(v.ascii);
        w.u8(0);
    } else if (v.type == 3) {
        for (const auto x : v.ints) w.u16(static_cast<std::uint16_t>(x));
    } else if (v.type == 4) {
        for (const auto x : v.ints) w.u32(x);
    } else {
        for (const auto x : v.doubles) w.f64(x);
    }
}

std::string deflate(const std::string& in) {
    uLongf size = compressBound(static_cast<uLong>(in.size()));
    std::string out(size, '\0');
    if (compress2(reinterpret_cast<Bytef*>(out.data()), &size, reinterpret_cast<const Bytef*>(in.data()),
                  static_cast<uLong>(in.size()), 6) != Z_OK) {
        throw std::runtime_error("deflate failed");
    }
    out.resize(size);
    return out;
}

}  // namespace

TempDir::TempDir(const std::string& prefix) {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            (prefix + "-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

std::string make_geotiff(const raster::GeoGrid& grid, const TiffOptions& o) {
    const bool dem = grid.is_dem();
    const int spp = dem ? 1 : 3;
    const std::uint32_t w = static_cast<std::uint32_t>(grid.width());
    const std::uint32_t h = static_cast<std::uint32_t>(grid.height());
    const std::uint32_t rps = o.rows_per_strip == 0 ? h : o.rows_per_strip;

    // Encode rows in the file byte order.
    std::vector<std::string> strips;
    for (std::uint32_t r0 = 0; r0 < h; r0 += rps) {
        ByteWriter s(o.big_endian);
        for (std::uint32_t r = r0; r < std::min(h, r0 + rps); ++r) {
            for (std::uint32_t c = 0; c < w; ++c) {
                if (dem) {
                    s.f32(grid.at(static_cast<int>(r), static_cast<int>(c)));
                } else {
                    for (int b = 0; b < 3; ++b) s.u8(grid.at(static_cast<int>(r), static_cast<int>(c), b));
                }
            }
        }
        strips.push_back(o.compression == 8 ? deflate(s.bytes()) : s.bytes());
    }
    if (o.truncate_last_strip > 0) strips.back().resize(strips.back().size() - o.truncate_last_strip);

    const auto& t = grid.transform();
    std::map<std::uint16_t, TagValue> tags;
    tags[256] = {4, {w}, {}, {}};
    tags[257] = {4, {h}, {}, {}};
    tags[258] = {3, std::vector<std::uint32_t>(spp, dem ? 32u : 8u), {}, {}};
    tags[259] = {3, {o.compression}, {}, {}};
    tags[262] = {3, {dem ? 1u : 2u}, {}, {}};
    tags[273] = {4, std::vector<std::uint32_t>(strips.size(), 0), {}, {}};
    tags[277] = {3, {static_cast<std::uint32_t>(spp)}, {}, {}};
    tags[278] = {4, {rps}, {}, {}};
    std::vector<std::uint32_t> counts;
    for (const auto& s : strips) counts.push_back(static_cast<std::uint32_t>(s.size()));
    tags[279] = {4, counts, {}, {}};
    tags[284] = {3, {o.planar}, {}, {}};
    if (o.predictor != 1) tags[317] = {3, {o.predictor}, {}, {}};
    if (o.tiled) tags[322] = {4, {16}, {}, {}};
    tags[339] = {3, std::vector<std::uint32_t>(spp, dem ? 3u : 1u), {}, {}};
    if (o.georeferenced) {
        double ox = t.origin_x;
        double oy = t.origin_y;
        if (o.pixel_is_point) {
            ox += 0.5 * t.pixel_dx;
            oy += 0.5 * t.pixel_dy;
        }
        tags[33550] = {12, {}, {t.pixel_dx, -t.pixel_dy, 0.0}, {}};
        tags[33922] = {12, {}, {0.0, 0.0, 0.0, ox, oy, 0.0}, {}};
        const int epsg = grid.crs().epsg();
        const bool projected = grid.crs().is_projected();
        tags[34735] = {3,
                       {1, 1, 0, 2, 1025, 0, 1, o.pixel_is_point ? 2u : 1u, projected ? 3072u : 2048u, 0, 1,
                        static_cast<std::uint32_t>(epsg)},
                       {},
                       {}};
    }
    if (grid.nodata()) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", *grid.nodata());
        tags[42113] = {2, {}, {}, buf};
    }

    ByteWriter out(o.big_endian);
    out.raw(o.big_endian ? "MM" : "II");
    out.u16(42);
    out.u32(8);
    const std::size_t ifd_size = 2 + 12 * tags.size() + 4;
    std::size_t extra = 8 + ifd_size;
    std::map<std::uint16_t, std::size_t> extra_pos;
    for (const auto& [tag, v] : tags) {
        if (v.byte_size() > 4) {
            extra_pos[tag] = extra;
            extra += v.byte_size() + (v.byte_size() % 2);
        }
    }
    std::size_t data = extra;
    std::vector<std::uint32_t> offsets;
    for (const auto& s : strips) {
        offsets.push_back(static_cast<std::uint32_t>(data));
        data += s.size();
    }
    tags[273].ints = offsets;

    out.u16(static_cast<std::uint16_t>(tags.size()));
    for (const auto& [tag, v] : tags) {
        out.u16(tag);
        out.u16(v.type);
        out.u32(v.count());
        if (v.byte_size() > 4) {
            out.u32(static_cast<std::uint32_t>(extra_pos[tag]));
        } else {
            const std::size_t before = out.size();
            write_value(out, v);
            while (out.size() < before + 4) out.u8(0);
        }
    }
    out.u32(0);
    for (const auto& [tag, v] : tags) {
        if (v.byte_size() <= 4) continue;
        write_value(out, v);
        if (v.byte_size() % 2) out.u8(0);
    }
    for (const auto& s : strips) out.raw(s);
    return out.bytes();
}

void write_geotiff(const raster::GeoGrid& grid, const std::filesystem::path& path, const TiffOptions& options) {
    std::ofstream f(path, std::ios::binary);
    const auto bytes = make_geotiff(grid, options);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

PngImage decode_png(const std::string& bytes) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
        throw std::runtime_error("not a PNG");
    }
    const bool gray = (image.format & PNG_FORMAT_FLAG_COLOR) == 0;
    image.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
    PngImage out{static_cast<int>(image.width), static_cast<int>(image.height), gray ? 1 : 3, {}};
    out.pixels.resize(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, out.pixels.data(), 0, nullptr)) {
        png_image_free(&image);
        throw std::runtime_error("PNG decode failed");
    }
    return out;
}

raster::GeoGrid dem_from(int width, int height, const std::function<double(int, int)>& f,
                         raster::GeoTransform transform, raster::CrsId crs, std::optional<double> nodata) {
    std::vector<float> z(static_cast<std::size_t>(width) * height);
    for (int r = 0; r < height; ++r) {
        for (int c = 0; c < width; ++c) z[static_cast<std::size_t>(r) * width + c] = static_cast<float>(f(r, c));
    }
    return raster::GeoGrid::dem(width, height, transform, crs, std::move(z), nodata);
}

raster::GeoGrid rgb_from(int width, int height, const std::function<std::uint8_t(int, int, int)>& f,
                         raster::GeoTransform transform, raster::CrsId crs) {
    std::vector<std::uint8_t> px(static_cast<std::size_t>(width) * height * 3);
    for (int r = 0; r < height; ++r) {
        for (int c = 0; c < width; ++c) {
            for (int b = 0; b < 3; ++b) px[(static_cast<std::size_t>(r) * width + c) * 3 + b] = f(r, c, b);
        }
    }
    return raster::GeoGrid::rgb(width, height, transform, crs, std::move(px));
}

}  // namespace rsbench::testing
