#include "geotiff_reader.hpp"

#include "rsbench/error.hpp"

#include <zlib.h>

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rsbench::raster::detail {

namespace {

enum Tag : std::uint16_t {
    kImageWidth = 256,
    kImageLength = 257,
    kBitsPerSample = 258,
    kCompression = 259,
    kStripOffsets = 273,
    kSamplesPerPixel = 277,
    kRowsPerStrip = 278,
    kStripByteCounts = 279,
    kPlanarConfig = 284,
    kPredictor = 317,
    kTileWidth = 322,
    kSampleFormat = 339,
    kModelPixelScale = 33550,
    kModelTiepoint = 33922,
    kModelTransformation = 34264,
    kGeoKeyDirectory = 34735,
    kGdalNodata = 42113,
};

enum GeoKey : std::uint16_t {
    kRasterType = 1025,
    kGeographicType = 2048,
    kProjectedCsType = 3072,
};

constexpr std::uint16_t kCompressionNone = 1;
constexpr std::uint16_t kCompressionLzw = 5;
constexpr std::uint16_t kCompressionDeflate = 8;
constexpr std::uint16_t kCompressionDeflateOld = 32946;
constexpr std::uint16_t kRasterPixelIsPoint = 2;

struct Entry {
    std::uint16_t type = 0;
    std::uint32_t count = 0;
    std::uint32_t value_offset = 0;  // raw 4 bytes
    std::size_t entry_pos = 0;       // position of the value field
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {
        if (bytes.size() < 8) throw Error(ErrorKind::CorruptHeader, "file too short for a TIFF header");
        if (bytes[0] == 'I' && bytes[1] == 'I') {
            little_ = true;
        } else if (bytes[0] == 'M' && bytes[1] == 'M') {
            little_ = false;
        } else {
            throw Error(ErrorKind::CorruptHeader, "missing TIFF byte-order mark");
        }
        const auto magic = u16(2);
        if (magic == 43) throw Error(ErrorKind::UnsupportedFormat, "BigTIFF is not supported");
        if (magic != 42) throw Error(ErrorKind::CorruptHeader, "bad TIFF magic");
    }

    std::uint16_t u16(std::size_t pos) const {
        check(pos, 2);
        return little_ ? static_cast<std::uint16_t>(bytes_[pos] | (bytes_[pos + 1] << 8))
                       : static_cast<std::uint16_t>((bytes_[pos] << 8) | bytes_[pos + 1]);
    }

    std::uint32_t u32(std::size_t pos) const {
        check(pos, 4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            const std::uint32_t b = bytes_[pos + (little_ ? i : 3 - i)];
            v |= b << (8 * i);
        }
        return v;
    }

    double f64(std::size_t pos) const {
        check(pos, 8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) {
            const std::uint64_t b = bytes_[pos + (little_ ? i : 7 - i)];
            v |= b << (8 * i);
        }
        double d = 0.0;
        std::memcpy(&d, &v, sizeof d);
        return d;
    }

    void check(std::size_t pos, std::size_t len) const {
        if (pos > bytes_.size() || len > bytes_.size() - pos) {
            throw Error(ErrorKind::CorruptHeader, "TIFF structure points outside the file");
        }
    }

    bool little() const { return little_; }
    std::span<const std::uint8_t> bytes() const { return bytes_; }

    static std::size_t type_size(std::uint16_t type) {
        switch (type) {
            case 1: case 2: case 6: case 7: return 1;  // BYTE ASCII SBYTE UNDEFINED
            case 3: case 8: return 2;                  // SHORT SSHORT
            case 4: case 9: case 11: return 4;         // LONG SLONG FLOAT
            case 5: case 10: case 12: return 8;        // RATIONAL SRATIONAL DOUBLE
            default: return 0;
        }
    }

    std::size_t value_pos(const Entry& e) const {
        const std::size_t size = type_size(e.type) * e.count;
        return size <= 4 ? e.entry_pos : e.value_offset;
    }

    std::vector<std::uint32_t> integers(const Entry& e) const {
        std::vector<std::uint32_t> out;
        out.reserve(e.count);
        const std::size_t base = value_pos(e);
        for (std::uint32_t i = 0; i < e.count; ++i) {
            if (e.type == 3) {
                out.push_back(u16(base + 2 * i));
            } else if (e.type == 4) {
                out.push_back(u32(base + 4 * i));
            } else if (e.type == 1) {
                check(base + i, 1);
                out.push_back(bytes_[base + i]);
            } else {
                throw Error(ErrorKind::CorruptHeader, "expected an integer-typed TIFF tag");
            }
        }
        return out;
    }

    std::vector<double> doubles(const Entry& e) const {
        if (e.type != 12) throw Error(ErrorKind::CorruptHeader, "expected a DOUBLE-typed TIFF tag");
        std::vector<double> out;
        const std::size_t base = value_pos(e);
        for (std::uint32_t i = 0; i < e.count; ++i) out.push_back(f64(base + 8 * i));
        return out;
    }

    std::string ascii(const Entry& e) const {
        const std::size_t base = value_pos(e);
        check(base, e.count);
        std::string s(reinterpret_cast<const char*>(bytes_.data() + base), e.count);
        while (!s.empty() && (s.back() == '\0' || s.back() == ' ')) s.pop_back();
        return s;
    }

private:
    std::span<const std::uint8_t> bytes_;
    bool little_ = true;
};

std::vector<std::uint8_t> inflate_strip(std::span<const std::uint8_t> compressed, std::size_t expected) {
    std::vector<std::uint8_t> out(expected);
    z_stream zs{};
    if (inflateInit(&zs) != Z_OK) throw Error(ErrorKind::CorruptHeader, "zlib init failed");
    zs.next_in = const_cast<Bytef*>(compressed.data());
    zs.avail_in = static_cast<uInt>(compressed.size());
    zs.next_out = out.data();
    zs.avail_out = static_cast<uInt>(out.size());
    const int rc = inflate(&zs, Z_FINISH);
    const std::size_t produced = zs.total_out;
    inflateEnd(&zs);
    if (rc != Z_STREAM_END && rc != Z_BUF_ERROR && rc != Z_OK) {
        throw Error(ErrorKind::CorruptHeader, "Deflate strip is corrupt");
    }
    out.resize(produced);
    return out;
}

}  // namespace

GeoGrid decode_geotiff(std::span<const std::uint8_t> bytes) {
    const Reader r(bytes);
    const std::uint32_t ifd = r.u32(4);
    const std::uint16_t n_entries = r.u16(ifd);

    std::map<std::uint16_t, Entry> tags;
    for (std::uint16_t i = 0; i < n_entries; ++i) {
        const std::size_t pos = ifd + 2 + 12u * i;
        Entry e;
        const std::uint16_t tag = r.u16(pos);
        e.type = r.u16(pos + 2);
        e.count = r.u32(pos + 4);
        e.value_offset = r.u32(pos + 8);
        e.entry_pos = pos + 8;
        tags[tag] = e;
    }

    auto scalar = [&](std::uint16_t tag, std::optional<std::uint32_t> fallback) -> std::uint32_t {
        const auto it = tags.find(tag);
        if (it == tags.end()) {
            if (fallback) return *fallback;
            throw Error(ErrorKind::CorruptHeader, "missing required TIFF tag " + std::to_string(tag));
        }
        const auto values = r.integers(it->second);
        if (values.empty()) throw Error(ErrorKind::CorruptHeader, "empty TIFF tag " + std::to_string(tag));
        return values.front();
    };

    if (tags.contains(kTileWidth)) throw Error(ErrorKind::UnsupportedFormat, "tiled TIFF layout is not supported");

    const auto compression = scalar(kCompression, kCompressionNone);
    if (compression == kCompressionLzw) throw Error(ErrorKind::UnsupportedFormat, "LZW compression is not supported");
    if (compression != kCompressionNone && compression != kCompressionDeflate &&
        compression != kCompressionDeflateOld) {
        throw Error(ErrorKind::UnsupportedFormat, "compression scheme " + std::to_string(compression));
    }
    if (scalar(kPredictor, 1) != 1) throw Error(ErrorKind::UnsupportedFormat, "TIFF predictors are not supported");
    if (scalar(kPlanarConfig, 1) != 1) throw Error(ErrorKind::UnsupportedFormat, "planar TIFF layout is not supported");

    const auto width = scalar(kImageWidth, std::nullopt);
    const auto height = scalar(kImageLength, std::nullopt);
    const auto spp = scalar(kSamplesPerPixel, 1);
    const auto bits = scalar(kBitsPerSample, 1);
    const auto sample_format = scalar(kSampleFormat, 1);
    const auto rows_per_strip = std::min(scalar(kRowsPerStrip, height), height);

    const bool is_dem = spp == 1 && bits == 32 && sample_format == 3;
    const bool is_rgb = spp == 3 && bits == 8 && sample_format == 1;
    if (!is_dem && !is_rgb) {
        throw Error(ErrorKind::UnsupportedFormat, "only float32x1 and uint8x3 GeoTIFFs are supported");
    }
    if (width == 0 || height == 0 || rows_per_strip == 0) throw Error(ErrorKind::CorruptHeader, "zero-sized TIFF");

    // Georeferencing.
    if (tags.contains(kModelTransformation)) {
        throw Error(ErrorKind::UnsupportedFormat, "ModelTransformation georeferencing is not supported");
    }
    if (!tags.contains(kModelPixelScale) || !tags.contains(kModelTiepoint) || !tags.contains(kGeoKeyDirectory)) {
        throw Error(ErrorKind::UnsupportedFormat, "TIFF is not georeferenced");
    }
    const auto scale = r.doubles(tags[kModelPixelScale]);
    const auto tie = r.doubles(tags[kModelTiepoint]);
    const auto keys = r.integers(tags[kGeoKeyDirectory]);
    if (scale.size() < 2 || tie.size() < 6 || keys.size() < 4) throw Error(ErrorKind::CorruptHeader, "short GeoTIFF tag");

    int epsg = 0;
    std::uint32_t raster_type = 1;
    const std::size_t n_keys = keys[3];
    if (keys.size() < 4 + 4 * n_keys) throw Error(ErrorKind::CorruptHeader, "truncated GeoKey directory");
    for (std::size_t k = 0; k < n_keys; ++k) {
        const auto id = keys[4 + 4 * k];
        const auto location = keys[4 + 4 * k + 1];
        const auto value = keys[4 + 4 * k + 3];
        if (location != 0) continue;  // only inline SHORT values are relevant here
        if (id == kRasterType) raster_type = value;
        if (id == kProjectedCsType || (id == kGeographicType && epsg == 0)) epsg = static_cast<int>(value);
    }
    if (epsg == 0) throw Error(ErrorKind::UnsupportedFormat, "GeoTIFF carries no EPSG code");
    const CrsId crs = CrsId::from_epsg(epsg);

    GeoTransform transform{tie[3] - tie[0] * scale[0], tie[4] + tie[1] * scale[1], scale[0], -scale[1]};
    if (raster_type == kRasterPixelIsPoint) {
        transform.origin_x -= 0.5 * transform.pixel_dx;
        transform.origin_y -= 0.5 * transform.pixel_dy;
    }

    std::optional<double> nodata;
    if (tags.contains(kGdalNodata)) {
        const auto text = r.ascii(tags[kGdalNodata]);
        char* end = nullptr;
        const double v = std::strtod(text.c_str(), &end);
        if (end == text.c_str()) throw Error(ErrorKind::CorruptHeader, "unparseable GDAL_NODATA '" + text + "'");
        nodata = v;
    }

    // Pixel data.
    const auto offsets = r.integers(tags.at(kStripOffsets));
    if (!tags.contains(kStripByteCounts)) throw Error(ErrorKind::CorruptHeader, "missing StripByteCounts");
    const auto counts = r.integers(tags.at(kStripByteCounts));
    const std::size_t strips = (height + rows_per_strip - 1) / rows_per_strip;
    if (offsets.size() != strips || counts.size() != strips) {
        throw Error(ErrorKind::DimensionMismatch, "strip count does not match image height");
    }

    const std::size_t bytes_per_sample = bits / 8;
    const std::size_t row_bytes = static_cast<std::size_t>(width) * spp * bytes_per_sample;
    std::vector<std::uint8_t> raw;
    raw.reserve(row_bytes * height);
    for (std::size_t s = 0; s < strips; ++s) {
        const std::size_t rows = std::min<std::size_t>(rows_per_strip, height - s * rows_per_strip);
        const std::size_t expected = rows * row_bytes;
        const std::size_t available = offsets[s] <= bytes.size() ? bytes.size() - offsets[s] : 0;
        const std::size_t stored = std::min<std::size_t>(counts[s], available);
        const auto chunk = bytes.subspan(std::min<std::size_t>(offsets[s], bytes.size()), stored);
        if (compression == kCompressionNone) {
            if (stored < expected) {
                throw Error(ErrorKind::DimensionMismatch, "strip " + std::to_string(s) + " holds " +
                                                              std::to_string(stored) + " of " +
                                                              std::to_string(expected) + " bytes");
            }
            raw.insert(raw.end(), chunk.begin(), chunk.begin() + static_cast<std::ptrdiff_t>(expected));
        } else {
            const auto decoded = inflate_strip(chunk, expected);
            if (decoded.size() < expected) {
                throw Error(ErrorKind::DimensionMismatch, "strip " + std::to_string(s) + " inflates to " +
                                                              std::to_string(decoded.size()) + " of " +
                                                              std::to_string(expected) + " bytes");
            }
            raw.insert(raw.end(), decoded.begin(), decoded.end());
        }
    }

    const int w = static_cast<int>(width);
    const int h = static_cast<int>(height);
    if (is_rgb) return GeoGrid::rgb(w, h, transform, crs, std::move(raw), nodata);

    std::vector<float> samples(static_cast<std::size_t>(width) * height);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        std::uint32_t v = 0;
        for (int b = 0; b < 4; ++b) {
            const std::uint32_t byte = raw[4 * i + (r.little() ? b : 3 - b)];
            v |= byte << (8 * b);
        }
        std::memcpy(&samples[i], &v, sizeof v);
    }
    return GeoGrid::dem(w, h, transform, crs, std::move(samples), nodata);
}

}  // namespace rsbench::raster::detail
