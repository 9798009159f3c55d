#include "rsbench/error.hpp"
#include "rsbench/io.hpp"
#include "rsbench/raster.hpp"

#include "geotiff_reader.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cstring>

namespace rsbench::raster {

namespace {

using nlohmann::json;

constexpr const char* kMagic = "rsbench-tile";
constexpr int kVersion = 1;

template <typename T>
void append_le(std::string& out, std::span<const T> values) {
    const std::size_t offset = out.size();
    out.resize(offset + values.size_bytes());
    std::memcpy(out.data() + offset, values.data(), values.size_bytes());
    if constexpr (std::endian::native == std::endian::big && sizeof(T) > 1) {
        for (std::size_t i = 0; i < values.size(); ++i) {
            std::reverse(out.begin() + offset + i * sizeof(T), out.begin() + offset + (i + 1) * sizeof(T));
        }
    }
}

template <typename T>
std::vector<T> read_le(std::span<const char> bytes, std::size_t count) {
    std::vector<T> out(count);
    std::memcpy(out.data(), bytes.data(), count * sizeof(T));
    if constexpr (std::endian::native == std::endian::big && sizeof(T) > 1) {
        auto* raw = reinterpret_cast<char*>(out.data());
        for (std::size_t i = 0; i < count; ++i) std::reverse(raw + i * sizeof(T), raw + (i + 1) * sizeof(T));
    }
    return out;
}

template <typename T>
T require(const json& header, const char* key) {
    if (!header.contains(key)) throw Error(ErrorKind::CorruptHeader, std::string("missing header field '") + key + "'");
    try {
        return header.at(key).get<T>();
    } catch (const json::exception& e) {
        throw Error(ErrorKind::CorruptHeader, std::string("bad header field '") + key + "': " + e.what());
    }
}

}  // namespace

TileFormat format_for_path(const std::filesystem::path& path) {
    auto ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".rst") return TileFormat::Internal;
    if (ext == ".tif" || ext == ".tiff") return TileFormat::GeoTiffSubset;
    throw Error(ErrorKind::UnsupportedFormat, "unknown tile extension '" + ext + "'");
}

std::string encode_tile(const GeoGrid& grid) {
    const auto& t = grid.transform();
    json header = {
        {"format", kMagic},
        {"version", kVersion},
        {"width", grid.width()},
        {"height", grid.height()},
        {"bands", grid.bands()},
        {"dtype", to_string(grid.dtype())},
        {"geotransform", {t.origin_x, t.origin_y, t.pixel_dx, t.pixel_dy}},
        {"crs", grid.crs().to_string()},
        {"nodata", grid.nodata() ? json(*grid.nodata()) : json(nullptr)},
    };
    std::string out = header.dump();
    out.push_back('\n');
    if (grid.is_dem()) {
        append_le(out, grid.f32());
    } else {
        append_le(out, grid.u8());
    }
    return out;
}

GeoGrid decode_tile(std::span<const char> bytes) {
    const auto newline = std::find(bytes.begin(), bytes.end(), '\n');
    if (newline == bytes.end()) throw Error(ErrorKind::CorruptHeader, "no header terminator");

    json header;
    try {
        header = json::parse(bytes.begin(), newline);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::CorruptHeader, std::string("header is not JSON: ") + e.what());
    }
    if (!header.is_object() || header.value("format", "") != kMagic) {
        throw Error(ErrorKind::CorruptHeader, "not an rsbench tile");
    }
    if (require<int>(header, "version") != kVersion) {
        throw Error(ErrorKind::UnsupportedFormat, "unsupported tile version");
    }

    const int width = require<int>(header, "width");
    const int height = require<int>(header, "height");
    const int bands = require<int>(header, "bands");
    const auto dtype = require<std::string>(header, "dtype");
    const auto gt = require<std::vector<double>>(header, "geotransform");
    const auto crs = CrsId::parse(require<std::string>(header, "crs"));
    std::optional<double> nodata;
    if (header.contains("nodata") && !header["nodata"].is_null()) nodata = require<double>(header, "nodata");

    if (width <= 0 || height <= 0) throw Error(ErrorKind::CorruptHeader, "non-positive dimensions");
    if (gt.size() != 4) throw Error(ErrorKind::CorruptHeader, "geotransform must have 4 entries");
    const GeoTransform transform{gt[0], gt[1], gt[2], gt[3]};

    const bool is_dem = dtype == "float32" && bands == 1;
    const bool is_rgb = dtype == "uint8" && bands == 3;
    if (!is_dem && !is_rgb) {
        throw Error(ErrorKind::UnsupportedFormat, "unsupported dtype/bands " + dtype + "/" + std::to_string(bands));
    }

    const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height) *
                              static_cast<std::size_t>(bands);
    const std::size_t sample_size = is_dem ? sizeof(float) : 1;
    const auto payload = bytes.subspan(static_cast<std::size_t>(newline - bytes.begin()) + 1);
    if (payload.size() != count * sample_size) {
        throw Error(ErrorKind::DimensionMismatch, "header declares " + std::to_string(count * sample_size) +
                                                      " payload bytes, file has " + std::to_string(payload.size()));
    }

    if (is_dem) return GeoGrid::dem(width, height, transform, crs, read_le<float>(payload, count), nodata);
    return GeoGrid::rgb(width, height, transform, crs, read_le<std::uint8_t>(payload, count), nodata);
}

GeoGrid load_tile(const std::filesystem::path& path, TileFormat format) {
    const std::string bytes = read_file(path);
    if (format == TileFormat::Internal) return decode_tile(bytes);
    return detail::decode_geotiff(std::span<const std::uint8_t>(
        reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
}

GeoGrid load_tile(const std::filesystem::path& path) { return load_tile(path, format_for_path(path)); }

void save_tile(const GeoGrid& grid, const std::filesystem::path& path) { write_file_atomic(path, encode_tile(grid)); }

}  // namespace rsbench::raster
