#pragma once

#include "rsbench/catalog.hpp"

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace rsbench::review {

/// 8-bit PNG (grayscale for 1 channel, RGB for 3). Output is deterministic.
std::string encode_png(int width, int height, int channels, std::span<const std::uint8_t> pixels);

enum class PreviewKind { Rgb, DemHillshade, DemColormap };

/// "rgb", "dem-hillshade", "dem-colormap"
std::string_view to_string(PreviewKind kind);
PreviewKind parse_preview_kind(std::string_view s);

/// Preview pixels at 512x512: the RGB tile, a 315/45 Lambertian hillshade of
/// the DEM, or the DEM as linear grayscale over its min/max. Nodata renders black.
std::vector<std::uint8_t> preview_pixels(const raster::GeoGrid& tile, PreviewKind kind);

/// PNG preview of a sample. Throws TileUnreadable.
std::string render_preview(const catalog::SampleRecord& sample, PreviewKind kind);

/// Append-only JSONL verdict log.
class VerdictLog {
public:
    explicit VerdictLog(std::filesystem::path path);
    /// Appends one line and flushes. Throws IoFailure.
    void append(const catalog::VerdictRecord& record);
    const std::filesystem::path& path() const { return path_; }

    /// Every record in the log, in order. A missing file is an empty log.
    /// Throws MalformedVerdict with the line number.
    static std::vector<catalog::VerdictRecord> replay(const std::filesystem::path& path);

private:
    std::filesystem::path path_;
    std::ofstream out_;
};

struct PairsPage {
    int page = 1;
    int page_size = 50;
    std::size_t total = 0;
    std::vector<catalog::SampleRecord> items;
};

struct ReviewStats {
    std::size_t pending = 0;
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t flagged = 0;

    std::size_t reviewed() const { return accepted + rejected + flagged; }
    /// rejected / reviewed, 0 when nothing has been reviewed.
    double rejection_rate() const;
};

ReviewStats compute_stats(const catalog::Catalog& catalog);

/// Review ordering: alignment score ascending (samples without a score last), then id.
/// Throws InvalidPage (page < 1, page_size outside 1..200, or page past the end).
PairsPage list_pairs(const catalog::Catalog& catalog, std::optional<catalog::ReviewState> state, int page,
                     int page_size);

inline constexpr int kMaxPageSize = 200;

struct VerdictAck {
    bool appended = false;  // false for a duplicate of the sample's active verdict
    catalog::ReviewState state = catalog::ReviewState::Pending;
    catalog::VerdictRecord record;
};

/// Review state owner. One writer thread appends verdicts to the log and
/// publishes a new immutable catalog snapshot before acknowledging; readers
/// only take the current snapshot.
class ReviewService {
public:
    /// Replays `log_path` over `manifest`.
    ReviewService(catalog::Catalog manifest, std::filesystem::path log_path);
    ~ReviewService();
    ReviewService(const ReviewService&) = delete;
    ReviewService& operator=(const ReviewService&) = delete;

    std::shared_ptr<const catalog::Catalog> snapshot() const;
    PairsPage list_pairs(std::optional<catalog::ReviewState> state, int page, int page_size) const;
    std::optional<catalog::SampleRecord> get_pair(std::string_view id) const;
    std::optional<catalog::VerdictRecord> active_verdict(std::string_view id) const;
    std::string preview(std::string_view id, PreviewKind kind) const;
    ReviewStats stats() const;

    /// Blocks until the writer has logged the verdict (or recognised a
    /// duplicate). Fills an empty timestamp with the current UTC time.
    /// Throws SampleNotFound, MalformedVerdict, IoFailure.
    VerdictAck post_verdict(catalog::VerdictRecord record);

    /// Number of verdicts applied since construction; lets callers skip
    /// redundant snapshots.
    std::uint64_t version() const;

private:
    struct Pending {
        catalog::VerdictRecord record;
        std::promise<VerdictAck> done;
    };

    void writer_loop(std::stop_token stop);
    VerdictAck apply(const catalog::VerdictRecord& record);

    VerdictLog log_;
    std::map<std::string, std::size_t, std::less<>> index_;
    std::map<std::string, catalog::VerdictRecord, std::less<>> active_;  // writer-owned

    mutable std::mutex snapshot_mutex_;
    std::shared_ptr<const catalog::Catalog> snapshot_;
    std::map<std::string, catalog::VerdictRecord, std::less<>> active_snapshot_;
    std::uint64_t version_ = 0;

    std::mutex queue_mutex_;
    std::condition_variable_any queue_cv_;
    std::deque<Pending> queue_;
    std::jthread writer_;
};

/// Current UTC time as "YYYY-MM-DDTHH:MM:SSZ".
std::string utc_timestamp();

struct ServerOptions {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::optional<std::filesystem::path> static_dir;
    std::optional<std::filesystem::path> snapshot_path;
    int snapshot_interval_s = 30;
};

/// HTTP front end over a ReviewService:
///   GET  /api/pairs?state=&page=&page_size=
///   GET  /api/pairs/{id}
///   GET  /api/pairs/{id}/preview?kind=
///   POST /api/pairs/{id}/verdict
///   GET  /api/stats
class HttpServer {
public:
    HttpServer(ReviewService& service, ServerOptions options);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds and serves on a background thread; returns the bound port (useful with port 0).
    int start();
    /// Blocks until stop() is called from another thread or a signal handler.
    void wait();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace rsbench::review
