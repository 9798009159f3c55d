#include "rsbench/error.hpp"
#include "rsbench/io.hpp"
#include "rsbench/review.hpp"
#include "rsbench/terrain.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <ctime>
#include <limits>

namespace rsbench::review {

namespace {

constexpr std::array<std::string_view, 3> kPreviewNames = {"rgb", "dem-hillshade", "dem-colormap"};

bool score_order(const catalog::SampleRecord& a, const catalog::SampleRecord& b) {
    const double sa = a.alignment_score.value_or(std::numeric_limits<double>::infinity());
    const double sb = b.alignment_score.value_or(std::numeric_limits<double>::infinity());
    if (sa != sb) return sa < sb;
    return a.id < b.id;
}

raster::GeoGrid load_for_preview(const std::filesystem::path& path) {
    try {
        return raster::resize_canonical(raster::load_tile(path));
    } catch (const Error& e) {
        throw Error(ErrorKind::TileUnreadable, path.string() + ": " + e.what());
    }
}

}  // namespace

std::string_view to_string(PreviewKind kind) { return kPreviewNames[static_cast<std::size_t>(kind)]; }

PreviewKind parse_preview_kind(std::string_view s) {
    for (std::size_t i = 0; i < kPreviewNames.size(); ++i) {
        if (kPreviewNames[i] == s) return static_cast<PreviewKind>(i);
    }
    throw Error(ErrorKind::InvalidArgument, "unknown preview kind '" + std::string(s) + "'");
}

std::vector<std::uint8_t> preview_pixels(const raster::GeoGrid& tile, PreviewKind kind) {
    const auto grid = raster::resize_canonical(tile);
    if (kind == PreviewKind::Rgb) {
        if (grid.is_dem()) throw Error(ErrorKind::BandMismatch, "rgb preview needs a 3-band tile");
        const auto px = grid.u8();
        return {px.begin(), px.end()};
    }
    if (!grid.is_dem()) throw Error(ErrorKind::BandMismatch, "DEM preview needs a single-band tile");
    const auto z = grid.f32();
    std::vector<std::uint8_t> out(z.size(), 0);
    if (kind == PreviewKind::DemHillshade) {
        const auto shade = terrain::hillshade(grid);
        for (std::size_t i = 0; i < z.size(); ++i) {
            if (!grid.is_nodata(z[i])) out[i] = raster::round_to_u8(255.0 * shade[i]);
        }
        return out;
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const float v : z) {
        if (grid.is_nodata(v)) continue;
        lo = std::min<double>(lo, v);
        hi = std::max<double>(hi, v);
    }
    if (!(hi > lo)) return out;
    for (std::size_t i = 0; i < z.size(); ++i) {
        if (!grid.is_nodata(z[i])) out[i] = raster::round_to_u8((z[i] - lo) / (hi - lo) * 255.0);
    }
    return out;
}

std::string render_preview(const catalog::SampleRecord& sample, PreviewKind kind) {
    const auto tile = load_for_preview(kind == PreviewKind::Rgb ? sample.rgb_path : sample.dem_path);
    std::vector<std::uint8_t> px;
    try {
        px = preview_pixels(tile, kind);
    } catch (const Error& e) {
        throw Error(ErrorKind::TileUnreadable, sample.id + ": " + e.what());
    }
    return encode_png(tile.width(), tile.height(), kind == PreviewKind::Rgb ? 3 : 1, px);
}

VerdictLog::VerdictLog(std::filesystem::path path) : path_(std::move(path)) {
    out_.open(path_, std::ios::binary | std::ios::app);
    if (!out_) throw Error(ErrorKind::IoFailure, "cannot open verdict log " + path_.string());
}

void VerdictLog::append(const catalog::VerdictRecord& record) {
    out_ << catalog::to_json_line(record) << '\n';
    out_.flush();
    if (!out_) throw Error(ErrorKind::IoFailure, "cannot append to verdict log " + path_.string());
}

std::vector<catalog::VerdictRecord> VerdictLog::replay(const std::filesystem::path& path) {
    std::vector<catalog::VerdictRecord> out;
    if (!std::filesystem::exists(path)) return out;
    const std::string text = read_file(path);
    std::size_t start = 0;
    std::size_t line_no = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        ++line_no;
        const std::string_view line(text.data() + start, end - start);
        if (line.find_first_not_of(" \t\r") != std::string_view::npos) {
            try {
                out.push_back(catalog::parse_verdict_record(line));
            } catch (const Error& e) {
                throw Error(ErrorKind::MalformedVerdict, path.string() + " line " + std::to_string(line_no) + ": " + e.what());
            }
        }
        start = end + 1;
    }
    return out;
}

double ReviewStats::rejection_rate() const {
    return reviewed() == 0 ? 0.0 : static_cast<double>(rejected) / static_cast<double>(reviewed());
}

ReviewStats compute_stats(const catalog::Catalog& catalog) {
    ReviewStats s;
    for (const auto& r : catalog.samples) {
        switch (r.review_state) {
            case catalog::ReviewState::Pending: ++s.pending; break;
            case catalog::ReviewState::Accepted: ++s.accepted; break;
            case catalog::ReviewState::Rejected: ++s.rejected; break;
            case catalog::ReviewState::Flagged: ++s.flagged; break;
        }
    }
    return s;
}

PairsPage list_pairs(const catalog::Catalog& catalog, std::optional<catalog::ReviewState> state, int page,
                     int page_size) {
    if (page < 1) throw Error(ErrorKind::InvalidPage, "page numbers start at 1");
    if (page_size < 1 || page_size > kMaxPageSize) {
        throw Error(ErrorKind::InvalidPage, "page_size must be in 1.." + std::to_string(kMaxPageSize));
    }
    std::vector<const catalog::SampleRecord*> matching;
    for (const auto& s : catalog.samples) {
        if (!state || s.review_state == *state) matching.push_back(&s);
    }
    std::sort(matching.begin(), matching.end(), [](auto* a, auto* b) { return score_order(*a, *b); });

    const std::size_t size = static_cast<std::size_t>(page_size);
    const std::size_t pages = std::max<std::size_t>(1, (matching.size() + size - 1) / size);
    if (static_cast<std::size_t>(page) > pages) {
        throw Error(ErrorKind::InvalidPage, "page " + std::to_string(page) + " past the last page " + std::to_string(pages));
    }
    PairsPage out{page, page_size, matching.size(), {}};
    const std::size_t first = (static_cast<std::size_t>(page) - 1) * size;
    for (std::size_t i = first; i < std::min(matching.size(), first + size); ++i) out.items.push_back(*matching[i]);
    return out;
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

ReviewService::ReviewService(catalog::Catalog manifest, std::filesystem::path log_path)
    : log_(std::move(log_path)) {
    manifest.validate();
    const auto records = VerdictLog::replay(log_.path());
    auto folded = catalog::apply_verdicts(manifest, records);
    for (const auto& r : records) active_[r.sample_id] = r;
    for (std::size_t i = 0; i < folded.samples.size(); ++i) index_.emplace(folded.samples[i].id, i);
    snapshot_ = std::make_shared<const catalog::Catalog>(std::move(folded));
    active_snapshot_ = active_;
    writer_ = std::jthread([this](std::stop_token stop) { writer_loop(stop); });
}

ReviewService::~ReviewService() {
    writer_.request_stop();
    queue_cv_.notify_all();
}

std::shared_ptr<const catalog::Catalog> ReviewService::snapshot() const {
    std::lock_guard lock(snapshot_mutex_);
    return snapshot_;
}

std::uint64_t ReviewService::version() const {
    std::lock_guard lock(snapshot_mutex_);
    return version_;
}

PairsPage ReviewService::list_pairs(std::optional<catalog::ReviewState> state, int page, int page_size) const {
    return review::list_pairs(*snapshot(), state, page, page_size);
}

std::optional<catalog::SampleRecord> ReviewService::get_pair(std::string_view id) const {
    const auto snap = snapshot();
    const auto* s = snap->find(id);
    if (!s) return std::nullopt;
    return *s;
}

std::optional<catalog::VerdictRecord> ReviewService::active_verdict(std::string_view id) const {
    std::lock_guard lock(snapshot_mutex_);
    const auto it = active_snapshot_.find(id);
    if (it == active_snapshot_.end()) return std::nullopt;
    return it->second;
}

std::string ReviewService::preview(std::string_view id, PreviewKind kind) const {
    const auto sample = get_pair(id);
    if (!sample) throw Error(ErrorKind::SampleNotFound, "no sample '" + std::string(id) + "'", {std::string(id)});
    return render_preview(*sample, kind);
}

ReviewStats ReviewService::stats() const { return compute_stats(*snapshot()); }

VerdictAck ReviewService::post_verdict(catalog::VerdictRecord record) {
    if (record.sample_id.empty()) throw Error(ErrorKind::MalformedVerdict, "missing sample_id");
    if (!index_.contains(record.sample_id)) {
        throw Error(ErrorKind::SampleNotFound, "no sample '" + record.sample_id + "'", {record.sample_id});
    }
    if (record.timestamp.empty()) record.timestamp = utc_timestamp();
    std::future<VerdictAck> ack;
    {
        std::lock_guard lock(queue_mutex_);
        queue_.push_back({std::move(record), {}});
        ack = queue_.back().done.get_future();
    }
    queue_cv_.notify_one();
    return ack.get();
}

void ReviewService::writer_loop(std::stop_token stop) {
    for (;;) {
        Pending item;
        {
            std::unique_lock lock(queue_mutex_);
            queue_cv_.wait(lock, stop, [this] { return !queue_.empty(); });
            if (queue_.empty()) return;
            item = std::move(queue_.front());
            queue_.pop_front();
        }
        try {
            item.done.set_value(apply(item.record));
        } catch (...) {
            item.done.set_exception(std::current_exception());
        }
    }
}

VerdictAck ReviewService::apply(const catalog::VerdictRecord& record) {
    const auto current = active_.find(record.sample_id);
    if (current != active_.end() && current->second.same_decision(record)) {
        return {false, catalog::state_after(current->second.verdict), current->second};
    }
    log_.append(record);
    active_[record.sample_id] = record;

    auto next = std::make_shared<catalog::Catalog>(*snapshot());
    auto& sample = next->samples[index_.at(record.sample_id)];
    sample.review_state = catalog::state_after(record.verdict);
    if (sample.review_state != catalog::ReviewState::Accepted) sample.split.reset();
    {
        std::lock_guard lock(snapshot_mutex_);
        snapshot_ = std::move(next);
        active_snapshot_[record.sample_id] = record;
        ++version_;
    }
    return {true, catalog::state_after(record.verdict), record};
}

}  // namespace rsbench::review
