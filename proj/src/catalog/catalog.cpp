#include "rsbench/catalog.hpp"

#include "rsbench/error.hpp"
#include "rsbench/io.hpp"
#include "rsbench/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <sstream>

namespace rsbench::catalog {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr std::array<std::string_view, 4> kStateNames = {"pending", "accepted", "rejected", "flagged"};
constexpr std::array<std::string_view, 3> kSplitNames = {"train", "val", "test"};
constexpr std::array<std::string_view, 3> kVerdictNames = {"accept", "reject", "flag"};

template <typename Enum, std::size_t N>
Enum parse_name(const std::array<std::string_view, N>& names, std::string_view s, const char* what) {
    for (std::size_t i = 0; i < N; ++i) {
        if (names[i] == s) return static_cast<Enum>(i);
    }
    throw Error(ErrorKind::InvalidArgument, std::string("unknown ") + what + " '" + std::string(s) + "'");
}

fs::path absolute_normal(const fs::path& p) { return fs::absolute(p).lexically_normal(); }

std::string relative_to(const fs::path& p, const fs::path& base) {
    if (p.empty()) return {};
    const auto rel = absolute_normal(p).lexically_relative(absolute_normal(base));
    return rel.empty() ? absolute_normal(p).generic_string() : rel.generic_string();
}

fs::path resolve_against(const std::string& p, const fs::path& base) {
    const fs::path path(p);
    return path.is_absolute() ? path : (base / path).lexically_normal();
}

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        auto line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.find_first_not_of(" \t") != std::string_view::npos) lines.push_back(line);
        start = end + 1;
    }
    return lines;
}

bool is_tile_file(const fs::path& p) {
    auto ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".rst" || ext == ".tif" || ext == ".tiff";
}

std::map<std::string, fs::path> tiles_by_stem(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw Error(ErrorKind::IoFailure, "not a directory: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && is_tile_file(entry.path())) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::map<std::string, fs::path> out;
    for (const auto& f : files) {
        const auto stem = f.stem().string();
        if (!out.emplace(stem, f).second) {
            throw Error(ErrorKind::DuplicateId, "stem '" + stem + "' appears twice in " + dir.string(), {stem});
        }
    }
    return out;
}

}  // namespace

std::string_view to_string(ReviewState s) { return kStateNames[static_cast<std::size_t>(s)]; }
ReviewState parse_review_state(std::string_view s) { return parse_name<ReviewState>(kStateNames, s, "review state"); }
std::string_view to_string(Split s) { return kSplitNames[static_cast<std::size_t>(s)]; }
Split parse_split(std::string_view s) { return parse_name<Split>(kSplitNames, s, "split"); }
std::string_view to_string(Verdict v) { return kVerdictNames[static_cast<std::size_t>(v)]; }
Verdict parse_verdict(std::string_view s) { return parse_name<Verdict>(kVerdictNames, s, "verdict"); }

const SampleRecord* Catalog::find(std::string_view id) const {
    for (const auto& s : samples) {
        if (s.id == id) return &s;
    }
    return nullptr;
}

void Catalog::validate() const {
    std::set<std::string_view> seen;
    for (const auto& s : samples) {
        if (s.id.empty()) throw Error(ErrorKind::InvalidArgument, "sample with empty id");
        if (!seen.insert(s.id).second) throw Error(ErrorKind::DuplicateId, "duplicate sample id '" + s.id + "'", {s.id});
        if (s.split && s.review_state != ReviewState::Accepted) {
            throw Error(ErrorKind::InvalidArgument, "sample '" + s.id + "' has a split but is not accepted", {s.id});
        }
    }
}

std::string to_jsonl(const Catalog& catalog, const fs::path& base_dir) {
    std::string out;
    for (const auto& s : catalog.samples) {
        ordered_json j;
        j["id"] = s.id;
        j["rgb_path"] = relative_to(s.rgb_path, base_dir);
        j["dem_path"] = relative_to(s.dem_path, base_dir);
        j["annotation"] = s.annotation;
        j["terrain"] = s.terrain ? json(std::string(terrain::to_string(*s.terrain))) : json(nullptr);
        j["resolution_tier"] = std::string(terrain::to_string(s.resolution_tier));
        j["review_state"] = std::string(to_string(s.review_state));
        j["split"] = s.split ? json(std::string(to_string(*s.split))) : json(nullptr);
        j["alignment_score"] = s.alignment_score ? json(*s.alignment_score) : json(nullptr);
        out += j.dump();
        out += '\n';
    }
    return out;
}

Catalog parse_jsonl(std::string_view text, const fs::path& base_dir) {
    Catalog c;
    std::size_t line_no = 0;
    for (const auto line : split_lines(text)) {
        ++line_no;
        try {
            const auto j = json::parse(line);
            SampleRecord s;
            s.id = j.at("id").get<std::string>();
            s.rgb_path = resolve_against(j.at("rgb_path").get<std::string>(), base_dir);
            s.dem_path = resolve_against(j.at("dem_path").get<std::string>(), base_dir);
            s.annotation = j.value("annotation", std::string{});
            if (j.contains("terrain") && !j["terrain"].is_null()) {
                s.terrain = terrain::parse_terrain_class(j["terrain"].get<std::string>());
            }
            s.resolution_tier = terrain::parse_resolution_tier(j.at("resolution_tier").get<std::string>());
            s.review_state = parse_review_state(j.value("review_state", std::string("pending")));
            if (j.contains("split") && !j["split"].is_null()) s.split = parse_split(j["split"].get<std::string>());
            if (j.contains("alignment_score") && !j["alignment_score"].is_null()) {
                s.alignment_score = j["alignment_score"].get<double>();
            }
            c.samples.push_back(std::move(s));
        } catch (const json::exception& e) {
            throw Error(ErrorKind::InvalidArgument, "manifest line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    c.validate();
    return c;
}

Catalog load_manifest(const fs::path& path) {
    return parse_jsonl(read_file(path), absolute_normal(path).parent_path());
}

void save_manifest(const Catalog& catalog, const fs::path& path) {
    catalog.validate();
    write_file_atomic(path, to_jsonl(catalog, absolute_normal(path).parent_path()));
}

std::map<std::string, std::string> load_annotations(const fs::path& path) {
    std::map<std::string, std::string> out;
    const std::string text = read_file(path);
    for (const auto line : split_lines(text)) {
        try {
            const auto j = json::parse(line);
            const auto id = j.at("id").get<std::string>();
            if (!out.emplace(id, j.at("text").get<std::string>()).second) {
                throw Error(ErrorKind::DuplicateId, "annotation id '" + id + "' repeated", {id});
            }
        } catch (const json::exception& e) {
            throw Error(ErrorKind::InvalidArgument, "annotations file: " + std::string(e.what()));
        }
    }
    return out;
}

ManifestBuild build_manifest(const fs::path& rgb_dir, const fs::path& dem_dir,
                             const std::optional<fs::path>& annotations_file) {
    const auto rgb = tiles_by_stem(rgb_dir);
    const auto dem = tiles_by_stem(dem_dir);
    const auto annotations = annotations_file ? load_annotations(*annotations_file) : std::map<std::string, std::string>{};

    ManifestBuild out;
    for (const auto& [stem, path] : rgb) {
        const auto it = dem.find(stem);
        if (it == dem.end()) {
            out.unmatched.push_back(path);
            continue;
        }
        const auto grid = raster::load_tile(it->second);
        const auto [dx, dy] = terrain::pixel_size_metres(grid);
        SampleRecord s;
        s.id = stem;
        s.rgb_path = path;
        s.dem_path = it->second;
        if (const auto a = annotations.find(stem); a != annotations.end()) s.annotation = a->second;
        s.resolution_tier = terrain::nearest_tier(std::sqrt(std::abs(dx * dy)));
        out.catalog.samples.push_back(std::move(s));
    }
    for (const auto& [stem, path] : dem) {
        if (!rgb.contains(stem)) out.unmatched.push_back(path);
    }
    std::sort(out.unmatched.begin(), out.unmatched.end());
    if (out.catalog.samples.empty()) throw Error(ErrorKind::NoPairsFound, "no RGB/DEM stems match");
    return out;
}

bool VerdictRecord::same_decision(const VerdictRecord& other) const {
    return sample_id == other.sample_id && verdict == other.verdict && reason == other.reason &&
           reviewer == other.reviewer;
}

std::string to_json_line(const VerdictRecord& v) {
    ordered_json j;
    j["sample_id"] = v.sample_id;
    j["verdict"] = std::string(to_string(v.verdict));
    j["reason"] = v.reason ? json(*v.reason) : json(nullptr);
    j["reviewer"] = v.reviewer;
    j["timestamp"] = v.timestamp;
    return j.dump();
}

VerdictRecord parse_verdict_record(std::string_view line) {
    try {
        const auto j = json::parse(line);
        VerdictRecord v;
        v.sample_id = j.at("sample_id").get<std::string>();
        v.verdict = parse_verdict(j.at("verdict").get<std::string>());
        if (j.contains("reason") && !j["reason"].is_null()) v.reason = j["reason"].get<std::string>();
        v.reviewer = j.value("reviewer", std::string{});
        v.timestamp = j.value("timestamp", std::string{});
        if (v.sample_id.empty()) throw Error(ErrorKind::MalformedVerdict, "empty sample_id");
        return v;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::MalformedVerdict, e.what());
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::MalformedVerdict) throw;
        throw Error(ErrorKind::MalformedVerdict, e.what());
    }
}

ReviewState state_after(Verdict v) {
    switch (v) {
        case Verdict::Accept: return ReviewState::Accepted;
        case Verdict::Reject: return ReviewState::Rejected;
        case Verdict::Flag: return ReviewState::Flagged;
    }
    return ReviewState::Pending;
}

Catalog apply_verdicts(const Catalog& catalog, std::span<const VerdictRecord> verdicts) {
    Catalog out = catalog;
    std::map<std::string_view, std::size_t> index;
    for (std::size_t i = 0; i < out.samples.size(); ++i) index.emplace(out.samples[i].id, i);
    for (const auto& v : verdicts) {
        const auto it = index.find(v.sample_id);
        if (it == index.end()) throw Error(ErrorKind::SampleNotFound, "no sample '" + v.sample_id + "'", {v.sample_id});
        auto& s = out.samples[it->second];
        s.review_state = state_after(v.verdict);
        if (s.review_state != ReviewState::Accepted) s.split.reset();
    }
    return out;
}

std::vector<std::size_t> apportion(std::size_t n, std::span<const double> weights) {
    double total = 0.0;
    for (const double w : weights) total += w;
    std::vector<std::size_t> counts(weights.size(), 0);
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const double exact = static_cast<double>(n) * weights[i] / total;
        counts[i] = static_cast<std::size_t>(std::floor(exact));
        assigned += counts[i];
        remainders.emplace_back(exact - std::floor(exact), i);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++counts[remainders[k % remainders.size()].second];
    return counts;
}

std::map<std::string, Split> make_splits(const Catalog& catalog, const SplitRatios& ratios, std::uint64_t seed,
                                         bool stratify) {
    const std::array<double, 3> weights = {ratios.train, ratios.val, ratios.test};
    for (const double w : weights) {
        if (!(w >= 0.0)) throw Error(ErrorKind::InvalidArgument, "split ratios must be non-negative");
    }
    if (std::abs(weights[0] + weights[1] + weights[2] - 1.0) > 1e-9) {
        throw Error(ErrorKind::InvalidArgument, "split ratios must sum to 1");
    }

    std::map<std::string, std::vector<std::string>> strata;
    for (const auto& s : catalog.samples) {
        if (s.review_state != ReviewState::Accepted) continue;
        std::string key;
        if (stratify) {
            if (!s.terrain) throw Error(ErrorKind::InvalidArgument, "sample '" + s.id + "' is not classified", {s.id});
            key = std::to_string(static_cast<int>(*s.terrain));
        }
        strata[key].push_back(s.id);
    }
    if (strata.empty()) throw Error(ErrorKind::EmptyCatalog, "no accepted samples to split");

    Rng rng(seed);
    std::map<std::string, Split> out;
    for (auto& [key, ids] : strata) {
        if (stratify && ids.size() < 3) {
            throw Error(ErrorKind::InsufficientStratum,
                        "terrain stratum '" +
                            std::string(terrain::to_string(static_cast<terrain::TerrainClass>(std::stoi(key)))) +
                            "' has " + std::to_string(ids.size()) + " samples",
                        ids);
        }
        std::sort(ids.begin(), ids.end());
        rng.shuffle(ids);
        const auto counts = apportion(ids.size(), weights);
        std::size_t pos = 0;
        for (std::size_t k = 0; k < counts.size(); ++k) {
            for (std::size_t i = 0; i < counts[k]; ++i) out[ids[pos++]] = static_cast<Split>(k);
        }
    }
    return out;
}

Catalog assign_splits(const Catalog& catalog, const std::map<std::string, Split>& assignment) {
    Catalog out = catalog;
    for (auto& s : out.samples) {
        const auto it = assignment.find(s.id);
        if (it != assignment.end() && s.review_state == ReviewState::Accepted) {
            s.split = it->second;
        } else {
            s.split.reset();
        }
    }
    return out;
}

BalancedSubset balanced_subset(const Catalog& catalog, std::size_t per_class, std::size_t holdout,
                               std::uint64_t seed) {
    const std::size_t classes = terrain::kAllClasses.size();
    if (holdout > per_class * classes) {
        throw Error(ErrorKind::InvalidArgument, "holdout exceeds the number of drawn samples");
    }
    std::array<std::vector<std::string>, 6> by_class;
    for (const auto& s : catalog.samples) {
        if (s.review_state != ReviewState::Accepted || !s.terrain) continue;
        by_class[static_cast<std::size_t>(*s.terrain)].push_back(s.id);
    }
    for (std::size_t c = 0; c < classes; ++c) {
        if (by_class[c].size() < per_class) {
            throw Error(ErrorKind::InsufficientClassSamples,
                        std::string(terrain::to_string(terrain::kAllClasses[c])) + " has " +
                            std::to_string(by_class[c].size()) + " samples, need " + std::to_string(per_class));
        }
    }
    const std::vector<double> even(classes, 1.0);
    const auto eval_counts = apportion(holdout, even);

    Rng rng(seed);
    BalancedSubset out;
    for (std::size_t c = 0; c < classes; ++c) {
        auto& ids = by_class[c];
        std::sort(ids.begin(), ids.end());
        rng.shuffle(ids);
        for (std::size_t i = 0; i < per_class; ++i) (i < eval_counts[c] ? out.eval : out.train).push_back(ids[i]);
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.eval.begin(), out.eval.end());
    return out;
}

}  // namespace rsbench::catalog
