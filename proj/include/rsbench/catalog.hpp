#pragma once

#include "rsbench/terrain.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rsbench::catalog {

enum class ReviewState { Pending, Accepted, Rejected, Flagged };
enum class Split { Train, Val, Test };

std::string_view to_string(ReviewState s);
ReviewState parse_review_state(std::string_view s);
std::string_view to_string(Split s);
Split parse_split(std::string_view s);

/// One RGB-DEM-annotation triple. `terrain` is empty until classification and
/// `alignment_score` until alignment.
struct SampleRecord {
    std::string id;
    std::filesystem::path rgb_path;
    std::filesystem::path dem_path;
    std::string annotation;
    std::optional<terrain::TerrainClass> terrain;
    terrain::ResolutionTier resolution_tier = terrain::ResolutionTier::M30;
    ReviewState review_state = ReviewState::Pending;
    std::optional<Split> split;
    std::optional<double> alignment_score;

    bool operator==(const SampleRecord&) const = default;
};

/// Immutable-by-convention list of samples; stages produce new catalogs.
struct Catalog {
    std::vector<SampleRecord> samples;

    const SampleRecord* find(std::string_view id) const;
    std::size_t size() const { return samples.size(); }
    /// Throws DuplicateId, or InvalidArgument when a split is set on a sample
    /// that is not accepted.
    void validate() const;
};

/// JSON-Lines manifest. Paths are written relative to `base_dir` and resolved
/// against it on parse, so a manifest can be moved together with its tiles.
std::string to_jsonl(const Catalog& catalog, const std::filesystem::path& base_dir);
Catalog parse_jsonl(std::string_view text, const std::filesystem::path& base_dir);

Catalog load_manifest(const std::filesystem::path& path);
/// Atomic write (temporary file + rename).
void save_manifest(const Catalog& catalog, const std::filesystem::path& path);

struct ManifestBuild {
    Catalog catalog;
    std::vector<std::filesystem::path> unmatched;  // files without a partner, sorted
};

/// Pairs tiles by filename stem (.rst/.tif/.tiff). The resolution tier comes
/// from the DEM pixel size. Annotations are JSONL {id, text}; ids without an
/// annotation get an empty one. Throws NoPairsFound, DuplicateId.
ManifestBuild build_manifest(const std::filesystem::path& rgb_dir, const std::filesystem::path& dem_dir,
                             const std::optional<std::filesystem::path>& annotations_file);

std::map<std::string, std::string> load_annotations(const std::filesystem::path& path);

enum class Verdict { Accept, Reject, Flag };

std::string_view to_string(Verdict v);
Verdict parse_verdict(std::string_view s);

/// Human review decision; the log of these is append-only.
struct VerdictRecord {
    std::string sample_id;
    Verdict verdict = Verdict::Accept;
    std::optional<std::string> reason;
    std::string reviewer;
    std::string timestamp;  // UTC ISO-8601

    /// Same decision, ignoring the timestamp.
    bool same_decision(const VerdictRecord& other) const;
    bool operator==(const VerdictRecord&) const = default;
};

std::string to_json_line(const VerdictRecord& v);
/// Throws MalformedVerdict.
VerdictRecord parse_verdict_record(std::string_view line);

ReviewState state_after(Verdict v);

/// Folds verdicts over the catalog in log order (latest wins). A sample that
/// leaves the accepted state loses its split. Throws SampleNotFound.
Catalog apply_verdicts(const Catalog& catalog, std::span<const VerdictRecord> verdicts);

struct SplitRatios {
    double train = 0.8;
    double val = 0.1;
    double test = 0.1;
};

/// Integer counts summing to n, proportional to `weights` by largest remainder
/// (ties go to the lower index).
std::vector<std::size_t> apportion(std::size_t n, std::span<const double> weights);

/// Split assignment over the accepted samples: ids sorted, shuffled with the
/// seed, then cut by apportioned counts, per terrain stratum when `stratify`.
/// Throws EmptyCatalog, InvalidArgument (ratios), InsufficientStratum.
std::map<std::string, Split> make_splits(const Catalog& catalog, const SplitRatios& ratios, std::uint64_t seed,
                                         bool stratify);

/// Writes the assignment into a copy of the catalog; samples absent from it lose their split.
Catalog assign_splits(const Catalog& catalog, const std::map<std::string, Split>& assignment);

struct BalancedSubset {
    std::vector<std::string> train;
    std::vector<std::string> eval;
};

/// Draws `per_class` accepted samples from each of the six terrain classes and
/// moves `holdout` of them, spread evenly over the classes, to the eval set.
/// Throws InsufficientClassSamples, InvalidArgument (holdout > 6 * per_class).
BalancedSubset balanced_subset(const Catalog& catalog, std::size_t per_class, std::size_t holdout,
                               std::uint64_t seed);

}  // namespace rsbench::catalog
