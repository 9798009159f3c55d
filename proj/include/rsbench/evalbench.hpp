#pragma once

#include "rsbench/catalog.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rsbench::evalbench {

/// Prediction d and ground truth a over the same pixels; `valid` defines the
/// evaluated set M.
struct DepthPair {
    std::vector<double> pred;
    std::vector<double> gt;
    std::vector<std::uint8_t> valid;

    /// Throws DimensionMismatch when the three arrays differ in length. An
    /// empty `valid` means every pixel is valid.
    DepthPair(std::vector<double> pred, std::vector<double> gt, std::vector<std::uint8_t> valid = {});

    std::size_t valid_count() const;
};

/// Maps the ground truth to [0, 255] by its valid min/max, applies the same
/// map to the prediction, fits the prediction to the ground truth by
/// least-squares scale and shift, and clamps it to [0, 255]. Non-finite values
/// leave the mask. Throws DegenerateGroundTruth (fewer than 2 valid pixels or
/// constant ground truth).
DepthPair normalize_for_eval(std::span<const double> pred, std::span<const double> gt,
                             std::span<const std::uint8_t> valid = {});

/// Adds `offset` to both pred and gt so that ratios are defined.
DepthPair with_offset(const DepthPair& pair, double offset);

/// Percentage of valid pixels with max(d/a, a/d) < 1.25^k. Throws
/// NonPositiveDepth, EmptyMask, InvalidArgument (k outside 1..3).
double delta_accuracy(const DepthPair& pair, int k);
/// Throws EmptyMask.
double rmse(const DepthPair& pair);
double mae(const DepthPair& pair);

struct Metrics {
    double mae = 0.0;
    double rmse = 0.0;
    std::array<double, 3> delta{};  // delta^1, delta^2, delta^3 in percent
};

/// All five metrics on a normalized pair, with the ratio offset applied for δ.
Metrics evaluate_pair(const DepthPair& normalized, double offset = 1.0);

struct ReportRow {
    std::string subset;  // "all", "D1", "D2" or a terrain class name
    std::size_t samples = 0;
    Metrics metrics;
};

struct SkippedSample {
    std::string id;
    std::string reason;
};

struct MetricsReport {
    std::string model;
    std::vector<ReportRow> rows;
    std::vector<SkippedSample> skipped;

    std::string to_json() const;
    /// Aligned text table with columns MAE, RMSE, δ, δ², δ³.
    std::string to_table() const;
};

struct EvalConfig {
    std::string model = "model";
    std::optional<catalog::Split> split = catalog::Split::Test;  // nullopt = every sample
    double offset = 1.0;
    std::size_t jobs = 0;
};

/// Scores predictions `<pred_dir>/<id>.rst` against each selected sample's
/// DEM. Rows are unweighted means of per-sample metrics; empty subsets are
/// omitted. Samples with a degenerate (constant) ground truth are listed in
/// `skipped`. Throws MissingPrediction with the offending ids, EmptyCatalog.
MetricsReport evaluate_run(const std::filesystem::path& pred_dir, const catalog::Catalog& catalog,
                           const EvalConfig& config = {});

}  // namespace rsbench::evalbench
