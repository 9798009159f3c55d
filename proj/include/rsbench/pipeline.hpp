#pragma once

#include "rsbench/align.hpp"
#include "rsbench/catalog.hpp"
#include "rsbench/enhance.hpp"
#include "rsbench/evalbench.hpp"
#include "rsbench/terrain.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace rsbench::pipeline {

/// Settings for every stage. Populated from defaults, then a config file,
/// then command-line flags.
struct PipelineConfig {
    std::filesystem::path rgb_dir;
    std::filesystem::path dem_dir;
    std::optional<std::filesystem::path> annotations;
    std::filesystem::path manifest;
    std::filesystem::path out_dir = ".";
    std::filesystem::path pred_dir;
    std::optional<std::filesystem::path> verdicts;

    enhance::StretchConfig stretch;
    terrain::ClassifierThresholds thresholds;
    align::OutlierParams outliers;
    catalog::SplitRatios ratios;
    bool stratify = false;
    evalbench::EvalConfig eval;

    int steps = 1000;
    double beta_start = 1e-4;
    double beta_end = 0.02;
    int verify_variance_draws = 100000;
    int verify_moment_samples = 10000;

    int synth_count = 20;
    int synth_size = 128;

    std::uint64_t seed = 0;
    std::size_t jobs = 0;
};

/// Reads a key = value file with [section] headers and '#' comments, applying
/// recognised keys on top of `base`. Throws ConfigError for unknown keys,
/// malformed lines or bad values.
PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base = {});
PipelineConfig parse_config(const std::string& text, PipelineConfig base = {});

using Summary = nlohmann::ordered_json;

/// Pairs tiles into `<out>/manifest.ingest.jsonl`.
Summary run_ingest(const PipelineConfig& cfg);
/// Repairs DEM outliers and voids on the native grid, warps the DEM onto the
/// canonical 512x512 grid of its RGB tile, scores the alignment and writes
/// `<out>/aligned/`.
/// Samples that cannot be aligned are flagged for review.
Summary run_align(const PipelineConfig& cfg);
/// Percentile-stretches each RGB tile into `<out>/enhanced/`.
Summary run_enhance(const PipelineConfig& cfg);
Summary run_classify(const PipelineConfig& cfg);
/// stats.json plus the three CSV panels.
Summary run_stats(const PipelineConfig& cfg);
/// Folds the verdict log (if any), then assigns train/val/test.
Summary run_split(const PipelineConfig& cfg);
/// metrics.json and metrics.txt.
Summary run_eval(const PipelineConfig& cfg);
Summary run_diffuse_verify(const PipelineConfig& cfg);
/// Writes a synthetic dataset (rgb/, dem/, annotations.jsonl) to `out_dir`.
Summary run_synth(const PipelineConfig& cfg);

/// Manifest path a stage writes: `<out>/manifest.<stage>.jsonl`.
std::filesystem::path stage_manifest(const std::filesystem::path& out_dir, const std::string& stage);

struct SynthOptions {
    int count = 20;
    int size = 128;
    std::uint64_t seed = 0;
};

/// Fractal terrain tiles covering all six terrain classes. RGB tiles are
/// tinted hillshades of the same elevation field, on LV95 grids; every other
/// DEM is delivered on a WGS84 grid so alignment has to reproject it. Some
/// DEMs carry spikes and voids.
void write_synthetic_dataset(const std::filesystem::path& dir, const SynthOptions& options);

}  // namespace rsbench::pipeline
