#include "rsbench/annotation.hpp"
#include "rsbench/diffusion.hpp"
#include "rsbench/error.hpp"
#include "rsbench/io.hpp"
#include "rsbench/parallel.hpp"
#include "rsbench/pipeline.hpp"
#include "rsbench/review.hpp"

#include <algorithm>
#include <mutex>

namespace rsbench::pipeline {

namespace {

namespace fs = std::filesystem;
using catalog::Catalog;
using nlohmann::ordered_json;

Summary summary_for(const std::string& command) {
    Summary s;
    s["command"] = command;
    s["status"] = "ok";
    return s;
}

Catalog load_input(const PipelineConfig& cfg) {
    if (cfg.manifest.empty()) throw Error(ErrorKind::ConfigError, "--manifest is required");
    return catalog::load_manifest(cfg.manifest);
}

fs::path prepare_out(const PipelineConfig& cfg) {
    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);
    if (ec) throw Error(ErrorKind::IoFailure, "cannot create " + cfg.out_dir.string() + ": " + ec.message());
    return cfg.out_dir;
}

fs::path write_stage_manifest(const Catalog& c, const PipelineConfig& cfg, const std::string& stage) {
    const auto path = stage_manifest(cfg.out_dir, stage);
    catalog::save_manifest(c, path);
    return path;
}

bool is_alignment_failure(ErrorKind k) {
    return k == ErrorKind::InsufficientOverlap || k == ErrorKind::CrsMismatch || k == ErrorKind::OutOfDomain ||
           k == ErrorKind::AllPixelsFlagged || k == ErrorKind::DegenerateInput || k == ErrorKind::BandMismatch;
}

align::OutlierMask nodata_mask(const raster::GeoGrid& dem) {
    align::OutlierMask mask{dem.width(), dem.height(), std::vector<std::uint8_t>(dem.pixel_count(), 0)};
    const auto z = dem.f32();
    for (std::size_t i = 0; i < z.size(); ++i) mask.flags[i] = dem.is_nodata(z[i]) ? 1 : 0;
    return mask;
}

}  // namespace

fs::path stage_manifest(const fs::path& out_dir, const std::string& stage) {
    return out_dir / ("manifest." + stage + ".jsonl");
}

Summary run_ingest(const PipelineConfig& cfg) {
    if (cfg.rgb_dir.empty() || cfg.dem_dir.empty()) throw Error(ErrorKind::ConfigError, "--rgb-dir and --dem-dir are required");
    prepare_out(cfg);
    const auto built = catalog::build_manifest(cfg.rgb_dir, cfg.dem_dir, cfg.annotations);
    std::size_t invalid = 0;
    for (const auto& s : built.catalog.samples) invalid += catalog::validate_annotation(s.annotation).valid ? 0 : 1;
    auto out = summary_for("ingest");
    out["samples"] = built.catalog.size();
    out["invalid_annotations"] = invalid;
    out["unmatched"] = ordered_json::array();
    for (const auto& p : built.unmatched) out["unmatched"].push_back(p.filename().string());
    out["manifest"] = write_stage_manifest(built.catalog, cfg, "ingest").string();
    return out;
}

Summary run_align(const PipelineConfig& cfg) {
    auto c = load_input(cfg);
    const auto out_dir = prepare_out(cfg);
    fs::create_directories(out_dir / "aligned" / "rgb");
    fs::create_directories(out_dir / "aligned" / "dem");

    std::vector<std::string> failure(c.size());
    std::vector<std::size_t> repaired(c.size(), 0);
    parallel_for(c.size(), resolve_jobs(cfg.jobs), [&](std::size_t i) {
        auto& s = c.samples[i];
        try {
            const auto rgb = raster::resize_canonical(raster::load_tile(s.rgb_path));
            if (rgb.is_dem()) throw Error(ErrorKind::BandMismatch, "RGB tile has one band");
            const auto dem = raster::load_tile(s.dem_path);
            if (!dem.is_dem()) throw Error(ErrorKind::BandMismatch, "DEM tile has three bands");
            // Spikes and voids are removed on the native grid, where they are
            // still isolated; resampling would smear them over several pixels.
            const auto mask = align::detect_outliers(dem, cfg.outliers);
            repaired[i] = mask.flagged_count();
            const auto warped = align::warp_to_grid(align::repair_voids(dem, mask), raster::GridSpec::of(rgb));
            const auto fixed = align::repair_voids(warped, nodata_mask(warped));
            const auto rgb_path = out_dir / "aligned" / "rgb" / (s.id + ".rst");
            const auto dem_path = out_dir / "aligned" / "dem" / (s.id + ".rst");
            raster::save_tile(rgb, rgb_path);
            raster::save_tile(fixed, dem_path);
            s.rgb_path = rgb_path;
            s.dem_path = dem_path;
            s.alignment_score = align::alignment_score(rgb, fixed).score;
        } catch (const Error& e) {
            if (!is_alignment_failure(e.kind())) throw;
            failure[i] = e.what();
            s.review_state = catalog::ReviewState::Flagged;
            s.split.reset();
        }
    });

    auto out = summary_for("align");
    out["samples"] = c.size();
    std::size_t pixels = 0;
    for (const auto r : repaired) pixels += r;
    out["repaired_pixels"] = pixels;
    out["failures"] = ordered_json::array();
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (!failure[i].empty()) out["failures"].push_back({{"id", c.samples[i].id}, {"error", failure[i]}});
    }
    out["manifest"] = write_stage_manifest(c, cfg, "align").string();
    return out;
}

Summary run_enhance(const PipelineConfig& cfg) {
    cfg.stretch.validate();
    auto c = load_input(cfg);
    const auto dir = prepare_out(cfg) / "enhanced";
    fs::create_directories(dir);
    std::vector<int> degenerate(c.size(), 0);
    parallel_for(c.size(), resolve_jobs(cfg.jobs), [&](std::size_t i) {
        auto& s = c.samples[i];
        const auto result = enhance::enhance_rgb(raster::load_tile(s.rgb_path), cfg.stretch);
        degenerate[i] = static_cast<int>(std::count(result.degenerate.begin(), result.degenerate.end(), true));
        const auto path = dir / (s.id + ".rst");
        raster::save_tile(result.grid, path);
        s.rgb_path = path;
    });
    auto out = summary_for("enhance");
    out["samples"] = c.size();
    out["stretch"] = {{"low", cfg.stretch.p_low}, {"high", cfg.stretch.p_high}};
    out["degenerate_channels"] = ordered_json::array();
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (degenerate[i] > 0) out["degenerate_channels"].push_back({{"id", c.samples[i].id}, {"channels", degenerate[i]}});
    }
    out["manifest"] = write_stage_manifest(c, cfg, "enhance").string();
    return out;
}

Summary run_classify(const PipelineConfig& cfg) {
    auto c = load_input(cfg);
    prepare_out(cfg);
    parallel_for(c.size(), resolve_jobs(cfg.jobs), [&](std::size_t i) {
        auto& s = c.samples[i];
        s.terrain = terrain::classify_terrain(raster::load_tile(s.dem_path), s.annotation, cfg.thresholds);
    });
    auto out = summary_for("classify");
    out["samples"] = c.size();
    out["classes"] = ordered_json::object();
    for (const auto t : terrain::kAllClasses) {
        out["classes"][std::string(terrain::to_string(t))] =
            std::count_if(c.samples.begin(), c.samples.end(), [t](const auto& s) { return s.terrain == t; });
    }
    out["manifest"] = write_stage_manifest(c, cfg, "classify").string();
    return out;
}

Summary run_stats(const PipelineConfig& cfg) {
    const auto c = load_input(cfg);
    const auto dir = prepare_out(cfg);
    for (const auto& s : c.samples) {
        if (!s.terrain) throw Error(ErrorKind::InvalidArgument, "sample '" + s.id + "' is not classified", {s.id});
    }
    std::vector<terrain::StatsAccumulator> parts(c.size());
    parallel_for(c.size(), resolve_jobs(cfg.jobs), [&](std::size_t i) {
        const auto& s = c.samples[i];
        const auto dem = raster::load_tile(s.dem_path);
        parts[i].add({*s.terrain, s.resolution_tier, dem.f32(), dem.nodata()});
    });
    terrain::StatsAccumulator total;
    for (const auto& p : parts) total.merge(p);
    const auto stats = terrain::finalize_stats(total);

    write_file_atomic(dir / "stats.json", terrain::stats_to_json(stats) + "\n");
    write_file_atomic(dir / "proportions.csv", terrain::proportions_csv(stats));
    write_file_atomic(dir / "elevation_histogram.csv", terrain::elevation_histogram_csv(stats));
    write_file_atomic(dir / "pixel_counts.csv", terrain::pixel_count_csv(stats));

    auto out = summary_for("stats");
    out["tile_count"] = stats.tile_count;
    out["class_proportions"] = ordered_json::object();
    for (const auto t : terrain::kAllClasses) {
        out["class_proportions"][std::string(terrain::to_string(t))] = stats.class_proportions.at(t);
    }
    out["outputs"] = {(dir / "stats.json").string(), (dir / "proportions.csv").string(),
                      (dir / "elevation_histogram.csv").string(), (dir / "pixel_counts.csv").string()};
    return out;
}

Summary run_split(const PipelineConfig& cfg) {
    auto c = load_input(cfg);
    prepare_out(cfg);
    std::size_t folded = 0;
    if (cfg.verdicts) {
        const auto records = review::VerdictLog::replay(*cfg.verdicts);
        folded = records.size();
        c = catalog::apply_verdicts(c, records);
    }
    const auto assignment = catalog::make_splits(c, cfg.ratios, cfg.seed, cfg.stratify);
    c = catalog::assign_splits(c, assignment);

    auto out = summary_for("split");
    out["verdicts_folded"] = folded;
    out["seed"] = cfg.seed;
    out["stratified"] = cfg.stratify;
    std::array<std::size_t, 3> counts{};
    for (const auto& [id, split] : assignment) ++counts[static_cast<std::size_t>(split)];
    out["counts"] = {{"train", counts[0]}, {"val", counts[1]}, {"test", counts[2]}};
    out["manifest"] = write_stage_manifest(c, cfg, "split").string();
    return out;
}

Summary run_eval(const PipelineConfig& cfg) {
    const auto c = load_input(cfg);
    if (cfg.pred_dir.empty()) throw Error(ErrorKind::ConfigError, "--pred-dir is required");
    const auto dir = prepare_out(cfg);
    auto eval_cfg = cfg.eval;
    eval_cfg.jobs = cfg.jobs;
    const auto report = evalbench::evaluate_run(cfg.pred_dir, c, eval_cfg);
    write_file_atomic(dir / "metrics.json", report.to_json() + "\n");
    write_file_atomic(dir / "metrics.txt", report.to_table());

    auto out = summary_for("eval");
    out["report"] = ordered_json::parse(report.to_json());
    out["outputs"] = {(dir / "metrics.json").string(), (dir / "metrics.txt").string()};
    return out;
}

Summary run_diffuse_verify(const PipelineConfig& cfg) {
    const auto dir = prepare_out(cfg);
    diffusion::VerificationConfig vc;
    vc.seed = cfg.seed;
    vc.steps = cfg.steps;
    vc.beta_start = cfg.beta_start;
    vc.beta_end = cfg.beta_end;
    vc.variance_draws = cfg.verify_variance_draws;
    vc.moment_samples = cfg.verify_moment_samples;
    const auto report = diffusion::run_verification(vc);
    write_file_atomic(dir / "diffusion_verification.json", report.to_json() + "\n");

    auto out = summary_for("diffuse-verify");
    if (!report.passed()) out["status"] = "failed";
    out["report"] = ordered_json::parse(report.to_json());
    out["outputs"] = {(dir / "diffusion_verification.json").string()};
    return out;
}

Summary run_synth(const PipelineConfig& cfg) {
    write_synthetic_dataset(cfg.out_dir, {cfg.synth_count, cfg.synth_size, cfg.seed});
    auto out = summary_for("synth");
    out["samples"] = cfg.synth_count;
    out["outputs"] = {(cfg.out_dir / "rgb").string(), (cfg.out_dir / "dem").string(),
                      (cfg.out_dir / "annotations.jsonl").string()};
    return out;
}

}  // namespace rsbench::pipeline
