#include "rsbench/catalog.hpp"
#include "rsbench/error.hpp"
#include "rsbench/pipeline.hpp"
#include "rsbench/review.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <csignal>
#include <iostream>
#include <optional>
#include <pthread.h>

namespace {

namespace fs = std::filesystem;
using rsbench::Error;
using rsbench::ErrorKind;
using rsbench::pipeline::PipelineConfig;
using rsbench::pipeline::Summary;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

// Flag values; unset options leave the config file (or default) in place.
struct Flags {
    std::optional<std::string> config;
    std::optional<std::size_t> jobs;
    std::optional<std::uint64_t> seed;
    bool json = false;
    bool verbose = false;

    std::optional<std::string> rgb_dir, dem_dir, annotations, manifest, out_dir, pred_dir, verdicts;
    std::optional<double> stretch_low, stretch_high;
    std::optional<int> outlier_window;
    std::optional<double> outlier_z;
    std::optional<double> train, val, test;
    bool stratify = false;
    std::optional<std::string> model, eval_split;
    std::optional<int> steps;
    std::optional<int> variance_draws, moment_samples;
    std::optional<int> synth_count, synth_size;

    std::string addr = "127.0.0.1:8080";
    std::optional<std::string> static_dir, snapshot;
    int snapshot_interval = 30;
};

template <typename T, typename U>
void apply(const std::optional<T>& flag, U& target) {
    if (flag) target = *flag;
}

PipelineConfig resolve_config(const Flags& f) {
    PipelineConfig cfg;
    if (f.config) cfg = rsbench::pipeline::load_config(*f.config);
    apply(f.rgb_dir, cfg.rgb_dir);
    apply(f.dem_dir, cfg.dem_dir);
    if (f.annotations) cfg.annotations = fs::path(*f.annotations);
    apply(f.manifest, cfg.manifest);
    apply(f.out_dir, cfg.out_dir);
    apply(f.pred_dir, cfg.pred_dir);
    if (f.verdicts) cfg.verdicts = fs::path(*f.verdicts);
    apply(f.stretch_low, cfg.stretch.p_low);
    apply(f.stretch_high, cfg.stretch.p_high);
    apply(f.outlier_window, cfg.outliers.window);
    apply(f.outlier_z, cfg.outliers.z_threshold);
    apply(f.train, cfg.ratios.train);
    apply(f.val, cfg.ratios.val);
    apply(f.test, cfg.ratios.test);
    if (f.stratify) cfg.stratify = true;
    apply(f.model, cfg.eval.model);
    if (f.eval_split) {
        cfg.eval.split = *f.eval_split == "all" ? std::nullopt
                                                : std::optional(rsbench::catalog::parse_split(*f.eval_split));
    }
    apply(f.steps, cfg.steps);
    apply(f.variance_draws, cfg.verify_variance_draws);
    apply(f.moment_samples, cfg.verify_moment_samples);
    apply(f.synth_count, cfg.synth_count);
    apply(f.synth_size, cfg.synth_size);
    apply(f.seed, cfg.seed);
    apply(f.jobs, cfg.jobs);
    return cfg;
}

std::pair<std::string, int> parse_addr(const std::string& addr) {
    const auto colon = addr.rfind(':');
    if (colon == std::string::npos) throw Error(ErrorKind::ConfigError, "--addr must be host:port");
    try {
        return {addr.substr(0, colon), std::stoi(addr.substr(colon + 1))};
    } catch (const std::exception&) {
        throw Error(ErrorKind::ConfigError, "--addr port must be a number");
    }
}

Summary run_serve(const PipelineConfig& cfg, const Flags& f) {
    if (cfg.manifest.empty()) throw Error(ErrorKind::ConfigError, "--manifest is required");
    auto log = cfg.verdicts.value_or(fs::path(cfg.manifest.string() + ".verdicts.jsonl"));
    rsbench::review::ServerOptions options;
    std::tie(options.host, options.port) = parse_addr(f.addr);
    if (f.static_dir) options.static_dir = fs::path(*f.static_dir);
    options.snapshot_path = f.snapshot ? fs::path(*f.snapshot) : cfg.manifest.parent_path() / "manifest.reviewed.jsonl";
    options.snapshot_interval_s = std::max(1, f.snapshot_interval);

    // Route SIGINT/SIGTERM to sigwait below instead of the worker threads.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    rsbench::review::ReviewService service(rsbench::catalog::load_manifest(cfg.manifest), log);
    rsbench::review::HttpServer server(service, options);
    const int port = server.start();
    std::cerr << "serving " << cfg.manifest.string() << " on http://" << options.host << ':' << port << '\n';
    int received = 0;
    sigwait(&signals, &received);
    server.stop();

    Summary out;
    out["command"] = "serve";
    out["status"] = "ok";
    out["verdict_log"] = log.string();
    out["snapshot"] = options.snapshot_path->string();
    return out;
}

void print_human(const Summary& s) {
    for (const auto& [key, value] : s.items()) {
        if (key == "command" || key == "status") continue;
        std::cout << key << ": " << (value.is_string() ? value.get<std::string>() : value.dump()) << '\n';
    }
    if (s.value("status", "") != "ok") std::cout << "status: " << s.value("status", "") << '\n';
}

int emit_error(const std::string& command, ErrorKind kind, const std::string& message,
               const std::vector<std::string>& ids, int code, bool json) {
    if (json) {
        nlohmann::ordered_json j;
        j["command"] = command;
        j["status"] = "error";
        j["exit_code"] = code;
        j["error"] = {{"kind", std::string(rsbench::to_string(kind))}, {"message", message}, {"ids", ids}};
        std::cout << j.dump(2, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
    } else {
        std::cerr << (command == "rsbench" ? command : "rsbench " + command) << ": " << message << '\n';
    }
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    Flags f;
    CLI::App app{"Remote-sensing RGB-DEM benchmark toolkit"};
    app.set_version_flag("--version", "rsbench 1.0");
    app.require_subcommand(1);
    // Global flags may also follow the subcommand.
    app.fallthrough();
    app.add_option("--config", f.config, "key = value config file; flags override it");
    app.add_option("--jobs", f.jobs, "worker threads (0 = all cores)");
    app.add_option("--seed", f.seed, "random seed");
    app.add_flag("--json", f.json, "print a JSON summary on stdout");
    app.add_flag("--verbose", f.verbose, "progress and timing on stderr");

    auto* ingest = app.add_subcommand("ingest", "pair RGB and DEM tiles into a manifest");
    ingest->add_option("--rgb-dir", f.rgb_dir);
    ingest->add_option("--dem-dir", f.dem_dir);
    ingest->add_option("--annotations", f.annotations, "JSONL of {id, text}");
    ingest->add_option("--out", f.out_dir);

    auto* align = app.add_subcommand("align", "reproject, repair and score each pair");
    align->add_option("--manifest", f.manifest);
    align->add_option("--out", f.out_dir);
    align->add_option("--outlier-window", f.outlier_window);
    align->add_option("--outlier-z", f.outlier_z);

    auto* enhance = app.add_subcommand("enhance", "percentile stretch of RGB tiles");
    enhance->add_option("--manifest", f.manifest);
    enhance->add_option("--out", f.out_dir);
    enhance->add_option("--stretch-low", f.stretch_low, "low percentile (default 1)");
    enhance->add_option("--stretch-high", f.stretch_high, "high percentile (default 99)");

    auto* classify = app.add_subcommand("classify", "assign terrain classes");
    classify->add_option("--manifest", f.manifest);
    classify->add_option("--out", f.out_dir);

    auto* stats = app.add_subcommand("stats", "dataset statistics");
    stats->add_option("--manifest", f.manifest);
    stats->add_option("--out", f.out_dir);

    auto* split = app.add_subcommand("split", "train/val/test assignment");
    split->add_option("--manifest", f.manifest);
    split->add_option("--out", f.out_dir);
    split->add_option("--verdicts", f.verdicts, "verdict log to fold in first");
    split->add_option("--train", f.train);
    split->add_option("--val", f.val);
    split->add_option("--test", f.test);
    split->add_flag("--stratify", f.stratify, "stratify by terrain class");

    auto* eval = app.add_subcommand("eval", "score predictions against ground truth");
    eval->add_option("--manifest", f.manifest);
    eval->add_option("--pred-dir", f.pred_dir);
    eval->add_option("--out", f.out_dir);
    eval->add_option("--model", f.model);
    eval->add_option("--split", f.eval_split, "train, val, test or all");

    auto* verify = app.add_subcommand("diffuse-verify", "numerical verification of the diffusion kernels");
    verify->add_option("--out", f.out_dir);
    verify->add_option("--steps", f.steps);
    verify->add_option("--variance-draws", f.variance_draws);
    verify->add_option("--moment-samples", f.moment_samples);

    auto* serve = app.add_subcommand("serve", "review service over HTTP");
    serve->add_option("--manifest", f.manifest);
    serve->add_option("--addr", f.addr, "host:port");
    serve->add_option("--verdicts", f.verdicts, "verdict log (default <manifest>.verdicts.jsonl)");
    serve->add_option("--static-dir", f.static_dir, "directory served at /");
    serve->add_option("--snapshot", f.snapshot, "periodic manifest snapshot path");
    serve->add_option("--snapshot-interval", f.snapshot_interval, "seconds between snapshots");

    auto* synth = app.add_subcommand("synth", "write a synthetic dataset");
    synth->add_option("--out", f.out_dir);
    synth->add_option("--count", f.synth_count);
    synth->add_option("--size", f.synth_size);

    std::string command = "rsbench";
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        const bool json = std::find(argv + 1, argv + argc, std::string("--json")) != argv + argc;
        const auto kind = (dynamic_cast<const CLI::RequiredError*>(&e) || dynamic_cast<const CLI::ExtrasError*>(&e)) &&
                                  app.get_subcommands().empty()
                              ? ErrorKind::UnknownSubcommand
                              : ErrorKind::ConfigError;
        std::string message = e.what();
        if (kind == ErrorKind::UnknownSubcommand) {
            for (const auto& arg : app.remaining()) {
                if (arg.front() != '-') {
                    message = "unknown subcommand '" + arg + "'";
                    break;
                }
            }
        }
        return emit_error(command, kind, message, {}, kExitValidation, json);
    }
    command = app.get_subcommands().front()->get_name();

    try {
        const auto start = std::chrono::steady_clock::now();
        const auto cfg = resolve_config(f);
        Summary summary;
        if (command == "ingest") summary = rsbench::pipeline::run_ingest(cfg);
        else if (command == "align") summary = rsbench::pipeline::run_align(cfg);
        else if (command == "enhance") summary = rsbench::pipeline::run_enhance(cfg);
        else if (command == "classify") summary = rsbench::pipeline::run_classify(cfg);
        else if (command == "stats") summary = rsbench::pipeline::run_stats(cfg);
        else if (command == "split") summary = rsbench::pipeline::run_split(cfg);
        else if (command == "eval") summary = rsbench::pipeline::run_eval(cfg);
        else if (command == "diffuse-verify") summary = rsbench::pipeline::run_diffuse_verify(cfg);
        else if (command == "serve") summary = run_serve(cfg, f);
        else if (command == "synth") summary = rsbench::pipeline::run_synth(cfg);
        else throw Error(ErrorKind::UnknownSubcommand, command);

        const int code = summary.value("status", "ok") == "ok" ? kExitOk : kExitValidation;
        summary["exit_code"] = code;
        if (f.verbose) {
            const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
            std::cerr << "rsbench " << command << ": " << elapsed.count() << " s\n";
        }
        if (f.json) {
            std::cout << summary.dump(2, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
        } else {
            print_human(summary);
        }
        return code;
    } catch (const Error& e) {
        return emit_error(command, e.kind(), e.what(), e.ids(), e.is_io() ? kExitIo : kExitValidation, f.json);
    } catch (const fs::filesystem_error& e) {
        return emit_error(command, ErrorKind::IoFailure, e.what(), {}, kExitIo, f.json);
    } catch (const std::exception& e) {
        return emit_error(command, ErrorKind::InvalidArgument, e.what(), {}, kExitValidation, f.json);
    }
}
