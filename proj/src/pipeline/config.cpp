#include "rsbench/error.hpp"
#include "rsbench/io.hpp"
#include "rsbench/pipeline.hpp"

#include <charconv>
#include <functional>
#include <map>

namespace rsbench::pipeline {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::string unquote(const std::string& v) {
    if (v.size() >= 2 && ((v.front() == '"' && v.back() == '"') || (v.front() == '\'' && v.back() == '\''))) {
        return v.substr(1, v.size() - 2);
    }
    return v;
}

double to_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) throw Error(ErrorKind::ConfigError, key + ": expected a number");
    return out;
}

long long to_int(const std::string& key, const std::string& v) {
    long long out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) throw Error(ErrorKind::ConfigError, key + ": expected an integer");
    return out;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw Error(ErrorKind::ConfigError, key + ": expected true or false");
}

using Setter = std::function<void(PipelineConfig&, const std::string& key, const std::string& value)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"paths.rgb_dir", [](auto& c, auto&, auto& v) { c.rgb_dir = v; }},
        {"paths.dem_dir", [](auto& c, auto&, auto& v) { c.dem_dir = v; }},
        {"paths.annotations", [](auto& c, auto&, auto& v) { c.annotations = std::filesystem::path(v); }},
        {"paths.manifest", [](auto& c, auto&, auto& v) { c.manifest = v; }},
        {"paths.out_dir", [](auto& c, auto&, auto& v) { c.out_dir = v; }},
        {"paths.pred_dir", [](auto& c, auto&, auto& v) { c.pred_dir = v; }},
        {"paths.verdicts", [](auto& c, auto&, auto& v) { c.verdicts = std::filesystem::path(v); }},
        {"stretch.low", [](auto& c, auto& k, auto& v) { c.stretch.p_low = to_double(k, v); }},
        {"stretch.high", [](auto& c, auto& k, auto& v) { c.stretch.p_high = to_double(k, v); }},
        {"terrain.ocean_fraction", [](auto& c, auto& k, auto& v) { c.thresholds.ocean_fraction = to_double(k, v); }},
        {"terrain.sea_level", [](auto& c, auto& k, auto& v) { c.thresholds.sea_level = to_double(k, v); }},
        {"terrain.relief_high", [](auto& c, auto& k, auto& v) { c.thresholds.relief_high = to_double(k, v); }},
        {"terrain.relief_low", [](auto& c, auto& k, auto& v) { c.thresholds.relief_low = to_double(k, v); }},
        {"terrain.highland_mean", [](auto& c, auto& k, auto& v) { c.thresholds.highland_mean = to_double(k, v); }},
        {"terrain.relief_hill", [](auto& c, auto& k, auto& v) { c.thresholds.relief_hill = to_double(k, v); }},
        {"align.outlier_window", [](auto& c, auto& k, auto& v) { c.outliers.window = static_cast<int>(to_int(k, v)); }},
        {"align.outlier_z", [](auto& c, auto& k, auto& v) { c.outliers.z_threshold = to_double(k, v); }},
        {"split.train", [](auto& c, auto& k, auto& v) { c.ratios.train = to_double(k, v); }},
        {"split.val", [](auto& c, auto& k, auto& v) { c.ratios.val = to_double(k, v); }},
        {"split.test", [](auto& c, auto& k, auto& v) { c.ratios.test = to_double(k, v); }},
        {"split.stratify", [](auto& c, auto& k, auto& v) { c.stratify = to_bool(k, v); }},
        {"eval.model", [](auto& c, auto&, auto& v) { c.eval.model = v; }},
        {"eval.split",
         [](auto& c, auto&, auto& v) {
             c.eval.split = v == "all" ? std::nullopt : std::optional<catalog::Split>(catalog::parse_split(v));
         }},
        {"eval.offset", [](auto& c, auto& k, auto& v) { c.eval.offset = to_double(k, v); }},
        {"diffusion.steps", [](auto& c, auto& k, auto& v) { c.steps = static_cast<int>(to_int(k, v)); }},
        {"diffusion.beta_start", [](auto& c, auto& k, auto& v) { c.beta_start = to_double(k, v); }},
        {"diffusion.beta_end", [](auto& c, auto& k, auto& v) { c.beta_end = to_double(k, v); }},
        {"diffusion.variance_draws", [](auto& c, auto& k, auto& v) { c.verify_variance_draws = static_cast<int>(to_int(k, v)); }},
        {"diffusion.moment_samples", [](auto& c, auto& k, auto& v) { c.verify_moment_samples = static_cast<int>(to_int(k, v)); }},
        {"synth.count", [](auto& c, auto& k, auto& v) { c.synth_count = static_cast<int>(to_int(k, v)); }},
        {"synth.size", [](auto& c, auto& k, auto& v) { c.synth_size = static_cast<int>(to_int(k, v)); }},
        {"run.seed", [](auto& c, auto& k, auto& v) { c.seed = static_cast<std::uint64_t>(to_int(k, v)); }},
        {"run.jobs", [](auto& c, auto& k, auto& v) { c.jobs = static_cast<std::size_t>(to_int(k, v)); }},
    };
    return table;
}

}  // namespace

PipelineConfig parse_config(const std::string& text, PipelineConfig base) {
    std::string section;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        ++line_no;
        std::string line = trim(std::string_view(text).substr(start, end - start));
        start = end + 1;
        if (const auto hash = line.find('#'); hash != std::string::npos) line = trim(line.substr(0, hash));
        if (line.empty()) continue;
        const auto where = " (line " + std::to_string(line_no) + ")";
        if (line.front() == '[') {
            if (line.back() != ']') throw Error(ErrorKind::ConfigError, "unterminated section header" + where);
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw Error(ErrorKind::ConfigError, "expected key = value" + where);
        const auto key = (section.empty() ? "" : section + ".") + trim(line.substr(0, eq));
        const auto it = setters().find(key);
        if (it == setters().end()) throw Error(ErrorKind::ConfigError, "unknown key '" + key + "'" + where);
        try {
            it->second(base, key, unquote(trim(line.substr(eq + 1))));
        } catch (const Error& e) {
            throw Error(ErrorKind::ConfigError, std::string(e.what()) + where);
        }
    }
    return base;
}

PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const Error& e) {
        throw Error(ErrorKind::ConfigError, e.what());
    }
    return parse_config(text, std::move(base));
}

}  // namespace rsbench::pipeline
