#include "rsbench/evalbench.hpp"

#include "rsbench/error.hpp"
#include "rsbench/parallel.hpp"
#include "rsbench/raster.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace rsbench::evalbench {

namespace {

constexpr double kDeltaBase = 1.25;

std::size_t checked_count(const DepthPair& pair) {
    const std::size_t m = pair.valid_count();
    if (m == 0) throw Error(ErrorKind::EmptyMask, "no valid pixels");
    return m;
}

bool in_subset(const std::string& subset, const std::optional<terrain::TerrainClass>& t) {
    using terrain::TerrainClass;
    if (subset == "all") return true;
    if (!t) return false;
    if (subset == "D1") return *t == TerrainClass::Plain;
    if (subset == "D2") return *t == TerrainClass::LowUndulatingMountains || *t == TerrainClass::HighUndulatingMountains;
    return terrain::to_string(*t) == subset;
}

std::string fixed(double v, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, v);
    return buf;
}

}  // namespace

DepthPair::DepthPair(std::vector<double> p, std::vector<double> g, std::vector<std::uint8_t> v)
    : pred(std::move(p)), gt(std::move(g)), valid(std::move(v)) {
    if (valid.empty()) valid.assign(gt.size(), 1);
    if (pred.size() != gt.size() || valid.size() != gt.size()) {
        throw Error(ErrorKind::DimensionMismatch, "prediction, ground truth and mask differ in size");
    }
}

std::size_t DepthPair::valid_count() const {
    return static_cast<std::size_t>(std::count_if(valid.begin(), valid.end(), [](auto v) { return v != 0; }));
}

DepthPair normalize_for_eval(std::span<const double> pred, std::span<const double> gt,
                             std::span<const std::uint8_t> valid) {
    if (pred.size() != gt.size() || (!valid.empty() && valid.size() != gt.size())) {
        throw Error(ErrorKind::DimensionMismatch, "prediction, ground truth and mask differ in size");
    }
    const std::size_t n = gt.size();
    std::vector<std::uint8_t> mask(n);
    std::size_t m = 0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < n; ++i) {
        mask[i] = (valid.empty() || valid[i]) && std::isfinite(gt[i]) && std::isfinite(pred[i]);
        if (!mask[i]) continue;
        ++m;
        lo = std::min(lo, gt[i]);
        hi = std::max(hi, gt[i]);
    }
    if (m < 2 || !(hi > lo)) throw Error(ErrorKind::DegenerateGroundTruth, "ground truth needs variance over >= 2 pixels");

    const double range = hi - lo;
    const auto to_scale = [&](double v) { return (v - lo) / range * 255.0; };
    std::vector<double> g(n);
    std::vector<double> p(n);
    for (std::size_t i = 0; i < n; ++i) {
        g[i] = to_scale(gt[i]);
        p[i] = to_scale(pred[i]);
    }

    // Centred least squares: identical inputs give scale 1 and shift 0 exactly.
    double mp = 0.0;
    double mg = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!mask[i]) continue;
        mp += p[i];
        mg += g[i];
    }
    mp /= static_cast<double>(m);
    mg /= static_cast<double>(m);
    double cov = 0.0;
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!mask[i]) continue;
        const double dp = p[i] - mp;
        cov += dp * (g[i] - mg);
        var += dp * dp;
    }
    const double scale = var > 0.0 ? cov / var : 0.0;
    const double shift = mg - scale * mp;
    for (std::size_t i = 0; i < n; ++i) {
        if (!mask[i]) continue;
        p[i] = std::clamp(scale * p[i] + shift, 0.0, 255.0);
    }
    return DepthPair(std::move(p), std::move(g), std::move(mask));
}

DepthPair with_offset(const DepthPair& pair, double offset) {
    DepthPair out = pair;
    for (auto& v : out.pred) v += offset;
    for (auto& v : out.gt) v += offset;
    return out;
}

double delta_accuracy(const DepthPair& pair, int k) {
    if (k < 1 || k > 3) throw Error(ErrorKind::InvalidArgument, "delta order must be 1, 2 or 3");
    const std::size_t m = checked_count(pair);
    const double threshold = std::pow(kDeltaBase, k);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < pair.gt.size(); ++i) {
        if (!pair.valid[i]) continue;
        const double d = pair.pred[i];
        const double a = pair.gt[i];
        if (!(d > 0.0) || !(a > 0.0)) throw Error(ErrorKind::NonPositiveDepth, "depth values must be positive");
        if (std::max(d / a, a / d) < threshold) ++hits;
    }
    return 100.0 * static_cast<double>(hits) / static_cast<double>(m);
}

double rmse(const DepthPair& pair) {
    const std::size_t m = checked_count(pair);
    double sum = 0.0;
    for (std::size_t i = 0; i < pair.gt.size(); ++i) {
        if (!pair.valid[i]) continue;
        const double e = pair.pred[i] - pair.gt[i];
        sum += e * e;
    }
    return std::sqrt(sum / static_cast<double>(m));
}

double mae(const DepthPair& pair) {
    const std::size_t m = checked_count(pair);
    double sum = 0.0;
    for (std::size_t i = 0; i < pair.gt.size(); ++i) {
        if (pair.valid[i]) sum += std::abs(pair.pred[i] - pair.gt[i]);
    }
    return sum / static_cast<double>(m);
}

Metrics evaluate_pair(const DepthPair& normalized, double offset) {
    Metrics out;
    out.mae = mae(normalized);
    out.rmse = rmse(normalized);
    const auto shifted = with_offset(normalized, offset);
    for (int k = 1; k <= 3; ++k) out.delta[static_cast<std::size_t>(k - 1)] = delta_accuracy(shifted, k);
    return out;
}

std::string MetricsReport::to_json() const {
    nlohmann::ordered_json j;
    j["model"] = model;
    j["columns"] = {"MAE", "RMSE", "delta1", "delta2", "delta3"};
    j["rows"] = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
        nlohmann::ordered_json row;
        row["subset"] = r.subset;
        row["samples"] = r.samples;
        row["MAE"] = r.metrics.mae;
        row["RMSE"] = r.metrics.rmse;
        row["delta1"] = r.metrics.delta[0];
        row["delta2"] = r.metrics.delta[1];
        row["delta3"] = r.metrics.delta[2];
        j["rows"].push_back(row);
    }
    j["skipped"] = nlohmann::ordered_json::array();
    for (const auto& s : skipped) j["skipped"].push_back({{"id", s.id}, {"reason", s.reason}});
    return j.dump(2);
}

std::string MetricsReport::to_table() const {
    std::size_t name_width = std::string("subset").size();
    for (const auto& r : rows) name_width = std::max(name_width, r.subset.size());
    const auto pad = [](std::string s, std::size_t w, bool left) {
        const std::string fill(s.size() < w ? w - s.size() : 0, ' ');
        return left ? s + fill : fill + s;
    };
    std::string out = "model: " + model + "\n";
    out += pad("subset", name_width, true) + pad("n", 6, false) + pad("MAE", 10, false) + pad("RMSE", 10, false) +
           pad("δ", 9, false) + pad("δ²", 10, false) + pad("δ³", 10, false) + "\n";
    for (const auto& r : rows) {
        out += pad(r.subset, name_width, true) + pad(std::to_string(r.samples), 6, false) +
               pad(fixed(r.metrics.mae, 3), 10, false) + pad(fixed(r.metrics.rmse, 3), 10, false);
        for (const double d : r.metrics.delta) out += pad(fixed(d, 2), 8, false);
        out += "\n";
    }
    for (const auto& s : skipped) out += "skipped " + s.id + ": " + s.reason + "\n";
    return out;
}

MetricsReport evaluate_run(const std::filesystem::path& pred_dir, const catalog::Catalog& catalog,
                           const EvalConfig& config) {
    std::vector<const catalog::SampleRecord*> selected;
    for (const auto& s : catalog.samples) {
        if (!config.split || s.split == config.split) selected.push_back(&s);
    }
    if (selected.empty()) throw Error(ErrorKind::EmptyCatalog, "no samples selected for evaluation");
    std::sort(selected.begin(), selected.end(), [](auto* a, auto* b) { return a->id < b->id; });

    std::vector<std::string> missing;
    for (const auto* s : selected) {
        if (!std::filesystem::exists(pred_dir / (s->id + ".rst"))) missing.push_back(s->id);
    }
    if (!missing.empty()) {
        std::string list;
        for (const auto& id : missing) list += (list.empty() ? "" : ", ") + id;
        throw Error(ErrorKind::MissingPrediction, "no prediction for " + list, missing);
    }

    std::vector<std::optional<Metrics>> results(selected.size());
    std::vector<std::string> skip_reason(selected.size());
    parallel_for(selected.size(), resolve_jobs(config.jobs), [&](std::size_t i) {
        const auto* s = selected[i];
        const auto gt = raster::load_tile(s->dem_path);
        const auto pred = raster::load_tile(pred_dir / (s->id + ".rst"));
        if (!gt.is_dem() || !pred.is_dem()) throw Error(ErrorKind::BandMismatch, s->id + ": expected single-band tiles");
        if (gt.width() != pred.width() || gt.height() != pred.height()) {
            throw Error(ErrorKind::DimensionMismatch, s->id + ": prediction and ground truth differ in shape");
        }
        const auto gf = gt.f32();
        const auto pf = pred.f32();
        std::vector<double> g(gf.begin(), gf.end());
        std::vector<double> p(pf.begin(), pf.end());
        std::vector<std::uint8_t> valid(g.size());
        for (std::size_t k = 0; k < g.size(); ++k) valid[k] = !gt.is_nodata(gf[k]) && !pred.is_nodata(pf[k]);
        try {
            results[i] = evaluate_pair(normalize_for_eval(p, g, valid), config.offset);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::DegenerateGroundTruth) throw;
            skip_reason[i] = "constant ground truth";
        }
    });

    MetricsReport report;
    report.model = config.model;
    std::vector<std::string> subsets = {"all", "D1", "D2"};
    for (const auto c : terrain::kAllClasses) subsets.emplace_back(terrain::to_string(c));
    for (const auto& name : subsets) {
        ReportRow row;
        row.subset = name;
        for (std::size_t i = 0; i < selected.size(); ++i) {
            if (!results[i] || !in_subset(name, selected[i]->terrain)) continue;
            ++row.samples;
            row.metrics.mae += results[i]->mae;
            row.metrics.rmse += results[i]->rmse;
            for (std::size_t k = 0; k < 3; ++k) row.metrics.delta[k] += results[i]->delta[k];
        }
        if (row.samples == 0) continue;
        const double n = static_cast<double>(row.samples);
        row.metrics.mae /= n;
        row.metrics.rmse /= n;
        for (auto& d : row.metrics.delta) d /= n;
        report.rows.push_back(row);
    }
    for (std::size_t i = 0; i < selected.size(); ++i) {
        if (!results[i]) report.skipped.push_back({selected[i]->id, skip_reason[i]});
    }
    return report;
}

}  // namespace rsbench::evalbench
