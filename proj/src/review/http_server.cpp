#include "rsbench/catalog.hpp"
#include "rsbench/error.hpp"
#include "rsbench/review.hpp"

#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <condition_variable>

namespace rsbench::review {

namespace {

using nlohmann::ordered_json;

ordered_json summary_json(const catalog::SampleRecord& s) {
    ordered_json j;
    j["id"] = s.id;
    j["annotation"] = s.annotation;
    j["terrain"] = s.terrain ? ordered_json(std::string(terrain::to_string(*s.terrain))) : ordered_json(nullptr);
    j["resolution_tier"] = std::string(terrain::to_string(s.resolution_tier));
    j["review_state"] = std::string(catalog::to_string(s.review_state));
    j["split"] = s.split ? ordered_json(std::string(catalog::to_string(*s.split))) : ordered_json(nullptr);
    j["alignment_score"] = s.alignment_score ? ordered_json(*s.alignment_score) : ordered_json(nullptr);
    j["preview"] = {
        {"rgb", "/api/pairs/" + s.id + "/preview?kind=rgb"},
        {"dem_hillshade", "/api/pairs/" + s.id + "/preview?kind=dem-hillshade"},
        {"dem_colormap", "/api/pairs/" + s.id + "/preview?kind=dem-colormap"},
    };
    return j;
}

ordered_json verdict_json(const catalog::VerdictRecord& v) {
    return ordered_json::parse(catalog::to_json_line(v));
}

ordered_json stats_json(const ReviewStats& s) {
    ordered_json j;
    j["pending"] = s.pending;
    j["accepted"] = s.accepted;
    j["rejected"] = s.rejected;
    j["flagged"] = s.flagged;
    j["total"] = s.pending + s.reviewed();
    j["reviewed"] = s.reviewed();
    j["rejection_rate"] = s.rejection_rate();
    return j;
}

int status_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::SampleNotFound: return 404;
        case ErrorKind::InvalidPage:
        case ErrorKind::MalformedVerdict:
        case ErrorKind::InvalidArgument: return 400;
        default: return 500;
    }
}

void send_json(httplib::Response& res, const ordered_json& body, int status = 200) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, const Error& e) {
    send_json(res, {{"error", std::string(to_string(e.kind()))}, {"message", e.what()}}, status_for(e.kind()));
}

int int_param(const httplib::Request& req, const char* key, int fallback) {
    if (!req.has_param(key)) return fallback;
    const auto text = req.get_param_value(key);
    try {
        std::size_t used = 0;
        const int v = std::stoi(text, &used);
        if (used != text.size()) throw std::invalid_argument(key);
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorKind::InvalidPage, std::string(key) + " must be an integer");
    }
}

template <typename Handler>
httplib::Server::Handler guarded(Handler handler) {
    return [handler](const httplib::Request& req, httplib::Response& res) {
        try {
            handler(req, res);
        } catch (const Error& e) {
            send_error(res, e);
        } catch (const std::exception& e) {
            send_json(res, {{"error", "InternalError"}, {"message", e.what()}}, 500);
        }
    };
}

}  // namespace

struct HttpServer::Impl {
    ReviewService& service;
    ServerOptions options;
    httplib::Server server;
    std::thread listener;
    std::jthread snapshotter;
    std::uint64_t saved_version = 0;
    std::mutex wait_mutex;
    std::condition_variable_any wait_cv;
    bool stopped = false;

    void save_snapshot() {
        if (!options.snapshot_path) return;
        const auto version = service.version();
        if (version == saved_version && std::filesystem::exists(*options.snapshot_path)) return;
        catalog::save_manifest(*service.snapshot(), *options.snapshot_path);
        saved_version = version;
    }

    void routes() {
        server.Get("/api/pairs", guarded([this](const httplib::Request& req, httplib::Response& res) {
            std::optional<catalog::ReviewState> state;
            if (req.has_param("state") && !req.get_param_value("state").empty()) {
                try {
                    state = catalog::parse_review_state(req.get_param_value("state"));
                } catch (const Error& e) {
                    throw Error(ErrorKind::InvalidArgument, e.what());
                }
            }
            const auto page = service.list_pairs(state, int_param(req, "page", 1), int_param(req, "page_size", 50));
            ordered_json j;
            j["page"] = page.page;
            j["page_size"] = page.page_size;
            j["total"] = page.total;
            j["items"] = ordered_json::array();
            for (const auto& s : page.items) j["items"].push_back(summary_json(s));
            send_json(res, j);
        }));

        server.Get("/api/pairs/:id", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const auto& id = req.path_params.at("id");
            const auto sample = service.get_pair(id);
            if (!sample) throw Error(ErrorKind::SampleNotFound, "no sample '" + id + "'");
            auto j = summary_json(*sample);
            const auto verdict = service.active_verdict(id);
            j["active_verdict"] = verdict ? verdict_json(*verdict) : ordered_json(nullptr);
            send_json(res, j);
        }));

        server.Get("/api/pairs/:id/preview", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const auto kind = parse_preview_kind(req.has_param("kind") ? req.get_param_value("kind") : "rgb");
            res.set_content(service.preview(req.path_params.at("id"), kind), "image/png");
        }));

        server.Post("/api/pairs/:id/verdict", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const auto& id = req.path_params.at("id");
            nlohmann::json body;
            try {
                body = nlohmann::json::parse(req.body);
            } catch (const nlohmann::json::exception& e) {
                throw Error(ErrorKind::MalformedVerdict, e.what());
            }
            if (!body.is_object()) throw Error(ErrorKind::MalformedVerdict, "body must be a JSON object");
            if (body.contains("sample_id") && body["sample_id"] != id) {
                throw Error(ErrorKind::MalformedVerdict, "sample_id does not match the URL");
            }
            body["sample_id"] = id;
            if (!body.contains("reviewer") || body["reviewer"].is_null()) body["reviewer"] = "anonymous";
            const auto ack = service.post_verdict(catalog::parse_verdict_record(body.dump()));
            ordered_json j;
            j["appended"] = ack.appended;
            j["review_state"] = std::string(catalog::to_string(ack.state));
            j["verdict"] = verdict_json(ack.record);
            send_json(res, j);
        }));

        server.Get("/api/stats", guarded([this](const httplib::Request&, httplib::Response& res) {
            send_json(res, stats_json(service.stats()));
        }));

        if (options.static_dir) server.set_mount_point("/", options.static_dir->string());
    }
};

HttpServer::HttpServer(ReviewService& service, ServerOptions options)
    : impl_(std::make_unique<Impl>(service, std::move(options))) {
    impl_->routes();
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::start() {
    auto& im = *impl_;
    const int port = im.options.port == 0 ? im.server.bind_to_any_port(im.options.host)
                                          : (im.server.bind_to_port(im.options.host, im.options.port) ? im.options.port : -1);
    if (port < 0) {
        throw Error(ErrorKind::IoFailure, "cannot bind " + im.options.host + ":" + std::to_string(im.options.port));
    }
    im.listener = std::thread([&im] { im.server.listen_after_bind(); });
    im.snapshotter = std::jthread([&im](std::stop_token stop) {
        std::mutex m;
        std::unique_lock lock(m);
        std::condition_variable_any cv;
        while (!cv.wait_for(lock, stop, std::chrono::seconds(im.options.snapshot_interval_s), [] { return false; })) {
            if (stop.stop_requested()) break;
            try {
                im.save_snapshot();
            } catch (const std::exception&) {
                // Retried on the next tick and again at shutdown.
            }
        }
    });
    im.server.wait_until_ready();
    return port;
}

void HttpServer::wait() {
    std::unique_lock lock(impl_->wait_mutex);
    impl_->wait_cv.wait(lock, [this] { return impl_->stopped; });
}

void HttpServer::stop() {
    if (!impl_) return;
    auto& im = *impl_;
    {
        std::lock_guard lock(im.wait_mutex);
        if (im.stopped) return;
        im.stopped = true;
    }
    im.server.stop();
    if (im.listener.joinable()) im.listener.join();
    im.snapshotter.request_stop();
    if (im.snapshotter.joinable()) im.snapshotter.join();
    im.save_snapshot();
    im.wait_cv.notify_all();
}

}  // namespace rsbench::review
