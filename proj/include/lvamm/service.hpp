#pragma once

// HTTP facade for interactive use: upload a clip, fetch frames, render AMM
// images for a scanline, and measure along it. Sessions live in memory and
// expire after a TTL.

#include "lvamm/error.hpp"
#include "lvamm/pipeline.hpp"
#include "lvamm/png_io.hpp"

#include "httplib.h"
#include "json.hpp"

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace lvamm {

struct ServiceOptions {
    PipelineConfig config;
    std::chrono::seconds session_ttl{30 * 60};
    std::size_t max_upload_bytes = 256u * 1024u * 1024u;
    std::string allow_origin;
    // external-file detectors resolve below this directory; empty disables them
    std::filesystem::path heatmap_root;
};

struct Session {
    using Clock = std::chrono::steady_clock;

    std::string id;
    LoadedClip clip;
    std::optional<LoadedClip> paired;
    Clock::time_point created_at;
    Clock::time_point last_access;
    std::optional<Scanline> last_scanline;
    std::optional<MeasurementReport> last_report;
    // serialises requests that touch the mutable fields above
    std::mutex mutex;
};

class SessionStore {
public:
    using Clock = Session::Clock;
    using Now = std::function<Clock::time_point()>;

    explicit SessionStore(std::chrono::seconds ttl, Now now = [] { return Clock::now(); })
        : ttl_(ttl), now_(std::move(now)), rng_(std::random_device{}()) {}

    std::shared_ptr<Session> create(LoadedClip clip, std::optional<LoadedClip> paired) {
        auto session = std::make_shared<Session>();
        session->clip = std::move(clip);
        session->paired = std::move(paired);
        std::lock_guard lock(mutex_);
        evict_locked();
        session->created_at = session->last_access = now_();
        do {
            session->id = next_id_locked();
        } while (sessions_.contains(session->id));
        sessions_.emplace(session->id, session);
        return session;
    }

    std::shared_ptr<Session> find(const std::string& id) {
        std::lock_guard lock(mutex_);
        evict_locked();
        const auto it = sessions_.find(id);
        if (it == sessions_.end()) {
            return nullptr;
        }
        it->second->last_access = now_();
        return it->second;
    }

    std::size_t size() {
        std::lock_guard lock(mutex_);
        evict_locked();
        return sessions_.size();
    }

private:
    void evict_locked() {
        const auto now = now_();
        std::erase_if(sessions_, [&](const auto& entry) { return now - entry.second->last_access > ttl_; });
    }

    std::string next_id_locked() {
        std::ostringstream out;
        out << std::hex << rng_() << rng_();
        return out.str();
    }

    std::chrono::seconds ttl_;
    Now now_;
    std::mt19937_64 rng_;
    std::mutex mutex_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
};

namespace detail {

inline int http_status_for(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::DegenerateScanline:
    case ErrorKind::OutOfFrame:
    case ErrorKind::IndexOutOfRange:
        return 422;
    case ErrorKind::NoEdgesFound:
        return 409;
    case ErrorKind::NonFiniteScore:
    case ErrorKind::UnorderedLandmarks:
        return 500;
    default:
        return is_input_error(kind) ? 400 : 500;
    }
}

inline void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

inline void send_error(httplib::Response& res, int status, const std::string& kind, const std::string& message) {
    send_json(res, status, {{"error", kind}, {"message", message}});
}

inline json clip_metadata(const LoadedClip& c) {
    const FrameSize size = c.clip.frame_size();
    return {{"id", c.manifest.id},
            {"phase", to_string(c.manifest.phase)},
            {"w_count", c.clip.frame_count()},
            {"width", size.width},
            {"height", size.height},
            {"anchor_index", c.clip.anchor_index},
            {"source_anchor_index", c.manifest.anchor_index},
            {"source_frame_count", c.manifest.frame_files.size()},
            {"spacing_cm_per_px", c.clip.spacing_cm_per_px},
            {"frame_interval_s", c.clip.frame_interval_s}};
}

inline json session_metadata(const Session& s) {
    return {{"session_id", s.id},
            {"coordinate_convention", kCoordinateConvention},
            {"clip", clip_metadata(s.clip)},
            {"paired_clip", s.paired ? clip_metadata(*s.paired) : json(nullptr)}};
}

inline json parse_body(const httplib::Request& req) {
    try {
        return req.body.empty() ? json::object() : json::parse(req.body);
    } catch (const json::exception& e) {
        fail(ErrorKind::MalformedManifest, std::string("request body: ") + e.what());
    }
}

inline std::string base_name(const std::string& path) {
    return std::filesystem::path(path).filename().string();
}

} // namespace detail

class MeasureService {
public:
    explicit MeasureService(ServiceOptions options, SessionStore::Now now = [] { return Session::Clock::now(); })
        : options_(std::move(options)), store_(options_.session_ttl, std::move(now)) {}

    SessionStore& sessions() noexcept { return store_; }
    const ServiceOptions& options() const noexcept { return options_; }

    void mount(httplib::Server& server) {
        server.set_payload_max_length(options_.max_upload_bytes);
        if (!options_.allow_origin.empty()) {
            server.set_post_routing_handler([origin = options_.allow_origin](const auto&, httplib::Response& res) {
                res.set_header("Access-Control-Allow-Origin", origin);
                res.set_header("Access-Control-Expose-Headers", "X-Amm-Metadata");
            });
            server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
                res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
                res.set_header("Access-Control-Allow-Headers", "Content-Type");
                res.status = 204;
            });
        }
        server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
            try {
                std::rethrow_exception(ep);
            } catch (const Error& e) {
                detail::send_error(res, detail::http_status_for(e.kind()), std::string(to_string(e.kind())), e.detail());
            } catch (const json::exception& e) {
                detail::send_error(res, 400, "MalformedManifest", e.what());
            } catch (const std::exception& e) {
                detail::send_error(res, 500, "InternalError", e.what());
            }
        });

        server.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) { create_session(req, res); });
        server.Get("/sessions/:id", [this](const httplib::Request& req, httplib::Response& res) { get_session(req, res); });
        server.Get("/sessions/:id/frames/:w",
                   [this](const httplib::Request& req, httplib::Response& res) { get_frame(req, res); });
        server.Post("/sessions/:id/amm", [this](const httplib::Request& req, httplib::Response& res) { post_amm(req, res); });
        server.Post("/sessions/:id/measure",
                    [this](const httplib::Request& req, httplib::Response& res) { post_measure(req, res); });
    }

private:
    std::shared_ptr<Session> session_or_404(const httplib::Request& req, httplib::Response& res) {
        auto session = store_.find(req.path_params.at("id"));
        if (!session) {
            detail::send_error(res, 404, "UnknownSession", "no session '" + req.path_params.at("id") + "'");
        }
        return session;
    }

    LoadedClip decode_upload(const httplib::Request& req, const std::string& field) {
        const ClipManifest manifest = [&] {
            try {
                return manifest_from_json(json::parse(req.get_file_value(field).content));
            } catch (const json::exception& e) {
                fail(ErrorKind::MalformedManifest, field + ": " + e.what());
            }
        }();
        return decode_clip(manifest, options_.config.w_count, [&](const std::string& name) {
            for (const auto& [key, part] : req.files) {
                if (key == "frames" && (part.filename == name || part.filename == detail::base_name(name))) {
                    return std::vector<std::uint8_t>(part.content.begin(), part.content.end());
                }
            }
            fail(ErrorKind::MissingFile, "frame file " + name + " missing from upload");
        });
    }

    void create_session(const httplib::Request& req, httplib::Response& res) {
        if (!req.is_multipart_form_data() || !req.has_file("manifest")) {
            detail::send_error(res, 400, "MalformedManifest",
                               "expected multipart/form-data with a 'manifest' part and 'frames' files");
            return;
        }
        LoadedClip clip = decode_upload(req, "manifest");
        std::optional<LoadedClip> paired;
        if (req.has_file("paired_manifest")) {
            paired = decode_upload(req, "paired_manifest");
            if (paired->manifest.phase == clip.manifest.phase) {
                fail(ErrorKind::MalformedManifest, "paired manifest must have the other phase");
            }
            if (!(paired->clip.frame_size().width == clip.clip.frame_size().width &&
                  paired->clip.frame_size().height == clip.clip.frame_size().height)) {
                fail(ErrorKind::DimensionMismatch, "paired clip frames differ in size");
            }
        }
        auto session = store_.create(std::move(clip), std::move(paired));
        detail::send_json(res, 201, detail::session_metadata(*session));
    }

    void get_session(const httplib::Request& req, httplib::Response& res) {
        auto session = session_or_404(req, res);
        if (!session) {
            return;
        }
        std::lock_guard lock(session->mutex);
        json body = detail::session_metadata(*session);
        body["last_scanline"] = session->last_scanline ? scanline_to_json(*session->last_scanline) : json(nullptr);
        body["last_report"] = session->last_report ? report_to_json(*session->last_report) : json(nullptr);
        detail::send_json(res, 200, body);
    }

    void get_frame(const httplib::Request& req, httplib::Response& res) {
        auto session = session_or_404(req, res);
        if (!session) {
            return;
        }
        const std::string& text = req.path_params.at("w");
        std::size_t w = 0;
        std::size_t used = 0;
        try {
            w = std::stoul(text, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != text.size() || text.empty() || text[0] == '-' || w >= session->clip.clip.frame_count()) {
            detail::send_error(res, 404, "UnknownFrame", "no frame '" + text + "' in session " + session->id);
            return;
        }
        const auto bytes = encode_png(session->clip.clip.frames[w]);
        res.status = 200;
        res.set_content(std::string(bytes.begin(), bytes.end()), "image/png");
    }

    void post_amm(const httplib::Request& req, httplib::Response& res) {
        auto session = session_or_404(req, res);
        if (!session) {
            return;
        }
        const json body = detail::parse_body(req);
        if (!body.contains("scanline")) {
            fail(ErrorKind::MalformedManifest, "request needs a scanline");
        }
        const Scanline sl = scanline_from_json(body.at("scanline"));
        const std::size_t v_count = body.value("v_count", options_.config.v_count);
        std::lock_guard lock(session->mutex);
        const AmmImage amm = synthesize_amm(session->clip.clip, sl, v_count);
        session->last_scanline = sl;
        const auto bytes = encode_amm_png(amm);
        res.status = 200;
        res.set_header("X-Amm-Metadata", amm_metadata_json(amm).dump());
        res.set_content(std::string(bytes.begin(), bytes.end()), "image/png");
    }

    PipelineConfig request_config(const json& body) const {
        PipelineConfig cfg = options_.config;
        if (body.contains("detector_id")) {
            cfg.detector = body.at("detector_id").get<std::string>();
        }
        const DetectorDescriptor d = resolve_detector(cfg.detector);
        if (d.kind == DetectorKind::ExternalFile) {
            if (options_.heatmap_root.empty()) {
                fail(ErrorKind::UnknownDetector, "external heatmap files are not enabled on this server");
            }
            const std::filesystem::path rel = d.params.at("path");
            if (rel.is_absolute() || rel.lexically_normal().string().starts_with("..")) {
                fail(ErrorKind::UnknownDetector, "heatmap path must stay inside the heatmap root");
            }
            cfg.detector = std::string(kExternalFileKind) + ":" + (options_.heatmap_root / rel).string();
        }
        return cfg;
    }

    void post_measure(const httplib::Request& req, httplib::Response& res) {
        auto session = session_or_404(req, res);
        if (!session) {
            return;
        }
        const json body = detail::parse_body(req);
        if (!body.contains("scanline")) {
            fail(ErrorKind::MalformedManifest, "request needs a scanline");
        }
        const Scanline sl = scanline_from_json(body.at("scanline"));
        const PipelineConfig cfg = request_config(body);
        std::lock_guard lock(session->mutex);
        MeasurementReport report = session->paired ? measure_paired(session->clip, *session->paired, sl, cfg)
                                                   : measure(session->clip, sl, cfg);
        // report the id the caller asked for, not the resolved file path
        report.detector_id = body.value("detector_id", options_.config.detector);
        session->last_scanline = sl;
        session->last_report = report;
        detail::send_json(res, 200, report_to_json(report));
    }

    ServiceOptions options_;
    SessionStore store_;
};

} // namespace lvamm
