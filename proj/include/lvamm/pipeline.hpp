#pragma once

// File formats and the end-to-end workflow: manifests in, AMM synthesis,
// detection, mapping back to the scanline, reports and evaluation out.
// All emitted JSON carries the pixel coordinate convention.

#include "lvamm/amm.hpp"
#include "lvamm/cardiac.hpp"
#include "lvamm/detector.hpp"
#include "lvamm/error.hpp"
#include "lvamm/heatmap.hpp"
#include "lvamm/metrics.hpp"
#include "lvamm/png_io.hpp"

#include "json.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace lvamm {

using json = nlohmann::json;

enum class Phase { ED, ES };

inline std::string to_string(Phase phase) { return phase == Phase::ED ? "ED" : "ES"; }

inline Phase parse_phase(const std::string& text) {
    if (text == "ED") {
        return Phase::ED;
    }
    if (text == "ES") {
        return Phase::ES;
    }
    fail(ErrorKind::MalformedManifest, "phase must be \"ED\" or \"ES\", got \"" + text + "\"");
}

struct PipelineConfig {
    std::size_t v_count = kDefaultVCount;
    std::size_t w_count = kDefaultWCount;
    double sigma = 2.0;
    double softmax_beta = 20.0;
    std::string detector = std::string(kBaselineGradientId);
    std::size_t window = 5;
    std::size_t min_sep = 0;

    HeatmapConfig heatmap() const { return {sigma, v_count, w_count, softmax_beta}; }
};

/// Fields missing from `j` keep their defaults.
inline PipelineConfig config_from_json(const json& j, PipelineConfig cfg = {}) {
    try {
        cfg.v_count = j.value("v_count", cfg.v_count);
        cfg.w_count = j.value("w_count", cfg.w_count);
        cfg.sigma = j.value("sigma", cfg.sigma);
        cfg.softmax_beta = j.value("softmax_beta", cfg.softmax_beta);
        cfg.detector = j.value("detector", cfg.detector);
        cfg.window = j.value("window", cfg.window);
        cfg.min_sep = j.value("min_sep", cfg.min_sep);
    } catch (const json::exception& e) {
        fail(ErrorKind::MalformedManifest, std::string("config: ") + e.what());
    }
    if (cfg.v_count < 2 || cfg.w_count < 1 || !(cfg.sigma > 0.0) || !(cfg.softmax_beta > 0.0)) {
        fail(ErrorKind::InvalidArgument, "config needs v_count >= 2, w_count >= 1, sigma > 0, softmax_beta > 0");
    }
    resolve_detector(cfg.detector);
    return cfg;
}

inline json config_to_json(const PipelineConfig& cfg) {
    return {{"v_count", cfg.v_count}, {"w_count", cfg.w_count}, {"sigma", cfg.sigma},
            {"softmax_beta", cfg.softmax_beta}, {"detector", cfg.detector}, {"window", cfg.window},
            {"min_sep", cfg.min_sep}};
}

inline DetectorDescriptor detector_for(const PipelineConfig& cfg) {
    DetectorDescriptor d = resolve_detector(cfg.detector);
    if (d.kind == DetectorKind::BaselineGradient) {
        d.params["window"] = std::to_string(cfg.window);
        d.params["min_sep"] = std::to_string(cfg.min_sep);
    }
    return d;
}

// ---- JSON helpers --------------------------------------------------------

inline json point_to_json(Point2 p) { return json::array({p.x, p.y}); }

inline Point2 point_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        fail(ErrorKind::MalformedManifest, "point must be a [x, y] number pair, got " + j.dump());
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

inline json scanline_to_json(const Scanline& sl) {
    return {{"p_start", point_to_json(sl.p_start)}, {"p_end", point_to_json(sl.p_end)}};
}

inline Scanline scanline_from_json(const json& j) {
    if (!j.is_object() || !j.contains("p_start") || !j.contains("p_end")) {
        fail(ErrorKind::MalformedManifest, "scanline needs p_start and p_end");
    }
    return {point_from_json(j.at("p_start")), point_from_json(j.at("p_end"))};
}

inline json lengths_to_json(const SegmentLengths& s) {
    return {{"ivs_cm", s.ivs_cm}, {"lvid_cm", s.lvid_cm}, {"lvpw_cm", s.lvpw_cm}};
}

inline SegmentLengths lengths_from_json(const json& j) {
    return {j.at("ivs_cm").get<double>(), j.at("lvid_cm").get<double>(), j.at("lvpw_cm").get<double>()};
}

inline json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        fail(ErrorKind::MissingFile, "cannot open " + path.string());
    }
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        fail(ErrorKind::MalformedManifest, path.string() + ": " + e.what());
    }
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        fail(ErrorKind::MissingFile, "cannot write " + path.string());
    }
    out << text;
}

inline std::string dump_pretty(const json& j) { return j.dump(2) + "\n"; }

// ---- manifests -----------------------------------------------------------

struct ClipManifest {
    std::string id;
    std::vector<std::string> frame_files;
    std::size_t anchor_index = 0;
    Phase phase = Phase::ED;
    double spacing_cm_per_px = 0.0;
    double frame_interval_s = 0.0;
};

inline json manifest_to_json(const ClipManifest& m) {
    return {{"coordinate_convention", kCoordinateConvention},
            {"id", m.id},
            {"frame_files", m.frame_files},
            {"anchor_index", m.anchor_index},
            {"phase", to_string(m.phase)},
            {"spacing_cm_per_px", m.spacing_cm_per_px},
            {"frame_interval_s", m.frame_interval_s}};
}

inline ClipManifest manifest_from_json(const json& j) {
    ClipManifest m;
    try {
        m.id = j.at("id").get<std::string>();
        m.frame_files = j.at("frame_files").get<std::vector<std::string>>();
        m.anchor_index = j.at("anchor_index").get<std::size_t>();
        m.phase = parse_phase(j.at("phase").get<std::string>());
        m.spacing_cm_per_px = j.at("spacing_cm_per_px").get<double>();
        m.frame_interval_s = j.value("frame_interval_s", 0.0);
    } catch (const json::exception& e) {
        fail(ErrorKind::MalformedManifest, std::string("manifest: ") + e.what());
    }
    if (m.frame_files.empty()) {
        fail(ErrorKind::MalformedManifest, "manifest '" + m.id + "' lists no frames");
    }
    if (m.anchor_index >= m.frame_files.size()) {
        fail(ErrorKind::MalformedManifest, "manifest '" + m.id + "' anchor_index " + std::to_string(m.anchor_index) +
                                               " outside " + std::to_string(m.frame_files.size()) + " frames");
    }
    if (!(m.spacing_cm_per_px > 0.0)) {
        fail(ErrorKind::MalformedManifest, "manifest '" + m.id + "' spacing_cm_per_px must be positive");
    }
    return m;
}

struct LoadedClip {
    ClipManifest manifest;
    EchoClip clip;
};

/// Decodes the manifest's frames through `fetch` (file name -> PNG bytes)
/// and cuts the W-frame clip around the anchor.
inline LoadedClip decode_clip(const ClipManifest& manifest, std::size_t w_count,
                              const std::function<std::vector<std::uint8_t>(const std::string&)>& fetch) {
    std::vector<Image> video;
    video.reserve(manifest.frame_files.size());
    for (const std::string& name : manifest.frame_files) {
        Image frame;
        try {
            frame = decode_png(fetch(name));
        } catch (const Error& e) {
            fail(e.kind(), name + ": " + e.detail());
        }
        if (!video.empty() && !frame.same_shape(video.front())) {
            fail(ErrorKind::DimensionMismatch, "frame " + name + " is " + std::to_string(frame.width()) + "x" +
                                                   std::to_string(frame.height()) + ", expected " +
                                                   std::to_string(video.front().width()) + "x" +
                                                   std::to_string(video.front().height()));
        }
        video.push_back(std::move(frame));
    }
    return {manifest, extract_clip(video, manifest.anchor_index, w_count, manifest.spacing_cm_per_px,
                                   manifest.frame_interval_s)};
}

/// Frame paths are resolved relative to the manifest's directory.
inline LoadedClip load_manifest(const std::filesystem::path& path, std::size_t w_count) {
    const ClipManifest manifest = manifest_from_json(read_json_file(path));
    const auto base = path.parent_path();
    return decode_clip(manifest, w_count, [&](const std::string& name) {
        const std::filesystem::path file = std::filesystem::path(name).is_absolute() ? std::filesystem::path(name) : base / name;
        if (!std::filesystem::exists(file)) {
            fail(ErrorKind::MissingFile, "frame file " + file.string() + " does not exist");
        }
        return read_file_bytes(file);
    });
}

// ---- annotations ---------------------------------------------------------

struct AnnotationRecord {
    std::string clip_id;
    Scanline scanline;
    LandmarkSet landmarks_bmode{};
    Phase phase = Phase::ED;
};

inline constexpr double kAnnotationCollinearityPx = 0.5;

inline json annotation_to_json(const AnnotationRecord& a) {
    json lms = json::array();
    for (Point2 p : a.landmarks_bmode) {
        lms.push_back(point_to_json(p));
    }
    return {{"clip_id", a.clip_id}, {"scanline", scanline_to_json(a.scanline)}, {"landmarks_bmode", lms},
            {"phase", to_string(a.phase)}};
}

inline AnnotationRecord annotation_from_json(const json& j) {
    AnnotationRecord a;
    try {
        a.clip_id = j.at("clip_id").get<std::string>();
        a.scanline = scanline_from_json(j.at("scanline"));
        const json& lms = j.at("landmarks_bmode");
        if (!lms.is_array() || lms.size() != 4) {
            fail(ErrorKind::MalformedManifest, "annotation '" + a.clip_id + "' needs 4 landmarks");
        }
        for (std::size_t i = 0; i < 4; ++i) {
            a.landmarks_bmode[i] = point_from_json(lms[i]);
        }
        a.phase = parse_phase(j.at("phase").get<std::string>());
    } catch (const json::exception& e) {
        fail(ErrorKind::MalformedManifest, std::string("annotation: ") + e.what());
    }
    validate_scanline(a.scanline);
    for (Point2 p : a.landmarks_bmode) {
        if (perpendicular_distance(p, a.scanline) > kAnnotationCollinearityPx) {
            fail(ErrorKind::MalformedManifest, "annotation '" + a.clip_id + "' landmark " + describe(p) +
                                                   " is more than 0.5 px off its scanline");
        }
    }
    const Point2 d = a.scanline.direction();
    for (std::size_t i = 1; i < 4; ++i) {
        if (dot(a.landmarks_bmode[i] - a.landmarks_bmode[i - 1], d) < 0.0) {
            fail(ErrorKind::MalformedManifest, "annotation '" + a.clip_id + "' landmarks are not ordered along the scanline");
        }
    }
    return a;
}

inline std::vector<AnnotationRecord> annotations_from_json(const json& j) {
    if (!j.is_array()) {
        fail(ErrorKind::MalformedManifest, "annotation file must hold a JSON array");
    }
    std::vector<AnnotationRecord> out;
    for (const json& item : j) {
        out.push_back(annotation_from_json(item));
    }
    return out;
}

// ---- measurement ---------------------------------------------------------

struct MeasurementReport {
    std::string clip_id;
    Phase phase = Phase::ED;
    Scanline scanline;
    LandmarkSet landmarks_bmode{};
    std::array<AmmPoint, 4> landmarks_amm{};
    std::array<std::size_t, 4> amm_rows{};
    SegmentLengths segment_lengths;
    double spacing_cm_per_px = 0.0;
    std::string detector_id;
    std::size_t v_count = 0;
    std::size_t w_count = 0;
    double sigma = 0.0;
    double softmax_beta = 0.0;
    std::optional<CardiacIndices> cardiac_indices;
    std::string paired_clip_id;
};

inline json indices_to_json(const CardiacIndices& c) {
    return {{"fs_fraction", c.fs_fraction}, {"rwt_ratio", c.rwt_ratio}, {"lvm_g", c.lvm_g},
            {"edv_ml", c.edv_ml},           {"esv_ml", c.esv_ml},       {"ef_fraction", c.ef_fraction}};
}

inline CardiacIndices indices_from_json(const json& j) {
    return {j.at("fs_fraction").get<double>(), j.at("rwt_ratio").get<double>(), j.at("lvm_g").get<double>(),
            j.at("edv_ml").get<double>(),      j.at("esv_ml").get<double>(),    j.at("ef_fraction").get<double>()};
}

inline json report_to_json(const MeasurementReport& r) {
    json bmode = json::array();
    json amm = json::array();
    for (std::size_t i = 0; i < 4; ++i) {
        bmode.push_back(point_to_json(r.landmarks_bmode[i]));
        amm.push_back(json::array({r.landmarks_amm[i].x, r.landmarks_amm[i].y}));
    }
    json j = {{"coordinate_convention", kCoordinateConvention},
              {"clip_id", r.clip_id},
              {"phase", to_string(r.phase)},
              {"scanline", scanline_to_json(r.scanline)},
              {"landmarks_bmode", bmode},
              {"landmarks_amm", amm},
              {"amm_rows", r.amm_rows},
              {"segment_lengths", lengths_to_json(r.segment_lengths)},
              {"spacing_cm_per_px", r.spacing_cm_per_px},
              {"detector_id", r.detector_id},
              {"v_count", r.v_count},
              {"w_count", r.w_count},
              {"sigma", r.sigma},
              {"softmax_beta", r.softmax_beta}};
    if (r.cardiac_indices) {
        json indices = indices_to_json(*r.cardiac_indices);
        indices["paired_clip_id"] = r.paired_clip_id;
        indices["lvm_formula"] = kLvMassFormula;
        indices["volume_formula"] = kVolumeFormula;
        j["cardiac_indices"] = indices;
    } else {
        j["cardiac_indices"] = nullptr;
    }
    return j;
}

inline MeasurementReport report_from_json(const json& j) {
    MeasurementReport r;
    try {
        r.clip_id = j.at("clip_id").get<std::string>();
        r.phase = parse_phase(j.at("phase").get<std::string>());
        r.scanline = scanline_from_json(j.at("scanline"));
        const json& bmode = j.at("landmarks_bmode");
        if (!bmode.is_array() || bmode.size() != 4) {
            fail(ErrorKind::MalformedManifest, "report '" + r.clip_id + "' needs 4 landmarks");
        }
        for (std::size_t i = 0; i < 4; ++i) {
            r.landmarks_bmode[i] = point_from_json(bmode[i]);
        }
        if (j.contains("landmarks_amm")) {
            for (std::size_t i = 0; i < 4; ++i) {
                const Point2 p = point_from_json(j.at("landmarks_amm").at(i));
                r.landmarks_amm[i] = {p.x, p.y};
            }
        }
        if (j.contains("amm_rows")) {
            r.amm_rows = j.at("amm_rows").get<std::array<std::size_t, 4>>();
        }
        r.segment_lengths = lengths_from_json(j.at("segment_lengths"));
        r.spacing_cm_per_px = j.at("spacing_cm_per_px").get<double>();
        r.detector_id = j.value("detector_id", std::string());
        r.v_count = j.value("v_count", std::size_t{0});
        r.w_count = j.value("w_count", std::size_t{0});
        r.sigma = j.value("sigma", 0.0);
        r.softmax_beta = j.value("softmax_beta", 0.0);
        if (j.contains("cardiac_indices") && !j.at("cardiac_indices").is_null()) {
            r.cardiac_indices = indices_from_json(j.at("cardiac_indices"));
            r.paired_clip_id = j.at("cardiac_indices").value("paired_clip_id", std::string());
        }
    } catch (const json::exception& e) {
        fail(ErrorKind::MalformedManifest, std::string("report: ") + e.what());
    }
    return r;
}

/// Intermediate products of one measurement, kept for inspection.
struct MeasurementTrace {
    AmmImage amm;
    HeatmapStack heatmaps;
    MeasurementReport report;
};

/// Runs AMM synthesis, detection, soft-argmax and the mapping back onto
/// the scanline for one clip. Errors are re-thrown with the clip id.
inline MeasurementTrace measure_traced(const LoadedClip& loaded, const Scanline& sl, const PipelineConfig& cfg) {
    const std::string& id = loaded.manifest.id;
    try {
        const HeatmapConfig hcfg = cfg.heatmap();
        MeasurementTrace trace;
        trace.amm = synthesize_amm(loaded.clip, sl, cfg.v_count);
        trace.heatmaps = predict(trace.amm, detector_for(cfg), hcfg);
        const auto amm_points = extract_landmarks(trace.heatmaps, trace.amm.anchor_column, hcfg.softmax_beta);

        MeasurementReport& r = trace.report;
        r.clip_id = id;
        r.phase = loaded.manifest.phase;
        r.scanline = sl;
        r.landmarks_amm = amm_points;
        for (std::size_t i = 0; i < 4; ++i) {
            r.amm_rows[i] = nearest_path_index(amm_points[i].y, trace.amm.path.size());
            r.landmarks_bmode[i] = trace.amm.path.points[r.amm_rows[i]];
        }
        r.segment_lengths = segment_lengths(r.landmarks_bmode, loaded.clip.spacing_cm_per_px);
        r.spacing_cm_per_px = loaded.clip.spacing_cm_per_px;
        r.detector_id = cfg.detector;
        r.v_count = cfg.v_count;
        r.w_count = cfg.w_count;
        r.sigma = cfg.sigma;
        r.softmax_beta = cfg.softmax_beta;
        return trace;
    } catch (const Error& e) {
        fail(e.kind(), "clip '" + id + "': " + e.detail());
    }
}

inline MeasurementReport measure(const LoadedClip& loaded, const Scanline& sl, const PipelineConfig& cfg) {
    return measure_traced(loaded, sl, cfg).report;
}

/// Measures both clips along the same scanline and attaches cardiac
/// indices to the first report. The two clips must be one ED and one ES.
inline MeasurementReport measure_paired(const LoadedClip& primary, const LoadedClip& paired, const Scanline& sl,
                                        const PipelineConfig& cfg) {
    if (primary.manifest.phase == paired.manifest.phase) {
        fail(ErrorKind::InvalidArgument, "paired clips must be one ED and one ES, both are " +
                                             to_string(primary.manifest.phase));
    }
    MeasurementReport report = measure(primary, sl, cfg);
    const MeasurementReport other = measure(paired, sl, cfg);
    const bool primary_is_ed = primary.manifest.phase == Phase::ED;
    const PairedMeasurement pm{primary_is_ed ? report.segment_lengths : other.segment_lengths,
                               primary_is_ed ? other.segment_lengths : report.segment_lengths};
    try {
        report.cardiac_indices = cardiac_indices(pm);
    } catch (const Error& e) {
        fail(e.kind(), "clip '" + primary.manifest.id + "': " + e.detail());
    }
    report.paired_clip_id = paired.manifest.id;
    return report;
}

inline json amm_metadata_json(const AmmImage& amm) {
    return {{"coordinate_convention", kCoordinateConvention},
            {"scanline", scanline_to_json(amm.path.scanline)},
            {"v_count", amm.v_count()},
            {"w_count", amm.w_count()},
            {"anchor_column", amm.anchor_column},
            {"spacing_px", amm.path.spacing}};
}

inline std::vector<std::uint8_t> encode_amm_png(const AmmImage& amm) {
    const std::vector<std::pair<std::string, std::string>> text = {
        {"Comment", std::string("AMM image: rows = v along scanline, columns = w (time); B-mode ") +
                        kCoordinateConvention},
        {"Scanline", amm_metadata_json(amm).at("scanline").dump()}};
    return encode_png(amm.data, text);
}

// ---- evaluation ----------------------------------------------------------

struct EvaluationRow {
    std::string id;
    SampleEval eval;
};

struct EvaluationOptions {
    std::vector<double> thresholds_mm;
    // Project predicted landmarks onto the annotated scanline first.
    bool project_to_annotation_scanline = false;
};

inline std::vector<double> default_sdr_thresholds() {
    std::vector<double> out;
    for (int i = 0; i <= 12; ++i) {
        out.push_back(0.5 * i);
    }
    return out;
}

struct EvaluationResult {
    std::vector<EvaluationRow> rows;
    json summary;
};

namespace detail {

inline json optional_pearson(std::span<const double> a, std::span<const double> b) {
    try {
        return pearson(a, b);
    } catch (const Error&) {
        return nullptr;
    }
}

inline json optional_bland_altman(std::span<const double> a, std::span<const double> b) {
    try {
        const BlandAltman ba = bland_altman(a, b);
        return {{"bias", ba.bias}, {"sd", ba.sd}, {"loa_low", ba.loa_low}, {"loa_high", ba.loa_high}};
    } catch (const Error&) {
        return nullptr;
    }
}

} // namespace detail

inline EvaluationResult evaluate(const std::vector<MeasurementReport>& reports,
                                 const std::vector<AnnotationRecord>& annotations, const EvaluationOptions& options) {
    std::map<std::string, const AnnotationRecord*> by_id;
    for (const AnnotationRecord& a : annotations) {
        if (!by_id.emplace(a.clip_id, &a).second) {
            fail(ErrorKind::MalformedManifest, "duplicate annotation for clip '" + a.clip_id + "'");
        }
    }
    if (reports.empty()) {
        fail(ErrorKind::UnmatchedSample, "no predictions to evaluate");
    }
    std::vector<const MeasurementReport*> sorted;
    std::map<std::string, bool> seen;
    for (const MeasurementReport& r : reports) {
        if (!by_id.contains(r.clip_id)) {
            fail(ErrorKind::UnmatchedSample, "prediction for clip '" + r.clip_id + "' has no annotation");
        }
        if (seen[r.clip_id]) {
            fail(ErrorKind::MalformedManifest, "duplicate prediction for clip '" + r.clip_id + "'");
        }
        seen[r.clip_id] = true;
        sorted.push_back(&r);
    }
    std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->clip_id < b->clip_id; });

    EvaluationResult result;
    std::array<std::vector<double>, kStructureCount> pred_len, gt_len;
    std::vector<double> mae_avg_mm;
    for (const MeasurementReport* r : sorted) {
        const AnnotationRecord& gt = *by_id.at(r->clip_id);
        std::vector<Point2> pred(r->landmarks_bmode.begin(), r->landmarks_bmode.end());
        if (options.project_to_annotation_scanline) {
            pred = project_to_scanline(pred, gt.scanline);
        }
        SampleEval eval;
        try {
            eval = evaluate_sample(pred, gt.landmarks_bmode, r->spacing_cm_per_px);
            const auto p = segment_lengths(pred, r->spacing_cm_per_px).values();
            const auto g = segment_lengths(gt.landmarks_bmode, r->spacing_cm_per_px).values();
            for (std::size_t k = 0; k < kStructureCount; ++k) {
                pred_len[k].push_back(p[k]);
                gt_len[k].push_back(g[k]);
            }
        } catch (const Error& e) {
            fail(e.kind(), "clip '" + r->clip_id + "': " + e.detail());
        }
        mae_avg_mm.push_back(eval.mae_avg_cm * 10.0);
        result.rows.push_back({r->clip_id, eval});
    }

    const auto column = [&](auto getter) {
        std::vector<double> values;
        for (const EvaluationRow& row : result.rows) {
            values.push_back(getter(row.eval));
        }
        return values;
    };
    json means = json::object();
    json sds = json::object();
    const auto add = [&](const std::string& name, const std::vector<double>& values) {
        means[name] = mean(values);
        sds[name] = sample_sd(values);
    };
    for (std::size_t k = 0; k < kStructureCount; ++k) {
        const std::string name = kStructureNames[k];
        add("mae_" + name + "_cm", column([k](const SampleEval& e) { return e.mae_per_structure[k]; }));
        add("mape_" + name, column([k](const SampleEval& e) { return e.mape_per_structure[k]; }));
    }
    add("ce_cm", column([](const SampleEval& e) { return e.ce_cm; }));
    add("mae_avg_cm", column([](const SampleEval& e) { return e.mae_avg_cm; }));

    const std::vector<double> thresholds =
        options.thresholds_mm.empty() ? default_sdr_thresholds() : options.thresholds_mm;
    const SdrCurve sdr = sdr_curve(mae_avg_mm, thresholds);

    json correlation = json::object();
    json agreement = json::object();
    for (std::size_t k = 0; k < kStructureCount; ++k) {
        correlation[kStructureNames[k]] = detail::optional_pearson(pred_len[k], gt_len[k]);
        agreement[kStructureNames[k]] = detail::optional_bland_altman(pred_len[k], gt_len[k]);
    }

    // Cardiac indices, for reports that carry them and whose two clips are
    // both annotated.
    std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> index_pairs;
    std::size_t index_count = 0;
    for (const MeasurementReport* r : sorted) {
        if (!r->cardiac_indices || !by_id.contains(r->paired_clip_id)) {
            continue;
        }
        const AnnotationRecord& own = *by_id.at(r->clip_id);
        const AnnotationRecord& other = *by_id.at(r->paired_clip_id);
        if (own.phase == other.phase) {
            continue;
        }
        const SegmentLengths own_len = segment_lengths(own.landmarks_bmode, r->spacing_cm_per_px);
        const SegmentLengths other_len = segment_lengths(other.landmarks_bmode, r->spacing_cm_per_px);
        CardiacIndices truth;
        try {
            truth = own.phase == Phase::ED ? cardiac_indices({own_len, other_len}) : cardiac_indices({other_len, own_len});
        } catch (const Error&) {
            continue;
        }
        const json pred = indices_to_json(*r->cardiac_indices);
        const json gt = indices_to_json(truth);
        for (auto it = pred.begin(); it != pred.end(); ++it) {
            index_pairs[it.key()].first.push_back(it.value().get<double>());
            index_pairs[it.key()].second.push_back(gt.at(it.key()).get<double>());
        }
        ++index_count;
    }
    json index_summary = {{"pairs", index_count}, {"pearson", json::object()}, {"bland_altman", json::object()}};
    for (const auto& [name, values] : index_pairs) {
        index_summary["pearson"][name] = detail::optional_pearson(values.first, values.second);
        index_summary["bland_altman"][name] = detail::optional_bland_altman(values.first, values.second);
    }

    result.summary = {{"sample_count", result.rows.size()},
                      {"unmatched_annotations", annotations.size() - result.rows.size()},
                      {"projected_to_scanline", options.project_to_annotation_scanline},
                      {"mean", means},
                      {"sd", sds},
                      {"sdr", {{"thresholds_mm", sdr.thresholds_mm}, {"rates", sdr.rates}}},
                      {"pearson", correlation},
                      {"bland_altman", agreement},
                      {"cardiac_indices", index_summary}};
    return result;
}

inline std::string csv_field(const std::string& text) {
    if (text.find_first_of(",\"\n\r") == std::string::npos) {
        return text;
    }
    std::string out = "\"";
    for (char c : text) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    return out + "\"";
}

inline std::string evaluation_csv(const std::vector<EvaluationRow>& rows) {
    std::ostringstream out;
    out << std::setprecision(12);
    out << "id,mae_ivs,mae_lvid,mae_lvpw,mape_ivs,mape_lvid,mape_lvpw,ce,mae_avg\n";
    for (const EvaluationRow& row : rows) {
        out << csv_field(row.id);
        for (double v : row.eval.mae_per_structure) {
            out << ',' << v;
        }
        for (double v : row.eval.mape_per_structure) {
            out << ',' << v;
        }
        out << ',' << row.eval.ce_cm << ',' << row.eval.mae_avg_cm << '\n';
    }
    return out.str();
}

} // namespace lvamm
