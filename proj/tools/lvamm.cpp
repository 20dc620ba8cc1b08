// lvamm: command-line entry points for AMM-based left-ventricle linear
// measurement.
//
//   lvamm phantom   synthetic dataset (frames, manifests, annotations)
//   lvamm amm       AMM image for a manifest + scanline, as PNG
//   lvamm measure   landmarks, lengths (and indices for ED/ES pairs) as JSON
//   lvamm evaluate  per-sample CSV + summary JSON against annotations
//   lvamm serve     HTTP service
//
// Exit codes: 0 success, 2 input error, 3 processing error.

#include "lvamm/phantom_io.hpp"
#include "lvamm/pipeline.hpp"
#include "lvamm/service.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace lvamm;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitProcessing = 3;

Scanline parse_scanline(const std::string& text) {
    std::vector<double> values;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        try {
            std::size_t used = 0;
            values.push_back(std::stod(item, &used));
            if (used != item.size()) {
                throw std::invalid_argument(item);
            }
        } catch (const std::exception&) {
            fail(ErrorKind::InvalidArgument, "scanline '" + text + "' is not x0,y0,x1,y1");
        }
    }
    if (values.size() != 4) {
        fail(ErrorKind::InvalidArgument, "scanline '" + text + "' is not x0,y0,x1,y1");
    }
    return {{values[0], values[1]}, {values[2], values[3]}};
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> values;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        try {
            values.push_back(std::stod(item));
        } catch (const std::exception&) {
            fail(ErrorKind::InvalidArgument, "'" + text + "' is not a comma-separated number list");
        }
    }
    return values;
}

/// Pipeline settings shared by amm / measure / serve: defaults, then the
/// config file, then explicit flags.
struct ConfigFlags {
    std::string config_path;
    std::size_t v_count = kDefaultVCount;
    std::size_t w_count = kDefaultWCount;
    double sigma = 2.0;
    double softmax_beta = 20.0;
    std::string detector;
    CLI::Option* v_opt = nullptr;
    CLI::Option* w_opt = nullptr;
    CLI::Option* sigma_opt = nullptr;
    CLI::Option* beta_opt = nullptr;
    CLI::Option* detector_opt = nullptr;

    void add_to(CLI::App* app, bool with_detector) {
        app->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
        v_opt = app->add_option("--v-count", v_count, "samples along the scanline (AMM rows)");
        w_opt = app->add_option("--w-count", w_count, "frames per clip (AMM columns)");
        sigma_opt = app->add_option("--sigma", sigma, "heatmap Gaussian width in AMM pixels");
        beta_opt = app->add_option("--softmax-beta", softmax_beta, "inverse temperature of the column softmax");
        if (with_detector) {
            detector_opt = app->add_option("--detector", detector,
                                           "baseline-gradient or external-file:<stem>");
        }
    }

    PipelineConfig resolve() const {
        PipelineConfig cfg;
        if (!config_path.empty()) {
            cfg = config_from_json(read_json_file(config_path));
        }
        if (v_opt->count()) cfg.v_count = v_count;
        if (w_opt->count()) cfg.w_count = w_count;
        if (sigma_opt->count()) cfg.sigma = sigma;
        if (beta_opt->count()) cfg.softmax_beta = softmax_beta;
        if (detector_opt && detector_opt->count()) cfg.detector = detector;
        return config_from_json(config_to_json(cfg));
    }
};

void write_output(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
    } else {
        write_text_file(path, text);
    }
}

std::optional<Scanline> scanline_from_annotations(const std::string& path, const std::string& clip_id) {
    for (const AnnotationRecord& a : annotations_from_json(read_json_file(path))) {
        if (a.clip_id == clip_id) {
            return a.scanline;
        }
    }
    return std::nullopt;
}

int run_phantom(const std::string& out_dir, std::size_t count, std::uint64_t seed, double noise_sd, double spacing,
                std::size_t frames, double tilt_deg) {
    fs::create_directories(out_dir);
    std::mt19937_64 rng(seed);
    std::vector<AnnotationRecord> annotations;
    json index = json::array();
    for (std::size_t i = 0; i < count; ++i) {
        PhantomSpec base;
        base.noise_sd = noise_sd;
        base.frame_count = frames;
        const PhantomSpec spec = random_phantom_spec(rng, base);
        const double angle = i % 3 == 0 ? 0.0 : (i % 3 == 1 ? tilt_deg : -tilt_deg);
        const Scanline sl = random_phantom_scanline(rng, spec, angle);
        char id[32];
        std::snprintf(id, sizeof id, "phantom_%03zu", i);
        const PhantomDataset data = emit_phantom(spec, id, sl, spacing, out_dir);
        annotations.insert(annotations.end(), data.annotations.begin(), data.annotations.end());
        index.push_back({{"id", id},
                         {"ed_manifest", data.ed.id + ".json"},
                         {"es_manifest", data.es.id + ".json"},
                         {"scanline", scanline_to_json(sl)},
                         {"seed", spec.seed},
                         {"baseline_rows", spec.baseline_rows},
                         {"amplitudes_px", spec.amplitudes_px}});
    }
    json records = json::array();
    for (const AnnotationRecord& a : annotations) {
        records.push_back(annotation_to_json(a));
    }
    write_text_file(fs::path(out_dir) / "annotations.json", dump_pretty(records));
    write_text_file(fs::path(out_dir) / "index.json",
                    dump_pretty({{"coordinate_convention", kCoordinateConvention}, {"phantoms", index}}));
    std::cerr << "wrote " << count << " phantoms to " << out_dir << '\n';
    return 0;
}

std::vector<fs::path> expand_reports(const std::vector<std::string>& inputs) {
    std::vector<fs::path> files;
    for (const std::string& input : inputs) {
        if (fs::is_directory(input)) {
            for (const auto& entry : fs::directory_iterator(input)) {
                if (entry.is_regular_file() && entry.path().extension() == ".json") {
                    files.push_back(entry.path());
                }
            }
        } else {
            files.emplace_back(input);
        }
    }
    std::sort(files.begin(), files.end());
    return files;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"AMM-based left-ventricle linear measurement"};
    app.require_subcommand(1);

    // phantom
    auto* phantom = app.add_subcommand("phantom", "emit a synthetic dataset");
    std::string phantom_out;
    std::size_t phantom_count = 10;
    std::uint64_t phantom_seed = 1;
    double phantom_noise = 0.02;
    double phantom_spacing = 0.05;
    std::size_t phantom_frames = 30;
    double phantom_tilt = 30.0;
    phantom->add_option("--out", phantom_out, "output directory")->required();
    phantom->add_option("--count", phantom_count, "number of phantoms");
    phantom->add_option("--seed", phantom_seed, "random seed");
    phantom->add_option("--noise-sd", phantom_noise, "additive Gaussian noise sd");
    phantom->add_option("--spacing", phantom_spacing, "pixel spacing in cm/px");
    phantom->add_option("--frames", phantom_frames, "frames per video");
    phantom->add_option("--tilt-deg", phantom_tilt, "scanline tilt used for two of every three phantoms");

    // amm
    auto* amm = app.add_subcommand("amm", "render the AMM image for a scanline");
    std::string amm_manifest, amm_scanline, amm_out, amm_meta;
    ConfigFlags amm_flags;
    amm->add_option("--manifest", amm_manifest, "clip manifest JSON")->required();
    amm->add_option("--scanline", amm_scanline, "x0,y0,x1,y1 in pixels")->required();
    amm->add_option("--out", amm_out, "output PNG")->required();
    amm->add_option("--meta", amm_meta, "optional JSON with sample-path metadata");
    amm_flags.add_to(amm, false);

    // measure
    auto* measure_cmd = app.add_subcommand("measure", "measure IVS / LVID / LVPW along a scanline");
    std::string m_manifest, m_paired, m_scanline, m_scanline_from, m_out, m_heatmaps_out;
    ConfigFlags m_flags;
    measure_cmd->add_option("--manifest", m_manifest, "clip manifest JSON")->required();
    measure_cmd->add_option("--paired", m_paired, "manifest of the opposite phase (adds cardiac indices)");
    auto* sl_opt = measure_cmd->add_option("--scanline", m_scanline, "x0,y0,x1,y1 in pixels");
    auto* sl_from_opt =
        measure_cmd->add_option("--scanline-from", m_scanline_from, "annotation file holding this clip's scanline");
    sl_opt->excludes(sl_from_opt);
    measure_cmd->add_option("--out", m_out, "report JSON (stdout when omitted)");
    measure_cmd->add_option("--heatmaps-out", m_heatmaps_out, "also write predicted heatmaps as <stem>.hmraw/.hmmeta");
    m_flags.add_to(measure_cmd, true);

    // evaluate
    auto* eval_cmd = app.add_subcommand("evaluate", "score reports against annotations");
    std::vector<std::string> e_reports;
    std::string e_annotations, e_thresholds, e_csv, e_summary;
    bool e_project = false;
    eval_cmd->add_option("--reports", e_reports, "report files or directories")->required();
    eval_cmd->add_option("--annotations", e_annotations, "annotation JSON array")->required();
    eval_cmd->add_option("--thresholds", e_thresholds, "SDR thresholds in mm, comma separated (default 0..6 step 0.5)");
    eval_cmd->add_option("--csv", e_csv, "per-sample CSV output")->required();
    eval_cmd->add_option("--summary", e_summary, "summary JSON output")->required();
    eval_cmd->add_flag("--project", e_project, "project predicted landmarks onto the annotated scanline first");

    // serve
    auto* serve = app.add_subcommand("serve", "run the HTTP measurement service");
    std::string s_host = "127.0.0.1", s_origin, s_heatmap_root;
    int s_port = 8080;
    double s_ttl_min = 30.0;
    std::size_t s_max_mb = 256;
    ConfigFlags s_flags;
    serve->add_option("--host", s_host, "bind address");
    serve->add_option("--port", s_port, "bind port (0 picks a free port)");
    serve->add_option("--allow-origin", s_origin, "CORS origin allowed to call the service");
    serve->add_option("--ttl-min", s_ttl_min, "session time-to-live in minutes");
    serve->add_option("--max-upload-mb", s_max_mb, "upload size limit");
    serve->add_option("--heatmap-root", s_heatmap_root, "directory for external-file heatmaps");
    s_flags.add_to(serve, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitInput;
    }

    try {
        if (*phantom) {
            return run_phantom(phantom_out, phantom_count, phantom_seed, phantom_noise, phantom_spacing,
                               phantom_frames, phantom_tilt);
        }
        if (*amm) {
            const PipelineConfig cfg = amm_flags.resolve();
            const LoadedClip loaded = load_manifest(amm_manifest, cfg.w_count);
            const AmmImage image = synthesize_amm(loaded.clip, parse_scanline(amm_scanline), cfg.v_count);
            write_file_bytes(amm_out, encode_amm_png(image));
            if (!amm_meta.empty()) {
                write_text_file(amm_meta, dump_pretty(amm_metadata_json(image)));
            }
            return 0;
        }
        if (*measure_cmd) {
            const PipelineConfig cfg = m_flags.resolve();
            const LoadedClip loaded = load_manifest(m_manifest, cfg.w_count);
            Scanline sl;
            if (!m_scanline.empty()) {
                sl = parse_scanline(m_scanline);
            } else if (!m_scanline_from.empty()) {
                const auto found = scanline_from_annotations(m_scanline_from, loaded.manifest.id);
                if (!found) {
                    fail(ErrorKind::UnmatchedSample, "no annotation for clip '" + loaded.manifest.id + "'");
                }
                sl = *found;
            } else {
                fail(ErrorKind::InvalidArgument, "measure needs --scanline or --scanline-from");
            }
            MeasurementReport report;
            if (!m_paired.empty()) {
                report = measure_paired(loaded, load_manifest(m_paired, cfg.w_count), sl, cfg);
            } else {
                const MeasurementTrace trace = measure_traced(loaded, sl, cfg);
                report = trace.report;
                if (!m_heatmaps_out.empty()) {
                    write_heatmap_files(trace.heatmaps, m_heatmaps_out);
                }
            }
            write_output(m_out, dump_pretty(report_to_json(report)));
            return 0;
        }
        if (*eval_cmd) {
            std::vector<MeasurementReport> reports;
            for (const fs::path& file : expand_reports(e_reports)) {
                reports.push_back(report_from_json(read_json_file(file)));
            }
            const auto annotations = annotations_from_json(read_json_file(e_annotations));
            EvaluationOptions options;
            if (!e_thresholds.empty()) {
                options.thresholds_mm = parse_list(e_thresholds);
            }
            options.project_to_annotation_scanline = e_project;
            const EvaluationResult result = evaluate(reports, annotations, options);
            write_text_file(e_csv, evaluation_csv(result.rows));
            write_text_file(e_summary, dump_pretty(result.summary));
            return 0;
        }
        if (*serve) {
            ServiceOptions options;
            options.config = s_flags.resolve();
            options.allow_origin = s_origin;
            options.session_ttl = std::chrono::seconds(static_cast<long long>(s_ttl_min * 60.0));
            options.max_upload_bytes = s_max_mb * 1024u * 1024u;
            options.heatmap_root = s_heatmap_root;
            MeasureService service(options);
            httplib::Server server;
            service.mount(server);
            int port = s_port;
            if (port == 0) {
                port = server.bind_to_any_port(s_host);
            } else if (!server.bind_to_port(s_host, port)) {
                port = -1;
            }
            if (port < 0) {
                std::cerr << "lvamm: cannot bind " << s_host << ':' << s_port << '\n';
                return kExitInput;
            }
            std::cout << "listening on http://" << s_host << ':' << port << std::endl;
            return server.listen_after_bind() ? 0 : kExitProcessing;
        }
    } catch (const Error& e) {
        std::cerr << "lvamm: " << e.what() << '\n';
        return is_input_error(e.kind()) ? kExitInput : kExitProcessing;
    } catch (const std::exception& e) {
        std::cerr << "lvamm: " << e.what() << '\n';
        return kExitProcessing;
    }
    return 0;
}
