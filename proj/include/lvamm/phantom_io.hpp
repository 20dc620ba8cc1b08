#pragma once

#include "lvamm/phantom.hpp"
#include "lvamm/pipeline.hpp"
#include "lvamm/png_io.hpp"

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

namespace lvamm {

struct PhantomDataset {
    ClipManifest ed;
    ClipManifest es;
    std::vector<AnnotationRecord> annotations;
};

inline std::string frame_file_name(std::size_t index) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%04zu.png", index);
    return name;
}

/// Writes every frame of `spec` as PNG under `dir/<id>/`, plus ED and ES
/// manifests `dir/<id>_ED.json`, `dir/<id>_ES.json`. Returns the manifests
/// and ground-truth annotations along `sl` at both anchor frames.
inline PhantomDataset emit_phantom(const PhantomSpec& spec, const std::string& id, const Scanline& sl,
                                   double spacing_cm_per_px, const std::filesystem::path& dir) {
    validate_phantom(spec);
    std::filesystem::create_directories(dir / id);
    std::vector<std::string> files;
    for (std::size_t i = 0; i < spec.frame_count; ++i) {
        const std::string rel = id + "/" + frame_file_name(i);
        write_png(dir / rel, render_frame(spec, i), {});
        files.push_back(rel);
    }

    PhantomDataset out;
    const auto manifest_for = [&](Phase phase, std::size_t anchor) {
        ClipManifest m;
        m.id = id + "_" + to_string(phase);
        m.frame_files = files;
        m.anchor_index = anchor;
        m.phase = phase;
        m.spacing_cm_per_px = spacing_cm_per_px;
        m.frame_interval_s = spec.frame_interval_s;
        write_text_file(dir / (m.id + ".json"), dump_pretty(manifest_to_json(m)));
        out.annotations.push_back({m.id, sl, ground_truth_landmarks(spec, frame_time(spec, anchor), sl), phase});
        return m;
    };
    out.ed = manifest_for(Phase::ED, phantom_ed_frame(spec));
    out.es = manifest_for(Phase::ES, phantom_es_frame(spec));
    return out;
}

} // namespace lvamm
