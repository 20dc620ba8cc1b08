#pragma once

// Cardiac function indices from end-diastolic / end-systolic linear
// dimensions. Mass uses the ASE cube (Devereux) formula and volumes the
// Teichholz formula; both are conventions, reports label them as such.

#include "lvamm/error.hpp"
#include "lvamm/metrics.hpp"

#include <string>

namespace lvamm {

inline constexpr const char* kLvMassFormula = "ASE cube: 0.8*1.04*((IVS+LVID+LVPW)^3 - LVID^3) + 0.6";
inline constexpr const char* kVolumeFormula = "Teichholz: 7.0/(2.4+D)*D^3";

struct PairedMeasurement {
    SegmentLengths ed;
    SegmentLengths es;
};

struct CardiacIndices {
    double fs_fraction = 0.0;
    double rwt_ratio = 0.0;
    double lvm_g = 0.0;
    double edv_ml = 0.0;
    double esv_ml = 0.0;
    double ef_fraction = 0.0;
};

inline double fractional_shortening(double ed_lvid, double es_lvid) {
    if (!(ed_lvid > 0.0)) {
        fail(ErrorKind::ZeroDiastolicDiameter, "end-diastolic LVID must be positive");
    }
    return (ed_lvid - es_lvid) / ed_lvid;
}

inline double relative_wall_thickness(double ed_lvpw, double ed_lvid) {
    if (!(ed_lvid > 0.0)) {
        fail(ErrorKind::ZeroDiastolicDiameter, "end-diastolic LVID must be positive");
    }
    return 2.0 * ed_lvpw / ed_lvid;
}

/// LV mass in grams from end-diastolic lengths in cm. Walls of zero
/// thickness are accepted and give the 0.6 g intercept.
inline double lv_mass(const SegmentLengths& ed) {
    if (!(ed.lvid_cm > 0.0) || ed.ivs_cm < 0.0 || ed.lvpw_cm < 0.0) {
        fail(ErrorKind::NonPositiveLength, "LV mass needs LVID > 0 and non-negative wall thickness");
    }
    const double outer = ed.ivs_cm + ed.lvid_cm + ed.lvpw_cm;
    const double inner = ed.lvid_cm;
    return 0.8 * 1.04 * (outer * outer * outer - inner * inner * inner) + 0.6;
}

inline double teichholz_volume(double lvid_cm) {
    if (!(lvid_cm > 0.0)) {
        fail(ErrorKind::NonPositiveLength, "Teichholz volume needs a positive diameter");
    }
    return 7.0 / (2.4 + lvid_cm) * lvid_cm * lvid_cm * lvid_cm;
}

inline double ejection_fraction(double edv, double esv) {
    if (!(edv > 0.0)) {
        fail(ErrorKind::ZeroEDV, "end-diastolic volume must be positive");
    }
    return (edv - esv) / edv;
}

inline CardiacIndices cardiac_indices(const PairedMeasurement& m) {
    CardiacIndices out;
    out.fs_fraction = fractional_shortening(m.ed.lvid_cm, m.es.lvid_cm);
    out.rwt_ratio = relative_wall_thickness(m.ed.lvpw_cm, m.ed.lvid_cm);
    out.lvm_g = lv_mass(m.ed);
    out.edv_ml = teichholz_volume(m.ed.lvid_cm);
    out.esv_ml = teichholz_volume(m.es.lvid_cm);
    out.ef_fraction = ejection_fraction(out.edv_ml, out.esv_ml);
    return out;
}

} // namespace lvamm
