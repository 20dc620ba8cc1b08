#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lvamm {

enum class ErrorKind {
    DegenerateScanline,
    OutOfFrame,
    EmptyVideo,
    IndexOutOfRange,
    CoordinateOutOfGrid,
    NonFiniteScore,
    UnknownDetector,
    ShapeMismatch,
    NoEdgesFound,
    UnorderedLandmarks,
    ZeroGroundTruthLength,
    CountMismatch,
    EmptySampleSet,
    ZeroVariance,
    ZeroDiastolicDiameter,
    NonPositiveLength,
    ZeroEDV,
    OrderingViolation,
    NoIntersection,
    MissingFile,
    DimensionMismatch,
    MalformedManifest,
    UnmatchedSample,
    InvalidArgument,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::DegenerateScanline: return "DegenerateScanline";
    case ErrorKind::OutOfFrame: return "OutOfFrame";
    case ErrorKind::EmptyVideo: return "EmptyVideo";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::CoordinateOutOfGrid: return "CoordinateOutOfGrid";
    case ErrorKind::NonFiniteScore: return "NonFiniteScore";
    case ErrorKind::UnknownDetector: return "UnknownDetector";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::NoEdgesFound: return "NoEdgesFound";
    case ErrorKind::UnorderedLandmarks: return "UnorderedLandmarks";
    case ErrorKind::ZeroGroundTruthLength: return "ZeroGroundTruthLength";
    case ErrorKind::CountMismatch: return "CountMismatch";
    case ErrorKind::EmptySampleSet: return "EmptySampleSet";
    case ErrorKind::ZeroVariance: return "ZeroVariance";
    case ErrorKind::ZeroDiastolicDiameter: return "ZeroDiastolicDiameter";
    case ErrorKind::NonPositiveLength: return "NonPositiveLength";
    case ErrorKind::ZeroEDV: return "ZeroEDV";
    case ErrorKind::OrderingViolation: return "OrderingViolation";
    case ErrorKind::NoIntersection: return "NoIntersection";
    case ErrorKind::MissingFile: return "MissingFile";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::MalformedManifest: return "MalformedManifest";
    case ErrorKind::UnmatchedSample: return "UnmatchedSample";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

/// Input errors are caused by what the caller handed in (bad files, bad
/// scanline); everything else is a failure while processing valid input.
constexpr bool is_input_error(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::DegenerateScanline:
    case ErrorKind::OutOfFrame:
    case ErrorKind::EmptyVideo:
    case ErrorKind::UnknownDetector:
    case ErrorKind::ShapeMismatch:
    case ErrorKind::MissingFile:
    case ErrorKind::DimensionMismatch:
    case ErrorKind::MalformedManifest:
    case ErrorKind::UnmatchedSample:
    case ErrorKind::InvalidArgument:
        return true;
    default:
        return false;
    }
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind), detail_(message) {}

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorKind kind_;
    std::string detail_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

} // namespace lvamm
