#pragma once

#include <stdexcept>
#include <string>

namespace pv {

// Every failure surfaced by the library carries one of these codes. The CLI
// maps the category (config / io / data) onto its exit status.
enum class ErrorCode {
    // imagery
    MalformedHeader,
    TruncatedData,
    ChannelCount,
    AnnotationParse,
    InvalidPolygon,
    ManifestParse,
    ManifestContract,
    // features / forest
    InvalidSpec,
    InvalidParams,
    DegenerateTrainingSet,
    DimensionMismatch,
    EmptyNode,
    ModelVersion,
    ModelChecksum,
    ModelMalformed,
    // detection / scoring
    InvalidMap,
    EmptySets,
    NoPositives,
    NoAnnotations,
    // synth
    PlacementFailed,
    // cli / io
    Config,
    Io,
};

enum class ErrorCategory { Config, Io, Data };

inline ErrorCategory category(ErrorCode code)
{
    switch (code) {
    case ErrorCode::Config:
    case ErrorCode::InvalidSpec:
    case ErrorCode::InvalidParams:
        return ErrorCategory::Config;
    case ErrorCode::Io:
        return ErrorCategory::Io;
    default:
        return ErrorCategory::Data;
    }
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code)
    {
    }

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace pv
