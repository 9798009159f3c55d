#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rsbench {

enum class ErrorKind {
    // raster-core
    UnsupportedFormat,
    CorruptHeader,
    DimensionMismatch,
    IoFailure,
    DegenerateInput,
    InvalidArgument,
    // geodesy
    OutOfDomain,
    // align
    InsufficientOverlap,
    CrsMismatch,
    AllPixelsFlagged,
    // catalog
    EmptyCatalog,
    InsufficientStratum,
    InsufficientClassSamples,
    NoPairsFound,
    DuplicateId,
    // evalbench
    DegenerateGroundTruth,
    NonPositiveDepth,
    EmptyMask,
    MissingPrediction,
    // diffusion
    InvalidSchedule,
    ShapeMismatch,
    StepOutOfRange,
    ContractViolation,
    BandMismatch,
    // review
    InvalidPage,
    SampleNotFound,
    TileUnreadable,
    MalformedVerdict,
    // cli
    UnknownSubcommand,
    ConfigError,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Single exception type for the toolkit; callers switch on kind().
/// `ids` carries offending sample ids where an error names several (MissingPrediction).
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message, std::vector<std::string> ids = {})
        : std::runtime_error(std::string(to_string(kind)) + ": " + message),
          kind_(kind),
          ids_(std::move(ids)) {}

    ErrorKind kind() const noexcept { return kind_; }
    const std::vector<std::string>& ids() const noexcept { return ids_; }

    /// True for failures caused by the filesystem rather than by the data.
    bool is_io() const noexcept {
        return kind_ == ErrorKind::IoFailure || kind_ == ErrorKind::TileUnreadable;
    }

private:
    ErrorKind kind_;
    std::vector<std::string> ids_;
};

}  // namespace rsbench
