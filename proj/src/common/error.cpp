#include "rsbench/error.hpp"

namespace rsbench {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::UnsupportedFormat: return "UnsupportedFormat";
        case ErrorKind::CorruptHeader: return "CorruptHeader";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::IoFailure: return "IoFailure";
        case ErrorKind::DegenerateInput: return "DegenerateInput";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::OutOfDomain: return "OutOfDomain";
        case ErrorKind::InsufficientOverlap: return "InsufficientOverlap";
        case ErrorKind::CrsMismatch: return "CrsMismatch";
        case ErrorKind::AllPixelsFlagged: return "AllPixelsFlagged";
        case ErrorKind::EmptyCatalog: return "EmptyCatalog";
        case ErrorKind::InsufficientStratum: return "InsufficientStratum";
        case ErrorKind::InsufficientClassSamples: return "InsufficientClassSamples";
        case ErrorKind::NoPairsFound: return "NoPairsFound";
        case ErrorKind::DuplicateId: return "DuplicateId";
        case ErrorKind::DegenerateGroundTruth: return "DegenerateGroundTruth";
        case ErrorKind::NonPositiveDepth: return "NonPositiveDepth";
        case ErrorKind::EmptyMask: return "EmptyMask";
        case ErrorKind::MissingPrediction: return "MissingPrediction";
        case ErrorKind::InvalidSchedule: return "InvalidSchedule";
        case ErrorKind::ShapeMismatch: return "ShapeMismatch";
        case ErrorKind::StepOutOfRange: return "StepOutOfRange";
        case ErrorKind::ContractViolation: return "ContractViolation";
        case ErrorKind::BandMismatch: return "BandMismatch";
        case ErrorKind::InvalidPage: return "InvalidPage";
        case ErrorKind::SampleNotFound: return "SampleNotFound";
        case ErrorKind::TileUnreadable: return "TileUnreadable";
        case ErrorKind::MalformedVerdict: return "MalformedVerdict";
        case ErrorKind::UnknownSubcommand: return "UnknownSubcommand";
        case ErrorKind::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

}  // namespace rsbench
