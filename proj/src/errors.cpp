#include "regclust/errors.hpp"

namespace regclust {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::NonMonotonicGrid: return "NonMonotonicGrid";
        case ErrorCode::RaggedSeries: return "RaggedSeries";
        case ErrorCode::NonFiniteValue: return "NonFiniteValue";
        case ErrorCode::InvalidStructure: return "InvalidStructure";
        case ErrorCode::InvalidModel: return "InvalidModel";
        case ErrorCode::DegreeTooLargeForGrid: return "DegreeTooLargeForGrid";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::NonFiniteObjective: return "NonFiniteObjective";
        case ErrorCode::EmptyComponent: return "EmptyComponent";
        case ErrorCode::AllRestartsFailed: return "AllRestartsFailed";
        case ErrorCode::InsufficientSegmentLength: return "InsufficientSegmentLength";
        case ErrorCode::ContiguityViolation: return "ContiguityViolation";
        case ErrorCode::NoFeasibleCell: return "NoFeasibleCell";
        case ErrorCode::LabelOutOfRange: return "LabelOutOfRange";
        case ErrorCode::InvalidSpec: return "InvalidSpec";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::MissingLabels: return "MissingLabels";
    }
    return "Unknown";
}

ErrorCategory category_of(ErrorCode code) {
    switch (code) {
        case ErrorCode::NonFiniteObjective:
        case ErrorCode::EmptyComponent:
        case ErrorCode::AllRestartsFailed:
        case ErrorCode::NoFeasibleCell:
            return ErrorCategory::Numerical;
        case ErrorCode::ContiguityViolation:
            return ErrorCategory::Internal;
        default:
            return ErrorCategory::Data;
    }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace regclust
