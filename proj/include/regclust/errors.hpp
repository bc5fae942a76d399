#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace regclust {

enum class ErrorCode {
    NonMonotonicGrid,
    RaggedSeries,
    NonFiniteValue,
    InvalidStructure,
    InvalidModel,
    DegreeTooLargeForGrid,
    DimensionMismatch,
    NonFiniteObjective,
    EmptyComponent,
    AllRestartsFailed,
    InsufficientSegmentLength,
    ContiguityViolation,
    NoFeasibleCell,
    LabelOutOfRange,
    InvalidSpec,
    IoError,
    MissingLabels,
};

std::string_view to_string(ErrorCode code);

/// Broad failure category, used by the CLI to pick an exit code.
enum class ErrorCategory { Data, Numerical, Internal };

ErrorCategory category_of(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace regclust
