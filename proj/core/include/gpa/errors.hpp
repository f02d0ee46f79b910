#pragma once

#include <stdexcept>
#include <string>

namespace gpa {

enum class ErrorCode {
    // trace model
    MalformedDocument,
    DuplicateSpanId,
    UnknownSpan,
    UnknownImpactLevel,
    EmptySpanSet,
    UnknownJudgeId,
    EmptyJudgeSet,
    // preprocess
    NoAgentSpans,
    // judge core
    MissingPlaceholder,
    BackendExhausted,
    CacheMissInReplayMode,
    MissingScore,
    ScoreOutOfRange,
    // matching
    TraceMismatch,
    UnknownErrorRef,
    InconsistentEntry,
    UnmappedError,
    // metrics
    LengthMismatch,
    EmptyInput,
    ZeroVector,
    DimensionMismatch,
    InsufficientData,
    // harness
    CoverageGap,
    ValidationFailure,
    DatasetMismatch,
    IoError,
    BadConfig,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
          code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

}  // namespace gpa
