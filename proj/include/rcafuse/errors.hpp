#pragma once

#include <stdexcept>
#include <string>

namespace rcafuse {

enum class ErrorCode {
    // ingest
    MissingUuid,
    FewerThanTwoTimestamps,
    StartNotBeforeEnd,
    MalformedTimestamp,
    TimestampOverflow,
    UnreadableFile,
    SchemaViolation,
    // drain
    EmptyCorpus,
    CorruptModelFile,
    // iforest
    TooFewSamples,
    NonFiniteInput,
    DimensionMismatch,
    // metric_summary
    NoNormalWindow,
    MissingTopology,
    // llm_gateway
    LlmExhausted,
    AuthError,
    PayloadTooLarge,
    UnknownTag,
    // rca_engine
    AllModalitiesDisabled,
    ExtractionFailure,
    // cli / pipeline
    InsufficientNormalData,
    InvalidSpec,
    InvalidConfig,
    IoError,
};

const char* to_string(ErrorCode code);

// Single exception type for all named pipeline failures; the code is what
// callers and tests dispatch on, the message carries context.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& detail)
        : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace rcafuse
