#include "rcafuse/errors.hpp"

namespace rcafuse {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::MissingUuid: return "MissingUuid";
        case ErrorCode::FewerThanTwoTimestamps: return "FewerThanTwoTimestamps";
        case ErrorCode::StartNotBeforeEnd: return "StartNotBeforeEnd";
        case ErrorCode::MalformedTimestamp: return "MalformedTimestamp";
        case ErrorCode::TimestampOverflow: return "TimestampOverflow";
        case ErrorCode::UnreadableFile: return "UnreadableFile";
        case ErrorCode::SchemaViolation: return "SchemaViolation";
        case ErrorCode::EmptyCorpus: return "EmptyCorpus";
        case ErrorCode::CorruptModelFile: return "CorruptModelFile";
        case ErrorCode::TooFewSamples: return "TooFewSamples";
        case ErrorCode::NonFiniteInput: return "NonFiniteInput";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::NoNormalWindow: return "NoNormalWindow";
        case ErrorCode::MissingTopology: return "MissingTopology";
        case ErrorCode::LlmExhausted: return "LlmExhausted";
        case ErrorCode::AuthError: return "AuthError";
        case ErrorCode::PayloadTooLarge: return "PayloadTooLarge";
        case ErrorCode::UnknownTag: return "UnknownTag";
        case ErrorCode::AllModalitiesDisabled: return "AllModalitiesDisabled";
        case ErrorCode::ExtractionFailure: return "ExtractionFailure";
        case ErrorCode::InsufficientNormalData: return "InsufficientNormalData";
        case ErrorCode::InvalidSpec: return "InvalidSpec";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::IoError: return "IoError";
    }
    return "UnknownError";
}

}  // namespace rcafuse
