#include "seamcam/error.hpp"

namespace seamcam {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::MalformedRle: return "MalformedRle";
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::InvalidRequest: return "InvalidRequest";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::VersionError: return "VersionError";
        case ErrorCode::DegenerateTable: return "DegenerateTable";
        case ErrorCode::InvalidCounts: return "InvalidCounts";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::ZeroVariance: return "ZeroVariance";
        case ErrorCode::NoEvaluablePairs: return "NoEvaluablePairs";
        case ErrorCode::InsufficientData: return "InsufficientData";
        case ErrorCode::EmptyCandidates: return "EmptyCandidates";
        case ErrorCode::SessionComplete: return "SessionComplete";
        case ErrorCode::UnknownParticipant: return "UnknownParticipant";
        case ErrorCode::DuplicateVote: return "DuplicateVote";
        case ErrorCode::UnknownTrial: return "UnknownTrial";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

}  // namespace seamcam
