#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace seamcam {

enum class ErrorCode {
    MalformedRle,
    ShapeMismatch,
    EmptyInput,
    ConfigError,
    InvalidRequest,
    ParseError,
    VersionError,
    DegenerateTable,
    InvalidCounts,
    LengthMismatch,
    ZeroVariance,
    NoEvaluablePairs,
    InsufficientData,
    EmptyCandidates,
    SessionComplete,
    UnknownParticipant,
    DuplicateVote,
    UnknownTrial,
    IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so that
/// the CLI and the HTTP layer can report it in machine-readable form.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string &message)
        : std::runtime_error(message), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace seamcam
