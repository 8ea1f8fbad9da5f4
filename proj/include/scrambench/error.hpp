#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace scrambench {

enum class ErrorCode {
    InvalidInput,
    ParseError,
    SlotOverflow,
    DuplicateSubmission,
    ModulusMismatch,
    ServerIndexMismatch,
    LayoutMismatch,
    UnknownCohort,
    MissingPartial,
    CohortTooSmall,
    NoInformativeAnchor,
    NoLossData,
    ProtocolError,
    IoError,
    BindFailure,
};

std::string_view to_string(ErrorCode code);

/// Base exception for all library faults. Validation problems in a
/// questionnaire are reported as data (see Violation), not thrown.
class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string &what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

} // namespace scrambench
