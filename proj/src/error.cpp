#include "scrambench/error.hpp"

namespace scrambench {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SlotOverflow: return "SlotOverflow";
    case ErrorCode::DuplicateSubmission: return "DuplicateSubmission";
    case ErrorCode::ModulusMismatch: return "ModulusMismatch";
    case ErrorCode::ServerIndexMismatch: return "ServerIndexMismatch";
    case ErrorCode::LayoutMismatch: return "LayoutMismatch";
    case ErrorCode::UnknownCohort: return "UnknownCohort";
    case ErrorCode::MissingPartial: return "MissingPartial";
    case ErrorCode::CohortTooSmall: return "CohortTooSmall";
    case ErrorCode::NoInformativeAnchor: return "NoInformativeAnchor";
    case ErrorCode::NoLossData: return "NoLossData";
    case ErrorCode::ProtocolError: return "ProtocolError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::BindFailure: return "BindFailure";
    }
    return "Unknown";
}

} // namespace scrambench
