#include "unifam/error.hpp"

namespace unifam {

std::string_view error_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::WindowOverflow: return "WindowOverflow";
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::NotPositive: return "NotPositive";
    case ErrorCode::TraceNotOne: return "TraceNotOne";
    case ErrorCode::ShiftLeak: return "ShiftLeak";
    case ErrorCode::NotTracePreserving: return "NotTracePreserving";
    case ErrorCode::KrausOnState: return "KrausOnState";
    case ErrorCode::NotInvertible: return "NotInvertible";
    case ErrorCode::NotUnitary: return "NotUnitary";
    case ErrorCode::BadWeights: return "BadWeights";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::SchemaError: return "SchemaError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(error_name(code)) + ": " + detail), code_(code) {}

}  // namespace unifam
