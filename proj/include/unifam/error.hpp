#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace unifam {

enum class ErrorCode {
  InvalidArgument,
  ZeroVector,
  NotNormalized,
  WindowOverflow,
  NotHermitian,
  NotPositive,
  TraceNotOne,
  ShiftLeak,
  NotTracePreserving,
  KrausOnState,
  NotInvertible,
  NotUnitary,
  BadWeights,
  BudgetExceeded,
  SchemaError,
};

/// Machine-readable name, e.g. "NotPositive".
std::string_view error_name(ErrorCode code) noexcept;

/// All library failures. what() is "<Name>: <detail>".
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail);

  ErrorCode code() const noexcept { return code_; }
  std::string_view name() const noexcept { return error_name(code_); }

 private:
  ErrorCode code_;
};

}  // namespace unifam
