#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace finsler {

enum class ErrorCode {
  DivisionByZeroJet,
  BasePointMismatch,
  DomainError,
  ZeroTangent,
  ZeroRadius,
  SingularDenominator,
  NonpositivePhi,
  NonFinite,
  DomainExit,
  InsufficientPoints,
  SingularIntegrand,
  QuadratureFailure,
  CompatibilityFailure,
  PositivityFailure,
  UnknownEntry,
  ParamOutOfRange,
  InvalidConfig,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the library; the code says which contract broke.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace finsler
