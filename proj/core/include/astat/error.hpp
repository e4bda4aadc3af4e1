#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace astat {

enum class ErrorKind {
  UnboundedTruncation,
  NonFiniteValue,
  NegativeSpike,
  NegativePerturbation,
  DomainError,
  IndexError,
  InvalidSchedule,
  InconsistentInputs,
  ThresholdError,
  NoDeltaFound,
  ParseError,
  ConfigError,
  UnknownSequence,
  UnknownMatrix,
  UnknownFunction,
  IoError,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the library carries a machine-readable kind so the
// CLI can emit it as JSON.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace astat
