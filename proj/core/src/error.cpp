#include "astat/error.hpp"

namespace astat {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::UnboundedTruncation: return "UnboundedTruncation";
    case ErrorKind::NonFiniteValue: return "NonFiniteValue";
    case ErrorKind::NegativeSpike: return "NegativeSpike";
    case ErrorKind::NegativePerturbation: return "NegativePerturbation";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::IndexError: return "IndexError";
    case ErrorKind::InvalidSchedule: return "InvalidSchedule";
    case ErrorKind::InconsistentInputs: return "InconsistentInputs";
    case ErrorKind::ThresholdError: return "ThresholdError";
    case ErrorKind::NoDeltaFound: return "NoDeltaFound";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::UnknownSequence: return "UnknownSequence";
    case ErrorKind::UnknownMatrix: return "UnknownMatrix";
    case ErrorKind::UnknownFunction: return "UnknownFunction";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace astat
