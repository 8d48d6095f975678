#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace finsler {

enum class ErrorKind {
  NotPositiveDefinite,
  NotUnit,
  NoConvergence,
  DimensionMismatch,
  DomainViolation,
  VanishingGradient,
  OffSurface,
  InvalidParams,
  RejectionOverflow,
  UsageError,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::NotUnit: return "NotUnit";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::DomainViolation: return "DomainViolation";
    case ErrorKind::VanishingGradient: return "VanishingGradient";
    case ErrorKind::OffSurface: return "OffSurface";
    case ErrorKind::InvalidParams: return "InvalidParams";
    case ErrorKind::RejectionOverflow: return "RejectionOverflow";
    case ErrorKind::UsageError: return "UsageError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the kinds above so
/// callers can branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace finsler
