#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace e2nn {

enum class ErrorCode {
  NonFinite,
  EmptyInput,
  DimensionMismatch,
  DegenerateTruths,
  InvalidDof,
  InvalidArgument,
  UntrainedModel,
  EnsembleCollapse,
  InsufficientData,
  QuadratureFailure,
  SingularCorrelation,
  Io,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Base exception for every failure raised by the library. The code lets the
/// CLI map failures onto exit statuses without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DegenerateTruths: return "DegenerateTruths";
    case ErrorCode::InvalidDof: return "InvalidDof";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::UntrainedModel: return "UntrainedModel";
    case ErrorCode::EnsembleCollapse: return "EnsembleCollapse";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::QuadratureFailure: return "QuadratureFailure";
    case ErrorCode::SingularCorrelation: return "SingularCorrelation";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace e2nn
