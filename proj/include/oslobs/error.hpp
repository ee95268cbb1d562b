#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace oslobs {

enum class ErrorCode {
  NonSquare,
  AsymmetricBeyondTol,
  NonFinite,
  RankDeficient,
  DimensionMismatch,
  UnknownBuiltin,
  NotDifferentiableAtPoint,
  ParseError,
  SchemaError,
  EmptyRegion,
  InfeasibleSamples,
  Unbounded,
  PreconditionViolated,
  StructurallyInfeasible,
  NoFeasibleAlpha,
  NotPositiveDefinite,
  EquationResidualTooLarge,
  NewtonDivergence,
  NonFiniteState,
  EmptyTrace,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonSquare: return "NonSquare";
    case ErrorCode::AsymmetricBeyondTol: return "AsymmetricBeyondTol";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::UnknownBuiltin: return "UnknownBuiltin";
    case ErrorCode::NotDifferentiableAtPoint: return "NotDifferentiableAtPoint";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::EmptyRegion: return "EmptyRegion";
    case ErrorCode::InfeasibleSamples: return "InfeasibleSamples";
    case ErrorCode::Unbounded: return "Unbounded";
    case ErrorCode::PreconditionViolated: return "PreconditionViolated";
    case ErrorCode::StructurallyInfeasible: return "StructurallyInfeasible";
    case ErrorCode::NoFeasibleAlpha: return "NoFeasibleAlpha";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::EquationResidualTooLarge: return "EquationResidualTooLarge";
    case ErrorCode::NewtonDivergence: return "NewtonDivergence";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::EmptyTrace: return "EmptyTrace";
  }
  return "Unknown";
}

/// Exception carrying a machine-readable code. `detail()` holds the free-form
/// part of the message (a field path for SchemaError, a file path, ...).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code), detail_(detail) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace oslobs
