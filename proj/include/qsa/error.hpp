#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qsa {

enum class ErrorKind {
  NotWMatrix,
  Reducible,
  NonpositiveRate,
  SingularBeyondRankOne,
  NotBistable,
  NoBistableWindow,
  RootBranchLost,
  NegativeNullspace,
  DerivativeUnstable,
  DenominatorVanishes,
  FitToleranceNotMet,
  SingularMatrix,
  SolvabilityViolated,
  WrongCurvatureSign,
  ModeCountMismatch,
  TruncationTooSmall,
  NullspaceDegenerate,
  IterationStalled,
  MaxEventsExceeded,
  InvalidConfig,
};

std::string_view to_string(ErrorKind kind);

/// Broad class used for CLI exit codes.
enum class ErrorClass { Validation, Numerical, Budget };

ErrorClass classify(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind), detail_(message) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

}  // namespace qsa
