#include "qsa/error.hpp"

namespace qsa {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotWMatrix: return "NotWMatrix";
    case ErrorKind::Reducible: return "Reducible";
    case ErrorKind::NonpositiveRate: return "NonpositiveRate";
    case ErrorKind::SingularBeyondRankOne: return "SingularBeyondRankOne";
    case ErrorKind::NotBistable: return "NotBistable";
    case ErrorKind::NoBistableWindow: return "NoBistableWindow";
    case ErrorKind::RootBranchLost: return "RootBranchLost";
    case ErrorKind::NegativeNullspace: return "NegativeNullspace";
    case ErrorKind::DerivativeUnstable: return "DerivativeUnstable";
    case ErrorKind::DenominatorVanishes: return "DenominatorVanishes";
    case ErrorKind::FitToleranceNotMet: return "FitToleranceNotMet";
    case ErrorKind::SingularMatrix: return "SingularMatrix";
    case ErrorKind::SolvabilityViolated: return "SolvabilityViolated";
    case ErrorKind::WrongCurvatureSign: return "WrongCurvatureSign";
    case ErrorKind::ModeCountMismatch: return "ModeCountMismatch";
    case ErrorKind::TruncationTooSmall: return "TruncationTooSmall";
    case ErrorKind::NullspaceDegenerate: return "NullspaceDegenerate";
    case ErrorKind::IterationStalled: return "IterationStalled";
    case ErrorKind::MaxEventsExceeded: return "MaxEventsExceeded";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

ErrorClass classify(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotWMatrix:
    case ErrorKind::Reducible:
    case ErrorKind::NonpositiveRate:
    case ErrorKind::NotBistable:
    case ErrorKind::NoBistableWindow:
    case ErrorKind::InvalidConfig:
      return ErrorClass::Validation;
    case ErrorKind::MaxEventsExceeded:
      return ErrorClass::Budget;
    default:
      return ErrorClass::Numerical;
  }
}

}  // namespace qsa
