#include "msflow/error.hpp"

namespace msflow {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DegenerateP: return "DegenerateP";
    case ErrorKind::AsymmetricCoefficient: return "AsymmetricCoefficient";
    case ErrorKind::RankDeficientBoundary: return "RankDeficientBoundary";
    case ErrorKind::NonzeroC0: return "NonzeroC0";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NotAdmissible: return "NotAdmissible";
    case ErrorKind::IndefiniteP: return "IndefiniteP";
    case ErrorKind::UnsupportedBoundary: return "UnsupportedBoundary";
    case ErrorKind::RankDeficientFrame: return "RankDeficientFrame";
    case ErrorKind::NotSymplectic: return "NotSymplectic";
    case ErrorKind::StepSizeUnderflow: return "StepSizeUnderflow";
    case ErrorKind::SymplecticityLost: return "SymplecticityLost";
    case ErrorKind::BoundaryZero: return "BoundaryZero";
    case ErrorKind::RefinementBudgetExceeded: return "RefinementBudgetExceeded";
    case ErrorKind::ClusterUnresolved: return "ClusterUnresolved";
    case ErrorKind::EmptyKernel: return "EmptyKernel";
    case ErrorKind::IrregularCrossing: return "IrregularCrossing";
    case ErrorKind::WindowTooSmall: return "WindowTooSmall";
    case ErrorKind::GridTooCoarse: return "GridTooCoarse";
    case ErrorKind::SingularRz: return "SingularRz";
    case ErrorKind::SingularG1h: return "SingularG1h";
    case ErrorKind::NotConverged: return "NotConverged";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

ErrorClass classify(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ParseError:
    case ErrorKind::InvalidArgument:
      return ErrorClass::Usage;
    case ErrorKind::DegenerateP:
    case ErrorKind::AsymmetricCoefficient:
    case ErrorKind::RankDeficientBoundary:
    case ErrorKind::NonzeroC0:
    case ErrorKind::DimensionMismatch:
    case ErrorKind::NotAdmissible:
    case ErrorKind::IndefiniteP:
    case ErrorKind::UnsupportedBoundary:
    case ErrorKind::RankDeficientFrame:
    case ErrorKind::NotSymplectic:
      return ErrorClass::Hypothesis;
    default:
      return ErrorClass::Numerical;
  }
}

}  // namespace msflow
