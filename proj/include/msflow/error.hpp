#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace msflow {

/// Every failure the library reports. The name printed for each kind is the
/// identifier used in CLI messages (e.g. "NotAdmissible: ...").
enum class ErrorKind {
  // problem hypotheses
  DegenerateP,
  AsymmetricCoefficient,
  RankDeficientBoundary,
  NonzeroC0,
  DimensionMismatch,
  NotAdmissible,
  IndefiniteP,
  UnsupportedBoundary,
  RankDeficientFrame,
  NotSymplectic,
  // numerical failures
  StepSizeUnderflow,
  SymplecticityLost,
  BoundaryZero,
  RefinementBudgetExceeded,
  ClusterUnresolved,
  EmptyKernel,
  IrregularCrossing,
  WindowTooSmall,
  GridTooCoarse,
  SingularRz,
  SingularG1h,
  NotConverged,
  // input
  ParseError,
  InvalidArgument,
};

enum class ErrorClass { Usage, Hypothesis, Numerical };

std::string_view to_string(ErrorKind kind);
ErrorClass classify(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace msflow
