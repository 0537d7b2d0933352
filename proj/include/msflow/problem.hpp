#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "msflow/coefficients.hpp"
#include "msflow/error.hpp"
#include "msflow/linalg.hpp"

namespace msflow {

/// R0 w(0) + R1 w(1) = 0 with w = (v, u), v = P u' + Q u.
struct BoundaryCondition {
  enum class Preset { Dirichlet, Neumann, Periodic, General };

  RMatrix R0;
  RMatrix R1;
  Preset preset = Preset::General;

  static BoundaryCondition dirichlet(int n);
  static BoundaryCondition neumann(int n);
  static BoundaryCondition periodic(int n);
  static BoundaryCondition general(RMatrix r0, RMatrix r1);
};

std::string to_string(BoundaryCondition::Preset preset);

/// -(P u' + Q u)' + Q^T u' + G u + C(t, x) u on [0, 1], together with the
/// complex suspension C_z = C(t, .) + i s Id over [0, 1] x [-h, h].
struct MorseSturmProblem {
  int N = 1;
  CoefficientField P = CoefficientField::constant(RMatrix::Identity(1, 1));
  CoefficientField Q = CoefficientField::zero(1);
  CoefficientField G = CoefficientField::zero(1);
  PerturbationFamily family;
  BoundaryCondition bc = BoundaryCondition::dirichlet(1);
  double half_height = 1.0;
};

struct ValidationIssue {
  ErrorKind kind;
  std::string message;
};

struct ValidationSettings {
  int grid_points = 129;
  double det_p_floor = 1e-10;
  double symmetry_tol = 1e-12;
  int family_t_points = 9;
};

struct ValidationResult;

/// Immutable handle on a problem that satisfied every standing hypothesis.
class ValidatedProblem {
 public:
  const MorseSturmProblem& problem() const { return *problem_; }
  const MorseSturmProblem* operator->() const { return problem_.get(); }
  int N() const { return problem_->N; }
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  friend ValidationResult validate(const MorseSturmProblem&, const ValidationSettings&);
  explicit ValidatedProblem(std::shared_ptr<const MorseSturmProblem> p) : problem_(std::move(p)) {}

  std::shared_ptr<const MorseSturmProblem> problem_;
  std::vector<std::string> warnings_;
};

struct ValidationResult {
  std::optional<ValidatedProblem> problem;
  std::vector<ValidationIssue> issues;

  bool ok() const { return problem.has_value(); }
};

ValidationResult validate(const MorseSturmProblem& problem, const ValidationSettings& settings = {});

/// Throws the first issue as an Error.
ValidatedProblem validate_or_throw(const MorseSturmProblem& problem,
                                   const ValidationSettings& settings = {});

/// C(t, x) + i s Id for z = t + i s.
CMatrix evaluate_C(const ValidatedProblem& vp, cdouble z, double x);

/// B_z(x) = [[P^-1, -P^-1 Q], [-Q^T P^-1, Q^T P^-1 Q - G - C_z]].
CMatrix hamiltonian_coefficients(const ValidatedProblem& vp, cdouble z, double x);

/// d B_z / dt = diag(0, -dC/dt).
RMatrix hamiltonian_t_derivative(const ValidatedProblem& vp, double t, double x);

// Derived problems. Each returns an unvalidated problem.

/// A_t - delta Id (G shifted by -delta).
MorseSturmProblem spectral_shift(const MorseSturmProblem& p, double delta);
/// s -> A_{a + (b - a) s}: base G absorbs C(a, .).
MorseSturmProblem restrict_path(const MorseSturmProblem& p, double a, double b);
/// s -> A_{1 - s}.
MorseSturmProblem reverse_path(const MorseSturmProblem& p);
/// C -> -C.
MorseSturmProblem negate_family(const MorseSturmProblem& p);

}  // namespace msflow
