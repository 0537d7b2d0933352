#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "msflow/linalg.hpp"
#include "msflow/problem.hpp"

namespace msflow {

struct IntegratorConfig {
  enum class Method { Dopri5, Rk4 };

  Method method = Method::Dopri5;
  double rtol = 1e-10;
  double atol = 1e-12;
  int fixed_steps = 256;  // Rk4 only, >= 64
  bool dense = false;
  int max_steps = 100000;
  double min_step = 1e-13;
  /// Steps never straddle these points (coefficient kinks, requested outputs).
  std::vector<double> stop_points;
  /// When non-empty, Dopri5 takes exactly these steps instead of adapting.
  /// Used to make results smooth in z (finite differences across z).
  std::vector<double> mesh;
  double symplectic_tol = 1e-6;
};

void check(const IntegratorConfig& config);

/// Piecewise dense output of an integration (Dopri5: 4th-order continuous
/// extension; Rk4: cubic Hermite).
class DensePath {
 public:
  struct Segment {
    double x0 = 0.0;
    double h = 0.0;
    CMatrix r1, r2, r3, r4, r5;
  };

  CMatrix operator()(double x) const;
  bool empty() const { return segments_.empty(); }
  void push(Segment s) { segments_.push_back(std::move(s)); }
  const std::vector<Segment>& segments() const { return segments_; }

 private:
  std::vector<Segment> segments_;
};

struct TransportResult {
  CMatrix terminal;
  std::vector<double> mesh;  // accepted step endpoints, mesh.front() = a, mesh.back() = b
  std::vector<CMatrix> at_mesh;
  DensePath path;
  int rejected = 0;
};

using Generator = std::function<CMatrix(double)>;

/// Solves Y' = A(x) Y on [a, b], Y(a) = y0.
TransportResult transport(const Generator& A, double a, double b, const CMatrix& y0,
                          const IntegratorConfig& config);

struct FundamentalSolution {
  cdouble z;
  CMatrix terminal;  // psi_z(1)
  std::vector<double> mesh;
  std::vector<CMatrix> at_mesh;
  DensePath path;  // populated when config.dense
  double symplectic_drift = 0.0;
  double min_abs_det = 0.0;

  /// psi_z(x); requires dense output (or x on the mesh).
  CMatrix at(double x) const;
};

/// max |psi^T J psi - J| (transpose, not adjoint).
double symplectic_drift(const CMatrix& psi);

/// Points where the problem's coefficients may fail to be smooth in x.
std::vector<double> breakpoints(const MorseSturmProblem& problem);

/// psi_z on [0, 1]: psi' = J B_z(x) psi, psi(0) = Id.
FundamentalSolution fundamental_solution(const ValidatedProblem& vp, cdouble z,
                                         const IntegratorConfig& config = {});

CMatrix monodromy(const ValidatedProblem& vp, cdouble z, const IntegratorConfig& config = {});

/// psi_t(1) and its t-derivative for real t, from the variational equation
/// d(dpsi)/dx = J B dpsi + J dB/dt psi.
struct MonodromyDerivative {
  RMatrix psi;
  RMatrix dpsi;
};
MonodromyDerivative monodromy_t_derivative(const ValidatedProblem& vp, double t,
                                           const IntegratorConfig& config = {});

/// Largest symplecticity drift seen by fundamental_solution since the last reset.
double max_observed_drift();
void reset_drift_monitor();

}  // namespace msflow
