#pragma once

#include <iosfwd>
#include <memory>
#include <vector>

#include "msflow/degree.hpp"
#include "msflow/propagator.hpp"
#include "msflow/spectralflow.hpp"

namespace msflow {

/// Integral kernel of the inverse of A_z, from psi_z and P_z = R_z^-1 R1 psi_z(1).
class GreenKernel {
 public:
  cdouble z() const { return z_; }
  /// N x N block K_z(x, y).
  CMatrix operator()(double x, double y) const;
  /// Limits from either side of the diagonal.
  CMatrix diagonal_below(double x) const;  // y -> x from below (x > y branch)
  CMatrix diagonal_above(double x) const;  // y -> x from above (x < y branch)
  const CMatrix& projector() const { return proj_; }

 private:
  friend GreenKernel green_kernel(const ValidatedProblem&, cdouble, const IntegratorConfig&);
  CMatrix block(const CMatrix& psi_x, const CMatrix& middle, const CMatrix& psi_y_inv) const;

  int n_ = 1;
  cdouble z_;
  std::shared_ptr<const FundamentalSolution> psi_;
  CMatrix proj_;
};

GreenKernel green_kernel(const ValidatedProblem& vp, cdouble z, const IntegratorConfig& config = {});

struct TraceTheta {
  cdouble theta_t;
  cdouble theta_s;
};

/// theta_t = int Tr[dC/dt K_z(x, x)] dx, theta_s = i int Tr K_z(x, x) dx by composite
/// Gauss-Legendre with panels x 8 nodes.
TraceTheta trace_theta(const ValidatedProblem& vp, cdouble z, const IntegratorConfig& config = {},
                       int panels = 16);

struct TraceCheck {
  cdouble z;
  TraceTheta theta;
  cdouble dlog_t;  // finite differences of log rho
  cdouble dlog_s;
  double rel_error_t = 0.0;
  double rel_error_s = 0.0;
  double step = 0.0;
};

/// Compares theta with Richardson-extrapolated central differences of log rho.
/// All stencil points share the integration mesh of a pilot run at z.
TraceCheck trace_formula_check(const ValidatedProblem& vp, cdouble z, double h_fd = 1e-5,
                               const IntegratorConfig& config = {});

struct ContourIntegral {
  cdouble value;  // (1 / 2 pi i) closed integral of theta_t dt + theta_s ds
  int panels = 0;
  double change = 0.0;  // difference to the previous refinement
};

/// Contour integral over the rectangle [0, 1] x [-h, h], refined by doubling panels per edge.
ContourIntegral trace_contour_integral(const ValidatedProblem& vp, double h,
                                       const IntegratorConfig& config = {}, double tol = 1e-9,
                                       int max_panels = 64, Execution exec = Execution::Parallel);

/// Contour integral around an arbitrary axis-aligned rectangle [t0, t1] x [s0, s1].
cdouble trace_contour_integral(const ValidatedProblem& vp, double t0, double t1, double s0,
                               double s1, int panels, const IntegratorConfig& config = {},
                               Execution exec = Execution::Parallel);

/// rho(1) / rho(0); the family must be linear.
struct HillRatio {
  cdouble rho0;
  cdouble rho1;
  cdouble ratio;
};
HillRatio hill_ratio(const ValidatedProblem& vp, const IntegratorConfig& config = {});

struct EigenProduct {
  cdouble product;
  double tail = 0.0;  // relative tail estimate, sum_{j > K} 1 / |lambda_j|
  std::vector<double> lambda;  // the K parameters used, by increasing |lambda|
  std::vector<cdouble> partial;
  int M = 0;
};

/// prod_{j <= K} (1 - 1 / lambda_j) over the pencil A_h u = -lambda G1_h u at size M.
EigenProduct truncated_eigenproduct(const ValidatedProblem& vp, int K, int M = 0);

void write_eigenproduct_csv(std::ostream& os, const EigenProduct& p);

/// det(1 + (t G1 + i s) A^-1) of the discretized operator: det(A_t + i s) / det(A_0).
cdouble fredholm_determinant(const ValidatedProblem& vp, cdouble z, int M);

struct FredholmCheck {
  std::vector<cdouble> z;
  std::vector<cdouble> fredholm;
  std::vector<cdouble> ratio;  // rho(z) / rho(0)
  std::vector<double> rel_error;
  int degree_f = 0;
  int iota_pw = 0;
};

FredholmCheck fredholm_identity_check(const ValidatedProblem& vp, const std::vector<cdouble>& zs,
                                      int M, const DegreeConfig& config = {});

}  // namespace msflow
