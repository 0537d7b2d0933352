#pragma once

#include <iosfwd>
#include <memory>
#include <vector>

#include "msflow/degree.hpp"
#include "msflow/parallel.hpp"
#include "msflow/propagator.hpp"

namespace msflow {

/// Orthonormal basis of ker A_{t0}, built from ker R_{t0} through w(x) = psi(x) w0.
struct KernelBasis {
  double t0 = 0.0;
  RMatrix w0;  // 2N x k, columns map to L2-orthonormal u
  std::shared_ptr<const FundamentalSolution> psi;  // dense
  double ode_residual = 0.0;  // max over a 257-point grid
  double bc_residual = 0.0;   // |R0 w(0) + R1 w(1)| / |w|

  int size() const { return static_cast<int>(w0.cols()); }
  /// N x k matrix of u_i(x).
  RMatrix u(double x) const;
  /// 2N x k matrix of w_i(x).
  RMatrix w(double x) const;
};

KernelBasis kernel_basis(const ValidatedProblem& vp, double t0, const IntegratorConfig& config = {},
                         double kernel_threshold = 1e-6);

struct CrossingForm {
  double t0 = 0.0;
  RMatrix gamma;
  double asymmetry = 0.0;
  int n_plus = 0;
  int n_minus = 0;
  int nullity = 0;
  bool regular = true;

  int signature() const { return n_plus - n_minus; }
};

/// Inertia of a symmetric matrix; eigenvalues with |lambda| <= rel_tol |m| count as null.
void inertia(const RMatrix& m, double rel_tol, int& n_plus, int& n_minus, int& nullity);

/// Gamma_ij = int <dC/dt(t0, x) u_i, u_j> dx by composite Gauss-Legendre (panels x 8 nodes).
CrossingForm crossing_form(const ValidatedProblem& vp, const KernelBasis& kernel, int panels = 16,
                           bool require_regular = true);

struct SpectralFlowResult {
  int index = 0;
  std::vector<CrossingInstant> instants;
  std::vector<CrossingForm> forms;
};

/// Sum of crossing-form signatures at the interior degeneracy instants.
SpectralFlowResult spectral_flow_crossing_method(const ValidatedProblem& vp,
                                                 const IntegratorConfig& config = {},
                                                 const LocateOptions& options = {});

/// Finite-difference discretization of A_t with a preset boundary condition.
/// The unknowns are node-major (N components per node); A = W^-1/2 K W^-1/2 where
/// K is the symmetric stiffness-plus-potential matrix and W the lumped mass.
struct Discretization {
  int nodes = 0;
  int N = 0;
  std::vector<double> x;             // node positions
  std::vector<double> mass;          // quadrature weight per node
  std::vector<int> position;         // node -> block position in the matrix
  SymmetricBand matrix{1, 0};
  int size() const { return matrix.size(); }
};

Discretization discretize(const ValidatedProblem& vp, double t, int M);

/// As above but with C(t, .) replaced by an arbitrary symmetric field (used by
/// the generalized eigenproblem in the Hill check).
Discretization discretize_with(const ValidatedProblem& vp, const std::function<RMatrix(double)>& C,
                               int M);

std::vector<std::vector<double>> fd_spectra_batch(const ValidatedProblem& vp,
                                                  const std::vector<double>& ts, int M,
                                                  Execution exec);

struct TrackingConfig {
  int M = 400;
  int grid = 257;
  double window = 0.0;  // 0: 10 sup |C|
  int refine_levels = 6;
  Execution exec = Execution::Parallel;
};

struct TrackingResult {
  int index = 0;
  double window = 0.0;
  std::vector<double> t;
  std::vector<std::vector<double>> eigenvalues;  // all eigenvalues at each t
  std::vector<double> crossing_times;            // approximate, from refinement
  std::vector<int> crossing_signs;
};

TrackingResult spectral_flow_tracking(const ValidatedProblem& vp, const TrackingConfig& config = {});

/// Columns t, then the eigenvalues (by sorted index) that enter the window somewhere.
void write_eigen_csv(std::ostream& os, const TrackingResult& result);

struct MorseResult {
  int index = 0;
  int M = 0;
  std::vector<int> counts;  // negative counts at M, 2M, ...
};

/// Negative eigenvalue count of the discretized A_t, stable under doubling M.
MorseResult morse_index(const ValidatedProblem& vp, double t, int M = 200, int max_doublings = 4);

}  // namespace msflow
