#pragma once

#include <functional>
#include <iosfwd>
#include <numbers>
#include <vector>

#include "msflow/parallel.hpp"
#include "msflow/propagator.hpp"

namespace msflow {

struct DegreeConfig {
  IntegratorConfig ode;
  int samples_per_edge = 32;  // initial samples, rounded up to even
  double max_arg_step = std::numbers::pi / 2;
  double floor = 1e-8;  // relative to max |f| on the boundary
  int max_samples = 20000;
  double min_spacing = 1e-12;  // in boundary arclength units
  Execution exec = Execution::Parallel;
  const char* label = "rho";  // used in error messages
};

struct BoundarySample {
  cdouble z;
  cdouble value;
  double arg;  // unwrapped
};

/// f sampled counterclockwise along the rectangle [0, 1] x [-h, h], starting at
/// (0, -h): bottom edge, right edge, top edge, left edge.
struct BoundaryTrace {
  std::vector<BoundarySample> samples;
  double max_arg_step = 0.0;
  double total_arg = 0.0;
  int winding = 0;
  double min_abs = 0.0;
  double max_abs = 0.0;
  int refinement_rounds = 0;
};

/// det(R0 + R1 psi_z(1)).
cdouble rho(const ValidatedProblem& vp, cdouble z, const IntegratorConfig& config = {});

/// rho at each z. The serial and parallel paths give identical values.
std::vector<cdouble> rho_batch(const ValidatedProblem& vp, const std::vector<cdouble>& zs,
                               const IntegratorConfig& config, Execution exec);

/// Winding number of f around the rectangle with half-height h. f must be pure
/// (it may be called concurrently). Throws NotAdmissible when |f(0)| or |f(1)|
/// is below the floor, BoundaryZero for any other sample below it.
BoundaryTrace wind_rectangle(const std::function<cdouble(cdouble)>& f, double h,
                             const DegreeConfig& config);

/// iota_PW = deg(rho, Omega, 0), Omega = [0, 1] x [-h, h], h = problem half-height
/// unless overridden (> 0).
BoundaryTrace winding_number(const ValidatedProblem& vp, const DegreeConfig& config = {},
                             double half_height = 0.0);

void write_boundary_csv(std::ostream& os, const BoundaryTrace& trace);

struct CrossingInstant {
  double t = 0.0;
  int multiplicity = 0;
  double width = 0.0;  // final bracket width
  bool sign_change = false;
  double sigma_rel = 0.0;  // sigma_min / scale at t
};

struct LocateOptions {
  int grid = 256;
  double width = 1e-10;
  double dip_threshold = 1e-6;
  double kernel_threshold = 1e-6;
  Execution exec = Execution::Parallel;
};

/// A matrix with the reference size its singular values are measured against.
/// For R0 + R1 psi the reference is |[R0, R1 psi]|, which stays away from zero
/// even where R0 + R1 psi vanishes entirely.
struct ScaledMatrix {
  RMatrix value;
  double scale = 0.0;
};

/// Largest singular value of [R0, R1 psi].
double boundary_scale(const RMatrix& R0, const RMatrix& R1psi);

/// Zeros of t -> det R(t) on (a, b): sign changes bracketed and bisected, plus
/// dips of sigma_min(R(t)) / scale(t).
std::vector<CrossingInstant> locate_degeneracies(const std::function<ScaledMatrix(double)>& R, double a,
                                                 double b, const LocateOptions& options = {});

/// As above with scale(t) = |R(t)|.
std::vector<CrossingInstant> locate_degeneracies(const std::function<RMatrix(double)>& R, double a,
                                                 double b, const LocateOptions& options = {});

/// R_t = R0 + R1 psi_t(1) for real t.
RMatrix boundary_matrix(const ValidatedProblem& vp, double t, const IntegratorConfig& config = {});
ScaledMatrix scaled_boundary_matrix(const ValidatedProblem& vp, double t, const IntegratorConfig& config = {});

/// Degeneracy instants of the real family on (0, 1).
std::vector<CrossingInstant> conjugate_instants(const ValidatedProblem& vp,
                                                const IntegratorConfig& config = {},
                                                const LocateOptions& options = {});

/// Empirical check that rho has no zeros off the real axis: the winding over the
/// full rectangle must equal the winding over a thin one.
bool zeros_on_real_axis(const ValidatedProblem& vp, const DegreeConfig& config = {});

}  // namespace msflow
