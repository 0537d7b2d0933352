#pragma once

#include <functional>
#include <string>
#include <vector>

#include "msflow/degree.hpp"
#include "msflow/propagator.hpp"
#include "msflow/spectralflow.hpp"

namespace msflow {

/// diag(-J, J) on R^2n + R^2n.
RMatrix double_J(int n);

/// Frame of L_Z = {(p0, q0, p1, q1) : (q0, q1) in Z, (p0, -p1) in Z^perp} for a
/// subspace Z of R^n + R^n given by a (2n x k) frame. Coordinates follow w = (v, u).
RMatrix lagrangian_from_bc(const RMatrix& z_frame);

/// max |F^T J~ F| / |F|^2 for a 4n x 2n frame.
double isotropy_residual(const RMatrix& frame);

/// [R0 R1] with ker [R0 R1] = L for a Lagrangian frame L.
BoundaryCondition boundary_from_lagrangian(const RMatrix& frame);

/// Orthonormal frame of ker [R0 R1].
RMatrix lagrangian_of_boundary(const BoundaryCondition& bc);

/// t -> psi(t) in Sp(2n), with its t-derivative.
struct SymplecticPath {
  std::function<RMatrix(double)> psi;
  std::function<MonodromyDerivative(double)> with_derivative;
};

/// t -> psi_t(1) for the real family of a problem.
SymplecticPath monodromy_path(const ValidatedProblem& vp, const IntegratorConfig& config = {});

struct MaslovCrossing {
  double t = 0.0;
  RMatrix form;      // transversal J~ l(t)
  RMatrix form_alt;  // vertical transversal {0} + R^2n
  int n_plus = 0;
  int n_minus = 0;
  int nullity = 0;
  bool endpoint = false;
  double transversal_gap = 0.0;  // max |form - form_alt| / max |form|

  int signature() const { return n_plus - n_minus; }
};

struct MaslovResult {
  int index = 0;
  std::vector<MaslovCrossing> crossings;
  bool endpoint_crossing = false;
  int start_term = 0;  // n_+ at a
  int end_term = 0;    // n_- at b
};

/// iota^CLM(L, Gr psi(t)), t in [a, b], by crossing forms. Crossings are the zeros
/// of det(R0 + R1 psi(t)) with [R0 R1] read off L. Endpoint crossings contribute
/// n_+ at a and -n_- at b and are flagged.
MaslovResult maslov_clm(const RMatrix& L, const SymplecticPath& path, double a, double b,
                        const LocateOptions& options = {});

enum class SpComponent { Plus, Minus, Zero };
std::string to_string(SpComponent c);

/// Sign of det(M - I); Zero when M - I is numerically singular.
SpComponent sp_component(const RMatrix& M, double tol = 1e-8);

struct StabilityAnalysis {
  bool stable = false;
  std::vector<cdouble> eigenvalues;
  double modulus_defect = 0.0;  // max ||lambda| - 1|
  bool semisimple = true;
  double condition = 1.0;  // eigenvector matrix condition estimate
};

StabilityAnalysis analyze_stability(const RMatrix& M);
bool is_linearly_stable(const RMatrix& M);

/// e^{delta J} = cos(delta) I + sin(delta) J.
RMatrix rotation_exp(int n, double delta);

struct PerturbationComponents {
  double delta;
  SpComponent minus;  // e^{-delta J} M
  SpComponent plus;   // e^{+delta J} M
};
std::vector<PerturbationComponents> stable_perturbation_check(
    const RMatrix& M, const std::vector<double>& deltas = {1e-1, 1e-2, 1e-3});

enum class Orientation { Preserving, NonPreserving };
enum class Verdict { LinearlyUnstable, Inconclusive };
std::string to_string(Orientation o);
std::string to_string(Verdict v);
Orientation parse_orientation(const std::string& s);

Verdict instability_verdict(int iota_pw, int n, Orientation orientation);

struct FormulaCheck {
  int iota_sp = 0;
  int iota_clm = 0;
  bool pass = false;
  MaslovResult maslov;
};

/// iota^CLM(L, Gr psi_t(1)) against -sf for a periodic problem, with sf from eigenvalue
/// tracking.
FormulaCheck spectral_flow_formula_check(const ValidatedProblem& vp,
                                         const IntegratorConfig& config = {},
                                         const TrackingConfig& tracking = {});

}  // namespace msflow
