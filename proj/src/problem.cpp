#include "msflow/problem.hpp"

#include <cmath>
#include <sstream>

namespace msflow {

namespace {

RMatrix block2(const RMatrix& a, const RMatrix& b, const RMatrix& c, const RMatrix& d) {
  const auto n = a.rows();
  RMatrix m(2 * n, 2 * n);
  m << a, b, c, d;
  return m;
}

std::string at_x(double x) {
  std::ostringstream os;
  os << " at x = " << x;
  return os.str();
}

// ker [R0 R1] must be Lagrangian for (-omega) + omega on R^2N + R^2N.
bool boundary_is_lagrangian(const RMatrix& r0, const RMatrix& r1) {
  const int n2 = static_cast<int>(r0.rows());
  RMatrix r(n2, 2 * n2);
  r << r0, r1;
  const RMatrix frame = null_space(r, 1e-12);
  RMatrix jj = RMatrix::Zero(2 * n2, 2 * n2);
  jj.topLeftCorner(n2, n2) = -standard_J(n2 / 2);
  jj.bottomRightCorner(n2, n2) = standard_J(n2 / 2);
  return max_abs(RMatrix(frame.transpose() * jj * frame)) < 1e-10;
}

}  // namespace

BoundaryCondition BoundaryCondition::dirichlet(int n) {
  const RMatrix I = RMatrix::Identity(n, n), Z = RMatrix::Zero(n, n);
  return {block2(Z, I, Z, Z), block2(Z, Z, Z, I), Preset::Dirichlet};
}

BoundaryCondition BoundaryCondition::neumann(int n) {
  const RMatrix I = RMatrix::Identity(n, n), Z = RMatrix::Zero(n, n);
  return {block2(I, Z, Z, Z), block2(Z, Z, I, Z), Preset::Neumann};
}

BoundaryCondition BoundaryCondition::periodic(int n) {
  const RMatrix I = RMatrix::Identity(2 * n, 2 * n);
  return {I, -I, Preset::Periodic};
}

BoundaryCondition BoundaryCondition::general(RMatrix r0, RMatrix r1) {
  return {std::move(r0), std::move(r1), Preset::General};
}

std::string to_string(BoundaryCondition::Preset preset) {
  switch (preset) {
    case BoundaryCondition::Preset::Dirichlet: return "dirichlet";
    case BoundaryCondition::Preset::Neumann: return "neumann";
    case BoundaryCondition::Preset::Periodic: return "periodic";
    case BoundaryCondition::Preset::General: return "general";
  }
  return "general";
}

ValidationResult validate(const MorseSturmProblem& p, const ValidationSettings& settings) {
  ValidationResult result;
  auto& issues = result.issues;
  const int n = p.N;

  if (n < 1) {
    issues.push_back({ErrorKind::DimensionMismatch, "N must be positive"});
    return result;
  }
  if (!(p.half_height > 0.0))
    issues.push_back({ErrorKind::InvalidArgument, "rectangle half-height must be positive"});
  struct Named {
    const char* name;
    int dim;
  };
  for (const Named& f : {Named{"P", p.P.dimension()}, Named{"Q", p.Q.dimension()},
                         Named{"G", p.G.dimension()}, Named{"C", p.family.dimension()}})
    if (f.dim != n)
      issues.push_back({ErrorKind::DimensionMismatch,
                        std::string(f.name) + " has dimension " + std::to_string(f.dim) +
                            ", expected " + std::to_string(n)});
  if (p.bc.R0.rows() != 2 * n || p.bc.R0.cols() != 2 * n || p.bc.R1.rows() != 2 * n ||
      p.bc.R1.cols() != 2 * n)
    issues.push_back({ErrorKind::DimensionMismatch, "boundary matrices must be 2N x 2N"});
  if (!issues.empty()) return result;

  const int grid = std::max(settings.grid_points, 2);
  bool degenerate_reported = false, asym_p = false, asym_g = false, asym_c = false, c0 = false;
  for (int k = 0; k < grid; ++k) {
    const double x = static_cast<double>(k) / (grid - 1);
    const RMatrix P = p.P(x);
    if (!degenerate_reported && std::abs(P.determinant()) <= settings.det_p_floor) {
      issues.push_back({ErrorKind::DegenerateP, "|det P(x)| below " +
                                                    std::to_string(settings.det_p_floor) + at_x(x)});
      degenerate_reported = true;
    }
    if (!asym_p && max_abs(RMatrix(P - P.transpose())) >= settings.symmetry_tol) {
      issues.push_back({ErrorKind::AsymmetricCoefficient, "P is not symmetric" + at_x(x)});
      asym_p = true;
    }
    const RMatrix G = p.G(x);
    if (!asym_g && max_abs(RMatrix(G - G.transpose())) >= settings.symmetry_tol) {
      issues.push_back({ErrorKind::AsymmetricCoefficient, "G is not symmetric" + at_x(x)});
      asym_g = true;
    }
    if (!c0 && max_abs(p.family.value(0.0, x)) != 0.0) {
      issues.push_back({ErrorKind::NonzeroC0, "C(0, x) is not zero" + at_x(x)});
      c0 = true;
    }
    for (int j = 0; j < settings.family_t_points && !asym_c; ++j) {
      const double t = static_cast<double>(j) / std::max(settings.family_t_points - 1, 1);
      const RMatrix C = p.family.value(t, x);
      const RMatrix D = p.family.dt(t, x);
      if (max_abs(RMatrix(C - C.transpose())) >= settings.symmetry_tol ||
          max_abs(RMatrix(D - D.transpose())) >= settings.symmetry_tol) {
        issues.push_back({ErrorKind::AsymmetricCoefficient,
                          "C(t, x) is not symmetric at t = " + std::to_string(t) + at_x(x)});
        asym_c = true;
      }
    }
  }

  RMatrix r(2 * n, 4 * n);
  r << p.bc.R0, p.bc.R1;
  Eigen::FullPivLU<RMatrix> lu(r);
  lu.setThreshold(1e-12);
  if (lu.rank() < 2 * n)
    issues.push_back({ErrorKind::RankDeficientBoundary,
                      "rank [R0 | R1] = " + std::to_string(lu.rank()) + " < " +
                          std::to_string(2 * n)});

  if (!issues.empty()) return result;

  ValidatedProblem vp(std::make_shared<const MorseSturmProblem>(p));
  if (p.bc.preset == BoundaryCondition::Preset::General && !boundary_is_lagrangian(p.bc.R0, p.bc.R1))
    vp.warnings_.push_back(
        "boundary subspace ker[R0 R1] is not Lagrangian; the operator may fail to be self-adjoint");
  result.problem = std::move(vp);
  return result;
}

ValidatedProblem validate_or_throw(const MorseSturmProblem& problem, const ValidationSettings& settings) {
  ValidationResult r = validate(problem, settings);
  if (!r.ok()) throw Error(r.issues.front().kind, r.issues.front().message);
  return *r.problem;
}

CMatrix evaluate_C(const ValidatedProblem& vp, cdouble z, double x) {
  CMatrix c = vp->family.value(z.real(), x).cast<cdouble>();
  c.diagonal().array() += cdouble(0.0, z.imag());
  return c;
}

CMatrix hamiltonian_coefficients(const ValidatedProblem& vp, cdouble z, double x) {
  const auto& p = vp.problem();
  const int n = p.N;
  const RMatrix Pinv = p.P(x).inverse();
  const RMatrix Q = p.Q(x);
  const RMatrix PinvQ = Pinv * Q;
  CMatrix b(2 * n, 2 * n);
  b.topLeftCorner(n, n) = Pinv.cast<cdouble>();
  b.topRightCorner(n, n) = (-PinvQ).cast<cdouble>();
  b.bottomLeftCorner(n, n) = (-PinvQ.transpose()).cast<cdouble>();
  b.bottomRightCorner(n, n) =
      (Q.transpose() * PinvQ - p.G(x)).cast<cdouble>() - evaluate_C(vp, z, x);
  // P^-1 is symmetric only up to rounding; pin the blocks to exact symmetry.
  b.topLeftCorner(n, n) = (0.5 * (b.topLeftCorner(n, n) + b.topLeftCorner(n, n).transpose())).eval();
  b.bottomRightCorner(n, n) =
      (0.5 * (b.bottomRightCorner(n, n) + b.bottomRightCorner(n, n).transpose())).eval();
  return b;
}

RMatrix hamiltonian_t_derivative(const ValidatedProblem& vp, double t, double x) {
  const int n = vp.N();
  RMatrix d = RMatrix::Zero(2 * n, 2 * n);
  d.bottomRightCorner(n, n) = -vp->family.dt(t, x);
  return d;
}

MorseSturmProblem spectral_shift(const MorseSturmProblem& p, double delta) {
  MorseSturmProblem out = p;
  const CoefficientField g = p.G;
  const int n = p.N;
  out.G = CoefficientField::custom(
      n, [g, delta, n](double x) -> RMatrix { return g(x) - delta * RMatrix::Identity(n, n); });
  return out;
}

MorseSturmProblem restrict_path(const MorseSturmProblem& p, double a, double b) {
  MorseSturmProblem out = p;
  const CoefficientField g = p.G;
  const PerturbationFamily fam = p.family;
  out.G = CoefficientField::custom(p.N, [g, fam, a](double x) -> RMatrix {
    return g(x) + fam.value(a, x);
  });
  out.family = p.family.reparametrized(a, b);
  return out;
}

MorseSturmProblem reverse_path(const MorseSturmProblem& p) { return restrict_path(p, 1.0, 0.0); }

MorseSturmProblem negate_family(const MorseSturmProblem& p) {
  MorseSturmProblem out = p;
  out.family = p.family.negated();
  return out;
}

}  // namespace msflow
