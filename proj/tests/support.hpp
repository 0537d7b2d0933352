#pragma once

#include <random>
#include <vector>

#include "msflow/problem.hpp"

namespace support {

using namespace msflow;

inline RMatrix s1(double v) { return RMatrix::Constant(1, 1, v); }

inline BoundaryCondition preset_bc(BoundaryCondition::Preset p, int n) {
  switch (p) {
    case BoundaryCondition::Preset::Dirichlet: return BoundaryCondition::dirichlet(n);
    case BoundaryCondition::Preset::Neumann: return BoundaryCondition::neumann(n);
    case BoundaryCondition::Preset::Periodic: return BoundaryCondition::periodic(n);
    default: break;
  }
  throw Error(ErrorKind::InvalidArgument, "not a preset");
}

/// -u'' + g u + t c u.
inline MorseSturmProblem scalar(double c, double g = 0.0,
                                BoundaryCondition::Preset bc = BoundaryCondition::Preset::Dirichlet) {
  MorseSturmProblem p;
  p.G = CoefficientField::constant(s1(g));
  p.family = PerturbationFamily::linear(CoefficientField::constant(s1(c)));
  p.bc = preset_bc(bc, 1);
  return p;
}

/// Decoupled constant-coefficient system with diagonal G and C1.
inline MorseSturmProblem diagonal(const std::vector<double>& c, const std::vector<double>& g,
                                  BoundaryCondition::Preset bc = BoundaryCondition::Preset::Dirichlet) {
  const int n = static_cast<int>(c.size());
  MorseSturmProblem p;
  p.N = n;
  RMatrix C = RMatrix::Zero(n, n), G = RMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    C(i, i) = c[i];
    G(i, i) = g[i];
  }
  p.P = CoefficientField::constant(RMatrix::Identity(n, n));
  p.Q = CoefficientField::zero(n);
  p.G = CoefficientField::constant(G);
  p.family = PerturbationFamily::linear(CoefficientField::constant(C));
  p.bc = preset_bc(bc, n);
  return p;
}

inline RMatrix random_symmetric(std::mt19937_64& rng, int n, double scale) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  RMatrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = u(rng);
  return 0.5 * scale * (m + m.transpose());
}

inline RMatrix random_matrix(std::mt19937_64& rng, int n, double scale) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  RMatrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = scale * u(rng);
  return m;
}

/// Polynomial coefficients, P uniformly positive definite, C1 negative definite
/// so that the family has crossings.
inline MorseSturmProblem random_polynomial(std::mt19937_64& rng, int n, BoundaryCondition::Preset bc) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  MorseSturmProblem p;
  p.N = n;
  const RMatrix I = RMatrix::Identity(n, n);
  p.P = CoefficientField::polynomial(
      {I * (1.0 + 0.5 * u(rng)) + random_symmetric(rng, n, 0.15), I * (0.3 * u(rng)) + random_symmetric(rng, n, 0.1)});
  p.Q = CoefficientField::polynomial({random_matrix(rng, n, 0.5), random_matrix(rng, n, 0.5)});
  p.G = CoefficientField::polynomial({I * (1.0 + 2.0 * u(rng)) + random_symmetric(rng, n, 1.0),
                                      random_symmetric(rng, n, 2.0), random_symmetric(rng, n, 1.0)});
  RMatrix c0 = -(15.0 + 35.0 * u(rng)) * I + random_symmetric(rng, n, 8.0);
  p.family = PerturbationFamily::linear(CoefficientField::polynomial({c0, random_symmetric(rng, n, 6.0)}));
  p.bc = preset_bc(bc, n);
  return p;
}

}  // namespace support
