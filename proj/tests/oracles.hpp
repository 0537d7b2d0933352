#pragma once

// Reference computations for the tests. Nothing here calls into the library's
// numerical code; only the coefficient fields of a problem are evaluated.

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "msflow/problem.hpp"

namespace oracle {

using cd = std::complex<double>;
using CM = Eigen::MatrixXcd;
using RM = Eigen::MatrixXd;
constexpr double pi = std::numbers::pi;

/// sinh(k) / k with the removable singularity handled.
inline cd sinhc(cd k) {
  if (std::abs(k) < 1e-4) return 1.0 + k * k / 6.0 + k * k * k * k / 120.0;
  return std::sinh(k) / k;
}

/// Fundamental matrix at x = 1 of -u'' + c u = 0 in (v, u) = (u', u) coordinates.
inline CM scalar_psi(cd c) {
  const cd k = std::sqrt(c);
  CM m(2, 2);
  m << std::cosh(k), c * sinhc(k), sinhc(k), std::cosh(k);
  return m;
}

/// det(R0 + R1 psi(1)) for -u'' + c u with u(0) = u(1) = 0.
inline cd scalar_dirichlet_rho(cd c) { return -sinhc(std::sqrt(c)); }

/// J B_z(x) assembled from the coefficient fields.
inline CM generator(const msflow::MorseSturmProblem& p, cd z, double x) {
  const int n = p.N;
  const RM Pinv = p.P(x).inverse();
  const RM Q = p.Q(x);
  CM Cz = p.family.value(z.real(), x).cast<cd>();
  Cz += cd(0.0, z.imag()) * CM::Identity(n, n);
  CM B(2 * n, 2 * n);
  B.topLeftCorner(n, n) = Pinv.cast<cd>();
  B.topRightCorner(n, n) = (-Pinv * Q).cast<cd>();
  B.bottomLeftCorner(n, n) = (-Q.transpose() * Pinv).cast<cd>();
  B.bottomRightCorner(n, n) = (Q.transpose() * Pinv * Q - p.G(x)).cast<cd>() - Cz;
  CM J = CM::Zero(2 * n, 2 * n);
  J.topRightCorner(n, n) = -CM::Identity(n, n);
  J.bottomLeftCorner(n, n) = CM::Identity(n, n);
  return J * B;
}

/// Classical RK4 with a uniform step, from x = 0 to x = xend.
inline CM rk4_psi(const msflow::MorseSturmProblem& p, cd z, int steps, double xend = 1.0) {
  const int m = 2 * p.N;
  CM y = CM::Identity(m, m);
  const double h = xend / steps;
  for (int i = 0; i < steps; ++i) {
    const double x = i * h;
    const CM k1 = generator(p, z, x) * y;
    const CM k2 = generator(p, z, x + h / 2) * (y + h / 2 * k1);
    const CM k3 = generator(p, z, x + h / 2) * (y + h / 2 * k2);
    const CM k4 = generator(p, z, x + h) * (y + h * k3);
    y += h / 6 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return y;
}

inline cd rho(const msflow::MorseSturmProblem& p, cd z, int steps = 2000) {
  const CM R = p.bc.R0.cast<cd>() + p.bc.R1.cast<cd>() * rk4_psi(p, z, steps);
  return R.fullPivLu().determinant();
}

/// Eigenvalues of -u'' on [0, 1] below `limit`, by boundary condition.
inline std::vector<double> laplacian_eigenvalues(msflow::BoundaryCondition::Preset bc, double limit) {
  std::vector<double> out;
  using P = msflow::BoundaryCondition::Preset;
  for (int k = 0;; ++k) {
    double lam = 0.0;
    int mult = 1;
    if (bc == P::Dirichlet) {
      if (k == 0) continue;
      lam = k * k * pi * pi;
    } else if (bc == P::Neumann) {
      lam = k * k * pi * pi;
    } else {
      lam = 4.0 * k * k * pi * pi;
      mult = k == 0 ? 1 : 2;
    }
    if (lam > limit) break;
    for (int j = 0; j < mult; ++j) out.push_back(lam);
  }
  return out;
}

/// Number of negative eigenvalues of -u'' + a.
inline int negative_count(msflow::BoundaryCondition::Preset bc, double a) {
  int count = 0;
  for (double lam : laplacian_eigenvalues(bc, std::abs(a) + 1.0))
    if (lam + a < 0.0) ++count;
  return count;
}

/// Spectral flow of -u'' + g + t c, t in [0, 1]: m-(0) - m-(1) for a monotone family.
inline int scalar_sf(msflow::BoundaryCondition::Preset bc, double g, double c) {
  return negative_count(bc, g) - negative_count(bc, g + c);
}

/// prod_{k <= K} (1 + 1 / (k pi)^2).
inline double sinh_product(int K) {
  double p = 1.0;
  for (int k = 1; k <= K; ++k) p *= 1.0 + 1.0 / (static_cast<double>(k) * k * pi * pi);
  return p;
}

/// Textbook Green's function of -u'' with Dirichlet conditions.
inline double dirichlet_green(double x, double y) { return x < y ? x * (1 - y) : y * (1 - x); }

/// Standard J of size 2n.
inline RM J(int n) {
  RM j = RM::Zero(2 * n, 2 * n);
  j.topRightCorner(n, n) = -RM::Identity(n, n);
  j.bottomLeftCorner(n, n) = RM::Identity(n, n);
  return j;
}

/// Random symplectic matrix: product of block shears and a block-diagonal scaling.
inline RM random_symplectic(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto sym = [&] {
    RM s(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) s(i, j) = u(rng);
    return RM(0.5 * (s + s.transpose()));
  };
  RM A = RM::Identity(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) += 0.4 * u(rng);
  RM D = RM::Zero(2 * n, 2 * n);
  D.topLeftCorner(n, n) = A;
  D.bottomRightCorner(n, n) = A.inverse().transpose();
  RM U = RM::Identity(2 * n, 2 * n), L = RM::Identity(2 * n, 2 * n);
  U.topRightCorner(n, n) = sym();
  L.bottomLeftCorner(n, n) = sym();
  return U * D * L;
}

/// Rotation by angle theta_k in each (q_k, p_k) plane, as an element of Sp(2n).
inline RM block_rotation(const std::vector<double>& theta) {
  const int n = static_cast<int>(theta.size());
  RM R = RM::Identity(2 * n, 2 * n);
  for (int k = 0; k < n; ++k) {
    R(k, k) = std::cos(theta[k]);
    R(k + n, k + n) = std::cos(theta[k]);
    R(k, k + n) = -std::sin(theta[k]);
    R(k + n, k) = std::sin(theta[k]);
  }
  return R;
}

}  // namespace oracle
