#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace msflow {

using cdouble = std::complex<double>;
using RMatrix = Eigen::MatrixXd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using CVector = Eigen::VectorXcd;

/// Standard complex structure [[0, -I], [I, 0]] of size 2n.
RMatrix standard_J(int n);

/// Determinant by full-pivoting LU.
cdouble determinant(const CMatrix& m);
double determinant(const RMatrix& m);

double max_abs(const RMatrix& m);
double max_abs(const CMatrix& m);

/// Singular values in descending order.
RVector singular_values(const CMatrix& m);

/// Columns spanning the right null space: singular values <= rel_tol * sigma_max.
CMatrix null_space(const CMatrix& m, double rel_tol);
RMatrix null_space(const RMatrix& m, double rel_tol);
/// Singular values at or below rel_tol * scale count as zero.
RMatrix null_space(const RMatrix& m, double rel_tol, double scale);

/// Orthonormal basis of the column space (rank decided at rel_tol).
RMatrix orthonormal_columns(const RMatrix& m, double rel_tol);

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre rule with `order` nodes on [a, b].
QuadratureRule gauss_legendre(int order, double a = 0.0, double b = 1.0);

/// `panels` equal panels, each carrying a Gauss-Legendre rule of `order` nodes.
QuadratureRule composite_gauss_legendre(int panels, int order, double a = 0.0, double b = 1.0);

/// Real symmetric band matrix stored as its lower band (LAPACK 'L' layout).
class SymmetricBand {
 public:
  SymmetricBand(int size, int bandwidth);

  int size() const { return n_; }
  int bandwidth() const { return kd_; }

  /// Accumulates into A(i, j) and, implicitly, A(j, i). |i - j| must be <= bandwidth.
  void add(int i, int j, double value);
  double get(int i, int j) const;

  /// Applies A <- D A D for the diagonal D.
  void scale_symmetric(const std::vector<double>& d);

  RMatrix dense() const;

  /// All eigenvalues in ascending order.
  std::vector<double> eigenvalues() const;

  const std::vector<double>& storage() const { return ab_; }

 private:
  int n_;
  int kd_;
  std::vector<double> ab_;
};

/// log det of (A + diag(shift)) for a symmetric band A and a complex diagonal
/// shift, computed by banded LU with partial pivoting. The imaginary part is
/// the accumulated phase (not reduced to a principal branch).
cdouble log_determinant_shifted(const SymmetricBand& a, const std::vector<cdouble>& shift);

}  // namespace msflow
