#include "msflow/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#define LAPACK_COMPLEX_CPP
#include <lapacke.h>

#include "msflow/error.hpp"

namespace msflow {

RMatrix standard_J(int n) {
  RMatrix j = RMatrix::Zero(2 * n, 2 * n);
  j.topRightCorner(n, n) = -RMatrix::Identity(n, n);
  j.bottomLeftCorner(n, n) = RMatrix::Identity(n, n);
  return j;
}

cdouble determinant(const CMatrix& m) { return Eigen::FullPivLU<CMatrix>(m).determinant(); }

double determinant(const RMatrix& m) { return Eigen::FullPivLU<RMatrix>(m).determinant(); }

double max_abs(const RMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

double max_abs(const CMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

RVector singular_values(const CMatrix& m) {
  Eigen::JacobiSVD<CMatrix> svd(m);
  return svd.singularValues();
}

CMatrix null_space(const CMatrix& m, double rel_tol) {
  Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeFullV);
  const RVector& s = svd.singularValues();
  const double cutoff = rel_tol * (s.size() ? s(0) : 0.0);
  int rank = 0;
  while (rank < s.size() && s(rank) > cutoff) ++rank;
  const int cols = static_cast<int>(m.cols());
  return svd.matrixV().rightCols(cols - rank);
}

RMatrix null_space(const RMatrix& m, double rel_tol) {
  Eigen::JacobiSVD<RMatrix> svd(m, Eigen::ComputeFullV);
  const RVector& s = svd.singularValues();
  return null_space(m, rel_tol, s.size() ? s(0) : 0.0);
}

RMatrix null_space(const RMatrix& m, double rel_tol, double scale) {
  Eigen::JacobiSVD<RMatrix> svd(m, Eigen::ComputeFullV);
  const RVector& s = svd.singularValues();
  const double cutoff = rel_tol * scale;
  int rank = 0;
  while (rank < s.size() && s(rank) > cutoff) ++rank;
  const int cols = static_cast<int>(m.cols());
  return svd.matrixV().rightCols(cols - rank);
}

RMatrix orthonormal_columns(const RMatrix& m, double rel_tol) {
  if (m.cols() == 0) return RMatrix(m.rows(), 0);
  Eigen::JacobiSVD<RMatrix> svd(m, Eigen::ComputeThinU);
  const RVector& s = svd.singularValues();
  const double cutoff = rel_tol * (s.size() ? s(0) : 0.0);
  int rank = 0;
  while (rank < s.size() && s(rank) > cutoff) ++rank;
  return svd.matrixU().leftCols(rank);
}

QuadratureRule gauss_legendre(int order, double a, double b) {
  if (order < 1) throw Error(ErrorKind::InvalidArgument, "quadrature order must be positive");
  QuadratureRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  // Newton iteration on P_order from Chebyshev initial guesses.
  for (int i = 0; i < (order + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= order; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = order * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= order; ++k) {
      const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    dp = order * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[order - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[order - 1 - i] = w;
  }
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  for (int i = 0; i < order; ++i) {
    rule.nodes[i] = mid + half * rule.nodes[i];
    rule.weights[i] *= half;
  }
  return rule;
}

QuadratureRule composite_gauss_legendre(int panels, int order, double a, double b) {
  if (panels < 1) throw Error(ErrorKind::InvalidArgument, "panel count must be positive");
  QuadratureRule out;
  out.nodes.reserve(static_cast<std::size_t>(panels) * order);
  out.weights.reserve(static_cast<std::size_t>(panels) * order);
  const double width = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    QuadratureRule r = gauss_legendre(order, a + p * width, a + (p + 1) * width);
    out.nodes.insert(out.nodes.end(), r.nodes.begin(), r.nodes.end());
    out.weights.insert(out.weights.end(), r.weights.begin(), r.weights.end());
  }
  return out;
}

SymmetricBand::SymmetricBand(int size, int bandwidth)
    : n_(size), kd_(bandwidth), ab_(static_cast<std::size_t>(bandwidth + 1) * size, 0.0) {
  if (size < 1 || bandwidth < 0 || bandwidth >= std::max(size, 1) + 1)
    throw Error(ErrorKind::InvalidArgument, "invalid band matrix shape");
}

void SymmetricBand::add(int i, int j, double value) {
  if (i < j) std::swap(i, j);
  if (i - j > kd_) throw std::logic_error("band entry outside bandwidth");
  ab_[static_cast<std::size_t>(j) * (kd_ + 1) + (i - j)] += value;
}

double SymmetricBand::get(int i, int j) const {
  if (i < j) std::swap(i, j);
  if (i - j > kd_) return 0.0;
  return ab_[static_cast<std::size_t>(j) * (kd_ + 1) + (i - j)];
}

void SymmetricBand::scale_symmetric(const std::vector<double>& d) {
  for (int j = 0; j < n_; ++j)
    for (int i = j; i <= std::min(n_ - 1, j + kd_); ++i)
      ab_[static_cast<std::size_t>(j) * (kd_ + 1) + (i - j)] *= d[i] * d[j];
}

RMatrix SymmetricBand::dense() const {
  RMatrix a = RMatrix::Zero(n_, n_);
  for (int j = 0; j < n_; ++j)
    for (int i = j; i <= std::min(n_ - 1, j + kd_); ++i) {
      a(i, j) = ab_[static_cast<std::size_t>(j) * (kd_ + 1) + (i - j)];
      a(j, i) = a(i, j);
    }
  return a;
}

std::vector<double> SymmetricBand::eigenvalues() const {
  std::vector<double> ab = ab_;
  std::vector<double> w(n_);
  // Column-major band storage: ldab = kd + 1.
  const lapack_int info = LAPACKE_dsbev(LAPACK_COL_MAJOR, 'N', 'L', n_, kd_, ab.data(), kd_ + 1,
                                        w.data(), nullptr, 1);
  if (info != 0) throw Error(ErrorKind::NotConverged, "banded eigensolver failed (dsbev info " +
                                                          std::to_string(info) + ")");
  return w;
}

cdouble log_determinant_shifted(const SymmetricBand& a, const std::vector<cdouble>& shift) {
  const int n = a.size(), kd = a.bandwidth();
  const int ldab = 3 * kd + 1;
  std::vector<cdouble> ab(static_cast<std::size_t>(ldab) * n, cdouble(0.0, 0.0));
  for (int j = 0; j < n; ++j)
    for (int i = std::max(0, j - kd); i <= std::min(n - 1, j + kd); ++i) {
      cdouble v = a.get(i, j);
      if (i == j) v += shift[i];
      ab[static_cast<std::size_t>(j) * ldab + (2 * kd + i - j)] = v;
    }
  std::vector<lapack_int> ipiv(n);
  const lapack_int info = LAPACKE_zgbtrf(LAPACK_COL_MAJOR, n, n, kd, kd,
                                              reinterpret_cast<lapack_complex_double*>(ab.data()), ldab,
                                              ipiv.data());
  if (info < 0) throw Error(ErrorKind::NotConverged, "banded LU failed");
  if (info > 0) return {-std::numeric_limits<double>::infinity(), 0.0};
  cdouble logdet = 0.0;
  for (int i = 0; i < n; ++i) {
    logdet += std::log(ab[static_cast<std::size_t>(i) * ldab + 2 * kd]);
    if (ipiv[i] != i + 1) logdet += cdouble(0.0, std::numbers::pi);
  }
  return logdet;
}

}  // namespace msflow
