#pragma once

#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "msflow/linalg.hpp"

namespace msflow {

/// A real N x N matrix-valued function on [0, 1].
///
/// Representations:
///   - polynomial: F(x) = sum_k c_k x^k
///   - fourier:    F(x) = a_0 + sum_k a_k cos(2 pi k x) + b_k sin(2 pi k x)
///   - sampled:    values on increasing nodes covering [0, 1], interpolated
///                 piecewise linearly (order 1) or by local cubic Lagrange (order 3)
///   - custom:     an arbitrary callable, used for derived problems; not serializable
class CoefficientField {
 public:
  struct Polynomial {
    std::vector<RMatrix> coefficients;
  };
  struct Fourier {
    RMatrix constant;
    std::vector<RMatrix> cosine;
    std::vector<RMatrix> sine;
  };
  struct Sampled {
    std::vector<double> nodes;
    std::vector<RMatrix> values;
    int order = 1;
  };
  struct Custom {
    std::function<RMatrix(double)> fn;
  };
  using Representation = std::variant<Polynomial, Fourier, Sampled, Custom>;

  CoefficientField() : CoefficientField(zero(1)) {}

  static CoefficientField zero(int n);
  static CoefficientField constant(const RMatrix& value);
  static CoefficientField polynomial(std::vector<RMatrix> coefficients);
  static CoefficientField fourier(RMatrix constant, std::vector<RMatrix> cosine,
                                  std::vector<RMatrix> sine);
  static CoefficientField sampled(std::vector<double> nodes, std::vector<RMatrix> values, int order);
  static CoefficientField custom(int n, std::function<RMatrix(double)> fn);

  RMatrix operator()(double x) const;
  int dimension() const { return dim_; }
  const Representation& representation() const { return rep_; }
  bool is_zero() const;

 private:
  CoefficientField(int dim, Representation rep) : dim_(dim), rep_(std::move(rep)) {}

  int dim_;
  Representation rep_;
};

/// The one-parameter perturbation t -> C(t, x) together with its exact
/// t-derivative. Linear mode is C(t, x) = t C1(x); grid mode interpolates
/// bilinearly in (t, x), so its t-derivative is piecewise constant in t.
class PerturbationFamily {
 public:
  enum class Mode { Linear, Grid, Derived };

  struct GridData {
    std::vector<double> t;
    std::vector<double> x;
    std::vector<RMatrix> values;  // values[i * x.size() + j] = C(t_i, x_j)
  };

  PerturbationFamily() : PerturbationFamily(linear(CoefficientField::zero(1))) {}

  static PerturbationFamily linear(CoefficientField c1);
  static PerturbationFamily grid(GridData data);
  static PerturbationFamily derived(int n, std::function<RMatrix(double, double)> value,
                                    std::function<RMatrix(double, double)> dt);

  RMatrix value(double t, double x) const { return value_(t, x); }
  RMatrix dt(double t, double x) const { return dt_(t, x); }

  Mode mode() const { return mode_; }
  int dimension() const { return dim_; }
  /// C1 for linear mode.
  const std::optional<CoefficientField>& linear_coefficient() const { return linear_; }
  const std::optional<GridData>& grid_data() const { return grid_; }

  /// -C(t, x).
  PerturbationFamily negated() const;
  /// s -> C(a + (b - a) s, x) - C(a, x); the caller shifts the base operator by C(a, .).
  PerturbationFamily reparametrized(double a, double b) const;

 private:
  PerturbationFamily(Mode mode, int dim, std::function<RMatrix(double, double)> value,
                     std::function<RMatrix(double, double)> dt)
      : mode_(mode), dim_(dim), value_(std::move(value)), dt_(std::move(dt)) {}

  Mode mode_;
  int dim_;
  std::function<RMatrix(double, double)> value_;
  std::function<RMatrix(double, double)> dt_;
  std::optional<CoefficientField> linear_;
  std::optional<GridData> grid_;
};

}  // namespace msflow
