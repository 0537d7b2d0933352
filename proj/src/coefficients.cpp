#include "msflow/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

#include "msflow/error.hpp"

namespace msflow {

namespace {

void require_square(const RMatrix& m, int n, const char* what) {
  if (m.rows() != n || m.cols() != n)
    throw Error(ErrorKind::DimensionMismatch, std::string(what) + " must be " + std::to_string(n) +
                                                  "x" + std::to_string(n));
}

// Index of the interval [nodes[i], nodes[i+1]] used for x; clamps to the end intervals.
std::size_t locate(const std::vector<double>& nodes, double x) {
  auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
  std::size_t i = it == nodes.begin() ? 0 : static_cast<std::size_t>(it - nodes.begin()) - 1;
  return std::min(i, nodes.size() - 2);
}

RMatrix interpolate_linear(const std::vector<double>& nodes, const std::vector<RMatrix>& values,
                           double x) {
  const std::size_t i = locate(nodes, x);
  const double w = (x - nodes[i]) / (nodes[i + 1] - nodes[i]);
  return (1.0 - w) * values[i] + w * values[i + 1];
}

RMatrix interpolate_cubic(const std::vector<double>& nodes, const std::vector<RMatrix>& values,
                          double x) {
  const std::size_t n = nodes.size();
  if (n < 4) return interpolate_linear(nodes, values, x);
  const std::size_t i = locate(nodes, x);
  const std::size_t first = std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(i) - 1, 0,
                                                       static_cast<std::ptrdiff_t>(n) - 4);
  RMatrix out = RMatrix::Zero(values[0].rows(), values[0].cols());
  for (std::size_t a = first; a < first + 4; ++a) {
    double basis = 1.0;
    for (std::size_t b = first; b < first + 4; ++b)
      if (b != a) basis *= (x - nodes[b]) / (nodes[a] - nodes[b]);
    out += basis * values[a];
  }
  return out;
}

}  // namespace

CoefficientField CoefficientField::zero(int n) {
  return CoefficientField(n, Polynomial{{RMatrix::Zero(n, n)}});
}

CoefficientField CoefficientField::constant(const RMatrix& value) {
  if (value.rows() != value.cols() || value.rows() < 1)
    throw Error(ErrorKind::DimensionMismatch, "coefficient must be a square matrix");
  return CoefficientField(static_cast<int>(value.rows()), Polynomial{{value}});
}

CoefficientField CoefficientField::polynomial(std::vector<RMatrix> coefficients) {
  if (coefficients.empty()) throw Error(ErrorKind::InvalidArgument, "polynomial needs coefficients");
  const int n = static_cast<int>(coefficients.front().rows());
  for (const auto& c : coefficients) require_square(c, n, "polynomial coefficient");
  return CoefficientField(n, Polynomial{std::move(coefficients)});
}

CoefficientField CoefficientField::fourier(RMatrix constant, std::vector<RMatrix> cosine,
                                           std::vector<RMatrix> sine) {
  const int n = static_cast<int>(constant.rows());
  require_square(constant, n, "Fourier constant term");
  for (const auto& c : cosine) require_square(c, n, "Fourier cosine term");
  for (const auto& s : sine) require_square(s, n, "Fourier sine term");
  return CoefficientField(n, Fourier{std::move(constant), std::move(cosine), std::move(sine)});
}

CoefficientField CoefficientField::sampled(std::vector<double> nodes, std::vector<RMatrix> values,
                                           int order) {
  if (nodes.size() < 2 || nodes.size() != values.size())
    throw Error(ErrorKind::InvalidArgument, "sampled field needs >= 2 nodes with one value each");
  if (order != 1 && order != 3)
    throw Error(ErrorKind::InvalidArgument, "interpolation order must be 1 or 3");
  if (!std::is_sorted(nodes.begin(), nodes.end()) ||
      std::adjacent_find(nodes.begin(), nodes.end()) != nodes.end())
    throw Error(ErrorKind::InvalidArgument, "sample nodes must be strictly increasing");
  if (nodes.front() > 0.0 || nodes.back() < 1.0)
    throw Error(ErrorKind::InvalidArgument, "sample nodes must cover [0, 1]");
  const int n = static_cast<int>(values.front().rows());
  for (const auto& v : values) require_square(v, n, "sampled value");
  return CoefficientField(n, Sampled{std::move(nodes), std::move(values), order});
}

CoefficientField CoefficientField::custom(int n, std::function<RMatrix(double)> fn) {
  return CoefficientField(n, Custom{std::move(fn)});
}

RMatrix CoefficientField::operator()(double x) const {
  return std::visit(
      [&](const auto& rep) -> RMatrix {
        using T = std::decay_t<decltype(rep)>;
        if constexpr (std::is_same_v<T, Polynomial>) {
          // Horner
          RMatrix acc = rep.coefficients.back();
          for (std::size_t k = rep.coefficients.size() - 1; k-- > 0;)
            acc = acc * x + rep.coefficients[k];
          return acc;
        } else if constexpr (std::is_same_v<T, Fourier>) {
          RMatrix acc = rep.constant;
          const double w = 2.0 * std::numbers::pi * x;
          for (std::size_t k = 0; k < rep.cosine.size(); ++k)
            acc += std::cos(w * static_cast<double>(k + 1)) * rep.cosine[k];
          for (std::size_t k = 0; k < rep.sine.size(); ++k)
            acc += std::sin(w * static_cast<double>(k + 1)) * rep.sine[k];
          return acc;
        } else if constexpr (std::is_same_v<T, Sampled>) {
          return rep.order == 3 ? interpolate_cubic(rep.nodes, rep.values, x)
                                : interpolate_linear(rep.nodes, rep.values, x);
        } else {
          return rep.fn(x);
        }
      },
      rep_);
}

bool CoefficientField::is_zero() const {
  if (const auto* p = std::get_if<Polynomial>(&rep_))
    return std::all_of(p->coefficients.begin(), p->coefficients.end(),
                       [](const RMatrix& c) { return c.isZero(0.0); });
  return false;
}

PerturbationFamily PerturbationFamily::linear(CoefficientField c1) {
  const int n = c1.dimension();
  auto value = [c1](double t, double x) -> RMatrix { return t * c1(x); };
  auto dt = [c1](double, double x) -> RMatrix { return c1(x); };
  PerturbationFamily f(Mode::Linear, n, value, dt);
  f.linear_ = std::move(c1);
  return f;
}

PerturbationFamily PerturbationFamily::grid(GridData data) {
  const auto& ts = data.t;
  const auto& xs = data.x;
  if (ts.size() < 2 || xs.size() < 2)
    throw Error(ErrorKind::InvalidArgument, "grid family needs >= 2 nodes in t and in x");
  if (data.values.size() != ts.size() * xs.size())
    throw Error(ErrorKind::InvalidArgument, "grid family needs one matrix per (t, x) node");
  for (const auto* nodes : {&ts, &xs})
    if (!std::is_sorted(nodes->begin(), nodes->end()) ||
        std::adjacent_find(nodes->begin(), nodes->end()) != nodes->end())
      throw Error(ErrorKind::InvalidArgument, "grid nodes must be strictly increasing");
  if (ts.front() > 0.0 || ts.back() < 1.0 || xs.front() > 0.0 || xs.back() < 1.0)
    throw Error(ErrorKind::InvalidArgument, "grid must cover [0, 1] x [0, 1]");
  const int n = static_cast<int>(data.values.front().rows());
  for (const auto& v : data.values) require_square(v, n, "grid value");

  auto shared = std::make_shared<const GridData>(data);
  auto at_row = [shared](std::size_t i, double x) -> RMatrix {
    const auto& g = *shared;
    const std::size_t j = locate(g.x, x);
    const double w = (x - g.x[j]) / (g.x[j + 1] - g.x[j]);
    const std::size_t nx = g.x.size();
    return (1.0 - w) * g.values[i * nx + j] + w * g.values[i * nx + j + 1];
  };
  auto value = [shared, at_row](double t, double x) -> RMatrix {
    const std::size_t i = locate(shared->t, t);
    const double w = (t - shared->t[i]) / (shared->t[i + 1] - shared->t[i]);
    return (1.0 - w) * at_row(i, x) + w * at_row(i + 1, x);
  };
  auto dt = [shared, at_row](double t, double x) -> RMatrix {
    const std::size_t i = locate(shared->t, t);
    return (at_row(i + 1, x) - at_row(i, x)) / (shared->t[i + 1] - shared->t[i]);
  };
  PerturbationFamily f(Mode::Grid, n, value, dt);
  f.grid_ = std::move(data);
  return f;
}

PerturbationFamily PerturbationFamily::derived(int n, std::function<RMatrix(double, double)> value,
                                               std::function<RMatrix(double, double)> dt) {
  return PerturbationFamily(Mode::Derived, n, std::move(value), std::move(dt));
}

PerturbationFamily PerturbationFamily::negated() const {
  auto v = value_;
  auto d = dt_;
  if (linear_) {
    const CoefficientField c1 = *linear_;
    return linear(CoefficientField::custom(dim_, [c1](double x) -> RMatrix { return -c1(x); }));
  }
  return derived(
      dim_, [v](double t, double x) -> RMatrix { return -v(t, x); },
      [d](double t, double x) -> RMatrix { return -d(t, x); });
}

PerturbationFamily PerturbationFamily::reparametrized(double a, double b) const {
  auto v = value_;
  auto d = dt_;
  const double span = b - a;
  return derived(
      dim_, [v, a, span](double s, double x) -> RMatrix { return v(a + span * s, x) - v(a, x); },
      [d, a, span](double s, double x) -> RMatrix { return span * d(a + span * s, x); });
}

}  // namespace msflow
