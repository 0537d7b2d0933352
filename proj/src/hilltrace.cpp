#include "msflow/hilltrace.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>

namespace msflow {

namespace {

constexpr cdouble kI(0.0, 1.0);

struct KernelParts {
  CMatrix proj;
  std::shared_ptr<const FundamentalSolution> psi;
};

KernelParts kernel_parts(const ValidatedProblem& vp, cdouble z, const IntegratorConfig& config) {
  const int n = vp.N();
  auto fs = std::make_shared<FundamentalSolution>(fundamental_solution(vp, z, config));
  const CMatrix R1psi = vp->bc.R1.cast<cdouble>() * fs->terminal;
  const CMatrix Rz = vp->bc.R0.cast<cdouble>() + R1psi;
  const RVector s = singular_values(Rz);
  if (!(s(2 * n - 1) > 1e-13 * s(0))) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "R_z is singular at z = (%.6g, %.6g)", z.real(), z.imag());
    throw Error(ErrorKind::SingularRz, buf);
  }
  return {Rz.fullPivLu().solve(R1psi), fs};
}

CMatrix lower_left(const CMatrix& m, int n) { return m.block(n, 0, n, n); }

void require_linear(const ValidatedProblem& vp) {
  if (vp->family.mode() != PerturbationFamily::Mode::Linear)
    throw Error(ErrorKind::InvalidArgument, "the Hill check needs a linear family C(t, x) = t G1(x)");
}

cdouble log_ratio_derivative(const std::function<cdouble(cdouble)>& f, cdouble z, cdouble dir,
                             double h) {
  auto central = [&](double step) {
    return std::log(f(z + step * dir) / f(z - step * dir)) / (2.0 * step);
  };
  return (4.0 * central(0.5 * h) - central(h)) / 3.0;
}

double relative(cdouble a, cdouble ref) {
  const double d = std::abs(a - ref);
  if (d == 0.0) return 0.0;
  return d / std::max(std::abs(ref), 1e-300);
}

}  // namespace

CMatrix GreenKernel::block(const CMatrix& psi_x, const CMatrix& middle,
                           const CMatrix& psi_y_inv) const {
  return lower_left(psi_x * middle * psi_y_inv, n_);
}

CMatrix GreenKernel::operator()(double x, double y) const {
  const CMatrix middle =
      x < y ? proj_ : CMatrix(proj_ - CMatrix::Identity(2 * n_, 2 * n_));
  return block(psi_->at(x), middle, psi_->at(y).inverse());
}

CMatrix GreenKernel::diagonal_below(double x) const {
  const CMatrix px = psi_->at(x);
  return block(px, proj_ - CMatrix::Identity(2 * n_, 2 * n_), px.inverse());
}

CMatrix GreenKernel::diagonal_above(double x) const {
  const CMatrix px = psi_->at(x);
  return block(px, proj_, px.inverse());
}

GreenKernel green_kernel(const ValidatedProblem& vp, cdouble z, const IntegratorConfig& config) {
  IntegratorConfig cfg = config;
  cfg.dense = true;
  KernelParts parts = kernel_parts(vp, z, cfg);
  GreenKernel g;
  g.n_ = vp.N();
  g.z_ = z;
  g.psi_ = std::move(parts.psi);
  g.proj_ = std::move(parts.proj);
  return g;
}

TraceTheta trace_theta(const ValidatedProblem& vp, cdouble z, const IntegratorConfig& config,
                       int panels) {
  const int n = vp.N();
  const QuadratureRule q = composite_gauss_legendre(panels, 8);
  IntegratorConfig cfg = config;
  cfg.dense = false;
  cfg.mesh.clear();
  cfg.stop_points.insert(cfg.stop_points.end(), q.nodes.begin(), q.nodes.end());
  const KernelParts parts = kernel_parts(vp, z, cfg);
  TraceTheta th{0.0, 0.0};
  cdouble trace_k = 0.0;
  for (std::size_t i = 0; i < q.nodes.size(); ++i) {
    const double x = q.nodes[i];
    const CMatrix px = parts.psi->at(x);
    const CMatrix K = lower_left(px * parts.proj * px.inverse(), n);
    th.theta_t += q.weights[i] * (vp->family.dt(z.real(), x).cast<cdouble>() * K).trace();
    trace_k += q.weights[i] * K.trace();
  }
  th.theta_s = kI * trace_k;
  return th;
}

TraceCheck trace_formula_check(const ValidatedProblem& vp, cdouble z, double h_fd,
                               const IntegratorConfig& config) {
  if (!(h_fd > 0.0)) throw Error(ErrorKind::InvalidArgument, "finite-difference step must be positive");
  TraceCheck out;
  out.z = z;
  out.step = h_fd;
  out.theta = trace_theta(vp, z, config);

  IntegratorConfig fixed = config;
  fixed.dense = false;
  fixed.mesh = fundamental_solution(vp, z, fixed).mesh;
  auto f = [&](cdouble w) {
    const cdouble r = rho(vp, w, fixed);
    if (r == 0.0) throw Error(ErrorKind::SingularRz, "rho vanishes inside the difference stencil");
    return r;
  };
  out.dlog_t = log_ratio_derivative(f, z, 1.0, h_fd);
  out.dlog_s = log_ratio_derivative(f, z, kI, h_fd);
  out.rel_error_t = relative(out.theta.theta_t, out.dlog_t);
  out.rel_error_s = relative(out.theta.theta_s, out.dlog_s);
  return out;
}

cdouble trace_contour_integral(const ValidatedProblem& vp, double t0, double t1, double s0,
                               double s1, int panels, const IntegratorConfig& config,
                               Execution exec) {
  const QuadratureRule qt = composite_gauss_legendre(panels, 8, t0, t1);
  const QuadratureRule qs = composite_gauss_legendre(panels, 8, s0, s1);
  struct Node {
    cdouble z;
    double weight;
    bool t_component;
  };
  std::vector<Node> nodes;
  for (std::size_t i = 0; i < qt.nodes.size(); ++i) {
    nodes.push_back({{qt.nodes[i], s0}, qt.weights[i], true});    // bottom, t increasing
    nodes.push_back({{qt.nodes[i], s1}, -qt.weights[i], true});   // top, t decreasing
  }
  for (std::size_t i = 0; i < qs.nodes.size(); ++i) {
    nodes.push_back({{t1, qs.nodes[i]}, qs.weights[i], false});   // right, s increasing
    nodes.push_back({{t0, qs.nodes[i]}, -qs.weights[i], false});  // left, s decreasing
  }
  const auto terms = map_indexed(
      nodes.size(),
      [&](std::size_t i) {
        const TraceTheta th = trace_theta(vp, nodes[i].z, config);
        return nodes[i].weight * (nodes[i].t_component ? th.theta_t : th.theta_s);
      },
      exec);
  cdouble sum = 0.0;
  for (const auto& v : terms) sum += v;
  return sum / (2.0 * std::numbers::pi * kI);
}

ContourIntegral trace_contour_integral(const ValidatedProblem& vp, double h,
                                       const IntegratorConfig& config, double tol, int max_panels,
                                       Execution exec) {
  ContourIntegral out;
  int panels = 4;
  cdouble prev = trace_contour_integral(vp, 0.0, 1.0, -h, h, panels, config, exec);
  for (;;) {
    panels *= 2;
    const cdouble cur = trace_contour_integral(vp, 0.0, 1.0, -h, h, panels, config, exec);
    out.change = std::abs(cur - prev);
    out.value = cur;
    out.panels = panels;
    if (out.change <= tol || panels >= max_panels) break;
    prev = cur;
  }
  return out;
}

HillRatio hill_ratio(const ValidatedProblem& vp, const IntegratorConfig& config) {
  require_linear(vp);
  HillRatio out;
  double scale = 0.0;
  for (int j = 0; j <= 16; ++j) {
    const cdouble r = rho(vp, cdouble(j / 16.0, 0.0), config);
    scale = std::max(scale, std::abs(r));
    if (j == 0) out.rho0 = r;
    if (j == 16) out.rho1 = r;
  }
  if (!(std::abs(out.rho0) > 1e-8 * scale))
    throw Error(ErrorKind::NotAdmissible, "|rho(0)| below floor");
  if (!(std::abs(out.rho1) > 1e-8 * scale))
    throw Error(ErrorKind::NotAdmissible, "|rho(1)| below floor");
  out.ratio = out.rho1 / out.rho0;
  return out;
}

EigenProduct truncated_eigenproduct(const ValidatedProblem& vp, int K, int M) {
  require_linear(vp);
  const int n = vp.N();
  if (K < 1) throw Error(ErrorKind::InvalidArgument, "cutoff K must be positive");
  if (M <= 0) M = std::max(64, (K + n - 1) / n);
  if (M * n < K)
    throw Error(ErrorKind::InvalidArgument, "discretization has fewer than K eigenvalues");
  const CoefficientField& g1 = *vp->family.linear_coefficient();
  const Discretization d = discretize_with(vp, [n](double) { return RMatrix::Zero(n, n); }, M);

  std::vector<RMatrix> blocks(M);
  int sign = 0;
  for (int k = 0; k < M; ++k) {
    blocks[k] = g1(d.x[k]);
    Eigen::SelfAdjointEigenSolver<RMatrix> es(blocks[k], Eigen::EigenvaluesOnly);
    const int s = es.eigenvalues().minCoeff() > 0.0 ? 1 : es.eigenvalues().maxCoeff() < 0.0 ? -1 : 0;
    if (k == 0) sign = s;
    else if (s != sign) sign = 0;
  }

  std::vector<double> lambda;
  if (sign != 0) {
    // S A S with S = (sign G1)^-1/2 blockwise; the block band is preserved
    std::vector<RMatrix> S(M);
    for (int k = 0; k < M; ++k) {
      Eigen::SelfAdjointEigenSolver<RMatrix> es(sign * blocks[k]);
      S[k] = es.operatorInverseSqrt();
    }
    SymmetricBand scaled(d.size(), d.matrix.bandwidth());
    std::vector<int> node_at(M);
    for (int k = 0; k < M; ++k) node_at[d.position[k]] = k;
    const int reach = (d.matrix.bandwidth() + 1 + n - 1) / n;
    for (int p = 0; p < M; ++p)
      for (int r = std::max(0, p - reach); r <= p; ++r) {
        RMatrix Apr(n, n);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) Apr(i, j) = d.matrix.get(p * n + i, r * n + j);
        const RMatrix B = S[node_at[p]] * Apr * S[node_at[r]];
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) {
            const int gi = p * n + i, gj = r * n + j;
            if (gi >= gj && gi - gj <= scaled.bandwidth()) scaled.add(gi, gj, B(i, j));
          }
      }
    for (double mu : scaled.eigenvalues()) lambda.push_back(-sign * mu);
  } else {
    const RMatrix A = d.matrix.dense();
    RMatrix G = RMatrix::Zero(d.size(), d.size());
    for (int k = 0; k < M; ++k) G.block(d.position[k] * n, d.position[k] * n, n, n) = blocks[k];
    Eigen::LLT<RMatrix> llt(A);
    if (llt.info() != Eigen::Success)
      throw Error(ErrorKind::SingularG1h,
                  "G1 is indefinite and A is not positive definite; the pencil cannot be reduced");
    Eigen::GeneralizedSelfAdjointEigenSolver<RMatrix> ges(G, A, Eigen::EigenvaluesOnly);
    const RVector nu = ges.eigenvalues();
    const double numax = nu.cwiseAbs().maxCoeff();
    if (numax == 0.0) throw Error(ErrorKind::SingularG1h, "G1 vanishes on the grid");
    for (Eigen::Index i = 0; i < nu.size(); ++i)
      if (std::abs(nu(i)) > 1e-14 * numax) lambda.push_back(-1.0 / nu(i));
  }
  std::sort(lambda.begin(), lambda.end(),
            [](double a, double b) { return std::abs(a) < std::abs(b); });
  if (static_cast<int>(lambda.size()) < K)
    throw Error(ErrorKind::SingularG1h, "fewer than K finite pencil eigenvalues");
  lambda.resize(K);

  EigenProduct out;
  out.M = M;
  out.lambda = lambda;
  cdouble prod = 1.0;
  for (double l : lambda) {
    prod *= 1.0 - 1.0 / l;
    out.partial.push_back(prod);
  }
  out.product = prod;

  // |lambda_j| ~ c j^2; fit c on the upper half of the retained range
  const int lo = K >= 8 ? K / 4 : 1, hi = K >= 8 ? K / 2 : K;
  std::vector<double> ratios;
  for (int j = lo; j <= hi; ++j) ratios.push_back(std::abs(lambda[j - 1]) / (double(j) * j));
  std::nth_element(ratios.begin(), ratios.begin() + ratios.size() / 2, ratios.end());
  const double c = ratios[ratios.size() / 2];
  out.tail = 1.0 / (c * K);
  return out;
}

void write_eigenproduct_csv(std::ostream& os, const EigenProduct& p) {
  os << "j,lambda,re_partial,im_partial\n";
  char buf[128];
  for (std::size_t j = 0; j < p.lambda.size(); ++j) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", j + 1, p.lambda[j],
                  p.partial[j].real(), p.partial[j].imag());
    os << buf;
  }
}

cdouble fredholm_determinant(const ValidatedProblem& vp, cdouble z, int M) {
  const Discretization a0 = discretize(vp, 0.0, M);
  const Discretization at = discretize(vp, z.real(), M);
  const std::vector<cdouble> none(a0.size(), 0.0);
  const std::vector<cdouble> shift(at.size(), cdouble(0.0, z.imag()));
  const cdouble l0 = log_determinant_shifted(a0.matrix, none);
  const cdouble l1 = log_determinant_shifted(at.matrix, shift);
  if (std::isinf(l0.real()))
    throw Error(ErrorKind::NotAdmissible, "discretized A_0 is singular");
  return std::exp(l1 - l0);
}

FredholmCheck fredholm_identity_check(const ValidatedProblem& vp, const std::vector<cdouble>& zs,
                                      int M, const DegreeConfig& config) {
  FredholmCheck out;
  const cdouble r0 = rho(vp, 0.0, config.ode);
  for (cdouble z : zs) {
    const cdouble f = fredholm_determinant(vp, z, M);
    const cdouble ratio = rho(vp, z, config.ode) / r0;
    out.z.push_back(z);
    out.fredholm.push_back(f);
    out.ratio.push_back(ratio);
    out.rel_error.push_back(relative(f, ratio));
  }
  DegreeConfig fcfg = config;
  fcfg.label = "f";
  out.degree_f =
      wind_rectangle([&](cdouble z) { return fredholm_determinant(vp, z, M); }, vp->half_height, fcfg)
          .winding;
  out.iota_pw = winding_number(vp, config).winding;
  return out;
}

}  // namespace msflow
