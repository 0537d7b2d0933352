#include "msflow/propagator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>

namespace msflow {

namespace {

// Dormand-Prince 5(4)
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
// continuous extension (Hairer & Wanner, dopri5 contd5)
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

std::atomic<double> g_max_drift{0.0};

void record_drift(double d) {
  double cur = g_max_drift.load();
  while (d > cur && !g_max_drift.compare_exchange_weak(cur, d)) {
  }
}

std::vector<double> interior_stops(const std::vector<double>& pts, double a, double b) {
  std::vector<double> s;
  for (double p : pts)
    if (p > a && p < b) s.push_back(p);
  s.push_back(b);
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

double error_norm(const CMatrix& err, const CMatrix& y0, const CMatrix& y1, double atol,
                  double rtol) {
  double acc = 0.0;
  for (Eigen::Index j = 0; j < err.cols(); ++j)
    for (Eigen::Index i = 0; i < err.rows(); ++i) {
      const double sc = atol + rtol * std::max(std::abs(y0(i, j)), std::abs(y1(i, j)));
      const double r = std::abs(err(i, j)) / sc;
      acc += r * r;
    }
  return std::sqrt(acc / static_cast<double>(err.size()));
}

struct Step {
  CMatrix y;
  CMatrix k7;
  CMatrix dense5;
  double err;
};

Step dopri_step(const Generator& A, double x, double h, const CMatrix& y, const CMatrix& k1,
                const IntegratorConfig& cfg) {
  const CMatrix k2 = A(x + c2 * h) * (y + h * (a21 * k1));
  const CMatrix k3 = A(x + c3 * h) * (y + h * (a31 * k1 + a32 * k2));
  const CMatrix k4 = A(x + c4 * h) * (y + h * (a41 * k1 + a42 * k2 + a43 * k3));
  const CMatrix k5 = A(x + c5 * h) * (y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
  const CMatrix k6 =
      A(x + h) * (y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
  Step s;
  s.y = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
  s.k7 = A(x + h) * s.y;
  const CMatrix e = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * s.k7);
  s.err = error_norm(e, y, s.y, cfg.atol, cfg.rtol);
  if (cfg.dense) s.dense5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * s.k7);
  return s;
}

void push_dense(DensePath& path, double x, double h, const CMatrix& y0, const CMatrix& y1,
                const CMatrix& f0, const CMatrix& f1, CMatrix r5) {
  DensePath::Segment seg;
  seg.x0 = x;
  seg.h = h;
  seg.r1 = y0;
  seg.r2 = y1 - y0;
  seg.r3 = h * f0 - seg.r2;
  seg.r4 = seg.r2 - h * f1 - seg.r3;
  seg.r5 = std::move(r5);
  path.push(std::move(seg));
}

TransportResult run_dopri(const Generator& A, double a, double b, const CMatrix& y0,
                          const IntegratorConfig& cfg) {
  TransportResult out;
  CMatrix y = y0;
  CMatrix k1 = A(a) * y;
  double x = a;
  out.mesh.push_back(a);
  out.at_mesh.push_back(y);

  if (!cfg.mesh.empty()) {
    for (double xn : cfg.mesh) {
      if (xn <= x) continue;
      const double h = std::min(xn, b) - x;
      Step s = dopri_step(A, x, h, y, k1, cfg);
      if (cfg.dense) push_dense(out.path, x, h, y, s.y, k1, s.k7, s.dense5);
      x += h;
      y = std::move(s.y);
      k1 = std::move(s.k7);
      out.mesh.push_back(x);
      out.at_mesh.push_back(y);
      if (x >= b) break;
    }
    if (x < b)
      throw Error(ErrorKind::InvalidArgument, "fixed integration mesh does not reach the endpoint");
    out.terminal = y;
    return out;
  }

  const std::vector<double> stops = interior_stops(cfg.stop_points, a, b);
  std::size_t next = 0;
  double h = std::min(1e-2, b - a);
  int steps = 0;
  while (x < b) {
    while (stops[next] <= x) ++next;
    const double target = stops[next];
    double ht = h;
    bool clipped = false;
    if (x + 1.01 * ht >= target) {
      ht = target - x;
      clipped = true;
    }
    if (++steps > cfg.max_steps)
      throw Error(ErrorKind::StepSizeUnderflow, "step budget exhausted at x = " + std::to_string(x));
    Step s = dopri_step(A, x, ht, y, k1, cfg);
    const double fac =
        s.err == 0.0 ? 10.0 : std::clamp(0.9 * std::pow(s.err, -0.2), 0.2, 10.0);
    if (s.err <= 1.0) {
      if (cfg.dense) push_dense(out.path, x, ht, y, s.y, k1, s.k7, s.dense5);
      x = clipped ? target : x + ht;
      y = std::move(s.y);
      k1 = std::move(s.k7);
      out.mesh.push_back(x);
      out.at_mesh.push_back(y);
      h = clipped ? std::max(h, ht * fac) : ht * fac;
    } else {
      ++out.rejected;
      h = ht * fac;
    }
    if (h < cfg.min_step)
      throw Error(ErrorKind::StepSizeUnderflow,
                  "step size fell below " + std::to_string(cfg.min_step) + " at x = " + std::to_string(x));
  }
  out.terminal = y;
  return out;
}

TransportResult run_rk4(const Generator& A, double a, double b, const CMatrix& y0,
                        const IntegratorConfig& cfg) {
  std::vector<double> pts = cfg.stop_points;
  for (int i = 1; i < cfg.fixed_steps; ++i)
    pts.push_back(a + (b - a) * static_cast<double>(i) / cfg.fixed_steps);
  const std::vector<double> mesh = interior_stops(pts, a, b);

  TransportResult out;
  CMatrix y = y0;
  double x = a;
  out.mesh.push_back(a);
  out.at_mesh.push_back(y);
  CMatrix f0 = A(x) * y;
  for (double xn : mesh) {
    const double h = xn - x;
    const CMatrix Am = A(x + 0.5 * h);
    const CMatrix k1 = f0;
    const CMatrix k2 = Am * (y + 0.5 * h * k1);
    const CMatrix k3 = Am * (y + 0.5 * h * k2);
    const CMatrix A1 = A(xn);
    const CMatrix k4 = A1 * (y + h * k3);
    CMatrix y1 = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    CMatrix f1 = A1 * y1;
    if (cfg.dense) push_dense(out.path, x, h, y, y1, f0, f1, CMatrix::Zero(y.rows(), y.cols()));
    x = xn;
    y = std::move(y1);
    f0 = std::move(f1);
    out.mesh.push_back(x);
    out.at_mesh.push_back(y);
  }
  out.terminal = y;
  return out;
}

void add_field_breaks(const CoefficientField& f, std::vector<double>& out) {
  if (const auto* s = std::get_if<CoefficientField::Sampled>(&f.representation()))
    out.insert(out.end(), s->nodes.begin(), s->nodes.end());
}

}  // namespace

void check(const IntegratorConfig& config) {
  if (!(config.rtol > 0.0) || !(config.atol > 0.0))
    throw Error(ErrorKind::InvalidArgument, "integrator tolerances must be positive");
  if (config.method == IntegratorConfig::Method::Rk4 && config.fixed_steps < 64)
    throw Error(ErrorKind::InvalidArgument, "fixed-step integration needs at least 64 steps");
}

CMatrix DensePath::operator()(double x) const {
  if (segments_.empty()) throw Error(ErrorKind::InvalidArgument, "no dense output recorded");
  auto it = std::upper_bound(segments_.begin(), segments_.end(), x,
                             [](double v, const Segment& s) { return v < s.x0; });
  const Segment& s = it == segments_.begin() ? segments_.front() : *(it - 1);
  const double th = (x - s.x0) / s.h;
  const double th1 = 1.0 - th;
  return s.r1 + th * (s.r2 + th1 * (s.r3 + th * (s.r4 + th1 * s.r5)));
}

TransportResult transport(const Generator& A, double a, double b, const CMatrix& y0,
                          const IntegratorConfig& config) {
  check(config);
  if (!(b > a)) throw Error(ErrorKind::InvalidArgument, "transport needs a < b");
  return config.method == IntegratorConfig::Method::Rk4 ? run_rk4(A, a, b, y0, config)
                                                        : run_dopri(A, a, b, y0, config);
}

double symplectic_drift(const CMatrix& psi) {
  const int n = static_cast<int>(psi.rows()) / 2;
  const CMatrix J = standard_J(n).cast<cdouble>();
  return max_abs(CMatrix(psi.transpose() * J * psi - J));
}

std::vector<double> breakpoints(const MorseSturmProblem& p) {
  std::vector<double> out;
  add_field_breaks(p.P, out);
  add_field_breaks(p.Q, out);
  add_field_breaks(p.G, out);
  if (const auto& c1 = p.family.linear_coefficient()) add_field_breaks(*c1, out);
  if (const auto& g = p.family.grid_data()) out.insert(out.end(), g->x.begin(), g->x.end());
  std::vector<double> inner;
  for (double x : out)
    if (x > 0.0 && x < 1.0) inner.push_back(x);
  std::sort(inner.begin(), inner.end());
  inner.erase(std::unique(inner.begin(), inner.end()), inner.end());
  return inner;
}

CMatrix FundamentalSolution::at(double x) const {
  if (!path.empty()) return path(x);
  auto it = std::lower_bound(mesh.begin(), mesh.end(), x);
  if (it != mesh.end() && *it == x) return at_mesh[static_cast<std::size_t>(it - mesh.begin())];
  throw Error(ErrorKind::InvalidArgument, "psi requested off the mesh without dense output");
}

FundamentalSolution fundamental_solution(const ValidatedProblem& vp, cdouble z,
                                         const IntegratorConfig& config) {
  const int n = vp.N();
  const CMatrix J = standard_J(n).cast<cdouble>();
  Generator A = [&vp, z, &J](double x) -> CMatrix { return J * hamiltonian_coefficients(vp, z, x); };

  IntegratorConfig cfg = config;
  const auto br = breakpoints(vp.problem());
  cfg.stop_points.insert(cfg.stop_points.end(), br.begin(), br.end());
  TransportResult r = transport(A, 0.0, 1.0, CMatrix::Identity(2 * n, 2 * n), cfg);

  FundamentalSolution fs;
  fs.z = z;
  fs.terminal = std::move(r.terminal);
  fs.mesh = std::move(r.mesh);
  fs.at_mesh = std::move(r.at_mesh);
  fs.path = std::move(r.path);
  fs.min_abs_det = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < fs.mesh.size(); ++i) {
    fs.symplectic_drift = std::max(fs.symplectic_drift, symplectic_drift(fs.at_mesh[i]));
    fs.min_abs_det = std::min(fs.min_abs_det, std::abs(determinant(fs.at_mesh[i])));
  }
  record_drift(fs.symplectic_drift);
  if (fs.symplectic_drift > cfg.symplectic_tol)
    throw Error(ErrorKind::SymplecticityLost,
                "|psi^T J psi - J| = " + std::to_string(fs.symplectic_drift) + " at z = (" +
                    std::to_string(z.real()) + ", " + std::to_string(z.imag()) + ")");
  if (fs.min_abs_det <= 1e-8)
    throw Error(ErrorKind::SymplecticityLost, "det psi collapsed below 1e-8");
  return fs;
}

CMatrix monodromy(const ValidatedProblem& vp, cdouble z, const IntegratorConfig& config) {
  IntegratorConfig cfg = config;
  cfg.dense = false;
  return fundamental_solution(vp, z, cfg).terminal;
}

MonodromyDerivative monodromy_t_derivative(const ValidatedProblem& vp, double t,
                                           const IntegratorConfig& config) {
  const int n = vp.N();
  const int m = 2 * n;
  const CMatrix J = standard_J(n).cast<cdouble>();
  Generator A = [&](double x) -> CMatrix {
    CMatrix out = CMatrix::Zero(2 * m, 2 * m);
    const CMatrix JB = J * hamiltonian_coefficients(vp, cdouble(t, 0.0), x);
    out.topLeftCorner(m, m) = JB;
    out.bottomRightCorner(m, m) = JB;
    out.bottomLeftCorner(m, m) = J * hamiltonian_t_derivative(vp, t, x).cast<cdouble>();
    return out;
  };
  IntegratorConfig cfg = config;
  cfg.dense = false;
  const auto br = breakpoints(vp.problem());
  cfg.stop_points.insert(cfg.stop_points.end(), br.begin(), br.end());
  CMatrix y0 = CMatrix::Zero(2 * m, m);
  y0.topRows(m).setIdentity();
  TransportResult r = transport(A, 0.0, 1.0, y0, cfg);
  const CMatrix psi = r.terminal.topRows(m);
  const double drift = symplectic_drift(psi);
  record_drift(drift);
  if (drift > cfg.symplectic_tol)
    throw Error(ErrorKind::SymplecticityLost, "|psi^T J psi - J| = " + std::to_string(drift));
  return {psi.real(), r.terminal.bottomRows(m).real()};
}

double max_observed_drift() { return g_max_drift.load(); }
void reset_drift_monitor() { g_max_drift.store(0.0); }

}  // namespace msflow
