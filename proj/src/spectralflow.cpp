#include "msflow/spectralflow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace msflow {

namespace {

double spectral_norm_sym(const RMatrix& m) {
  Eigen::SelfAdjointEigenSolver<RMatrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

int count_negative(const std::vector<double>& ev) {
  return static_cast<int>(std::lower_bound(ev.begin(), ev.end(), 0.0) - ev.begin());
}

void require_preset(const ValidatedProblem& vp) {
  if (vp->bc.preset == BoundaryCondition::Preset::General)
    throw Error(ErrorKind::UnsupportedBoundary,
                "finite-difference discretization needs a dirichlet, neumann or periodic boundary");
}

}  // namespace

RMatrix KernelBasis::w(double x) const { return (psi->at(x) * w0.cast<cdouble>()).real(); }

RMatrix KernelBasis::u(double x) const {
  const int n = static_cast<int>(w0.rows()) / 2;
  return w(x).bottomRows(n);
}

KernelBasis kernel_basis(const ValidatedProblem& vp, double t0, const IntegratorConfig& config,
                         double kernel_threshold) {
  const int n = vp.N();
  IntegratorConfig cfg = config;
  cfg.dense = true;
  auto fs = std::make_shared<FundamentalSolution>(fundamental_solution(vp, cdouble(t0, 0.0), cfg));
  const RMatrix R1psi = vp->bc.R1 * fs->terminal.real();
  RMatrix w0 = null_space(RMatrix(vp->bc.R0 + R1psi), kernel_threshold, boundary_scale(vp->bc.R0, R1psi));
  if (w0.cols() == 0) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "R_t is invertible at t = %.12g", t0);
    throw Error(ErrorKind::EmptyKernel, buf);
  }

  KernelBasis kb;
  kb.t0 = t0;
  kb.psi = fs;
  kb.w0 = w0;
  const QuadratureRule q = composite_gauss_legendre(16, 8);
  RMatrix gram = RMatrix::Zero(w0.cols(), w0.cols());
  for (std::size_t i = 0; i < q.nodes.size(); ++i) {
    const RMatrix u = kb.u(q.nodes[i]);
    gram += q.weights[i] * u.transpose() * u;
  }
  Eigen::LLT<RMatrix> llt(gram);
  const RMatrix Lt = llt.matrixU();
  kb.w0 = Lt.transpose().triangularView<Eigen::Lower>().solve(w0.transpose()).transpose();

  // ODE residual w' - J B w on 257 points by fourth-order differences
  const int G = 257;
  const double h = 1.0 / (G - 1);
  std::vector<RMatrix> ws(G);
  for (int i = 0; i < G; ++i) ws[i] = kb.w(i * h);
  const RMatrix J = standard_J(n);
  for (int i = 0; i < G; ++i) {
    RMatrix d;
    if (i >= 2 && i <= G - 3)
      d = (-ws[i + 2] + 8.0 * ws[i + 1] - 8.0 * ws[i - 1] + ws[i - 2]) / (12.0 * h);
    else if (i == 0)
      d = (-25.0 * ws[0] + 48.0 * ws[1] - 36.0 * ws[2] + 16.0 * ws[3] - 3.0 * ws[4]) / (12.0 * h);
    else if (i == 1)
      d = (-3.0 * ws[0] - 10.0 * ws[1] + 18.0 * ws[2] - 6.0 * ws[3] + ws[4]) / (12.0 * h);
    else if (i == G - 2)
      d = (3.0 * ws[G - 1] + 10.0 * ws[G - 2] - 18.0 * ws[G - 3] + 6.0 * ws[G - 4] - ws[G - 5]) /
          (12.0 * h);
    else
      d = (25.0 * ws[G - 1] - 48.0 * ws[G - 2] + 36.0 * ws[G - 3] - 16.0 * ws[G - 4] +
           3.0 * ws[G - 5]) /
          (12.0 * h);
    const RMatrix B = hamiltonian_coefficients(vp, cdouble(t0, 0.0), i * h).real();
    kb.ode_residual = std::max(kb.ode_residual, max_abs(RMatrix(d - J * B * ws[i])));
  }
  const RMatrix w1 = fs->terminal.real() * kb.w0;
  for (Eigen::Index c = 0; c < kb.w0.cols(); ++c) {
    const double scale = std::max(kb.w0.col(c).norm(), w1.col(c).norm());
    const double r = (vp->bc.R0 * kb.w0.col(c) + vp->bc.R1 * w1.col(c)).norm();
    kb.bc_residual = std::max(kb.bc_residual, r / scale);
  }
  return kb;
}

void inertia(const RMatrix& m, double rel_tol, int& n_plus, int& n_minus, int& nullity) {
  n_plus = n_minus = nullity = 0;
  if (m.size() == 0) return;
  Eigen::SelfAdjointEigenSolver<RMatrix> es(m, Eigen::EigenvaluesOnly);
  const RVector ev = es.eigenvalues();
  const double scale = ev.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (scale == 0.0 || std::abs(ev(i)) <= rel_tol * scale)
      ++nullity;
    else if (ev(i) > 0.0)
      ++n_plus;
    else
      ++n_minus;
  }
}

CrossingForm crossing_form(const ValidatedProblem& vp, const KernelBasis& kernel, int panels,
                           bool require_regular) {
  const QuadratureRule q = composite_gauss_legendre(panels, 8);
  const int k = kernel.size();
  CrossingForm cf;
  cf.t0 = kernel.t0;
  cf.gamma = RMatrix::Zero(k, k);
  for (std::size_t i = 0; i < q.nodes.size(); ++i) {
    const RMatrix u = kernel.u(q.nodes[i]);
    cf.gamma += q.weights[i] * u.transpose() * vp->family.dt(kernel.t0, q.nodes[i]) * u;
  }
  cf.asymmetry = max_abs(RMatrix(cf.gamma - cf.gamma.transpose()));
  cf.gamma = (0.5 * (cf.gamma + cf.gamma.transpose())).eval();
  inertia(cf.gamma, 1e-8, cf.n_plus, cf.n_minus, cf.nullity);
  cf.regular = cf.nullity == 0;
  if (require_regular && !cf.regular) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "crossing form at t = %.12g is degenerate (nullity %d); retry with a spectral shift",
                  cf.t0, cf.nullity);
    throw Error(ErrorKind::IrregularCrossing, buf);
  }
  return cf;
}

SpectralFlowResult spectral_flow_crossing_method(const ValidatedProblem& vp,
                                                 const IntegratorConfig& config,
                                                 const LocateOptions& options) {
  for (double t : {0.0, 1.0}) {
    const ScaledMatrix r = scaled_boundary_matrix(vp, t, config);
    const RVector s = singular_values(r.value.cast<cdouble>());
    if (!(s(s.size() - 1) > 1e-8 * r.scale))
      throw Error(ErrorKind::NotAdmissible,
                  std::string("A_") + (t == 0.0 ? "0" : "1") + " has a nontrivial kernel");
  }
  SpectralFlowResult out;
  out.instants = conjugate_instants(vp, config, options);
  for (const auto& c : out.instants) {
    const KernelBasis kb = kernel_basis(vp, c.t, config, options.kernel_threshold);
    out.forms.push_back(crossing_form(vp, kb));
    out.index += out.forms.back().signature();
  }
  return out;
}

Discretization discretize_with(const ValidatedProblem& vp, const std::function<RMatrix(double)>& C,
                               int M) {
  require_preset(vp);
  const auto preset = vp->bc.preset;
  const bool periodic = preset == BoundaryCondition::Preset::Periodic;
  if (M < 3) throw Error(ErrorKind::InvalidArgument, "discretization needs at least 3 nodes");
  const int n = vp.N();

  Discretization d;
  d.nodes = M;
  d.N = n;
  d.x.resize(M);
  d.mass.resize(M);
  d.position.resize(M);
  double h = 0.0;
  switch (preset) {
    case BoundaryCondition::Preset::Dirichlet:
      h = 1.0 / (M + 1);
      for (int i = 0; i < M; ++i) d.x[i] = (i + 1) * h;
      break;
    case BoundaryCondition::Preset::Neumann:
      h = 1.0 / (M - 1);
      for (int i = 0; i < M; ++i) d.x[i] = i * h;
      break;
    default:
      h = 1.0 / M;
      for (int i = 0; i < M; ++i) d.x[i] = i * h;
      break;
  }
  std::fill(d.mass.begin(), d.mass.end(), h);
  if (preset == BoundaryCondition::Preset::Neumann) d.mass.front() = d.mass.back() = 0.5 * h;
  if (periodic) {
    // interleave 0, M-1, 1, M-2, ... so the wrap-around edge stays inside the band
    for (int j = 0; j < M; ++j) d.position[j % 2 == 0 ? j / 2 : M - 1 - (j - 1) / 2] = j;
  } else {
    for (int i = 0; i < M; ++i) d.position[i] = i;
  }
  d.matrix = SymmetricBand(M * n, periodic ? 3 * n - 1 : 2 * n - 1);

  // edges as (left node, right node, midpoint); -1 marks a Dirichlet boundary node
  struct Edge {
    int a, b;
    double mid;
  };
  std::vector<Edge> edges;
  switch (preset) {
    case BoundaryCondition::Preset::Dirichlet:
      for (int m = 0; m <= M; ++m) edges.push_back({m - 1, m == M ? -1 : m, (m + 0.5) * h});
      break;
    case BoundaryCondition::Preset::Neumann:
      for (int m = 0; m + 1 < M; ++m) edges.push_back({m, m + 1, (m + 0.5) * h});
      break;
    default:
      for (int m = 0; m < M; ++m) edges.push_back({m, (m + 1) % M, (m + 0.5) * h});
      break;
  }

  const RMatrix I = RMatrix::Identity(n, n);
  RMatrix D(n, 2 * n), S(n, 2 * n);
  D << -I / h, I / h;
  S << 0.5 * I, 0.5 * I;
  for (const Edge& e : edges) {
    const RMatrix P = vp->P(e.mid);
    const RMatrix Q = vp->Q(e.mid);
    RMatrix E = h * (D.transpose() * P * D + D.transpose() * Q * S + S.transpose() * Q.transpose() * D);
    E = (0.5 * (E + E.transpose())).eval();
    const int nodes[2] = {e.a, e.b};
    for (int p = 0; p < 2; ++p)
      for (int r = 0; r < 2; ++r) {
        if (nodes[p] < 0 || nodes[r] < 0) continue;
        const int bp = d.position[nodes[p]] * n, br = d.position[nodes[r]] * n;
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) {
            const int gi = bp + i, gj = br + j;
            if (gi >= gj) d.matrix.add(gi, gj, E(p * n + i, r * n + j));
          }
      }
  }
  for (int k = 0; k < M; ++k) {
    const RMatrix V = d.mass[k] * (vp->G(d.x[k]) + C(d.x[k]));
    const int b = d.position[k] * n;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j <= i; ++j) d.matrix.add(b + i, b + j, 0.5 * (V(i, j) + V(j, i)));
  }
  std::vector<double> scale(static_cast<std::size_t>(M) * n);
  for (int k = 0; k < M; ++k)
    for (int i = 0; i < n; ++i) scale[d.position[k] * n + i] = 1.0 / std::sqrt(d.mass[k]);
  d.matrix.scale_symmetric(scale);
  return d;
}

Discretization discretize(const ValidatedProblem& vp, double t, int M) {
  return discretize_with(vp, [&](double x) { return vp->family.value(t, x); }, M);
}

std::vector<std::vector<double>> fd_spectra_batch(const ValidatedProblem& vp,
                                                  const std::vector<double>& ts, int M,
                                                  Execution exec) {
  return map_indexed(ts.size(), [&](std::size_t i) { return discretize(vp, ts[i], M).matrix.eigenvalues(); },
                     exec);
}

TrackingResult spectral_flow_tracking(const ValidatedProblem& vp, const TrackingConfig& config) {
  require_preset(vp);
  if (config.grid < 256) throw Error(ErrorKind::InvalidArgument, "tracking grid needs >= 256 points");
  TrackingResult out;
  const Discretization probe = discretize(vp, 0.0, config.M);

  double sup_c = 0.0;
  for (int j = 0; j <= 16; ++j)
    for (double x : probe.x) sup_c = std::max(sup_c, spectral_norm_sym(vp->family.value(j / 16.0, x)));
  out.window = config.window > 0.0 ? config.window : 10.0 * sup_c;
  if (sup_c == 0.0) {
    out.t = {0.0, 1.0};
    out.eigenvalues = fd_spectra_batch(vp, out.t, config.M, config.exec);
    return out;
  }
  if (!(out.window > sup_c))
    throw Error(ErrorKind::WindowTooSmall, "window " + std::to_string(out.window) +
                                               " does not exceed sup |C| = " + std::to_string(sup_c));

  const int g = config.grid;
  out.t.resize(g);
  for (int i = 0; i < g; ++i) out.t[i] = static_cast<double>(i) / (g - 1);
  out.eigenvalues = fd_spectra_batch(vp, out.t, config.M, config.exec);

  for (int i = 0; i + 1 < g; ++i) {
    const auto& e0 = out.eigenvalues[i];
    const auto& e1 = out.eigenvalues[i + 1];
    double bound = 0.0;
    for (double x : probe.x)
      bound = std::max(bound, spectral_norm_sym(vp->family.value(out.t[i + 1], x) -
                                                vp->family.value(out.t[i], x)));
    for (std::size_t k = 0; k < e0.size(); ++k) {
      if (std::abs(e0[k]) > out.window && std::abs(e1[k]) > out.window) continue;
      if (std::abs(e1[k] - e0[k]) > bound * (1.0 + 1e-8) + 1e-9 * out.window) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "eigenvalue %zu moves by %.3g on [%.6g, %.6g], bound %.3g", k,
                      std::abs(e1[k] - e0[k]), out.t[i], out.t[i + 1], bound);
        throw Error(ErrorKind::GridTooCoarse, buf);
      }
    }
    const int change = count_negative(e0) - count_negative(e1);
    out.index += change;
    if (change == 0) continue;
    double lo = out.t[i], hi = out.t[i + 1];
    int nlo = count_negative(e0);
    for (int level = 0; level < config.refine_levels; ++level) {
      const double mid = 0.5 * (lo + hi);
      const int nm = count_negative(discretize(vp, mid, config.M).matrix.eigenvalues());
      if (nm != nlo) {
        hi = mid;
      } else {
        lo = mid;
        nlo = nm;
      }
    }
    for (int c = 0; c < std::abs(change); ++c) {
      out.crossing_times.push_back(0.5 * (lo + hi));
      out.crossing_signs.push_back(change > 0 ? 1 : -1);
    }
  }
  return out;
}

void write_eigen_csv(std::ostream& os, const TrackingResult& r) {
  std::vector<std::size_t> idx;
  const std::size_t count = r.eigenvalues.empty() ? 0 : r.eigenvalues.front().size();
  for (std::size_t k = 0; k < count; ++k)
    for (const auto& ev : r.eigenvalues)
      if (std::abs(ev[k]) <= r.window) {
        idx.push_back(k);
        break;
      }
  os << "t";
  for (std::size_t k : idx) os << ",lambda_" << (k + 1);
  os << "\n";
  char buf[40];
  for (std::size_t i = 0; i < r.t.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", r.t[i]);
    os << buf;
    for (std::size_t k : idx) {
      std::snprintf(buf, sizeof buf, ",%.17g", r.eigenvalues[i][k]);
      os << buf;
    }
    os << "\n";
  }
}

MorseResult morse_index(const ValidatedProblem& vp, double t, int M, int max_doublings) {
  require_preset(vp);
  for (int k = 0; k <= 128; ++k) {
    const double x = k / 128.0;
    Eigen::SelfAdjointEigenSolver<RMatrix> es(vp->P(x), Eigen::EigenvaluesOnly);
    if (!(es.eigenvalues().minCoeff() > 0.0)) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "P(x) is not positive definite at x = %.6g", x);
      throw Error(ErrorKind::IndefiniteP, buf);
    }
  }
  MorseResult out;
  int m = M;
  out.counts.push_back(count_negative(discretize(vp, t, m).matrix.eigenvalues()));
  for (int d = 0; d < max_doublings; ++d) {
    m *= 2;
    out.counts.push_back(count_negative(discretize(vp, t, m).matrix.eigenvalues()));
    const auto c = out.counts.size();
    if (out.counts[c - 1] == out.counts[c - 2]) {
      out.index = out.counts.back();
      out.M = m / 2;
      return out;
    }
  }
  throw Error(ErrorKind::NotConverged, "negative eigenvalue count keeps changing under refinement");
}

}  // namespace msflow
