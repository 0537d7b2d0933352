#include "msflow/symplectic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace msflow {

namespace {

void require_lagrangian(const RMatrix& L) {
  if (L.rows() % 4 != 0 || L.cols() * 2 != L.rows())
    throw Error(ErrorKind::DimensionMismatch, "Lagrangian frame must be 4n x 2n");
  if (orthonormal_columns(L, 1e-12).cols() < L.cols())
    throw Error(ErrorKind::RankDeficientFrame, "Lagrangian frame is rank deficient");
  if (isotropy_residual(L) > 1e-10)
    throw Error(ErrorKind::InvalidArgument, "frame is not isotropic for the doubled form");
}

double frame_scale(const RMatrix& m) { return std::max(1.0, m.cwiseAbs().maxCoeff()); }

}  // namespace

RMatrix double_J(int n) {
  RMatrix out = RMatrix::Zero(4 * n, 4 * n);
  out.topLeftCorner(2 * n, 2 * n) = -standard_J(n);
  out.bottomRightCorner(2 * n, 2 * n) = standard_J(n);
  return out;
}

RMatrix lagrangian_from_bc(const RMatrix& z_frame) {
  if (z_frame.rows() % 2 != 0 || z_frame.rows() == 0)
    throw Error(ErrorKind::DimensionMismatch, "Z must live in R^n + R^n");
  const int n = static_cast<int>(z_frame.rows()) / 2;
  RMatrix Z = z_frame.cols() == 0 ? RMatrix(2 * n, 0) : orthonormal_columns(z_frame, 1e-12);
  if (Z.cols() < z_frame.cols())
    throw Error(ErrorKind::RankDeficientFrame,
                "Z frame has rank " + std::to_string(Z.cols()) + " < " + std::to_string(z_frame.cols()));
  RMatrix Zp;
  if (Z.cols() == 0)
    Zp = RMatrix::Identity(2 * n, 2 * n);
  else if (Z.cols() == 2 * n)
    Zp = RMatrix(2 * n, 0);
  else
    Zp = null_space(RMatrix(Z.transpose()), 1e-12);

  RMatrix L = RMatrix::Zero(4 * n, 2 * n);
  int c = 0;
  for (Eigen::Index k = 0; k < Z.cols(); ++k, ++c) {
    L.block(n, c, n, 1) = Z.block(0, k, n, 1);          // q0
    L.block(3 * n, c, n, 1) = Z.block(n, k, n, 1);      // q1
  }
  for (Eigen::Index k = 0; k < Zp.cols(); ++k, ++c) {
    L.block(0, c, n, 1) = Zp.block(0, k, n, 1);         // p0
    L.block(2 * n, c, n, 1) = -Zp.block(n, k, n, 1);    // p1
  }
  return L;
}

double isotropy_residual(const RMatrix& frame) {
  const int n = static_cast<int>(frame.rows()) / 4;
  return max_abs(RMatrix(frame.transpose() * double_J(n) * frame)) /
         std::pow(frame_scale(frame), 2);
}

BoundaryCondition boundary_from_lagrangian(const RMatrix& frame) {
  require_lagrangian(frame);
  const int n = static_cast<int>(frame.rows()) / 4;
  const RMatrix R = (double_J(n) * frame).transpose();
  return BoundaryCondition::general(R.leftCols(2 * n), R.rightCols(2 * n));
}

RMatrix lagrangian_of_boundary(const BoundaryCondition& bc) {
  const auto m = bc.R0.rows();
  RMatrix r(m, 2 * m);
  r << bc.R0, bc.R1;
  return null_space(r, 1e-12);
}

SymplecticPath monodromy_path(const ValidatedProblem& vp, const IntegratorConfig& config) {
  SymplecticPath p;
  p.psi = [vp, config](double t) { return RMatrix(monodromy(vp, cdouble(t, 0.0), config).real()); };
  p.with_derivative = [vp, config](double t) { return monodromy_t_derivative(vp, t, config); };
  return p;
}

MaslovResult maslov_clm(const RMatrix& L, const SymplecticPath& path, double a, double b,
                        const LocateOptions& options) {
  require_lagrangian(L);
  if (!(b > a)) throw Error(ErrorKind::InvalidArgument, "Maslov index needs a < b");
  const int n2 = static_cast<int>(L.cols());
  const int N = n2 / 2;
  const RMatrix Jt = double_J(N);
  const RMatrix R = (Jt * L).transpose();
  const RMatrix R0 = R.leftCols(n2), R1 = R.rightCols(n2);
  auto Rt = [&](double t) {
    const RMatrix R1psi = R1 * path.psi(t);
    return ScaledMatrix{R0 + R1psi, boundary_scale(R0, R1psi)};
  };

  auto is_degenerate = [&](double t) {
    const ScaledMatrix r = Rt(t);
    const RVector s = singular_values(r.value.cast<cdouble>());
    return s(s.size() - 1) <= options.kernel_threshold * r.scale;
  };

  auto form_at = [&](double t, bool endpoint) {
    MaslovCrossing mc;
    mc.t = t;
    mc.endpoint = endpoint;
    const MonodromyDerivative d = path.with_derivative(t);
    const RMatrix R1psi = R1 * d.psi;
    const RMatrix K = null_space(RMatrix(R0 + R1psi), options.kernel_threshold, boundary_scale(R0, R1psi));
    if (K.cols() == 0) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "no intersection with L at t = %.12g", t);
      throw Error(ErrorKind::EmptyKernel, buf);
    }
    RMatrix F(2 * n2, n2), dF = RMatrix::Zero(2 * n2, n2);
    F << RMatrix::Identity(n2, n2), d.psi;
    dF.bottomRows(n2) = d.dpsi;
    const RMatrix V = F * K;
    // Q(v) = d/dt omega~(v, phi_t v), phi_t v in W, from [F, -U] [c'; d'] = -F' a
    auto form_for = [&](const RMatrix& U) {
      RMatrix sys(2 * n2, 2 * n2);
      sys << F, -U;
      const RMatrix sol = sys.fullPivLu().solve(RMatrix(-dF * K));
      const RMatrix moved = U * sol.bottomRows(n2);
      RMatrix q = (Jt * V).transpose() * moved;
      return RMatrix(0.5 * (q + q.transpose()));
    };
    RMatrix vertical = RMatrix::Zero(2 * n2, n2);
    vertical.bottomRows(n2).setIdentity();
    mc.form = form_for(Jt * F);
    mc.form_alt = form_for(vertical);
    const double scale = std::max(max_abs(mc.form), 1e-300);
    mc.transversal_gap = max_abs(RMatrix(mc.form - mc.form_alt)) / scale;
    inertia(mc.form, 1e-8, mc.n_plus, mc.n_minus, mc.nullity);
    return mc;
  };

  MaslovResult out;
  const bool at_a = is_degenerate(a), at_b = is_degenerate(b);
  out.endpoint_crossing = at_a || at_b;
  if (at_a) {
    out.crossings.push_back(form_at(a, true));
    out.start_term = out.crossings.back().n_plus;
  }
  const double guard = 1e-7 * (b - a);
  for (const auto& c : locate_degeneracies(Rt, a, b, options)) {
    if ((at_a && c.t - a < guard) || (at_b && b - c.t < guard)) continue;
    MaslovCrossing mc = form_at(c.t, false);
    if (mc.nullity > 0) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "Maslov crossing form at t = %.12g is degenerate", c.t);
      throw Error(ErrorKind::IrregularCrossing, buf);
    }
    out.index += mc.signature();
    out.crossings.push_back(std::move(mc));
  }
  if (at_b) {
    out.crossings.push_back(form_at(b, true));
    out.end_term = out.crossings.back().n_minus;
  }
  out.index += out.start_term - out.end_term;
  return out;
}

std::string to_string(SpComponent c) {
  switch (c) {
    case SpComponent::Plus: return "Sp+";
    case SpComponent::Minus: return "Sp-";
    case SpComponent::Zero: return "Sp0";
  }
  return "Sp0";
}

SpComponent sp_component(const RMatrix& M, double tol) {
  if (M.rows() != M.cols() || M.rows() % 2 != 0)
    throw Error(ErrorKind::DimensionMismatch, "symplectic matrix must be 2n x 2n");
  const int n = static_cast<int>(M.rows()) / 2;
  const RMatrix J = standard_J(n);
  const double scale = std::max(1.0, M.norm());
  if (max_abs(RMatrix(M.transpose() * J * M - J)) > tol * scale * scale)
    throw Error(ErrorKind::NotSymplectic, "M^T J M differs from J");
  const RMatrix D = M - RMatrix::Identity(2 * n, 2 * n);
  const RVector s = singular_values(D.cast<cdouble>());
  if (s(s.size() - 1) <= tol * scale) return SpComponent::Zero;
  return D.determinant() > 0.0 ? SpComponent::Plus : SpComponent::Minus;
}

StabilityAnalysis analyze_stability(const RMatrix& M) {
  StabilityAnalysis out;
  Eigen::EigenSolver<RMatrix> es(M, true);
  const CVector ev = es.eigenvalues();
  const CMatrix V = es.eigenvectors();
  const RVector sv = singular_values(V);
  out.condition = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1)
                                          : std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    out.eigenvalues.push_back(ev(i));
    out.modulus_defect = std::max(out.modulus_defect, std::abs(std::abs(ev(i)) - 1.0));
  }
  const double scale = std::max(1.0, singular_values(M.cast<cdouble>())(0));
  std::vector<bool> used(ev.size(), false);
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (used[i]) continue;
    std::vector<Eigen::Index> cluster{i};
    used[i] = true;
    for (Eigen::Index j = i + 1; j < ev.size(); ++j)
      if (!used[j] && std::abs(ev(j) - ev(i)) <= 1e-6) {
        cluster.push_back(j);
        used[j] = true;
      }
    if (cluster.size() == 1) continue;
    cdouble mean = 0.0;
    for (auto k : cluster) mean += ev(k);
    mean /= static_cast<double>(cluster.size());
    const CMatrix shifted =
        M.cast<cdouble>() - mean * CMatrix::Identity(M.rows(), M.cols());
    const RVector s = singular_values(shifted);
    std::size_t nullity = 0;
    for (Eigen::Index k = 0; k < s.size(); ++k)
      if (s(k) <= 1e-8 * scale) ++nullity;
    if (nullity < cluster.size()) out.semisimple = false;
  }
  out.stable = out.semisimple && out.modulus_defect <= 1e-8;
  return out;
}

bool is_linearly_stable(const RMatrix& M) { return analyze_stability(M).stable; }

RMatrix rotation_exp(int n, double delta) {
  return std::cos(delta) * RMatrix::Identity(2 * n, 2 * n) + std::sin(delta) * standard_J(n);
}

std::vector<PerturbationComponents> stable_perturbation_check(const RMatrix& M,
                                                              const std::vector<double>& deltas) {
  const int n = static_cast<int>(M.rows()) / 2;
  std::vector<PerturbationComponents> out;
  for (double d : deltas)
    out.push_back({d, sp_component(RMatrix(rotation_exp(n, -d) * M)),
                   sp_component(RMatrix(rotation_exp(n, d) * M))});
  return out;
}

std::string to_string(Orientation o) {
  return o == Orientation::Preserving ? "preserving" : "non-preserving";
}

std::string to_string(Verdict v) {
  return v == Verdict::LinearlyUnstable ? "linearly-unstable" : "inconclusive";
}

Orientation parse_orientation(const std::string& s) {
  if (s == "preserving" || s == "or") return Orientation::Preserving;
  if (s == "non-preserving" || s == "nonpreserving" || s == "nor") return Orientation::NonPreserving;
  throw Error(ErrorKind::InvalidArgument, "orientation must be preserving or non-preserving");
}

Verdict instability_verdict(int iota_pw, int n, Orientation orientation) {
  const bool odd = ((iota_pw + n) % 2 + 2) % 2 == 1;
  const bool fires = orientation == Orientation::Preserving ? odd : !odd;
  return fires ? Verdict::LinearlyUnstable : Verdict::Inconclusive;
}

FormulaCheck spectral_flow_formula_check(const ValidatedProblem& vp, const IntegratorConfig& config,
                                         const TrackingConfig& tracking) {
  FormulaCheck out;
  out.iota_sp = spectral_flow_tracking(vp, tracking).index;
  out.maslov = maslov_clm(lagrangian_of_boundary(vp->bc), monodromy_path(vp, config), 0.0, 1.0);
  out.iota_clm = out.maslov.index;
  out.pass = out.iota_clm == -out.iota_sp;
  return out;
}

}  // namespace msflow
