#include "msflow/degree.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace msflow {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Boundary parameter tau in [0, 4): one unit per edge, counterclockwise from (0, -h).
cdouble boundary_point(double tau, double h) {
  const int edge = std::min(static_cast<int>(tau), 3);
  const double u = tau - edge;
  switch (edge) {
    case 0: return {u, -h};
    case 1: return {1.0, -h + 2.0 * h * u};
    case 2: return {1.0 - u, h};
    default: return {0.0, h - 2.0 * h * u};
  }
}

std::string describe(cdouble z) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "(%.6g, %.6g)", z.real(), z.imag());
  return buf;
}

double sigma_rel(const ScaledMatrix& r) {
  const RVector s = singular_values(r.value.cast<cdouble>());
  return r.scale > 0.0 ? s(s.size() - 1) / r.scale : 0.0;
}

}  // namespace

cdouble rho(const ValidatedProblem& vp, cdouble z, const IntegratorConfig& config) {
  const CMatrix psi1 = monodromy(vp, z, config);
  const auto& bc = vp->bc;
  return determinant(CMatrix(bc.R0.cast<cdouble>() + bc.R1.cast<cdouble>() * psi1));
}

std::vector<cdouble> rho_batch(const ValidatedProblem& vp, const std::vector<cdouble>& zs,
                               const IntegratorConfig& config, Execution exec) {
  return map_indexed(zs.size(), [&](std::size_t i) { return rho(vp, zs[i], config); }, exec);
}

BoundaryTrace wind_rectangle(const std::function<cdouble(cdouble)>& f, double h,
                             const DegreeConfig& config) {
  if (!(h > 0.0)) throw Error(ErrorKind::InvalidArgument, "rectangle half-height must be positive");
  const int n = std::max(2, config.samples_per_edge + config.samples_per_edge % 2);
  const std::string label = config.label;

  std::vector<double> tau(4 * static_cast<std::size_t>(n));
  for (std::size_t j = 0; j < tau.size(); ++j) tau[j] = static_cast<double>(j) / n;
  auto evaluate = [&](const std::vector<double>& ts) {
    return map_indexed(ts.size(), [&](std::size_t i) { return f(boundary_point(ts[i], h)); },
                       config.exec);
  };
  std::vector<cdouble> val = evaluate(tau);

  auto max_modulus = [&] {
    double m = 0.0;
    for (const auto& v : val) m = std::max(m, std::abs(v));
    return m;
  };
  double vmax = max_modulus();
  const std::size_t i1 = static_cast<std::size_t>(3 * n / 2);  // z = 1
  const std::size_t i0 = static_cast<std::size_t>(7 * n / 2);  // z = 0
  if (!(std::abs(val[i0]) > config.floor * vmax))
    throw Error(ErrorKind::NotAdmissible, "|" + label + "(0)| below floor");
  if (!(std::abs(val[i1]) > config.floor * vmax))
    throw Error(ErrorKind::NotAdmissible, "|" + label + "(1)| below floor");

  BoundaryTrace trace;
  for (;;) {
    vmax = max_modulus();
    for (std::size_t j = 0; j < val.size(); ++j)
      if (!(std::abs(val[j]) > config.floor * vmax))
        throw Error(ErrorKind::BoundaryZero, "|" + label + "| below floor at z = " +
                                                 describe(boundary_point(tau[j], h)));
    std::vector<double> mids;
    for (std::size_t j = 0; j < tau.size(); ++j) {
      const std::size_t k = (j + 1) % tau.size();
      if (std::abs(std::arg(val[k] / val[j])) <= config.max_arg_step) continue;
      const double hi = k == 0 ? 4.0 : tau[k];
      if (hi - tau[j] < config.min_spacing)
        throw Error(ErrorKind::BoundaryZero, "argument of " + label + " jumps near z = " +
                                                 describe(boundary_point(tau[j], h)));
      mids.push_back(0.5 * (tau[j] + hi));
    }
    if (mids.empty()) break;
    if (tau.size() + mids.size() > static_cast<std::size_t>(config.max_samples))
      throw Error(ErrorKind::RefinementBudgetExceeded,
                  "more than " + std::to_string(config.max_samples) + " boundary samples needed");
    const std::vector<cdouble> mval = evaluate(mids);
    std::vector<double> t2;
    std::vector<cdouble> v2;
    t2.reserve(tau.size() + mids.size());
    v2.reserve(tau.size() + mids.size());
    std::size_t a = 0, b = 0;
    while (a < tau.size() || b < mids.size()) {
      if (b == mids.size() || (a < tau.size() && tau[a] < mids[b])) {
        t2.push_back(tau[a]);
        v2.push_back(val[a++]);
      } else {
        t2.push_back(mids[b]);
        v2.push_back(mval[b++]);
      }
    }
    tau = std::move(t2);
    val = std::move(v2);
    ++trace.refinement_rounds;
  }

  double arg = std::arg(val[0]);
  trace.min_abs = std::abs(val[0]);
  trace.max_abs = vmax;
  for (std::size_t j = 0; j < tau.size(); ++j) {
    trace.samples.push_back({boundary_point(tau[j], h), val[j], arg});
    trace.min_abs = std::min(trace.min_abs, std::abs(val[j]));
    const double step = std::arg(val[(j + 1) % tau.size()] / val[j]);
    trace.max_arg_step = std::max(trace.max_arg_step, std::abs(step));
    arg += step;
  }
  trace.total_arg = arg - std::arg(val[0]);
  const double turns = trace.total_arg / kTwoPi;
  trace.winding = static_cast<int>(std::lround(turns));
  if (std::abs(turns - trace.winding) > 1e-6)
    throw Error(ErrorKind::NotConverged, "accumulated argument is not a multiple of 2 pi");
  return trace;
}

BoundaryTrace winding_number(const ValidatedProblem& vp, const DegreeConfig& config,
                             double half_height) {
  const double h = half_height > 0.0 ? half_height : vp->half_height;
  return wind_rectangle([&](cdouble z) { return rho(vp, z, config.ode); }, h, config);
}

void write_boundary_csv(std::ostream& os, const BoundaryTrace& trace) {
  os << "t,s,re_rho,im_rho,unwrapped_arg\n";
  char buf[160];
  for (const auto& s : trace.samples) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", s.z.real(), s.z.imag(),
                  s.value.real(), s.value.imag(), s.arg);
    os << buf;
  }
}

double boundary_scale(const RMatrix& R0, const RMatrix& R1psi) {
  RMatrix frame(R0.rows(), R0.cols() + R1psi.cols());
  frame << R0, R1psi;
  return singular_values(frame.cast<cdouble>())(0);
}

std::vector<CrossingInstant> locate_degeneracies(const std::function<RMatrix(double)>& R, double a,
                                                 double b, const LocateOptions& options) {
  return locate_degeneracies(
      [&](double t) {
        RMatrix r = R(t);
        const double scale = singular_values(r.cast<cdouble>())(0);
        return ScaledMatrix{std::move(r), scale};
      },
      a, b, options);
}

std::vector<CrossingInstant> locate_degeneracies(const std::function<ScaledMatrix(double)>& R, double a,
                                                 double b, const LocateOptions& opt) {
  const int n = std::max(opt.grid, 2);
  struct Sample {
    double det;
    double sig;
  };
  auto sample = [&](double t) {
    const ScaledMatrix r = R(t);
    return Sample{r.value.determinant(), sigma_rel(r)};
  };
  std::vector<double> ts(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) ts[i] = a + (b - a) * static_cast<double>(i) / n;
  const std::vector<Sample> s = map_indexed(ts.size(), [&](std::size_t i) { return sample(ts[i]); },
                                            opt.exec);

  auto changes = [&](int i) { return i >= 0 && i < n && s[i].det * s[i + 1].det < 0.0; };

  struct Task {
    double lo, hi;
    bool bracket;
  };
  std::vector<Task> tasks;
  for (int i = 0; i < n; ++i)
    if (changes(i)) tasks.push_back({ts[i], ts[i + 1], true});
  for (int i = 1; i < n; ++i) {
    if (changes(i - 1) || changes(i)) continue;
    if (s[i].sig > 0.25 || s[i].sig > s[i - 1].sig || s[i].sig > s[i + 1].sig) continue;
    tasks.push_back({ts[i - 1], ts[i + 1], false});
  }

  auto finish = [&](CrossingInstant c) {
    const ScaledMatrix r = R(c.t);
    const RVector sv = singular_values(r.value.cast<cdouble>());
    c.sigma_rel = r.scale > 0.0 ? sv(sv.size() - 1) / r.scale : 0.0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv(i) <= opt.kernel_threshold * r.scale) ++c.multiplicity;
    if (c.sign_change && c.multiplicity == 0) c.multiplicity = 1;
    return c;
  };

  auto bisect = [&](double lo, double hi, double dlo) {
    while (hi - lo > opt.width) {
      const double mid = 0.5 * (lo + hi);
      const double dm = R(mid).value.determinant();
      if (dm == 0.0) {
        lo = hi = mid;
        break;
      }
      if ((dm < 0.0) == (dlo < 0.0)) {
        lo = mid;
        dlo = dm;
      } else {
        hi = mid;
      }
    }
    CrossingInstant c;
    c.t = 0.5 * (lo + hi);
    c.width = hi - lo;
    c.sign_change = true;
    return finish(c);
  };

  auto refine = [&](std::size_t k) -> std::vector<CrossingInstant> {
    const Task task = tasks[k];
    if (task.bracket) return {bisect(task.lo, task.hi, R(task.lo).value.determinant())};

    // a dip may hide two sign changes inside one grid cell
    constexpr int sub = 32;
    std::vector<double> d(sub + 1);
    for (int i = 0; i <= sub; ++i) d[i] = R(task.lo + (task.hi - task.lo) * i / sub).value.determinant();
    std::vector<CrossingInstant> split;
    for (int i = 0; i < sub; ++i)
      if (d[i] * d[i + 1] < 0.0)
        split.push_back(bisect(task.lo + (task.hi - task.lo) * i / sub,
                               task.lo + (task.hi - task.lo) * (i + 1) / sub, d[i]));
    if (!split.empty()) return split;

    // golden-section search on sigma_min / scale
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double lo = task.lo, hi = task.hi;
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    double f1 = sigma_rel(R(x1)), f2 = sigma_rel(R(x2));
    while (hi - lo > opt.width && std::min(f1, f2) > 1e-3 * opt.dip_threshold) {
      if (f1 < f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - g * (hi - lo);
        f1 = sigma_rel(R(x1));
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + g * (hi - lo);
        f2 = sigma_rel(R(x2));
      }
    }
    if (std::min(f1, f2) >= opt.dip_threshold) return {};
    CrossingInstant c;
    c.t = f1 < f2 ? x1 : x2;
    c.width = hi - lo;
    return {finish(c)};
  };
  const auto found = map_indexed(tasks.size(), refine, opt.exec);

  std::vector<CrossingInstant> out;
  for (const auto& f : found) out.insert(out.end(), f.begin(), f.end());
  std::sort(out.begin(), out.end(),
            [](const CrossingInstant& x, const CrossingInstant& y) { return x.t < y.t; });
  char buf[160];
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto& c = out[i];
    if (c.sign_change != (c.multiplicity % 2 == 1)) {
      std::snprintf(buf, sizeof buf,
                    "zero at t = %.12g has multiplicity %d but %s sign change; "
                    "apply a spectral shift",
                    c.t, c.multiplicity, c.sign_change ? "a" : "no");
      throw Error(ErrorKind::ClusterUnresolved, buf);
    }
    if (i > 0 && c.t - out[i - 1].t < 10.0 * opt.width) {
      std::snprintf(buf, sizeof buf, "zeros at t = %.12g and %.12g are not resolved",
                    out[i - 1].t, c.t);
      throw Error(ErrorKind::ClusterUnresolved, buf);
    }
  }
  return out;
}

RMatrix boundary_matrix(const ValidatedProblem& vp, double t, const IntegratorConfig& config) {
  return scaled_boundary_matrix(vp, t, config).value;
}

ScaledMatrix scaled_boundary_matrix(const ValidatedProblem& vp, double t, const IntegratorConfig& config) {
  const RMatrix R1psi = vp->bc.R1 * monodromy(vp, cdouble(t, 0.0), config).real();
  return {vp->bc.R0 + R1psi, boundary_scale(vp->bc.R0, R1psi)};
}

std::vector<CrossingInstant> conjugate_instants(const ValidatedProblem& vp,
                                                const IntegratorConfig& config,
                                                const LocateOptions& options) {
  return locate_degeneracies([&](double t) { return scaled_boundary_matrix(vp, t, config); }, 0.0, 1.0,
                             options);
}

bool zeros_on_real_axis(const ValidatedProblem& vp, const DegreeConfig& config) {
  const int full = winding_number(vp, config).winding;
  const int thin = winding_number(vp, config, vp->half_height / 16.0).winding;
  return full == thin;
}

}  // namespace msflow
