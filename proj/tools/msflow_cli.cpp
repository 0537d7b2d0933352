#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "msflow/degree.hpp"
#include "msflow/error.hpp"
#include "msflow/hilltrace.hpp"
#include "msflow/parallel.hpp"
#include "msflow/problem.hpp"
#include "msflow/problem_io.hpp"
#include "msflow/report.hpp"
#include "msflow/spectralflow.hpp"
#include "msflow/symplectic.hpp"

using namespace msflow;

namespace {

struct RunConfig {
  std::string command;
  std::string file;
  double tol_ode = 1e-10;
  double tol_zero = 1e-8;
  int grid = 256;
  std::optional<int> fd_size;
  int cutoff = 2000;
  std::optional<double> height;
  double delta_shift = 0.0;
  double fd_step = 1e-5;
  int jobs = 0;
  bool dump_boundary = false;
  bool dump_eigen = false;
  bool contour = false;
  std::string out = ".";
  std::vector<std::string> z;
  std::string orientation;
  std::optional<int> n;
};

int exit_code(ErrorKind kind) {
  switch (classify(kind)) {
    case ErrorClass::Usage: return 1;
    case ErrorClass::Hypothesis: return 2;
    case ErrorClass::Numerical: return 3;
  }
  return 3;
}

cdouble parse_z(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw Error(ErrorKind::InvalidArgument, "--z expects t,s");
  try {
    std::size_t used = 0;
    const std::string a = text.substr(0, comma), b = text.substr(comma + 1);
    const double t = std::stod(a, &used);
    if (used != a.size()) throw std::invalid_argument(a);
    const double s = std::stod(b, &used);
    if (used != b.size()) throw std::invalid_argument(b);
    return {t, s};
  } catch (const std::logic_error&) {
    throw Error(ErrorKind::InvalidArgument, "--z expects t,s, got '" + text + "'");
  }
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string canonical_flags(const RunConfig& c) {
  std::ostringstream os;
  os << "command=" << c.command << ";tol_ode=" << format_double(c.tol_ode)
     << ";tol_zero=" << format_double(c.tol_zero) << ";grid=" << c.grid
     << ";fd_size=" << (c.fd_size ? std::to_string(*c.fd_size) : "auto") << ";cutoff=" << c.cutoff
     << ";height=" << (c.height ? format_double(*c.height) : "file")
     << ";delta_shift=" << format_double(c.delta_shift) << ";fd_step=" << format_double(c.fd_step)
     << ";contour=" << c.contour << ";orientation=" << c.orientation
     << ";n=" << (c.n ? std::to_string(*c.n) : "N");
  for (const auto& z : c.z) os << ";z=" << z;
  return os.str();
}

class Runner {
 public:
  Runner(RunConfig cfg, std::string contents)
      : cfg_(std::move(cfg)), contents_(std::move(contents)), report_(cfg_.command) {}

  int run();

 private:
  IntegratorConfig ode() const {
    IntegratorConfig c;
    c.rtol = cfg_.tol_ode;
    c.atol = 1e-2 * cfg_.tol_ode;
    return c;
  }
  DegreeConfig degree() const {
    DegreeConfig d;
    d.ode = ode();
    d.floor = cfg_.tol_zero;
    return d;
  }
  LocateOptions locate() const {
    LocateOptions o;
    o.grid = cfg_.grid;
    return o;
  }
  double height() const { return cfg_.height ? *cfg_.height : vp()->half_height; }
  const ValidatedProblem& vp() const { return *vp_; }

  void echo_config();
  int winding(bool print);
  void dump(const std::string& name, const std::function<void(std::ostream&)>& body);
  void verdict(const std::string& key, bool ok);

  int cmd_validate();
  int cmd_degree();
  int cmd_sf();
  int cmd_conjugate_points();
  int cmd_morse();
  int cmd_hill();
  int cmd_fredholm();
  int cmd_trace();
  int cmd_maslov();
  int cmd_stability();

  RunConfig cfg_;
  std::string contents_;
  Report report_;
  std::optional<ValidatedProblem> vp_;
};

void Runner::echo_config() {
  const std::uint64_t h = fnv1a(canonical_flags(cfg_), fnv1a(contents_));
  report_.set("config_hash", hex64(h));
  report_.set("problem_file", std::filesystem::path(cfg_.file).filename().string());
  report_.set("N", vp().N());
  report_.set("boundary", to_string(vp()->bc.preset));
  report_.set("tol_ode.rtol", cfg_.tol_ode);
  report_.set("tol_ode.atol", 1e-2 * cfg_.tol_ode);
  report_.set("tol_zero", cfg_.tol_zero);
  report_.set("symplectic_tol", IntegratorConfig{}.symplectic_tol);
  report_.set("grid", cfg_.grid);
  report_.set("height", height());
  report_.set("delta_shift", cfg_.delta_shift);
  for (std::size_t i = 0; i < vp().warnings().size(); ++i)
    report_.set("warning." + std::to_string(i), vp().warnings()[i]);
}

void Runner::dump(const std::string& name, const std::function<void(std::ostream&)>& body) {
  std::error_code ec;
  std::filesystem::create_directories(cfg_.out, ec);
  const auto path = std::filesystem::path(cfg_.out) / name;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::InvalidArgument, "cannot write '" + path.string() + "'");
  body(f);
  report_.set("csv." + name.substr(0, name.find('.')), path.filename().string());
}

void Runner::verdict(const std::string& key, bool ok) {
  report_.set(key, std::string(ok ? "PASS" : "FAIL"));
}

int Runner::winding(bool print) {
  const BoundaryTrace tr = winding_number(vp(), degree(), height());
  report_.set("iota_PW", tr.winding);
  report_.set("degree.samples", tr.samples.size());
  report_.set("degree.max_arg_step", tr.max_arg_step);
  report_.set("degree.min_abs_rho", tr.min_abs);
  report_.set("degree.max_abs_rho", tr.max_abs);
  report_.set("degree.refinement_rounds", tr.refinement_rounds);
  if (print) std::cout << "iota_PW = " << tr.winding << "\n";
  if (cfg_.dump_boundary) dump("boundary.csv", [&](std::ostream& os) { write_boundary_csv(os, tr); });
  return tr.winding;
}

int Runner::cmd_validate() {
  std::cout << "valid: N = " << vp().N() << ", boundary " << to_string(vp()->bc.preset) << "\n";
  for (const auto& w : vp().warnings()) std::cout << "warning: " << w << "\n";
  report_.set("valid", true);
  return 0;
}

int Runner::cmd_degree() {
  winding(true);
  return 0;
}

int Runner::cmd_sf() {
  int code = 0;
  std::optional<int> crossing, tracking;
  const int pw = winding(false);

  try {
    const SpectralFlowResult r = spectral_flow_crossing_method(vp(), ode(), locate());
    crossing = r.index;
    report_.set("iota_SP.crossing", r.index);
    report_.set("crossings", r.instants.size());
    for (std::size_t i = 0; i < r.instants.size(); ++i) {
      const std::string k = "crossing." + std::to_string(i);
      report_.set(k + ".t", r.instants[i].t);
      report_.set(k + ".signature", r.forms[i].signature());
      report_.set(k + ".nullity", r.forms[i].nullity);
    }
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    report_.set("iota_SP.crossing", std::string("unavailable"));
    code = exit_code(e.kind());
  }

  try {
    TrackingConfig tc;
    tc.grid = std::max(cfg_.grid + 1, 257);
    if (cfg_.fd_size) tc.M = *cfg_.fd_size;
    report_.set("tracking.M", tc.M);
    const TrackingResult r = spectral_flow_tracking(vp(), tc);
    tracking = r.index;
    report_.set("iota_SP.tracking", r.index);
    report_.set("tracking.window", r.window);
    if (cfg_.dump_eigen) dump("eigen.csv", [&](std::ostream& os) { write_eigen_csv(os, r); });
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    report_.set("iota_SP.tracking", std::string("unavailable"));
    if (e.kind() != ErrorKind::UnsupportedBoundary && code == 0) code = exit_code(e.kind());
  }

  const auto show = [](const std::optional<int>& v) { return v ? std::to_string(*v) : std::string("n/a"); };
  std::cout << "iota_SP(crossing) = " << show(crossing) << "\n";
  std::cout << "iota_SP(tracking) = " << show(tracking) << "\n";
  std::cout << "iota_PW = " << pw << "\n";
  const bool ok = crossing && *crossing == pw && (!tracking || *tracking == pw);
  report_.set("sf_equals_pw", std::string(ok ? "VERIFIED" : "FAILED"));
  std::cout << (ok ? "VERIFIED" : "FAILED") << "\n";
  if (code == 0 && !ok) code = 3;
  return code;
}

int Runner::cmd_conjugate_points() {
  const auto instants = conjugate_instants(vp(), ode(), locate());
  report_.set("count", instants.size());
  std::cout << "conjugate instants: " << instants.size() << "\n";
  for (std::size_t i = 0; i < instants.size(); ++i) {
    const auto& c = instants[i];
    const std::string k = "instant." + std::to_string(i);
    report_.set(k + ".t", c.t);
    report_.set(k + ".multiplicity", c.multiplicity);
    report_.set(k + ".width", c.width);
    report_.set(k + ".sign_change", c.sign_change);
    std::cout << "  t = " << fmt("%.12g", c.t) << "  multiplicity " << c.multiplicity
              << (c.sign_change ? "" : "  (no sign change)") << "\n";
  }
  return 0;
}

int Runner::cmd_morse() {
  const int M = cfg_.fd_size.value_or(200);
  const MorseResult m0 = morse_index(vp(), 0.0, M);
  const MorseResult m1 = morse_index(vp(), 1.0, M);
  const int pw = winding(false);
  report_.set("morse.M", m0.M);
  report_.set("m_minus.A0", m0.index);
  report_.set("m_minus.A1", m1.index);
  report_.set("difference", m0.index - m1.index);
  const bool ok = m0.index - m1.index == pw;
  report_.set("morse_equals_pw", std::string(ok ? "VERIFIED" : "FAILED"));
  std::cout << "m-(A0) = " << m0.index << "\nm-(A1) = " << m1.index
            << "\nm-(A0) - m-(A1) = " << m0.index - m1.index << "\niota_PW = " << pw << "\n"
            << (ok ? "VERIFIED" : "FAILED") << "\n";
  return ok ? 0 : 3;
}

int Runner::cmd_hill() {
  const HillRatio hr = hill_ratio(vp(), ode());
  const EigenProduct ep = truncated_eigenproduct(vp(), cfg_.cutoff, cfg_.fd_size.value_or(0));
  const double disc = std::abs(ep.product - hr.ratio) / std::abs(hr.ratio);
  report_.set("rho0", hr.rho0);
  report_.set("rho1", hr.rho1);
  report_.set("ratio", hr.ratio);
  report_.set("cutoff", cfg_.cutoff);
  report_.set("product.M", ep.M);
  report_.set("product", ep.product);
  report_.set("tail", ep.tail);
  report_.set("discrepancy", disc);
  report_.set("tolerance", 1e-3);
  verdict("hill", disc < 1e-3);
  if (cfg_.dump_eigen) dump("eigenproduct.csv", [&](std::ostream& os) { write_eigenproduct_csv(os, ep); });
  std::cout << "rho(1)/rho(0) = " << fmt("%.12g", hr.ratio.real()) << " + " << fmt("%.3g", hr.ratio.imag())
            << "i\nproduct(K=" << cfg_.cutoff << ") = " << fmt("%.12g", ep.product.real())
            << "\ntail = " << fmt("%.3g", ep.tail) << "\ndiscrepancy = " << fmt("%.3g", disc) << "\n"
            << (disc < 1e-3 ? "PASS" : "FAIL") << "\n";
  return disc < 1e-3 ? 0 : 3;
}

std::vector<cdouble> default_z(double h) {
  return {{0.25, 0.5 * h}, {0.5, -0.25 * h}, {0.75, 0.75 * h}, {0.1, -0.6 * h}, {0.9, 0.1 * h}};
}

int Runner::cmd_fredholm() {
  std::vector<cdouble> zs;
  for (const auto& z : cfg_.z) zs.push_back(parse_z(z));
  if (zs.empty()) zs = default_z(height());
  const int M = cfg_.fd_size.value_or(2000);
  DegreeConfig d = degree();
  const FredholmCheck fc = fredholm_identity_check(vp(), zs, M, d);
  report_.set("M", M);
  report_.set("tolerance", 1e-3);
  bool ok = true;
  for (std::size_t i = 0; i < fc.z.size(); ++i) {
    const std::string k = "z." + std::to_string(i);
    report_.set(k, fc.z[i]);
    report_.set(k + ".fredholm", fc.fredholm[i]);
    report_.set(k + ".ratio", fc.ratio[i]);
    report_.set(k + ".rel_error", fc.rel_error[i]);
    ok = ok && fc.rel_error[i] <= 1e-3;
    std::cout << "z = " << fmt("%g", fc.z[i].real()) << (fc.z[i].imag() < 0 ? " - " : " + ")
              << fmt("%g", std::abs(fc.z[i].imag())) << "i  rel_error = " << fmt("%.3g", fc.rel_error[i]) << "\n";
  }
  report_.set("degree_f", fc.degree_f);
  report_.set("iota_PW", fc.iota_pw);
  ok = ok && fc.degree_f == fc.iota_pw;
  verdict("fredholm", ok);
  std::cout << "deg(f) = " << fc.degree_f << "\niota_PW = " << fc.iota_pw << "\n" << (ok ? "PASS" : "FAIL") << "\n";
  return ok ? 0 : 3;
}

int Runner::cmd_trace() {
  std::vector<cdouble> zs;
  for (const auto& z : cfg_.z) zs.push_back(parse_z(z));
  if (zs.empty()) zs.push_back({0.3, 0.4});
  report_.set("fd_step", cfg_.fd_step);
  report_.set("tolerance", 1e-6);
  bool ok = true;
  for (std::size_t i = 0; i < zs.size(); ++i) {
    const TraceCheck tc = trace_formula_check(vp(), zs[i], cfg_.fd_step, ode());
    const std::string k = "z." + std::to_string(i);
    report_.set(k, tc.z);
    report_.set(k + ".theta_t", tc.theta.theta_t);
    report_.set(k + ".theta_s", tc.theta.theta_s);
    report_.set(k + ".rel_error_t", tc.rel_error_t);
    report_.set(k + ".rel_error_s", tc.rel_error_s);
    const bool pass = tc.rel_error_t <= 1e-6 && tc.rel_error_s <= 1e-6;
    ok = ok && pass;
    std::cout << "z = " << fmt("%g", zs[i].real()) << (zs[i].imag() < 0 ? " - " : " + ")
              << fmt("%g", std::abs(zs[i].imag())) << "i  rel_error_t = " << fmt("%.3g", tc.rel_error_t)
              << "  rel_error_s = " << fmt("%.3g", tc.rel_error_s) << "  " << (pass ? "PASS" : "FAIL") << "\n";
  }
  if (cfg_.contour) {
    const ContourIntegral ci = trace_contour_integral(vp(), height(), ode());
    const int pw = winding(false);
    const double gap = std::abs(ci.value - cdouble(pw));
    report_.set("contour", ci.value);
    report_.set("contour.panels", ci.panels);
    report_.set("contour.gap", gap);
    ok = ok && gap <= 1e-6;
    std::cout << "contour integral = " << fmt("%.12g", ci.value.real()) << "\niota_PW = " << pw << "\n";
  }
  verdict("trace", ok);
  std::cout << (ok ? "PASS" : "FAIL") << "\n";
  return ok ? 0 : 3;
}

int Runner::cmd_maslov() {
  const RMatrix L = lagrangian_of_boundary(vp()->bc);
  const MaslovResult m = maslov_clm(L, monodromy_path(vp(), ode()), 0.0, 1.0, locate());
  report_.set("iota_CLM", m.index);
  report_.set("endpoint_crossing", m.endpoint_crossing);
  for (std::size_t i = 0; i < m.crossings.size(); ++i) {
    const auto& c = m.crossings[i];
    const std::string k = "crossing." + std::to_string(i);
    report_.set(k + ".t", c.t);
    report_.set(k + ".signature", c.signature());
    report_.set(k + ".transversal_gap", c.transversal_gap);
  }
  std::cout << "iota_CLM = " << m.index << "\n";
  if (m.endpoint_crossing) std::cout << "endpoint crossing present\n";
  if (vp()->bc.preset == BoundaryCondition::Preset::Periodic) {
    TrackingConfig tc;
    if (cfg_.fd_size) tc.M = *cfg_.fd_size;
    const FormulaCheck fc = spectral_flow_formula_check(vp(), ode(), tc);
    report_.set("minus_sf", -fc.iota_sp);
    report_.set("formula", std::string(fc.pass ? "VERIFIED" : "FAILED"));
    std::cout << "-sf = " << -fc.iota_sp << "\n" << (fc.pass ? "VERIFIED" : "FAILED") << "\n";
    return fc.pass ? 0 : 3;
  }
  return 0;
}

int Runner::cmd_stability() {
  if (cfg_.orientation.empty())
    throw Error(ErrorKind::InvalidArgument, "stability needs --orientation preserving|non-preserving");
  const Orientation o = parse_orientation(cfg_.orientation);
  const int n = cfg_.n.value_or(vp().N());
  if (vp()->bc.preset != BoundaryCondition::Preset::Periodic)
    std::cerr << "warning: the instability criterion assumes periodic boundary conditions\n";
  const int pw = winding(false);
  const Verdict v = instability_verdict(pw, n, o);
  const RMatrix M = monodromy(vp(), cdouble(1.0, 0.0), ode()).real();
  const StabilityAnalysis sa = analyze_stability(M);
  report_.set("n", n);
  report_.set("orientation", to_string(o));
  report_.set("verdict", to_string(v));
  report_.set("monodromy.stable", sa.stable);
  report_.set("monodromy.semisimple", sa.semisimple);
  report_.set("monodromy.modulus_defect", sa.modulus_defect);
  report_.set("monodromy.condition", sa.condition);
  report_.set("monodromy.component", to_string(sp_component(M)));
  const bool contradiction = v == Verdict::LinearlyUnstable && sa.stable;
  report_.set("consistent", !contradiction);
  std::cout << "iota_PW = " << pw << "\nverdict = " << to_string(v)
            << "\nmonodromy: " << (sa.stable ? "linearly stable" : "not linearly stable") << "\n";
  return contradiction ? 3 : 0;
}

int Runner::run() {
  MorseSturmProblem p = parse_problem_string(contents_);
  if (cfg_.delta_shift != 0.0) p = spectral_shift(p, cfg_.delta_shift);
  vp_ = validate_or_throw(p);
  for (const auto& w : vp_->warnings()) std::cerr << "warning: " << w << "\n";
  if (cfg_.jobs > 0) set_max_workers(cfg_.jobs);
  echo_config();
  reset_drift_monitor();

  static const std::map<std::string, int (Runner::*)()> table{
      {"validate", &Runner::cmd_validate},
      {"degree", &Runner::cmd_degree},
      {"sf", &Runner::cmd_sf},
      {"conjugate-points", &Runner::cmd_conjugate_points},
      {"morse", &Runner::cmd_morse},
      {"hill", &Runner::cmd_hill},
      {"fredholm", &Runner::cmd_fredholm},
      {"trace", &Runner::cmd_trace},
      {"maslov", &Runner::cmd_maslov},
      {"stability", &Runner::cmd_stability},
  };
  int code = 0;
  try {
    code = (this->*table.at(cfg_.command))();
  } catch (const Error& e) {
    report_.set("error", std::string(e.what()));
    report_.set("max_symplectic_drift", max_observed_drift());
    report_.write(cfg_.out);
    throw;
  }
  report_.set("max_symplectic_drift", max_observed_drift());
  report_.write(cfg_.out);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;
  CLI::App app{"Index computations for Morse-Sturm boundary value problems"};
  app.set_help_flag("-h,--help");
  app.add_option("command", cfg.command, "Command")
      ->required()
      ->check(CLI::IsMember({"degree", "sf", "conjugate-points", "morse", "hill", "fredholm", "trace",
                             "maslov", "stability", "validate"}));
  app.add_option("file", cfg.file, "Problem file")->required();
  app.add_option("--tol-ode", cfg.tol_ode, "Relative ODE tolerance")->check(CLI::PositiveNumber);
  app.add_option("--tol-zero", cfg.tol_zero, "Relative floor for |rho| on the boundary")
      ->check(CLI::PositiveNumber);
  app.add_option("--grid", cfg.grid, "Real-axis scan points")->check(CLI::Range(16, 1 << 20));
  app.add_option("--fd-size", cfg.fd_size, "Finite-difference grid size")->check(CLI::Range(3, 1 << 20));
  app.add_option("--cutoff", cfg.cutoff, "Eigenvalue cutoff K for the Hill product")
      ->check(CLI::Range(1, 1 << 20));
  app.add_option("--height", cfg.height, "Half-height of the rectangle")->check(CLI::PositiveNumber);
  app.add_option("--delta-shift", cfg.delta_shift, "Spectral shift: A_t - delta")
      ->check(CLI::PositiveNumber);
  app.add_option("--fd-step", cfg.fd_step, "Finite-difference step for the trace check")
      ->check(CLI::PositiveNumber);
  app.add_option("--jobs", cfg.jobs, "Maximum worker threads")->check(CLI::Range(1, 4096));
  app.add_flag("--dump-boundary", cfg.dump_boundary, "Write boundary.csv");
  app.add_flag("--dump-eigen", cfg.dump_eigen, "Write the eigenvalue CSV");
  app.add_flag("--contour", cfg.contour, "trace: also integrate around the rectangle");
  app.add_option("--out", cfg.out, "Output directory");
  app.add_option("--z", cfg.z, "Sample point t,s (repeatable)");
  app.add_option("--orientation", cfg.orientation, "preserving | non-preserving");
  app.add_option("--n", cfg.n, "Configuration-space dimension")->check(CLI::Range(1, 1 << 20));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    Runner runner(cfg, read_text_file(cfg.file));
    return runner.run();
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
