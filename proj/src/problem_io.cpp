#include "msflow/problem_io.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace msflow {

namespace {

using boost::property_tree::ptree;

[[noreturn]] void fail(const std::string& msg) { throw Error(ErrorKind::ParseError, msg); }

std::vector<double> numbers(const std::string& text, const std::string& where) {
  std::vector<double> out;
  std::string token;
  std::istringstream is(text);
  std::string chunk;
  while (is >> chunk) {
    std::stringstream parts(chunk);
    while (std::getline(parts, token, ',')) {
      if (token.empty()) continue;
      errno = 0;
      char* end = nullptr;
      const double v = std::strtod(token.c_str(), &end);
      if (end != token.c_str() + token.size() || errno == ERANGE)
        fail(where + ": '" + token + "' is not a number");
      out.push_back(v);
    }
  }
  if (out.empty()) fail(where + ": expected numbers");
  return out;
}

RMatrix matrix(const std::vector<double>& v, std::size_t offset, int n) {
  RMatrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = v[offset + static_cast<std::size_t>(i) * n + j];
  return m;
}

RMatrix one_matrix(const std::string& text, const std::string& where, int n) {
  const auto v = numbers(text, where);
  if (v.size() != static_cast<std::size_t>(n) * n)
    fail(where + ": expected " + std::to_string(n * n) + " entries, got " + std::to_string(v.size()));
  return matrix(v, 0, n);
}

std::vector<RMatrix> many_matrices(const std::string& text, const std::string& where, int n,
                                   std::size_t count) {
  const auto v = numbers(text, where);
  const std::size_t nn = static_cast<std::size_t>(n) * n;
  if (v.size() != count * nn)
    fail(where + ": expected " + std::to_string(count * nn) + " entries, got " +
         std::to_string(v.size()));
  std::vector<RMatrix> out;
  for (std::size_t k = 0; k < count; ++k) out.push_back(matrix(v, k * nn, n));
  return out;
}

void check_keys(const ptree& sec, const std::string& name, const std::set<std::string>& allowed) {
  for (const auto& [key, child] : sec) {
    if (!child.empty()) fail("[" + name + "]: nested entries are not supported");
    if (!allowed.count(key)) fail("[" + name + "]: unknown key '" + key + "'");
  }
}

// Indexed keys prefix0, prefix1, ... must be contiguous starting at `first`.
std::vector<std::string> indexed(const ptree& sec, const std::string& name, const std::string& prefix,
                                 int first) {
  std::vector<std::string> out;
  for (int k = first;; ++k) {
    const auto v = sec.get_optional<std::string>(prefix + std::to_string(k));
    if (!v) break;
    out.push_back(*v);
  }
  for (const auto& [key, child] : sec) {
    (void)child;
    if (key.rfind(prefix, 0) != 0 || key.size() == prefix.size()) continue;
    const std::string digits = key.substr(prefix.size());
    if (digits.find_first_not_of("0123456789") != std::string::npos) continue;
    const int k = std::stoi(digits);
    if (k >= first + static_cast<int>(out.size()))
      fail("[" + name + "]: coefficient '" + key + "' breaks the contiguous sequence");
  }
  return out;
}

std::set<std::string> field_keys(const ptree& sec, const std::string& kind) {
  std::set<std::string> keys{"kind"};
  for (const auto& [key, child] : sec) {
    (void)child;
    const bool poly = kind == "polynomial" && key.size() > 1 && key[0] == 'c';
    const bool four = kind == "fourier" && key.size() > 1 && (key[0] == 'a' || key[0] == 'b');
    if ((poly || four) && key.substr(1).find_first_not_of("0123456789") == std::string::npos)
      keys.insert(key);
  }
  if (kind == "sampled") keys.insert({"order", "x", "values"});
  return keys;
}

CoefficientField parse_field(const ptree& sec, const std::string& name, int n,
                             const std::set<std::string>& extra = {}) {
  const std::string kind = sec.get<std::string>("kind", "polynomial");
  std::set<std::string> allowed = field_keys(sec, kind);
  allowed.insert(extra.begin(), extra.end());
  check_keys(sec, name, allowed);
  if (kind == "polynomial") {
    std::vector<RMatrix> c;
    for (const auto& text : indexed(sec, name, "c", 0)) c.push_back(one_matrix(text, "[" + name + "]", n));
    if (c.empty()) fail("[" + name + "]: polynomial needs c0");
    return CoefficientField::polynomial(std::move(c));
  }
  if (kind == "fourier") {
    const auto a0 = sec.get_optional<std::string>("a0");
    if (!a0) fail("[" + name + "]: fourier needs a0");
    std::vector<RMatrix> a, b;
    for (const auto& text : indexed(sec, name, "a", 1)) a.push_back(one_matrix(text, "[" + name + "]", n));
    for (const auto& text : indexed(sec, name, "b", 1)) b.push_back(one_matrix(text, "[" + name + "]", n));
    return CoefficientField::fourier(one_matrix(*a0, "[" + name + "]", n), std::move(a), std::move(b));
  }
  if (kind == "sampled") {
    const auto xs = sec.get_optional<std::string>("x");
    const auto vs = sec.get_optional<std::string>("values");
    if (!xs || !vs) fail("[" + name + "]: sampled needs x and values");
    std::vector<double> x = numbers(*xs, "[" + name + "] x");
    auto values = many_matrices(*vs, "[" + name + "] values", n, x.size());
    const std::string order = sec.get<std::string>("order", "1");
    if (order != "1" && order != "3") fail("[" + name + "]: order must be 1 or 3");
    try {
      return CoefficientField::sampled(std::move(x), std::move(values), order == "3" ? 3 : 1);
    } catch (const Error& e) {
      fail("[" + name + "]: " + e.what());
    }
  }
  fail("[" + name + "]: unknown kind '" + kind + "'");
}

int parse_int(const std::string& text, const std::string& where) {
  const auto v = numbers(text, where);
  if (v.size() != 1 || v[0] != static_cast<int>(v[0])) fail(where + ": expected an integer");
  return static_cast<int>(v[0]);
}

const std::set<std::string> kSections{"problem", "P", "Q", "G", "perturbation", "boundary"};

// Indented lines continue the value on the line above. They are folded into
// it and replaced by empty lines so the parser keeps its line numbers.
std::string fold_continuations(std::istream& in) {
  std::vector<std::string> lines;
  std::string line;
  std::size_t target = std::string::npos;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    const bool indented = first != 0 && first != std::string::npos;
    if (indented && line[first] != ';' && line[first] != '#' && target != std::string::npos) {
      lines[target] += " " + line.substr(first);
      line.clear();
    } else if (first == std::string::npos || line[first] == ';' || line[first] == '#') {
      // blank and comment lines do not end a value
    } else if (line[first] == '[') {
      // empty sections never reach the property tree, so names are checked here
      const auto close = line.find(']', first);
      const std::string name = close == std::string::npos ? "" : line.substr(first + 1, close - first - 1);
      if (!kSections.count(name))
        fail("line " + std::to_string(lines.size() + 1) + ": unknown section [" + name + "]");
      target = std::string::npos;
    } else {
      target = lines.size();
    }
    lines.push_back(line);
  }
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

}  // namespace

MorseSturmProblem parse_problem(std::istream& raw) {
  ptree pt;
  std::istringstream in(fold_continuations(raw));
  try {
    boost::property_tree::ini_parser::read_ini(in, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    fail(std::string("line ") + std::to_string(e.line()) + ": " + e.message());
  }
  for (const auto& [key, child] : pt) {
    if (child.empty() && !kSections.count(key)) fail("entry '" + key + "' outside a section");
    if (!kSections.count(key)) fail("unknown section [" + key + "]");
  }

  MorseSturmProblem p;
  if (const auto sec = pt.get_child_optional("problem")) {
    check_keys(*sec, "problem", {"N", "h"});
    if (const auto v = sec->get_optional<std::string>("N")) p.N = parse_int(*v, "[problem] N");
    if (const auto v = sec->get_optional<std::string>("h")) {
      const auto h = numbers(*v, "[problem] h");
      if (h.size() != 1) fail("[problem] h: expected one number");
      p.half_height = h[0];
    }
  }
  const int n = p.N;
  if (n < 1 || n > 64) fail("[problem] N must be between 1 and 64");

  p.P = CoefficientField::constant(RMatrix::Identity(n, n));
  p.Q = CoefficientField::zero(n);
  p.G = CoefficientField::zero(n);
  p.family = PerturbationFamily::linear(CoefficientField::zero(n));
  p.bc = BoundaryCondition::dirichlet(n);

  if (const auto sec = pt.get_child_optional("P")) p.P = parse_field(*sec, "P", n);
  if (const auto sec = pt.get_child_optional("Q")) p.Q = parse_field(*sec, "Q", n);
  if (const auto sec = pt.get_child_optional("G")) p.G = parse_field(*sec, "G", n);

  if (const auto sec = pt.get_child_optional("perturbation")) {
    const std::string mode = sec->get<std::string>("mode", "linear");
    if (mode == "linear") {
      p.family = PerturbationFamily::linear(parse_field(*sec, "perturbation", n, {"mode"}));
    } else if (mode == "grid") {
      check_keys(*sec, "perturbation", {"mode", "t", "x", "values"});
      const auto ts = sec->get_optional<std::string>("t");
      const auto xs = sec->get_optional<std::string>("x");
      const auto vs = sec->get_optional<std::string>("values");
      if (!ts || !xs || !vs) fail("[perturbation] grid mode needs t, x and values");
      PerturbationFamily::GridData g;
      g.t = numbers(*ts, "[perturbation] t");
      g.x = numbers(*xs, "[perturbation] x");
      g.values = many_matrices(*vs, "[perturbation] values", n, g.t.size() * g.x.size());
      try {
        p.family = PerturbationFamily::grid(std::move(g));
      } catch (const Error& e) {
        fail(std::string("[perturbation]: ") + e.what());
      }
    } else {
      fail("[perturbation]: unknown mode '" + mode + "'");
    }
  }

  if (const auto sec = pt.get_child_optional("boundary")) {
    check_keys(*sec, "boundary", {"preset", "R0", "R1"});
    const auto preset = sec->get_optional<std::string>("preset");
    const bool explicit_r = sec->count("R0") || sec->count("R1");
    if (preset && *preset != "general") {
      if (explicit_r) fail("[boundary]: give either a preset or R0/R1, not both");
      if (*preset == "dirichlet") p.bc = BoundaryCondition::dirichlet(n);
      else if (*preset == "neumann") p.bc = BoundaryCondition::neumann(n);
      else if (*preset == "periodic") p.bc = BoundaryCondition::periodic(n);
      else fail("[boundary]: unknown preset '" + *preset + "'");
    } else {
      if (!sec->count("R0") || !sec->count("R1")) fail("[boundary]: R0 and R1 are both required");
      p.bc = BoundaryCondition::general(one_matrix(sec->get<std::string>("R0"), "[boundary] R0", 2 * n),
                                        one_matrix(sec->get<std::string>("R1"), "[boundary] R1", 2 * n));
    }
  }
  return p;
}

MorseSturmProblem parse_problem_string(const std::string& text) {
  std::istringstream is(text);
  return parse_problem(is);
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::ParseError, "cannot open '" + path + "'");
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

MorseSturmProblem load_problem(const std::string& path) {
  return parse_problem_string(read_text_file(path));
}

}  // namespace msflow
