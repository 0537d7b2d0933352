#include "msflow/report.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "msflow/error.hpp"

namespace msflow {

std::string format_double(double v) {
  if (v == 0.0) return "0";  // drops the sign of -0
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::uint64_t fnv1a(std::string_view data, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void Report::set(const std::string& key, const std::string& value) {
  for (auto& [k, v] : entries_)
    if (k == key) {
      v = value;
      return;
    }
  entries_.emplace_back(key, value);
}

void Report::set(const std::string& key, double value) { set(key, format_double(value)); }
void Report::set(const std::string& key, int value) { set(key, std::to_string(value)); }
void Report::set(const std::string& key, long value) { set(key, std::to_string(value)); }
void Report::set(const std::string& key, bool value) { set(key, std::string(value ? "true" : "false")); }

void Report::set(const std::string& key, cdouble value) {
  set(key + ".re", value.real());
  set(key + ".im", value.imag());
}

const std::string* Report::find(const std::string& key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return &v;
  return nullptr;
}

std::string Report::kv() const {
  std::string out = "command=" + command_ + "\n";
  for (const auto& [k, v] : entries_) out += k + "=" + v + "\n";
  return out;
}

std::string Report::text() const {
  std::size_t width = 0;
  for (const auto& e : entries_) width = std::max(width, e.first.size());
  std::string out = "msflow " + command_ + "\n";
  for (const auto& [k, v] : entries_) out += "  " + k + std::string(width - k.size(), ' ') + "  " + v + "\n";
  return out;
}

void Report::write(const std::string& dir) const {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const auto put = [&](const std::string& name, const std::string& body) {
    const auto path = std::filesystem::path(dir) / name;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorKind::InvalidArgument, "cannot write '" + path.string() + "'");
    f << body;
  };
  put("report.kv", kv());
  put("report.txt", text());
}

}  // namespace msflow
