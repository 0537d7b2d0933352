#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "msflow/linalg.hpp"

namespace msflow {

/// 17 significant digits, locale independent.
std::string format_double(double v);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

/// Ordered key/value report. Keys keep insertion order; setting a key again
/// overwrites in place.
class Report {
 public:
  explicit Report(std::string command) : command_(std::move(command)) {}

  void set(const std::string& key, const std::string& value);
  void set(const std::string& key, const char* value) { set(key, std::string(value)); }
  void set(const std::string& key, double value);
  void set(const std::string& key, int value);
  void set(const std::string& key, long value);
  void set(const std::string& key, std::size_t value) { set(key, static_cast<long>(value)); }
  void set(const std::string& key, bool value);
  /// key.re and key.im
  void set(const std::string& key, cdouble value);

  const std::string* find(const std::string& key) const;
  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
  const std::string& command() const { return command_; }

  /// key=value lines.
  std::string kv() const;
  /// Aligned text for people.
  std::string text() const;
  /// Writes report.kv and report.txt into dir (created if missing).
  void write(const std::string& dir) const;

 private:
  std::string command_;
  std::vector<std::pair<std::string, std::string>> entries_;
};

}  // namespace msflow
