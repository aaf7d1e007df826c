#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mourrekit/common.hpp"

namespace mourrekit {

// Flat key-value scenario file: one `section.key = value` per line,
// '#' comments, values are scalars or comma-separated lists.
class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text,
                             const std::string& origin = "<string>");

  bool has(const std::string& key) const;

  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long get_long(const std::string& key, long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_list(const std::string& key,
                               const std::vector<double>& fallback) const;

  std::string require_string(const std::string& key) const;
  double require_double(const std::string& key) const;

  const std::map<std::string, std::string>& entries() const {
    return values_;
  }

 private:
  std::string origin_;
  std::map<std::string, std::string> values_;
  std::map<std::string, int> lines_;

  [[noreturn]] void fail(const std::string& key, const std::string& what) const;
  double parse_double(const std::string& key, const std::string& raw) const;
};

}  // namespace mourrekit
