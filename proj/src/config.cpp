#include "mourrekit/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace mourrekit {

namespace {
std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}
}  // namespace

Config Config::parse_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_string(ss.str(), path);
}

Config Config::parse_string(const std::string& text,
                            const std::string& origin) {
  Config c;
  c.origin_ = origin;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": expected 'key = value', got '" + line + "'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": empty key");
    if (c.values_.count(key))
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": duplicate key '" + key + "' (first at line " +
                        std::to_string(c.lines_[key]) + ")");
    c.values_[key] = value;
    c.lines_[key] = lineno;
  }
  return c;
}

bool Config::has(const std::string& key) const { return values_.count(key); }

void Config::fail(const std::string& key, const std::string& what) const {
  auto it = lines_.find(key);
  std::string loc = origin_;
  if (it != lines_.end()) loc += ":" + std::to_string(it->second);
  throw ConfigError(loc + ": key '" + key + "': " + what);
}

double Config::parse_double(const std::string& key,
                            const std::string& raw) const {
  try {
    size_t pos = 0;
    double v = std::stod(raw, &pos);
    if (pos != raw.size()) fail(key, "trailing characters in '" + raw + "'");
    return v;
  } catch (const ConfigError&) {
    throw;
  } catch (...) {
    fail(key, "not a number: '" + raw + "'");
  }
}

std::string Config::get_string(const std::string& key,
                               const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  return parse_double(key, it->second);
}

long Config::get_long(const std::string& key, long fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  double v = parse_double(key, it->second);
  long l = static_cast<long>(v);
  if (static_cast<double>(l) != v) fail(key, "expected an integer");
  return l;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::string v = it->second;
  std::transform(v.begin(), v.end(), v.begin(), ::tolower);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  fail(key, "expected a boolean, got '" + it->second + "'");
}

std::vector<double> Config::get_list(
    const std::string& key, const std::vector<double>& fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<double> out;
  std::string raw = it->second;
  size_t start = 0;
  while (start <= raw.size()) {
    size_t comma = raw.find(',', start);
    std::string piece = comma == std::string::npos
                            ? raw.substr(start)
                            : raw.substr(start, comma - start);
    piece.erase(std::remove_if(piece.begin(), piece.end(), ::isspace),
                piece.end());
    if (!piece.empty()) out.push_back(parse_double(key, piece));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (out.empty()) fail(key, "expected a list of numbers");
  return out;
}

std::string Config::require_string(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) fail(key, "missing required key");
  return it->second;
}

double Config::require_double(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) fail(key, "missing required key");
  return parse_double(key, it->second);
}

}  // namespace mourrekit
