#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "mourrekit/common.hpp"

namespace mourrekit {

using Json = nlohmann::ordered_json;

// Measured quantity with the tolerance and mesh it was computed at.
Json measured(double value, double tol, const Json& mesh);

// CSV contract: comma separator, '.' decimal, header row, LF endings.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& columns);
  void row(const std::vector<double>& values);
  std::string path() const { return path_; }

 private:
  std::string path_;
  std::string buffer_;
  size_t columns_;
  friend class RunWriter;
  void flush();
};

// Collects report.json, CSV exports and the content-hash manifest for one
// run directory.
class RunWriter {
 public:
  explicit RunWriter(const std::string& out_dir);

  Json& report() { return report_; }

  void write_csv(const std::string& name,
                 const std::vector<std::string>& columns,
                 const std::vector<std::vector<double>>& rows);
  void write_text(const std::string& name, const std::string& content);

  // writes report.json and manifest.txt (hash of every emitted file)
  void finalize();

  const std::string& dir() const { return dir_; }

 private:
  std::string dir_;
  Json report_;
  std::vector<std::string> files_;
};

std::string sha256_file(const std::string& path);

}  // namespace mourrekit
