#include "mourrekit/report.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

namespace mourrekit {

Json measured(double value, double tol, const Json& mesh) {
  Json j;
  j["value"] = value;
  j["tol"] = tol;
  j["mesh"] = mesh;
  return j;
}

namespace {
std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
}  // namespace

CsvWriter::CsvWriter(const std::string& path,
                     const std::vector<std::string>& columns)
    : path_(path), columns_(columns.size()) {
  for (size_t i = 0; i < columns.size(); ++i) {
    if (i) buffer_ += ",";
    buffer_ += columns[i];
  }
  buffer_ += "\n";
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != columns_)
    throw Error("csv row width mismatch in " + path_);
  for (size_t i = 0; i < values.size(); ++i) {
    if (i) buffer_ += ",";
    buffer_ += format_number(values[i]);
  }
  buffer_ += "\n";
}

void CsvWriter::flush() {
  std::ofstream os(path_, std::ios::binary);
  if (!os) throw Error("cannot open " + path_);
  os << buffer_;
}

RunWriter::RunWriter(const std::string& out_dir) : dir_(out_dir) {
  std::filesystem::create_directories(dir_);
}

void RunWriter::write_csv(const std::string& name,
                          const std::vector<std::string>& columns,
                          const std::vector<std::vector<double>>& rows) {
  CsvWriter w(dir_ + "/" + name, columns);
  for (const auto& r : rows) w.row(r);
  w.flush();
  files_.push_back(name);
}

void RunWriter::write_text(const std::string& name,
                           const std::string& content) {
  std::ofstream os(dir_ + "/" + name, std::ios::binary);
  if (!os) throw Error("cannot open " + dir_ + "/" + name);
  os << content;
  os.close();
  files_.push_back(name);
}

void RunWriter::finalize() {
  {
    std::ofstream os(dir_ + "/report.json", std::ios::binary);
    if (!os) throw Error("cannot open " + dir_ + "/report.json");
    os << report_.dump(2) << "\n";
  }
  files_.push_back("report.json");
  std::string manifest;
  for (const std::string& f : files_)
    manifest += sha256_file(dir_ + "/" + f) + "  " + f + "\n";
  std::ofstream os(dir_ + "/manifest.txt", std::ios::binary);
  os << manifest;
}

std::string sha256_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot hash " + path);
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[65536];
  while (is.good()) {
    is.read(buf, sizeof(buf));
    EVP_DigestUpdate(ctx, buf, static_cast<size_t>(is.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

}  // namespace mourrekit
