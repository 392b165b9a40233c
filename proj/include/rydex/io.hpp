#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace rydex {

/// Shortest representation that round-trips exactly through parsing.
std::string format_double(double v);

/// CSV table with unit-bearing headers and optional leading comment lines.
/// Numbers are written in shortest round-trip form so identical inputs give
/// byte-identical files.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  void comment(const std::string& line);
  void row(const std::vector<double>& values);
  void row_mixed(const std::vector<std::string>& values);
  const std::string& str() const { return buf_; }
  void write(const std::string& path) const;

 private:
  std::string buf_;
  size_t n_cols_;
  bool header_written_ = false;
  std::string header_line_;
  std::vector<std::string> comments_;
  void flush_header();
};

/// Writes a complex matrix as CSV, row-major, one "re,im" pair per cell.
void write_matrix_csv(const std::string& path,
                      const std::vector<std::vector<std::complex<double>>>& m);

/// Reproducibility record for one CLI run. The hash covers the command and
/// the resolved parameter snapshot; every output file carries it.
struct RunManifest {
  std::string command;
  std::string config_path;
  std::string snapshot_json;  // resolved parameter snapshot
  std::uint64_t seed = 0;
  std::vector<std::string> outputs;
  std::string tool_version;
  double duration_s = 0.0;

  std::string hash() const;        // FNV-1a over command + snapshot + seed
  std::string to_json() const;
  void write(const std::string& path) const;
};

}  // namespace rydex
