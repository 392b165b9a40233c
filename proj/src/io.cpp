#include "rydex/io.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace rydex {

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(std::vector<std::string> header)
    : n_cols_(header.size()) {
  for (size_t i = 0; i < header.size(); ++i) {
    if (i) header_line_ += ',';
    header_line_ += header[i];
  }
  header_line_ += '\n';
}

void CsvWriter::comment(const std::string& line) {
  if (header_written_)
    throw std::logic_error("CsvWriter: comments must precede rows");
  comments_.push_back("# " + line + "\n");
}

void CsvWriter::flush_header() {
  if (header_written_) return;
  for (const auto& c : comments_) buf_ += c;
  buf_ += header_line_;
  header_written_ = true;
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != n_cols_)
    throw std::logic_error("CsvWriter: column count mismatch");
  flush_header();
  for (size_t i = 0; i < values.size(); ++i) {
    if (i) buf_ += ',';
    buf_ += format_double(values[i]);
  }
  buf_ += '\n';
}

void CsvWriter::row_mixed(const std::vector<std::string>& values) {
  if (values.size() != n_cols_)
    throw std::logic_error("CsvWriter: column count mismatch");
  flush_header();
  for (size_t i = 0; i < values.size(); ++i) {
    if (i) buf_ += ',';
    buf_ += values[i];
  }
  buf_ += '\n';
}

void CsvWriter::write(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  std::string full = buf_;
  if (!header_written_) {
    full.clear();
    for (const auto& c : comments_) full += c;
    full += header_line_;
  }
  out << full;
}

void write_matrix_csv(
    const std::string& path,
    const std::vector<std::vector<std::complex<double>>>& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const auto& row : m) {
    for (size_t j = 0; j < row.size(); ++j) {
      if (j) out << ',';
      out << format_double(row[j].real()) << ',' << format_double(row[j].imag());
    }
    out << '\n';
  }
}

std::string RunManifest::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
  };
  mix(command);
  mix(snapshot_json);
  mix(std::to_string(seed));
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

std::string RunManifest::to_json() const {
  nlohmann::json j;
  j["command"] = command;
  j["config_path"] = config_path;
  j["snapshot"] = nlohmann::json::parse(snapshot_json);
  j["seed"] = seed;
  j["outputs"] = outputs;
  j["tool_version"] = tool_version;
  j["duration_s"] = duration_s;
  j["manifest_hash"] = hash();
  return j.dump(2);
}

void RunManifest::write(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << to_json() << "\n";
}

}  // namespace rydex
