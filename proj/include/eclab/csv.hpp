#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "eclab/errors.hpp"

namespace eclab {

/// Fixed numeric CSV format: decimal, 12 significant digits.
inline std::string format_number(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot open output file: " + path);
  }

  void write_row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << ',';
      out_ << fields[i];
    }
    out_ << '\n';
  }

  void close() {
    out_.close();
    if (!out_) throw std::runtime_error("failed writing output file");
  }

 private:
  std::ofstream out_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  int column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    return -1;
  }
};

struct RawCsv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    return -1;
  }
};

/// Reads a CSV with a header row, keeping every field as text.
inline RawCsv read_csv_raw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open input file: " + path);
  RawCsv table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (lineno == 1)
      table.header = fields;
    else
      table.rows.push_back(std::move(fields));
  }
  return table;
}

/// Reads a numeric CSV with a header row. Every data cell must parse as a
/// double; blank trailing fields are dropped.
inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open input file: " + path);
  CsvTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (lineno == 1) {
      table.header = fields;
      continue;
    }
    std::vector<double> row;
    for (const std::string& f : fields) {
      if (f.empty()) continue;
      try {
        std::size_t used = 0;
        row.push_back(std::stod(f, &used));
        if (used != f.size()) throw std::invalid_argument(f);
      } catch (const std::exception&) {
        throw ConfigError(path + ":" + std::to_string(lineno) +
                          ": expected a number, got '" + f + "'");
      }
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

/// Reads 16-bit little-endian signed PCM, mono, scaling to [-1, 1).
inline std::vector<double> read_pcm16(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open PCM file: " + path);
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  if (bytes.size() % 2 != 0)
    throw ConfigError("PCM file has an odd byte count: " + path);
  std::vector<double> samples(bytes.size() / 2);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const std::uint16_t lo = static_cast<std::uint8_t>(bytes[2 * i]);
    const std::uint16_t hi = static_cast<std::uint8_t>(bytes[2 * i + 1]);
    const std::int16_t value = static_cast<std::int16_t>(lo | (hi << 8));
    samples[i] = static_cast<double>(value) / 32768.0;
  }
  return samples;
}

}  // namespace eclab
